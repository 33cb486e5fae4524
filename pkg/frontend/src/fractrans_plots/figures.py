"""The four figure kinds.  Each renderer takes loaded run data and writes a
single image; everything plotted comes straight from the run artifacts."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import MissingColumnError, NoDataError, RunData

KINDS = ("norms", "residuals", "blowup", "relaxation")


def _registry_constants(run: RunData) -> dict:
    path = os.path.join(run.run_dir, "registry.json")
    if os.path.isfile(path):
        with open(path) as fh:
            return json.load(fh).get("constants", {})
    return {}


def render_norms(run: RunData, out_path: str):
    beta = run.first_beta()
    t = run.column("t")
    l2w = run.column(f"l2w_{beta}")
    hhw = run.column(f"hhalfw_{beta}")
    sup = run.column("sup_norm")
    energy = l2w**2 + hhw**2
    rate = _registry_constants(run).get("eqsob3_c9", 0.0)
    envelope = energy[0] * np.exp(rate * t)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(t, l2w, label=rf"$\|\theta\|_{{L^2(w_{{{beta}}})}}$")
    ax1.plot(t, hhw, label=rf"$\|\Lambda^{{1/2}}\theta\|_{{L^2(w_{{{beta}}})}}$")
    ax1.plot(t, sup, label=r"$\|\theta\|_\infty$", linestyle="--")
    ax1.set_xlabel("t")
    ax1.set_title("norm decay")
    ax1.legend()
    ax2.plot(t, energy, label="weighted energy")
    ax2.plot(t, envelope, label=f"envelope $V_0 e^{{{rate:g}\\,t}}$",
             linestyle=":")
    ax2.set_xlabel("t")
    ax2.set_yscale("log")
    ax2.set_title("energy vs growth envelope")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_residuals(run: RunData, out_path: str):
    if run.columns is None:
        raise MissingColumnError("residual_eql2")
    t = run.column("t")
    fig, ax = plt.subplots(figsize=(8, 4.5))
    plotted = 0
    for name in run.columns:
        if not name.startswith("residual_"):
            continue
        vals = run.column(name)
        mask = np.isfinite(vals)
        if not mask.any():
            continue
        ax.plot(t[mask], vals[mask], label=name.removeprefix("residual_"))
        plotted += 1
    if plotted == 0:
        raise NoDataError("no finite residual values to plot")
    ax.axhline(0.0, color="black", linewidth=0.6)
    ax.set_xlabel("t")
    ax.set_yscale("symlog", linthresh=1e-10)
    ax.set_title("scaled inequality residuals (satisfied $\\leq$ 0)")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_blowup(run: RunData, out_path: str):
    blow = run.summary.get("blowup")
    if not blow or not blow.get("history"):
        raise NoDataError(
            "run summary carries no gradient history (not a simulate run?)")
    hist = np.asarray(blow["history"], dtype=float)
    t, grad = hist[:, 0], hist[:, 1]
    threshold = 50.0 * blow["grad_sup_initial"]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(t, grad, label=r"$\|\partial_x\theta\|_\infty$")
    ax.axhline(threshold, color="crimson", linestyle="--",
               label=r"$50\times$ initial")
    t_detect = blow.get("t_detect")
    if blow.get("detected") and t_detect == t_detect:  # not NaN
        ax.axvline(t_detect, color="gray", linestyle=":",
                   label=f"detected at t={t_detect:.3g}")
    ax.set_xlabel("t")
    ax.set_yscale("log")
    ax.set_title(f"gradient-sup growth "
                 f"({'detected' if blow.get('detected') else 'no blow-up'})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_relaxation(run: RunData, out_path: str):
    data = run.summary.get("data", {})
    tables = {k.removesuffix("_table"): v for k, v in data.items()
              if k.endswith("_table") and v}
    if not tables:
        raise NoDataError("run summary carries no relaxation tables")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for kind, table in sorted(tables.items()):
        pairs = [pair for pair, _ in table]
        dists = [dist for _, dist in table]
        labels = [f"{hi:g}$\\to${lo:g}" for hi, lo in pairs]
        ax.plot(range(len(dists)), dists, marker="o",
                label=f"{kind} ladder")
        for i, lab in enumerate(labels):
            ax.annotate(lab, (i, dists[i]), textcoords="offset points",
                        xytext=(4, 4), fontsize=7)
    ax.set_yscale("log")
    ax.set_xlabel("consecutive ladder pair")
    ax.set_ylabel(r"$L^2$ space-time distance")
    ax.set_title("relaxation Cauchy distances")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


RENDERERS = {
    "norms": render_norms,
    "residuals": render_residuals,
    "blowup": render_blowup,
    "relaxation": render_relaxation,
}
