"""Acceptance battery: every contracted property at desk scale (L = 50,
N = 4096 unless a criterion states otherwise).  Each test prints a single
pass/fail line for the suite report."""

import numpy as np
import pytest

from fractrans.commutators import (commutator_full, commutator_half,
                                   lambda_of_weight, smooth_cutoff,
                                   truncation_commutator_scaling)
from fractrans.diagnostics import magic_identity_check
from fractrans.grid import Field, GridSpec
from fractrans.operators import derivative, hilbert, lambda_alpha
from fractrans.solver import (DiagnosticsRequest, DtPolicy, InitialData,
                              SolverConfig, TrajectoryState,
                              make_initial_field, relaxation_study, run,
                              step)
from fractrans.weights import (WeightSpec, gn_check, hedberg_check,
                               weight_value, weighted_lp_norm)
from conftest import acceptance_line, band_limited_fields


def _refine(f: Field, n_fine: int) -> Field:
    """Same physical field on a finer grid, by spectral zero-padding."""
    spec = f.spectrum
    n = spec.shape[0]
    out = np.zeros(n_fine, dtype=complex)
    out[: n // 2] = spec[: n // 2]
    out[-(n // 2):] = spec[-(n // 2):]
    fine = GridSpec(f.grid.half_length, n_fine)
    return Field.from_spectrum(fine, out * (n_fine / n))


def test_operator_identities(grid_desk):
    worst = {"dxh": 0.0, "hlam": 0.0, "isometry": 0.0, "squared": 0.0}
    for f in band_limited_fields(grid_desk, seed=101, count=50):
        hf = hilbert(f)
        lam = lambda_alpha(f, 1.0)
        dx = derivative(f)
        worst["dxh"] = max(worst["dxh"],
                           (derivative(hf) + lam).sup_norm() / lam.sup_norm())
        worst["hlam"] = max(worst["hlam"],
                            (hilbert(lam) - dx).sup_norm() / dx.sup_norm())
        worst["isometry"] = max(worst["isometry"],
                                abs(hf.l2_norm() - f.l2_norm()) / f.l2_norm())
        worst["squared"] = max(worst["squared"],
                               (hilbert(hf) + f).sup_norm() / f.sup_norm())
    ok = all(v <= 1e-10 for v in worst.values())
    acceptance_line("operator-identities", ok,
                    f"max scaled errors {max(worst.values()):.2e}")
    assert ok, worst


def test_magic_identity_suite(grid_desk):
    worst = max(magic_identity_check(f) / f.sup_norm() ** 2
                for f in band_limited_fields(grid_desk, seed=103, count=50))
    ok = worst <= 1e-8
    acceptance_line("magic-identity", ok, f"max scaled sup-error {worst:.2e}")
    assert ok


def test_weight_bound_certificate(grid_desk):
    ok = True
    details = []
    xs = np.linspace(0.0, grid_desk.half_length / 2, 7)
    for beta in (0.25, 0.5, 0.75):
        w = WeightSpec(beta, grid_desk)
        vals = np.array([lambda_of_weight(w, x) for x in xs])
        neg = np.array([lambda_of_weight(w, -x) for x in xs[1:]])
        fine = np.array([lambda_of_weight(w, x, epsabs=1e-12) for x in xs])
        ratio = float(np.max(np.abs(vals) / weight_value(xs, beta)))
        ok &= bool(np.isfinite(ratio))
        ok &= float(np.max(np.abs(vals[1:] - neg))) <= 1e-8
        drift = float(np.max(np.abs(fine - vals)
                             / np.maximum(np.abs(vals), 1e-12)))
        ok &= drift <= 0.02
        details.append(f"beta={beta}: sup ratio {ratio:.3f}")
    acceptance_line("weight-bound-certificate", ok, "; ".join(details))
    assert ok


def test_commutator_norm_certificate(grid_desk):
    fine_n = 2 * grid_desk.n_points
    w = WeightSpec(0.5, grid_desk)
    w2 = WeightSpec(0.5, GridSpec(grid_desk.half_length, fine_n))
    ok = True
    details = []
    for name, op in (("half", commutator_half), ("full", commutator_full)):
        norms, norms2 = [], []
        for f in band_limited_fields(grid_desk, seed=107, count=50):
            norms.append(weighted_lp_norm(op(f, w), 2.0, w)
                         / weighted_lp_norm(f, 2.0, w))
            f2 = _refine(f, fine_n)
            norms2.append(weighted_lp_norm(op(f2, w2), 2.0, w2)
                          / weighted_lp_norm(f2, 2.0, w2))
        emp, emp2 = max(norms), max(norms2)
        drift = abs(emp2 - emp) / emp
        ok &= np.isfinite(emp) and drift < 0.20
        details.append(f"{name}: norm {emp:.3f}, drift {drift:.1%}")
    acceptance_line("commutator-norm-certificate", ok, "; ".join(details))
    assert ok


def test_truncation_commutator_scaling():
    grid = GridSpec(200.0, 16384)
    x = grid.nodes
    theta0 = Field.from_samples(
        grid, (1.0 + x**2) ** -0.25 * smooth_cutoff(x / 80.0))
    slope = truncation_commutator_scaling(theta0, WeightSpec(0.5, grid),
                                          [4.0, 8.0, 16.0, 32.0])
    ok = slope <= -0.35
    acceptance_line("truncation-scaling", ok, f"log-log slope {slope:.3f}")
    assert ok


def test_maximum_principle_and_positivity(grid_desk):
    configs = []
    for alpha in (0.6, 1.0, 1.5):
        for eps in (0.0, 1e-3):
            configs.append(SolverConfig(
                alpha=alpha, nu=1.0, epsilon=eps, t_end=5.0,
                dt_policy=DtPolicy("adaptive", dt_max=0.02),
                initial_data=InitialData("bump", 0.05, 5.0)))
    configs.append(SolverConfig(
        alpha=1.0, t_end=5.0, dt_policy=DtPolicy("adaptive", dt_max=0.02),
        initial_data=InitialData("bump", 0.2, 5.0)))
    configs.append(SolverConfig(
        alpha=1.0, t_end=5.0, dt_policy=DtPolicy("adaptive", dt_max=0.02),
        initial_data=InitialData("ccf", 0.1, 3.0)))
    configs.append(SolverConfig(
        alpha=1.0, t_end=5.0, dt_policy=DtPolicy("adaptive", dt_max=0.02),
        initial_data=InitialData("mode", 0.3, mode=2)))
    configs.append(SolverConfig(
        alpha=1.0, t_end=5.0, dt_policy=DtPolicy("adaptive", dt_max=0.02),
        initial_data=InitialData("weight_profile", 0.05, exponent=0.5)))
    assert len(configs) == 10
    tol = 1e-6
    ok = True
    worst = 0.0
    for cfg in configs:
        recs = run(cfg, grid_desk,
                   DiagnosticsRequest(cadence=10)).records[0.5]
        sups = np.array([r.sup_norm for r in recs])
        mins = np.array([r.min_val for r in recs])
        up = float(np.max(np.diff(sups), initial=0.0))
        down = float(np.max(-np.diff(mins), initial=0.0))
        worst = max(worst, up, down)
        ok &= up <= tol and down <= tol
        if mins[0] >= -1e-12:
            ok &= bool(np.all(mins >= -tol))
    acceptance_line("maximum-principle", ok,
                    f"10 configs, worst monotonicity slip {worst:.2e}")
    assert ok


def test_critical_global_bounds(certification_run):
    _, result = certification_run
    recs = result.records[0.5]
    times = np.array([r.t for r in recs])
    l2w = np.array([r.l2w for r in recs])
    hhw = np.array([r.h_half_w for r in recs])
    d1 = np.array([r.dissip_1 for r in recs])
    ok = not result.report.detected
    details = []
    for name, series in (("l2w", l2w), ("hhalfw", hhw)):
        sup10 = float(np.max(series[times <= 10.0]))
        sup20 = float(np.max(series))
        change = (sup20 - sup10) / sup10
        ok &= change < 0.05
        details.append(f"sup {name} T10->T20 change {change:.2%}")
    budget = np.concatenate([[0.0], np.cumsum(np.diff(times)
                                              * 0.5 * (d1[1:] + d1[:-1]))])
    ok &= bool(np.all(np.diff(budget) >= -1e-15))
    tail = (budget[-1] - budget[np.searchsorted(times, 10.0)]) \
        / max(budget[-1], 1e-300)
    ok &= tail < 0.05
    details.append(f"dissipation tail fraction {tail:.2%}")
    acceptance_line("critical-global-bounds", ok, "; ".join(details))
    assert ok


def test_unweighted_decay_and_budget(certification_run):
    cfg, result = certification_run
    recs = result.records[0.5]
    times = np.array([r.t for r in recs])
    hhalf = np.array([r.h_half for r in recs])
    d1u = np.array([r.dissip_1_u for r in recs])
    slip = float(np.max(np.diff(hhalf), initial=0.0))
    sup0 = recs[0].sup_norm
    bound = hhalf[0] ** 2 / (2.0 * (1.0 - sup0))
    partial = float(np.sum(np.diff(times) * 0.5 * (d1u[1:] + d1u[:-1])))
    ok = slip <= 1e-6 and partial <= bound
    acceptance_line(
        "unweighted-decay", ok,
        f"monotonicity slip {slip:.2e}; budget {partial:.3e} <= {bound:.3e}")
    assert ok


def test_supercritical_blowup_indicator(blowup_reports):
    ok = True
    details = []
    for n, rep in blowup_reports.items():
        ratio = rep.grad_sup_max / max(rep.grad_sup_initial, 1e-300)
        ok &= rep.detected and ratio > 50.0 and rep.dt_min < 1e-7
        details.append(f"N={n}: ratio {ratio:.1f}, dt_min {rep.dt_min:.1e}")
    acceptance_line("blowup-indicator", ok, "; ".join(details))
    assert ok


def test_relaxation_cauchy(grid_desk):
    base = SolverConfig(alpha=1.0, nu=1.0, t_end=5.0,
                        dt_policy=DtPolicy("fixed", dt=0.02),
                        initial_data=InitialData("bump", 0.05, 5.0))
    ok = True
    details = []
    for kind, ladder in (("epsilon", (1e-1, 1e-2, 1e-3, 0.0)),
                         ("eta", (0.5, 0.25, 0.125))):
        table = relaxation_study(base, grid_desk, ladder, kind)
        dists = [d for _, d in table]
        ok &= all(b < a for a, b in zip(dists, dists[1:]))
        details.append(f"{kind}: " + " > ".join(f"{d:.2e}" for d in dists))
    acceptance_line("relaxation-cauchy", ok, "; ".join(details))
    assert ok


def test_cc_pointwise_along_trajectory(certification_run):
    _, result = certification_run
    slacks = np.array([r.residuals["cc_pointwise"]
                       for r in result.records[0.5]])
    ok = bool(np.all(np.isfinite(slacks)) and np.all(slacks >= -1e-6))
    acceptance_line("cc-pointwise", ok,
                    f"min scaled slack {float(np.min(slacks)):.2e}")
    assert ok


def test_hedberg_gn_suites(grid_desk):
    w = WeightSpec(0.5, grid_desk)
    fine_n = 2 * grid_desk.n_points
    w2 = WeightSpec(0.5, GridSpec(grid_desk.half_length, fine_n))
    suite = band_limited_fields(grid_desk, seed=109, count=10)
    ok = True
    details = []
    checks = [("hedberg", lambda f, ww: hedberg_check(f, 0.5, 1.0).sup_ratio)]
    checks += [(f"gn-{which}",
                lambda f, ww, which=which: gn_check(f, ww, which))
               for which in ("b1", "b", "b2")]
    for name, fn in checks:
        ratios = [fn(f, w) for f in suite]
        ok &= bool(np.all(np.isfinite(ratios)))
        f0 = suite[0]
        doubled = Field.from_samples(grid_desk, 2.0 * f0.samples)
        ok &= abs(fn(doubled, w) - ratios[0]) <= 1e-10
        fine_val = fn(_refine(f0, fine_n), w2)
        drift = abs(fine_val - ratios[0]) / ratios[0]
        ok &= drift < 0.10
        details.append(f"{name}: max {max(ratios):.3f}, drift {drift:.1%}")
    acceptance_line("hedberg-gn-suites", ok, "; ".join(details))
    assert ok


def test_integrator_temporal_order(grid_small):
    base = InitialData("bump", 0.5, 5.0)
    theta0 = make_initial_field(grid_small, base)
    finals = []
    for dt in (0.05, 0.025, 0.0125):
        cfg = SolverConfig(alpha=1.0, nu=1.0, t_end=0.4,
                           dt_policy=DtPolicy("fixed", dt=dt),
                           initial_data=base)
        state = TrajectoryState(0.0, theta0)
        while state.t < cfg.t_end - 1e-12:
            state = step(state, cfg)
        finals.append(state.theta.samples)
    e1 = np.max(np.abs(finals[0] - finals[2]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    order = float(np.log2(e1 / e2))
    ok = order >= 3.7
    acceptance_line("integrator-order", ok, f"measured order {order:.2f}")
    assert ok


def test_blowup_ratio_orders_with_alpha(grid_desk):
    """Supplementary: at moderate amplitude no indicator fires for any
    dissipation order, but the gradient amplification still orders
    monotonically with supercriticality."""
    ratios = {}
    for alpha in (0.25, 0.4, 1.0):
        cfg = SolverConfig(alpha=alpha, nu=1.0, t_end=4.0,
                           dt_policy=DtPolicy("adaptive", dt_max=0.02),
                           initial_data=InitialData("ccf", 60.0, 15.0,
                                                    support=20.0))
        rep = run(cfg, grid_desk,
                  DiagnosticsRequest(cadence=10**9)).report
        ratios[alpha] = rep.grad_sup_max / rep.grad_sup_initial
    ok = ratios[0.25] > ratios[0.4] > ratios[1.0]
    acceptance_line(
        "blowup-alpha-ordering", ok,
        "; ".join(f"alpha={a}: x{r:.1f}" for a, r in ratios.items()))
    assert ok
