"""Muckenhoupt weight family w_beta, weighted norms, maximal function and
the Hedberg / Gagliardo-Nirenberg inequality checkers.

w_beta(x) = (1+x^2)^(-beta/2) for beta in (0,1); gamma_beta = sqrt(w_beta).
All weighted integrals use the trapezoid rule on the uniform grid (equal
weights on a periodic grid).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .grid import Field, GridSpec
from .operators import derivative, lambda_alpha

RATIO_FLOOR = 1e-14


def weight_value(x, beta: float):
    return (1.0 + np.asarray(x, dtype=float) ** 2) ** (-beta / 2.0)


def weight_derivative(x, beta: float):
    x = np.asarray(x, dtype=float)
    return -beta * x * (1.0 + x**2) ** (-beta / 2.0 - 1.0)


def weight_second_derivative(x, beta: float):
    x = np.asarray(x, dtype=float)
    return (-beta * (1.0 + x**2) ** (-beta / 2.0 - 1.0)
            + beta * (beta + 2.0) * x**2 * (1.0 + x**2) ** (-beta / 2.0 - 2.0))


@dataclass(frozen=True)
class WeightSpec:
    """Sampled w_beta and gamma_beta on a grid."""

    beta: float
    grid: GridSpec
    w_samples: np.ndarray = field(init=False, repr=False)
    gamma_samples: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        w = weight_value(self.grid.nodes, self.beta)
        g = np.sqrt(w)
        w.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "w_samples", w)
        object.__setattr__(self, "gamma_samples", g)


class UnitWeight:
    """w == 1 harness weight (beta -> 0 limit), for unweighted twins in tests."""

    beta = 0.0

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.w_samples = np.ones(grid.n_points)
        self.gamma_samples = np.ones(grid.n_points)


def weighted_lp_norm(f: Field, p: float, w) -> float:
    """(integral of |f|^p w dx)^(1/p) over the box."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    h = f.grid.spacing
    return float((h * np.sum(np.abs(f.samples) ** p * w.w_samples)) ** (1.0 / p))


def weighted_l2_inner(f: Field, g: Field, w) -> float:
    h = f.grid.spacing
    return float(h * np.sum(f.samples * g.samples * w.w_samples))


def weighted_sobolev_norm(f: Field, s: float, w) -> float:
    """H^s(w dx) norm, s in {1/2, 1}: (||f||^2 + ||Lambda^s f||^2)^(1/2)."""
    if s not in (0.5, 1.0):
        raise ValueError(f"sobolev order must be 1/2 or 1, got {s}")
    l2 = weighted_lp_norm(f, 2.0, w)
    seminorm = weighted_lp_norm(lambda_alpha(f, s), 2.0, w)
    return float(np.hypot(l2, seminorm))


def _dyadic_radius_cells(grid: GridSpec) -> list[int]:
    # radii h, 2h, 4h, ..., up to 2L
    cells = []
    m = 1
    while m * grid.spacing <= 2.0 * grid.half_length + 1e-12:
        cells.append(m)
        m *= 2
    return cells


def _maximal_radius_cells(grid: GridSpec, per_octave: int = 16) -> list[int]:
    # geometric ladder, per_octave radii per factor of two; dense enough that
    # the sup over the ladder sits within ~h/2 of the true sup for box profiles
    top = 2.0 * grid.half_length / grid.spacing
    n_steps = int(np.ceil(per_octave * np.log2(top))) + 1
    cells = {int(round(2.0 ** (i / per_octave))) for i in range(n_steps)}
    return sorted(c for c in cells if 1 <= c <= top)


def window_average(values: np.ndarray, grid: GridSpec, m: int) -> np.ndarray:
    """Trapezoid average of `values` over periodic windows [x-mh, x+mh]."""
    n = grid.n_points
    weights = np.ones(2 * m + 1)
    weights[0] = weights[-1] = 0.5
    weights /= 2.0 * m
    kern = np.zeros(n)
    np.add.at(kern, np.arange(-m, m + 1) % n, weights)
    return np.fft.irfft(np.fft.rfft(values) * np.fft.rfft(kern), n=n)


def maximal_function(f: Field) -> Field:
    """Hardy-Littlewood maximal function over the dyadic radius ladder.

    The r -> 0 limit |f| is included so that M f >= |f| pointwise.
    """
    absf = np.abs(f.samples)
    out = absf.copy()
    for m in _maximal_radius_cells(f.grid):
        np.maximum(out, window_average(absf, f.grid, m), out=out)
    return Field.from_samples(f.grid, out)


def ap_constant(w, p: float) -> float:
    """Muckenhoupt A_p product maximized over grid centers and dyadic radii."""
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    grid = w.grid
    dual = w.w_samples ** (-1.0 / (p - 1.0))
    best = 0.0
    for m in _dyadic_radius_cells(grid):
        prod = window_average(w.w_samples, grid, m) * \
            window_average(dual, grid, m) ** (p - 1.0)
        best = max(best, float(prod.max()))
    return best


class RatioWitness(NamedTuple):
    sup_ratio: float
    witness_x: float


def hedberg_check(f: Field, gamma: float, delta: float) -> RatioWitness:
    """Sup of |Lambda^gamma f| / (M(Lambda^delta f)^(gamma/delta) * ||f||_inf^(1-gamma/delta))."""
    if not 0.0 < gamma < delta <= 2.0:
        raise ValueError(f"need 0 < gamma < delta <= 2, got ({gamma}, {delta})")
    sup_f = f.sup_norm()
    if sup_f == 0.0:
        raise ValueError("f must not be identically zero")
    num = np.abs(lambda_alpha(f, gamma).samples)
    maximal = maximal_function(lambda_alpha(f, delta)).samples
    denom = np.maximum(maximal ** (gamma / delta) * sup_f ** (1.0 - gamma / delta),
                       RATIO_FLOOR)
    ratios = num / denom
    i = int(np.argmax(ratios))
    return RatioWitness(float(ratios[i]), float(f.grid.nodes[i]))


def gn_check(f: Field, w, which: str) -> float:
    """LHS/RHS ratio for the weighted Gagliardo-Nirenberg inequalities.

    b1: ||Lam^(1/2) f||_L4(w) vs ||f||_inf^(1/2) ||Lam f||_L2(w)^(1/2)
    b:  ||Lam f||_L3(w)       vs ||f||_inf^(1/3) ||Lam^(3/2) f||_L2(w)^(2/3)
    b2: ||dx f||_L3(w)        vs the same right-hand side as b
    """
    sup_f = f.sup_norm()
    if sup_f == 0.0 or np.ptp(f.samples) == 0.0:
        raise ValueError("f must be bounded and nonconstant")
    if which == "b1":
        lhs = weighted_lp_norm(lambda_alpha(f, 0.5), 4.0, w)
        rhs = sup_f**0.5 * weighted_lp_norm(lambda_alpha(f, 1.0), 2.0, w) ** 0.5
    elif which == "b":
        lhs = weighted_lp_norm(lambda_alpha(f, 1.0), 3.0, w)
        rhs = sup_f ** (1 / 3) * weighted_lp_norm(lambda_alpha(f, 1.5), 2.0, w) ** (2 / 3)
    elif which == "b2":
        lhs = weighted_lp_norm(derivative(f), 3.0, w)
        rhs = sup_f ** (1 / 3) * weighted_lp_norm(lambda_alpha(f, 1.5), 2.0, w) ** (2 / 3)
    else:
        raise ValueError(f"unknown inequality {which!r}; expected b1, b or b2")
    return lhs / max(rhs, RATIO_FLOOR)
