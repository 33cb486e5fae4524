"""Time integration of theta_t + theta_x * H(theta) + nu*Lambda^alpha theta
= eps*Laplacian(theta), with integrating-factor RK4 (linear symbol treated
exactly), adaptive advective CFL stepping, maximum-principle tracking,
blow-up indicators, Picard/Duhamel validation and relaxation ladders.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Field, GridSpec
from .operators import bump, dealias_spectrum, lambda_alpha, mollify
from .commutators import smooth_cutoff

DT_FLOOR = 1e-9
DT_COLLAPSE = 1e-7
GRAD_GROWTH_FACTOR = 50.0


@dataclass(frozen=True)
class DtPolicy:
    kind: str = "adaptive"          # "fixed" or "adaptive"
    dt: float = 0.01                # fixed step
    cfl: float = 0.4                # adaptive: dt = cfl*h/max(|H theta|_inf, 1e-8)
    dt_max: float = 0.05

    def __post_init__(self):
        if self.kind not in ("fixed", "adaptive"):
            raise ValueError(f"unknown dt policy kind {self.kind!r}")
        if self.kind == "fixed" and self.dt <= 0:
            raise ValueError("fixed dt must be positive")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")


@dataclass(frozen=True)
class InitialData:
    """Named initial-data family.

    Families:
      ccf            A*exp(-x^2/width^2) * smooth plateau cutoff (even,
                     positive, compactly supported)
      bump           A * normalized compact bump of half-width `width`
      mode           A * sin(pi*mode*x/L)
      weight_profile (1+x^2)^(-exponent/2) * smooth cutoff (slow decay)
    """

    family: str = "ccf"
    amplitude: float = 0.05
    width: float = 2.0
    mode: int = 1
    exponent: float = 0.5
    support: float = 0.0   # 0 -> default L/4 plateau radius


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    nu: float = 1.0
    epsilon: float = 0.0
    eta: float = 0.0
    t_end: float = 10.0
    dt_policy: DtPolicy = field(default_factory=DtPolicy)
    dealias: bool = True
    initial_data: InitialData = field(default_factory=InitialData)

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.nu < 0 or self.epsilon < 0 or self.eta < 0:
            raise ValueError("nu, epsilon, eta must be nonnegative")
        if self.t_end <= 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")


@dataclass
class TrajectoryState:
    t: float
    theta: Field
    step_count: int = 0
    dt_last: float = 0.0


@dataclass
class BlowupReport:
    detected: bool = False
    t_detect: float = float("nan")
    indicator: str = ""
    grad_sup_initial: float = 0.0
    grad_sup_max: float = 0.0
    dt_min: float = float("inf")
    sup_violation: bool = False
    nonfinite: bool = False
    history: list = field(default_factory=list)   # (t, ||theta_x||_inf)


class BlowupSignal(Exception):
    """Raised by step() when the maximum principle is violated beyond the
    engineering threshold or a non-finite value appears."""

    def __init__(self, state: TrajectoryState, reason: str):
        super().__init__(reason)
        self.state = state
        self.reason = reason


def make_initial_field(grid: GridSpec, data: InitialData) -> Field:
    x = grid.nodes
    support = data.support if data.support > 0 else grid.half_length / 4.0
    if data.family == "ccf":
        prof = data.amplitude * np.exp(-(x / data.width) ** 2) * \
            smooth_cutoff(x / support)
    elif data.family == "bump":
        prof = data.amplitude * bump(x / data.width) * np.e
    elif data.family == "mode":
        prof = data.amplitude * np.sin(np.pi * data.mode * x / grid.half_length)
    elif data.family == "weight_profile":
        prof = data.amplitude * (1.0 + x**2) ** (-data.exponent / 2.0) * \
            smooth_cutoff(x / support)
    else:
        raise ValueError(f"unknown initial-data family {data.family!r}")
    return Field.from_samples(grid, prof)


class _Stepper:
    """Caches multipliers for one (grid, cfg) pair."""

    def __init__(self, grid: GridSpec, cfg: SolverConfig):
        self.grid = grid
        self.cfg = cfg
        k = grid.wavenumbers
        self.k = k
        self.ik = 1j * k
        self.ik[grid.nyquist_index] = 0.0
        self.hilb = 1j * np.sign(k)
        self.hilb[grid.nyquist_index] = 0.0
        self.lin = -cfg.nu * np.abs(k) ** cfg.alpha - cfg.epsilon * k**2

    def nonlinear(self, spec: np.ndarray) -> np.ndarray:
        """Spectrum of -theta_x * H(theta), product formed in physical space
        from dealiased factors."""
        dx_spec = self.ik * spec
        h_spec = self.hilb * spec
        if self.cfg.dealias:
            dx_spec = dealias_spectrum(dx_spec)
            h_spec = dealias_spectrum(h_spec)
        prod = np.fft.ifft(dx_spec).real * np.fft.ifft(h_spec).real
        out = -np.fft.fft(prod)
        if self.cfg.dealias:
            out = dealias_spectrum(out)
        return out

    def rhs_spectrum(self, spec: np.ndarray) -> np.ndarray:
        return self.nonlinear(spec) + self.lin * spec

    def ifrk4(self, spec: np.ndarray, dt: float) -> np.ndarray:
        e_half = np.exp(self.lin * dt / 2.0)
        e_full = e_half * e_half
        n0 = self.nonlinear(spec)
        u1 = e_half * (spec + (dt / 2.0) * n0)
        n1 = self.nonlinear(u1)
        u2 = e_half * spec + (dt / 2.0) * n1
        n2 = self.nonlinear(u2)
        u3 = e_full * spec + dt * e_half * n2
        n3 = self.nonlinear(u3)
        return e_full * spec + (dt / 6.0) * (
            e_full * n0 + 2.0 * e_half * (n1 + n2) + n3)

    def advective_dt(self, spec: np.ndarray) -> float:
        pol = self.cfg.dt_policy
        if pol.kind == "fixed":
            return pol.dt
        h_sup = float(np.max(np.abs(np.fft.ifft(self.hilb * spec).real)))
        return min(pol.cfl * self.grid.spacing / max(h_sup, 1e-8), pol.dt_max)


_STEPPERS: dict = {}


def get_stepper(grid: GridSpec, cfg: SolverConfig) -> _Stepper:
    key = (grid, cfg.alpha, cfg.nu, cfg.epsilon, cfg.dealias, cfg.dt_policy)
    st = _STEPPERS.get(key)
    if st is None:
        st = _Stepper(grid, cfg)
        _STEPPERS[key] = st
    return st


def rhs(theta: Field, cfg: SolverConfig) -> Field:
    """Full right-hand side -dealias(theta_x * H theta) - nu*Lambda^alpha
    theta + eps * theta_xx, as a Field."""
    st = get_stepper(theta.grid, cfg)
    return Field.from_spectrum(theta.grid, st.rhs_spectrum(theta.spectrum))


def step(state: TrajectoryState, cfg: SolverConfig,
         sup_limit: float | None = None) -> TrajectoryState:
    """One integrating-factor RK4 step; dt from the config's policy."""
    st = get_stepper(state.theta.grid, cfg)
    dt = min(st.advective_dt(state.theta.spectrum), cfg.t_end - state.t)
    new_spec = st.ifrk4(state.theta.spectrum, dt)
    theta = Field.from_spectrum(state.theta.grid, new_spec)
    new = TrajectoryState(state.t + dt, theta, state.step_count + 1, dt)
    samples = theta.samples
    if not np.all(np.isfinite(samples)):
        raise BlowupSignal(new, "nonfinite")
    if sup_limit is not None and float(np.max(np.abs(samples))) > sup_limit:
        raise BlowupSignal(new, "sup_violation")
    return new


@dataclass(frozen=True)
class DiagnosticsRequest:
    betas: tuple = (0.5,)
    cadence: int = 10
    heavy: bool = False      # include H^3-level norms (Lambda^(7/2), d^4)


@dataclass
class RunResult:
    state: TrajectoryState
    records: dict            # beta -> list[DiagnosticsRecord]
    report: BlowupReport
    probe_times: list


def run(cfg: SolverConfig, grid: GridSpec,
        probes: DiagnosticsRequest | None = None,
        theta0: Field | None = None) -> RunResult:
    """Integrate to t_end or blow-up, probing diagnostics on the way.

    Deterministic given (cfg, grid).  Blow-up never crashes: once the
    engineering sup-limit is violated the run keeps stepping (bounded extra
    work) to observe whether the gradient-sup and dt-collapse indicators
    fire together, then reports.
    """
    from . import diagnostics  # deferred: diagnostics does not import solver
    from .weights import WeightSpec

    probes = probes or DiagnosticsRequest()
    if theta0 is None:
        theta0 = make_initial_field(grid, cfg.initial_data)
    if cfg.eta > 0:
        theta0 = mollify(theta0, cfg.eta)
    sup0 = theta0.sup_norm()
    sup_limit = 10.0 * sup0 + 1.0

    weight_specs = {b: WeightSpec(b, grid) for b in probes.betas}
    records = {b: [] for b in probes.betas}
    probe_times: list[float] = []
    report = BlowupReport()

    st = get_stepper(grid, cfg)
    grad0 = float(np.max(np.abs(np.fft.ifft(st.ik * theta0.spectrum).real)))
    report.grad_sup_initial = grad0
    report.grad_sup_max = grad0
    report.history.append((0.0, grad0))

    state = TrajectoryState(0.0, theta0)

    def probe(s: TrajectoryState):
        probe_times.append(s.t)
        for b, w in weight_specs.items():
            records[b].append(diagnostics.record(s.theta, s.t, cfg, w,
                                                 heavy=probes.heavy))

    probe(state)
    grad_fired = False
    dt_fired = False
    terminal = False
    extra = 0

    while state.t < cfg.t_end - 1e-12:
        try:
            state = step(state, cfg, sup_limit=None if terminal else sup_limit)
        except BlowupSignal as sig:
            state = sig.state
            if sig.reason == "nonfinite":
                report.nonfinite = True
                report.detected = True
                report.indicator = report.indicator or "gradient_sup"
                report.t_detect = state.t
                break
            report.sup_violation = True
            terminal = True

        grad = float(np.max(np.abs(np.fft.ifft(st.ik * state.theta.spectrum).real)))
        if np.isfinite(grad):
            report.grad_sup_max = max(report.grad_sup_max, grad)
        report.history.append((state.t, grad))
        report.dt_min = min(report.dt_min, state.dt_last)
        if not grad_fired and grad > GRAD_GROWTH_FACTOR * max(grad0, 1e-14):
            grad_fired = True
        # the final step is clipped to land on t_end exactly; a tiny clipped
        # dt there is not a collapse signal
        if not dt_fired and state.dt_last < DT_COLLAPSE \
                and state.t < cfg.t_end - 1e-12:
            dt_fired = True
        if grad_fired and dt_fired and not report.detected:
            report.detected = True
            report.indicator = "gradient_sup"
            report.t_detect = state.t
            break
        if terminal:
            extra += 1
            if state.dt_last < DT_FLOOR or extra > 20000:
                if grad_fired:
                    report.detected = True
                    report.indicator = "dt_collapse" if dt_fired else "gradient_sup"
                    report.t_detect = state.t
                break
        elif state.step_count % probes.cadence == 0:
            probe(state)

    if not terminal and not report.detected and probe_times[-1] < state.t:
        probe(state)
    return RunResult(state, records, report, probe_times)


# ---------------------------------------------------------------------------
# Duhamel / Picard validation of the regularized equation


class NonContractionError(RuntimeError):
    pass


def picard_deviations(cfg: SolverConfig, grid: GridSpec, k_max: int = 8,
                      t_short: float | None = None, n_nodes: int = 33,
                      theta0: Field | None = None) -> np.ndarray:
    """Sup-distance between Picard iterates of the Duhamel form and the
    time-stepped solution at t_short, for iterate counts 1..k_max.

    Only the eps*Laplacian part sits in the semigroup; the transport and
    nu*Lambda^alpha terms are iterated sources, integrated by composite
    Simpson on the node grid.
    """
    if cfg.epsilon <= 0:
        raise ValueError("picard validation requires epsilon > 0")
    if theta0 is None:
        theta0 = make_initial_field(grid, cfg.initial_data)
    gamma0 = mollify(theta0, cfg.eta) if cfg.eta > 0 else theta0
    pol = cfg.dt_policy
    base_dt = pol.dt if pol.kind == "fixed" else pol.dt_max
    if t_short is None:
        t_short = 16.0 * base_dt
    if n_nodes % 2 == 0:
        n_nodes += 1

    st = get_stepper(grid, cfg)
    k = grid.wavenumbers
    heat = -cfg.epsilon * k**2
    frac = cfg.nu * np.abs(k) ** cfg.alpha
    times = np.linspace(0.0, t_short, n_nodes)
    dt_node = times[1] - times[0]
    g0 = gamma0.spectrum

    def source(spec):
        # theta_x * H theta + nu * Lambda^alpha theta, spectral
        return -st.nonlinear(spec) + frac * spec

    # reference: time-stepped solution with a fine fixed step
    ref_cfg = replace(cfg, dt_policy=DtPolicy("fixed", dt=t_short / 512),
                      t_end=t_short, eta=0.0)
    ref_state = TrajectoryState(0.0, gamma0)
    while ref_state.t < t_short - 1e-14:
        ref_state = step(ref_state, ref_cfg)
    ref = ref_state.theta.samples

    iterates = np.tile(g0, (n_nodes, 1)).astype(complex)
    for i, t in enumerate(times):
        iterates[i] = np.exp(heat * t) * g0
    deviations = []
    for _ in range(k_max):
        sources = np.array([source(iterates[i]) for i in range(n_nodes)])
        new = np.empty_like(iterates)
        new[0] = g0
        for i, t in enumerate(times[1:], start=1):
            props = np.exp(np.outer(t - times[: i + 1], heat))
            vals = props * sources[: i + 1]
            if i % 2 == 0:
                integral = _simpson(vals, dt_node)
            else:
                # even interval count is needed for Simpson: use it on
                # [0, t_{i-1}] and a trapezoid on the last interval
                integral = (_simpson(vals[:i], dt_node) if i > 1 else 0.0) \
                    + 0.5 * dt_node * (vals[i - 1] + vals[i])
            new[i] = np.exp(heat * t) * g0 - integral
        iterates = new
        final = np.fft.ifft(iterates[-1]).real
        deviations.append(float(np.max(np.abs(final - ref))))
    return np.asarray(deviations)


def _simpson(vals: np.ndarray, dt: float):
    # vals has odd length along axis 0
    n = vals.shape[0]
    coeff = np.ones(n)
    coeff[1:-1:2] = 4.0
    coeff[2:-1:2] = 2.0
    return (dt / 3.0) * np.tensordot(coeff, vals, axes=(0, 0))


def picard_validate(cfg: SolverConfig, grid: GridSpec, k: int = 8,
                    t_short: float | None = None,
                    theta0: Field | None = None) -> float:
    devs = picard_deviations(cfg, grid, k_max=k, t_short=t_short, theta0=theta0)
    if not np.all(np.isfinite(devs)):
        raise NonContractionError(
            "Picard iterates diverged to non-finite values; t_short too "
            "large for contraction")
    if devs[-1] > devs[0] * (1.0 + 1e-9):
        raise NonContractionError(
            f"Picard deviations increased from {devs[0]:.3e} to {devs[-1]:.3e}; "
            "t_short too large for contraction")
    return float(devs[-1])


# ---------------------------------------------------------------------------
# relaxation ladders (epsilon -> 0, eta -> 0)


def relaxation_study(base_cfg: SolverConfig, grid: GridSpec, ladder,
                     kind: str, delta: float = 0.1,
                     cadence: int = 10) -> list[tuple[tuple, float]]:
    """Pairwise L^2 space-time distances between consecutive-ladder
    solutions on [delta, t_end].  Runs share the grid and a fixed dt policy.
    """
    if kind not in ("epsilon", "eta"):
        raise ValueError(f"ladder kind must be 'epsilon' or 'eta', got {kind!r}")
    ladder = list(ladder)
    if len(ladder) <= 1:
        return []
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly decreasing")
    pol = base_cfg.dt_policy
    if pol.kind != "fixed":
        pol = DtPolicy("fixed", dt=pol.dt_max)
    trajectories = []
    for value in ladder:
        cfg = replace(base_cfg, dt_policy=pol, **{kind: value})
        theta0 = make_initial_field(grid, cfg.initial_data)
        if cfg.eta > 0:
            theta0 = mollify(theta0, cfg.eta)
        state = TrajectoryState(0.0, theta0)
        snaps, times = [], []
        while state.t < cfg.t_end - 1e-12:
            state = step(state, cfg)
            if state.step_count % cadence == 0:
                snaps.append(state.theta.samples)
                times.append(state.t)
        trajectories.append((np.asarray(times), np.asarray(snaps)))
    h = grid.spacing
    out = []
    for (v1, (t1, s1)), (v2, (t2, s2)) in zip(
            zip(ladder, trajectories), zip(ladder[1:], trajectories[1:])):
        n = min(len(t1), len(t2))
        mask = t1[:n] >= delta
        dt_probe = t1[1] - t1[0]
        sq = np.sum((s1[:n][mask] - s2[:n][mask]) ** 2, axis=1) * h
        out.append(((v1, v2), float(np.sqrt(np.sum(sq) * dt_probe))))
    return out
