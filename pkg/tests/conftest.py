"""Shared fixtures: small grids for unit tests and the expensive
certification / blow-up runs, computed once per session."""

import numpy as np
import pytest

from fractrans.grid import Field, GridSpec
from fractrans.solver import (DiagnosticsRequest, DtPolicy, InitialData,
                              SolverConfig, run)


@pytest.fixture(scope="session")
def grid_small():
    return GridSpec(50.0, 512)


@pytest.fixture(scope="session")
def grid_desk():
    return GridSpec(50.0, 4096)


def band_limited_fields(grid, seed, count, band=8):
    """Seeded real random fields with modes strictly inside N/band,
    normalized to unit sup norm."""
    rng = np.random.default_rng(seed)
    modes = grid.mode_numbers
    keep = (np.abs(modes) < grid.n_points // band) & (modes != 0)
    fields = []
    for _ in range(count):
        coef = np.where(keep, rng.standard_normal(grid.n_points)
                        + 1j * rng.standard_normal(grid.n_points), 0.0)
        f = Field.from_spectrum(grid, np.fft.fft(np.fft.ifft(coef).real))
        fields.append(Field.from_samples(grid, f.samples / f.sup_norm()))
    return fields


def certification_config(t_end=20.0):
    return SolverConfig(
        alpha=1.0, nu=1.0, epsilon=0.0, eta=0.0, t_end=t_end,
        dt_policy=DtPolicy("adaptive", cfl=0.4, dt_max=0.02),
        initial_data=InitialData("bump", amplitude=0.05, width=5.0))


@pytest.fixture(scope="session")
def certification_run(grid_desk):
    """Critical-dissipation small-bump run to T=20 with beta=0.5 probes."""
    cfg = certification_config()
    return cfg, run(cfg, grid_desk,
                    DiagnosticsRequest(betas=(0.5,), cadence=5))


def blowup_config(alpha=0.25):
    return SolverConfig(
        alpha=alpha, nu=1.0, t_end=0.001,
        dt_policy=DtPolicy("adaptive", cfl=0.4, dt_max=0.02),
        initial_data=InitialData("ccf", amplitude=1e6, width=15.0,
                                 support=20.0))


@pytest.fixture(scope="session")
def blowup_reports():
    """Supercritical large-datum run at N and 2N."""
    cfg = blowup_config()
    out = {}
    for n in (4096, 8192):
        res = run(cfg, GridSpec(50.0, n),
                  DiagnosticsRequest(betas=(0.5,), cadence=10**9))
        out[n] = res.report
    return out


_ACCEPTANCE_LINES: list[str] = []


def acceptance_line(name: str, ok: bool, detail: str = ""):
    tail = f"  ({detail})" if detail else ""
    line = f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}{tail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    # Re-emit the verdicts outside pytest's capture so they always reach
    # the terminal, grouped at the end of the run.
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
