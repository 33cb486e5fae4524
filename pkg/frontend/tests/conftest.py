"""Fixtures: real run directories produced by the simulator CLI."""

import os

import pytest

from fractrans import cli as sim_cli


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


def _only_dir(path):
    (name,) = os.listdir(path)
    return os.path.join(path, name)


@pytest.fixture(scope="session")
def simulate_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("sim"))
    code = sim_cli.main(["simulate", "--outdir", out,
                         "--set", "grid.n_points=512",
                         "--set", "solver.t_end=1.0",
                         "--set", "probes.cadence=5"])
    assert code == 0
    return _only_dir(out)


@pytest.fixture(scope="session")
def relaxation_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("relax"))
    code = sim_cli.main([
        "relaxation-study", "--outdir", out,
        "--set", "grid.n_points=512", "--set", "solver.t_end=1.0",
        "--set", "solver.dt_kind=fixed", "--set", "solver.dt=0.01",
        "--set", "relaxation.epsilon_ladder=1e-1 1e-2 1e-3",
        "--set", "relaxation.eta_ladder=0.5 0.25"])
    assert code == 0
    return _only_dir(out)
