from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from gridx.data import toy_scenario_path
from gridx.lp import write_mps
from gridx.pipeline import build_and_solve, load_inputs
from gridx.planner import PlanInputs, PlanModel
from gridx.report import PlanSolution, extract_solution, write_reports

from acceptance_log import ACCEPTANCE

settings.register_profile("gridx", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("gridx")

DATA = Path(__file__).parent / "data"


@dataclass
class ToyRun:
    out_dir: Path
    inputs: PlanInputs
    plan: PlanModel
    solution: PlanSolution
    x: object
    iterations: int

    def file(self, name: str) -> bytes:
        return (self.out_dir / name).read_bytes()


def run_toy_pipeline(out_dir: Path, scenario: Path | None = None) -> ToyRun:
    """cluster -> demand -> build -> solve -> report, writing every artifact."""
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = load_inputs(scenario or toy_scenario_path())
    inputs.repdays.save(out_dir / "repdays.json")
    inputs.demand.write_audit(out_dir / "demand")
    plan, sol = build_and_solve(inputs)
    write_mps(plan.model, out_dir / "model.mps")
    (out_dir / "stats.json").write_text(json.dumps(plan.stats.to_dict()) + "\n")
    ps = extract_solution(plan, sol)
    ps.save(out_dir / "solution.json")
    write_reports(ps, out_dir / "reports")
    return ToyRun(out_dir, inputs, plan, ps, sol.x, sol.iterations)


@pytest.fixture(scope="session")
def toy_run(tmp_path_factory) -> ToyRun:
    return run_toy_pipeline(tmp_path_factory.mktemp("toy_run"))


@pytest.fixture(scope="session")
def toy_inputs() -> PlanInputs:
    return load_inputs(toy_scenario_path())


# -- acceptance reporting ---------------------------------------------------


def pytest_terminal_summary(terminalreporter) -> None:
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
