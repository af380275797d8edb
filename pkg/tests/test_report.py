import math

import numpy as np
import pytest

from builders import write_mini_scenario
from gridx.domain import TECH_ORDER, TechKind
from gridx.lp import LpSolution, Status, solve
from gridx.pipeline import load_inputs, solve_lp
from gridx.report import (
    NotOptimalError,
    PlanSolution,
    capacity_factor_table,
    capacity_table,
    cost_breakdown,
    curtailment_report,
    energy_balance_residual,
    extract_solution,
    sweep_construction_time,
    sweep_csv,
)


def test_cost_breakdown_adds_up_to_the_objective(toy_run):
    ps = toy_run.solution
    cb = cost_breakdown(ps)
    assert cb["total_discounted"] == pytest.approx(ps.objective, rel=1e-9)
    for und, disc, f in zip(cb["capex"], cb["capex_discounted"], ps.discount):
        assert und * f == pytest.approx(disc, rel=1e-12)


def test_energy_balance_closes(toy_run):
    assert max(energy_balance_residual(toy_run.solution)) < 1e-6


def test_thermal_capacity_factors_within_bounds(toy_run):
    ps = toy_run.solution
    for tech, (lo, hi) in ps.cf_bounds.items():
        for v in ps.realized_cf[tech]:
            if v is not None:
                assert lo - 1e-7 <= v <= hi + 1e-7


def test_capacity_table_shape(toy_run):
    table = capacity_table(toy_run.solution)
    assert [label for label, _ in table.rows] == [t.value for t in TECH_ORDER] + ["transmission", "storage"]
    assert len(table.rows) == 8
    assert table.header[1:] == [str(y) for y in toy_run.solution.years]
    text = table.to_csv()
    assert text.splitlines()[0].startswith("capacity_gw,")
    with pytest.raises(KeyError):
        table.row("geothermal")


def test_capacity_is_never_below_initial(toy_run):
    ps = toy_run.solution
    for g in toy_run.inputs.topology.generators:
        series = ps.capacity_by_gen[f"{g.bus},{g.tech.value}"]
        assert min(series) >= g.initial_capacity - 1e-6


def test_save_and_load_round_trip(toy_run, tmp_path):
    toy_run.solution.save(tmp_path / "s.json")
    assert PlanSolution.load(tmp_path / "s.json") == toy_run.solution


def test_report_files(toy_run):
    names = sorted(p.name for p in (toy_run.out_dir / "reports").iterdir())
    assert names == ["capacity.csv", "capacity_factor.csv", "costs.csv", "curtailment.csv", "summary.json"]


def test_curtailment_report_against_demand_cube(toy_run):
    rd = toy_run.inputs.repdays
    a = curtailment_report(toy_run.solution)
    b = curtailment_report(toy_run.solution, toy_run.inputs.demand, rd.weights)
    for ra, rb in zip(a, b):
        assert ra["demand_mwh"] == pytest.approx(rb["demand_mwh"], rel=1e-9)
        assert 0.0 <= ra["percent"] <= 100.0
    with pytest.raises(ValueError, match="weights"):
        curtailment_report(toy_run.solution, toy_run.inputs.demand)


def test_non_optimal_solutions_refused(toy_run):
    bad = LpSolution(Status.INFEASIBLE, math.nan, np.zeros(toy_run.plan.model.n_cols))
    with pytest.raises(NotOptimalError, match="Infeasible"):
        extract_solution(toy_run.plan, bad)
    ps = PlanSolution.from_dict({**toy_run.solution.to_dict(), "status": "Infeasible"})
    for fn in (capacity_table, capacity_factor_table, curtailment_report):
        with pytest.raises(NotOptimalError):
            fn(ps)


@pytest.fixture(scope="module")
def mini_inputs(tmp_path_factory):
    return load_inputs(write_mini_scenario(tmp_path_factory.mktemp("mini")))


def test_sweep_rows_in_order_and_parallel_agrees(mini_inputs):
    serial = sweep_construction_time(mini_inputs, TechKind.NATURAL_GAS, [1, 0])
    parallel = sweep_construction_time(mini_inputs, TechKind.NATURAL_GAS, [1, 0], max_workers=2)
    assert [r.omega for r in serial] == [1, 0]
    assert serial == parallel
    assert all(r.status == Status.OPTIMAL.value for r in serial)
    # a shorter construction time can only help
    assert serial[1].objective <= serial[0].objective + 1e-6


def test_sweep_records_failures_and_keeps_going(mini_inputs):
    def flaky(model, settings):
        if flaky.calls == 0:
            flaky.calls += 1
            raise RuntimeError("solver crashed")
        return solve_lp(model, settings)

    flaky.calls = 0
    rows = sweep_construction_time(mini_inputs, TechKind.SOLAR, [0, 1], solve_fn=flaky)
    assert rows[0].status == "error" and "solver crashed" in rows[0].error
    assert rows[1].status == Status.OPTIMAL.value
    text = sweep_csv(rows)
    lines = text.splitlines()
    assert lines[0].startswith("omega,status,objective,")
    assert lines[1].startswith("0,error,,")
    with pytest.raises(ValueError, match="non-negative"):
        sweep_construction_time(mini_inputs, TechKind.SOLAR, [-1])


def test_sweep_reports_non_optimal_status(mini_inputs):
    def limited(model, settings):
        return solve(model, max_iters=1)

    (row,) = sweep_construction_time(mini_inputs, TechKind.SOLAR, [0], solve_fn=limited)
    assert row.status == Status.ITERATION_LIMIT.value and row.objective is None
