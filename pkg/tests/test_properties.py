"""Property-based checks of the invariants each module promises."""

import copy
import dataclasses
import json
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import make_repdays, small_plan_inputs
from gridx.cluster import cluster_days
from gridx.demand import build_demand_cube
from gridx.domain import (
    TECH_ORDER,
    Bus,
    ClusteringSettings,
    DemandScenario,
    Generator,
    Line,
    aggregate_raw_grid,
)
from gridx.ingest import HOURS, ProfileMatrix, scenario_from_dict, scenario_to_dict
from gridx.lp import mps_text, solve
from gridx.planner import build_model
from gridx.spatial import RegionMap, reallocate_empty_regions
from fixture_lps import dense, random_boxed_lp

# -- domain --------------------------------------------------------------------

raw_generators = st.lists(
    st.builds(Generator, st.integers(0, 3), st.sampled_from(TECH_ORDER), st.floats(0, 1e4, allow_nan=False)),
    max_size=12,
)
raw_lines = st.lists(
    st.builds(
        lambda a, d, x, c: Line(a, (a + d) % 4, x, c),
        st.integers(0, 3),
        st.integers(1, 3),
        st.floats(0.01, 1.0),
        st.floats(0, 1e3),
    ),
    max_size=8,
)
BUSES = tuple(Bus(i, 30.0 + i, -97.0) for i in range(4))


@given(raw_generators, raw_lines)
def test_aggregation_is_idempotent_and_conserves_capacity(gens, lines):
    once = aggregate_raw_grid(BUSES, gens, lines)
    twice = aggregate_raw_grid(BUSES, once.generators, once.lines)
    assert twice.generators == once.generators
    assert [(ln.from_bus, ln.to_bus, ln.initial_capacity) for ln in twice.lines] == [
        (ln.from_bus, ln.to_bus, ln.initial_capacity) for ln in once.lines
    ]
    for a, b in zip(once.lines, twice.lines):
        assert b.reactance == pytest.approx(a.reactance, rel=1e-15)
    assert len(once.generators) <= len(gens)
    per_tech = defaultdict(list)
    for g in gens:
        per_tech[g.tech].append(g.initial_capacity)
    for tech in TECH_ORDER:
        merged = [g.initial_capacity for g in once.generators if g.tech is tech]
        assert math.fsum(merged) == pytest.approx(math.fsum(per_tech[tech]), rel=1e-15, abs=0)


# -- ingest --------------------------------------------------------------------

years3 = (2030, 2031, 2032)
per_year = st.lists(st.floats(0, 100, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=30)
@given(e=per_year, p=per_year, phi=st.lists(st.floats(0, 1), min_size=3, max_size=3).map(sorted), q=st.floats(0, 10))
def test_scenario_serialization_round_trips(mini_raw, e, p, phi, q):
    raw = copy.deepcopy(mini_raw)
    raw["horizon"] = list(years3)
    for entry in raw["tech"].values():
        proto = next(iter(v for k, v in entry.items() if k.isdigit()))
        for k in [k for k in entry if k.isdigit()]:
            del entry[k]
        entry.update({str(y): dict(proto) for y in years3})
    raw["demand"].update(E_base=e, P_DC=p, phi=phi, Q_M=q, P_base_peak=[1.0, 1.0, 1.0], psi_em={"48201": 1.0})
    before = json.dumps(raw, sort_keys=True)
    cfg = scenario_from_dict(raw)
    assert json.dumps(raw, sort_keys=True) == before  # inputs are not mutated
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(cfg))))
    assert again.demand == cfg.demand and again.techs == cfg.techs and again.econ == cfg.econ
    assert scenario_from_dict(raw) == cfg


@pytest.fixture(scope="module")
def mini_raw(tmp_path_factory):
    from builders import write_mini_scenario

    return json.loads(write_mini_scenario(tmp_path_factory.mktemp("prop")).read_text())


# -- clustering ----------------------------------------------------------------


@settings(max_examples=8)
@given(seed=st.integers(0, 1000), k=st.integers(1, 6))
def test_clustering_weights_energy_and_determinism(seed, k):
    rng = np.random.default_rng(seed)
    load = ProfileMatrix((0, 1), rng.uniform(50, 150, (2, HOURS)))
    cfg = ClusteringSettings(k=k, seed=seed, restarts=2)
    a = cluster_days(load, settings=cfg)
    b = cluster_days(load, settings=cfg)
    assert a.weights.sum() == 365 and np.all(a.weights >= 1)
    assert a.annual_base_energy() == pytest.approx(load.values.sum(), rel=1e-12)
    np.testing.assert_array_equal(a.base_load, b.base_load)
    np.testing.assert_array_equal(a.assignments, b.assignments)


# -- spatial -------------------------------------------------------------------

COUNTIES = {str(i): (30.0 + 0.37 * i, -97.0 + 0.21 * (i % 3)) for i in range(8)}


@given(
    occupied=st.sets(st.sampled_from(sorted(COUNTIES)), min_size=1),
    shares=st.dictionaries(st.sampled_from(sorted(COUNTIES)), st.floats(0, 1), min_size=1),
)
def test_reallocation_conserves_weight_and_is_idempotent(occupied, shares):
    rm = RegionMap({b: c for b, c in enumerate(sorted(occupied))}, COUNTIES)
    out = reallocate_empty_regions(shares, rm)
    assert math.fsum(out.values()) == pytest.approx(math.fsum(v for v in shares.values() if v > 0), rel=1e-15, abs=0)
    assert all(v > 0 and c in occupied for c, v in out.items())
    assert reallocate_empty_regions(out, rm) == out


# -- demand --------------------------------------------------------------------


@settings(max_examples=30)
@given(
    p_dc=st.lists(st.floats(0, 30), min_size=3, max_size=3).map(sorted),
    phi=st.lists(st.floats(0, 1), min_size=3, max_size=3).map(sorted),
    share=st.floats(0.05, 0.95),
)
def test_demand_flatness_totals_and_monotonicity(p_dc, phi, share):
    scenario = DemandScenario(
        years3,
        {y: 10.0 for y in years3},
        dict(zip(years3, p_dc)),
        5.0,
        dict(zip(years3, phi)),
        {y: 1.0 for y in years3},
        {"a": share, "b": 1.0 - share},
        {"e": share, "f": 1.0 - share},
        e_base_t0=10.0,
    )
    rd = make_repdays(np.full((2, 3, 4), 50.0), [100.0, 200.0, 65.0])
    cube = build_demand_cube(scenario, rd)
    for arr in (cube.dc, cube.em):
        assert np.all(arr == arr[:, :, :1, :1])
        assert np.all(np.diff(arr, axis=1) >= 0)
    for t, y in enumerate(years3):
        np.testing.assert_allclose(cube.dc[:, t].sum(axis=0), p_dc[t] * 0.9 * 1000, rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(cube.em[:, t].sum(axis=0), 5.0 * phi[t] / 0.97 * 1000, rtol=1e-12, atol=1e-9)


# -- planner -------------------------------------------------------------------


def test_model_build_is_byte_deterministic():
    assert mps_text(build_model(small_plan_inputs()).model) == mps_text(build_model(small_plan_inputs()).model)


def _objective(inputs):
    sol = solve(build_model(inputs).model)
    assert sol.optimal
    return sol.objective


@settings(max_examples=6)
@given(seed=st.integers(0, 500))
def test_relaxation_never_raises_cost(seed):
    tight = small_plan_inputs(T=2, D=1, H=2, seed=seed, max_new_gen=20.0, lead=1)
    loose = small_plan_inputs(T=2, D=1, H=2, seed=seed, max_new_gen=200.0, lead=1)
    faster = small_plan_inputs(T=2, D=1, H=2, seed=seed, max_new_gen=20.0, lead=0)
    base = _objective(tight)
    assert _objective(loose) <= base * (1 + 1e-9) + 1e-6
    assert _objective(faster) <= base * (1 + 1e-9) + 1e-6


@settings(max_examples=6)
@given(seed=st.integers(0, 500), scale=st.floats(1.0, 50.0))
def test_curtailment_keeps_every_instance_feasible(seed, scale):
    inputs = small_plan_inputs(T=1, D=1, H=2, seed=seed, max_new_gen=0.0, max_new_trans=0.0, max_new_stor=0.0)
    inputs.demand.base = inputs.demand.base * scale
    sol = solve(build_model(inputs).model)
    assert sol.optimal


# -- simplex -------------------------------------------------------------------


@settings(max_examples=40)
@given(seed=st.integers(0, 100_000), n_rows=st.integers(1, 8), n_cols=st.integers(1, 10))
def test_optimal_points_are_feasible_deterministic_and_dual_consistent(seed, n_rows, n_cols):
    model = random_boxed_lp(np.random.default_rng(seed), n_rows, n_cols)
    a, b = solve(model), solve(model)
    assert a.optimal
    row, bnd = model.max_violation(a.x)
    assert row <= 1e-7 and bnd <= 1e-9
    assert a.objective == b.objective and np.array_equal(a.basis, b.basis)
    # weak duality with box bounds: y.b + sum of reduced-cost bound terms equals c.x
    c, A, sense, rhs, lb, ub = dense(model)
    y = a.duals
    d = c - A.T @ y
    dual_value = y @ rhs + np.sum(np.where(d > 0, d * lb, d * ub))
    assert dual_value <= a.objective + 1e-6 * (1 + abs(a.objective))
    assert dual_value == pytest.approx(a.objective, rel=1e-7, abs=1e-6)


def test_dataclass_configs_are_frozen():
    cfg = small_plan_inputs().config
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.horizon = ()
