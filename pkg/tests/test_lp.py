import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixture_lps import GOLDEN, dense, random_boxed_lp
from gridx.lp import LpModel, Sense, Status, mps_text, solve, write_mps
from oracles import highs_optimum, read_mps, vertex_enumeration

# -- model -------------------------------------------------------------------


def test_duplicates_are_summed_and_zeros_dropped():
    m = LpModel("d")
    x = m.add_columns(2)
    r = m.add_rows(1, Sense.LE, 1.0)
    m.add_terms([r[0]] * 4, [x[0], x[0], x[1], x[1]], [1.0, 2.0, 1.0, -1.0])
    f = m.finalize()
    assert f.A.toarray().tolist() == [[3.0, 0.0]]
    assert f.n_nonzeros == 1


def test_finalize_rejects_bad_data():
    for mutate, msg in (
        (lambda m, x, r: m.add_terms(r, x, np.nan), "coefficient"),
        (lambda m, x, r: m.set_objective(x, np.inf), "objective"),
        (lambda m, x, r: m.set_bounds(x, 2.0, 1.0), "bounds"),
        (lambda m, x, r: m.set_bounds(x, np.inf, np.inf), "infinite"),
        (lambda m, x, r: m.add_terms(r + 5, x, 1.0), "out of range"),
    ):
        m = LpModel()
        x = m.add_columns(1)
        r = m.add_rows(1, Sense.GE, 0.0)
        mutate(m, x, r)
        with pytest.raises(ValueError, match=msg):
            m.finalize()


def test_finalized_model_is_frozen():
    f = GOLDEN["tiny"]()
    with pytest.raises(RuntimeError, match="finalized"):
        f.add_columns(1)
    with pytest.raises(ValueError):
        f.lb[0] = 3.0
    with pytest.raises(RuntimeError, match="finalize"):
        LpModel().A  # noqa: B018


def test_with_bounds_leaves_original_untouched():
    f = GOLDEN["tiny"]()
    g = f.with_bounds([0], 2.0, 2.0)
    assert f.lb[0] == 0.0 and g.lb[0] == 2.0
    assert solve(g).objective == 2.0
    with pytest.raises(ValueError, match="bounds"):
        f.with_bounds([0], 3.0, 1.0)


def test_default_names_and_violation_measure():
    m = LpModel()
    m.add_columns(2)
    m.add_rows(1, Sense.EQ, 1.0)
    f = m.finalize()
    assert f.col_names() == ["x0", "x1"] and f.row_names() == ["r0"]
    row, bnd = f.max_violation(np.array([-1.0, 0.0]))
    assert row == pytest.approx(0.5) and bnd == 1.0


# -- MPS ---------------------------------------------------------------------


def test_names_with_whitespace_rejected():
    m = LpModel("bad")
    m.add_columns(1, names=["has space"])
    with pytest.raises(ValueError, match="whitespace"):
        mps_text(m.finalize())


def test_reserved_objective_row_name():
    m = LpModel("bad")
    m.add_columns(1)
    m.add_rows(1, Sense.LE, 0.0, names=["OBJ"])
    with pytest.raises(ValueError, match="reserved"):
        mps_text(m.finalize())


def test_unfinalized_model_cannot_be_written(tmp_path):
    with pytest.raises(RuntimeError):
        write_mps(LpModel(), tmp_path / "x.mps")


def test_unwritable_path_reports_the_path(tmp_path):
    with pytest.raises(OSError, match="cannot write"):
        write_mps(GOLDEN["tiny"](), tmp_path / "missing" / "x.mps")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n_rows=st.integers(1, 5), n_cols=st.integers(1, 6))
def test_mps_round_trip_random(seed, n_rows, n_cols):
    model = random_boxed_lp(np.random.default_rng(seed), n_rows, n_cols)
    parsed = read_mps(mps_text(model))
    c, A, sense, b, lb, ub = parsed.arrays()
    c0, A0, sense0, b0, lb0, ub0 = dense(model)
    np.testing.assert_array_equal(c, c0)
    np.testing.assert_array_equal(A, A0)
    assert sense == sense0
    np.testing.assert_array_equal(b, b0)
    np.testing.assert_array_equal(lb, lb0)
    np.testing.assert_array_equal(ub, ub0)


def test_awkward_numbers_round_trip():
    vals = [0.1, 1 / 3, 1e-300, -2.5e17, np.nextafter(1.0, 2.0)]
    m = LpModel("num")
    x = m.add_columns(len(vals), obj=vals, lb=-np.inf)
    r = m.add_rows(1, Sense.GE, vals[1])
    m.add_terms(r[0], x, vals)
    c, A, _, b, _, _ = read_mps(mps_text(m.finalize())).arrays()
    assert c.tolist() == vals and A[0].tolist() == vals and b[0] == vals[1]


# -- simplex -----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000), n_rows=st.integers(1, 4), n_cols=st.integers(1, 5))
def test_simplex_matches_vertex_enumeration(seed, n_rows, n_cols):
    model = random_boxed_lp(np.random.default_rng(seed), n_rows, n_cols)
    ref = vertex_enumeration(*dense(model))
    sol = solve(model)
    assert ref is not None and sol.optimal
    assert sol.objective == pytest.approx(ref[0], abs=1e-7, rel=1e-9)
    assert max(model.max_violation(sol.x)) < 1e-8


@pytest.mark.parametrize("seed", range(8))
def test_simplex_matches_highs_on_larger_lps(seed):
    model = random_boxed_lp(np.random.default_rng(1000 + seed), 30, 40)
    status, value = highs_optimum(*dense(model))
    sol = solve(model)
    assert status == "Optimal" and sol.optimal
    assert sol.objective == pytest.approx(value, rel=1e-9, abs=1e-7)


def _lp(c, rows, lb=0.0, ub=np.inf):
    """rows: list of (coefficients, sense, rhs)."""
    m = LpModel("t")
    x = m.add_columns(len(c), lb=lb, ub=ub, obj=c)
    for coefs, sense, rhs in rows:
        r = m.add_rows(1, sense, rhs)[0]
        m.add_terms(r, x, coefs)
    return m.finalize()


def test_infeasible_detected():
    sol = solve(_lp([1.0, 1.0], [([1, 1], "L", 1.0), ([1, 1], "G", 2.0)]))
    assert sol.status is Status.INFEASIBLE and not sol.optimal


def test_infeasible_detected_on_the_primal_route():
    sol = solve(_lp([-1.0, 0.0], [([1, 1], "L", 1.0), ([1, 1], "G", 2.0)]))
    assert sol.status is Status.INFEASIBLE


def test_unbounded_detected():
    sol = solve(_lp([-1.0, -1.0], [([1, -1], "L", 1.0)]))
    assert sol.status is Status.UNBOUNDED


def test_free_variables():
    # min x + y with x free, y >= 0, x - y = -3, x >= -5  ->  x=-3, y=0
    sol = solve(_lp([1.0, 1.0], [([1, -1], "E", -3.0), ([1, 0], "G", -5.0)], lb=[-np.inf, 0.0]))
    assert sol.optimal and sol.objective == pytest.approx(-3.0)


def test_degenerate_vertex():
    # many constraints through the optimal vertex (1, 1)
    rows = [([1, 1], "L", 2.0), ([1, 0], "L", 1.0), ([0, 1], "L", 1.0), ([2, 1], "L", 3.0), ([1, 2], "L", 3.0)]
    sol = solve(_lp([-1.0, -1.0], rows, ub=5.0))
    assert sol.optimal and sol.objective == pytest.approx(-2.0)


def test_both_routes_report_their_name():
    dual = solve(GOLDEN["transport"]())
    primal = solve(_lp([-1.0], [([1.0], "L", 4.0)]))
    assert dual.message == "dual" and primal.message == "primal"
    assert primal.objective == -4.0


def test_rowless_models():
    m = LpModel()
    m.add_columns(3, lb=[0.0, -1.0, -np.inf], ub=[2.0, 1.0, np.inf], obj=[1.0, -1.0, 0.0])
    sol = solve(m.finalize())
    assert sol.optimal and sol.x.tolist() == [0.0, 1.0, 0.0]
    m = LpModel()
    m.add_columns(1, obj=-1.0)
    assert solve(m.finalize()).status is Status.UNBOUNDED


def test_iteration_limit():
    model = random_boxed_lp(np.random.default_rng(5), 30, 40)
    assert solve(model, max_iters=1).status is Status.ITERATION_LIMIT


def test_duals_price_the_binding_rows():
    sol = solve(GOLDEN["transport"]())
    model = GOLDEN["transport"]()
    # strong duality: c.x = y.b + reduced-cost bound terms (all lower bounds are 0 here)
    assert sol.duals @ model.rhs == pytest.approx(sol.objective, rel=1e-9)


def test_unfinalized_model_rejected():
    with pytest.raises(RuntimeError):
        solve(LpModel())
