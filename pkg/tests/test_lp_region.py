import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from bcregion import constraints as C
from bcregion import models, region, setfam
from bcregion.infodist import build_joint
from bcregion.lp import linprog_max

import oracles
from conftest import constant_model


def joint(k, seed):
    return build_joint(models.random_model(k, np.random.default_rng(seed)))


def one_bound_system(k, bound, receiver=1):
    v = C.per_receiver(receiver)
    return C.RegionSystem(k, C.per_receiver_vars(k), [C.RateInequality.of([v], bound)])


# ------------------------------------------------------------------ simplex

@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=150, deadline=None)
def test_simplex_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 8)), int(rng.integers(1, 6))
    a = rng.integers(-2, 3, size=(m, n)).astype(float)
    b = rng.uniform(-1.0, 3.0, size=m)
    c = rng.uniform(-1.0, 2.0, size=n)
    got = linprog_max(c, a, b)
    bounds = [(0, None)] * n
    # HiGHS presolve can report an unbounded problem as infeasible, so
    # feasibility is decided separately with a zero objective.
    feas = linprog(np.zeros(n), A_ub=a, b_ub=b, bounds=bounds, method="highs")
    ref = linprog(-c, A_ub=a, b_ub=b, bounds=bounds, method="highs")
    if feas.status == 2:
        assert got.status == "infeasible"
    elif ref.status in (2, 3):
        assert got.status == "unbounded"
    else:
        assert got.status == "optimal"
        assert got.value == pytest.approx(-ref.fun, abs=1e-8)
        assert np.all(a @ got.witness <= b + 1e-8)
        assert np.all(got.witness >= 0)


def test_simplex_degenerate_cycling_example():
    # Beale's example cycles under the textbook largest-coefficient rule.
    c = np.array([0.75, -150.0, 0.02, -6.0])
    a = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    res = linprog_max(c, a, b)
    assert res.status == "optimal"
    assert res.value == pytest.approx(0.05, abs=1e-12)


def test_simplex_shape_mismatch():
    with pytest.raises(ValueError):
        linprog_max([1.0], [[1.0]], [1.0, 2.0])


# ------------------------------------------------------------------ support

def test_support_single_bound():
    sys = one_bound_system(1, 2.0)
    res = region.support(sys, [1.0])
    assert res.status == "optimal" and res.value == pytest.approx(2.0, abs=1e-15)


def test_support_unbounded_is_flagged(caplog):
    sys = one_bound_system(2, 2.0)
    with caplog.at_level("WARNING", logger="bcregion.region"):
        res = region.support(sys, [1.0, 1.0])
    assert res.status == "unbounded"
    assert "unbounded" in caplog.text


def test_support_rejects_bad_weights():
    sys = one_bound_system(2, 1.0)
    for w in ([1.0], [1.0, np.nan], [1.0, np.inf]):
        with pytest.raises(ValueError):
            region.support(sys, w)


@pytest.mark.parametrize("k", [2, 3])
def test_support_constant_aux_is_zero(k):
    sys = C.theorem1_system(build_joint(constant_model(k)))
    for w in region.random_directions(k, 5, 0):
        assert region.support(sys, w).value == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_support_matches_vertex_enumeration(seed):
    sys = C.theorem1_system(joint(3, seed))
    a, b = sys.as_matrix()
    w = np.ones(3)
    assert region.support(sys, w).value == pytest.approx(oracles.vertex_support(a, b, w), abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_support_independent_of_constraint_order(seed):
    sys = C.theorem1_system(joint(3, seed))
    rng = np.random.default_rng(seed)
    shuffled = C.RegionSystem(3, sys.variables, [sys.inequalities[i] for i in rng.permutation(len(sys))])
    for w in region.random_directions(3, 5, seed):
        assert region.support(shuffled, w).value == pytest.approx(region.support(sys, w).value, abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_adding_constraint_never_increases_support(seed):
    rng = np.random.default_rng(seed)
    sys = C.theorem1_system(joint(3, seed))
    t = setfam.power_set(3)[int(rng.integers(7))]
    extra = C.RateInequality.of((C.per_receiver(k) for k in setfam.elements(t)), rng.uniform(0, 0.3))
    tighter = C.RegionSystem(3, sys.variables, sys.inequalities + [extra])
    w = region.random_directions(3, 1, seed)[0]
    assert region.support(tighter, w).value <= region.support(sys, w).value + 1e-12


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_witness_is_member(seed):
    sys = C.theorem1_system(joint(3, seed))
    w = region.random_directions(3, 1, seed)[0]
    res = region.support(sys, w)
    pt = region.witness_point(sys, res)
    assert region.membership(sys, pt)
    assert float(w @ pt) == pytest.approx(res.value, abs=1e-12)


# --------------------------------------------------------------- membership

def test_membership_examples(rng):
    sys = C.theorem1_system(build_joint(models.random_model(3, rng)))
    assert region.membership(sys, [0.0, 0.0, 0.0])
    assert not region.membership(sys, [-1e-6, 0.0, 0.0])
    small = one_bound_system(2, 0.5)
    assert region.membership(small, [0.5 + 5e-10, 3.0])
    assert not region.membership(small, [0.5 + 1e-8, 0.0])


# --------------------------------------------------------- fast evaluator

@pytest.mark.parametrize("k, seed", [(2, 0), (2, 1), (3, 2), (3, 3)])
def test_evaluator_matches_direct_bounds(k, seed):
    spec = models.random_model(k, np.random.default_rng(seed), x_alphabet=3)
    ev = region.Theorem1Evaluator(spec)
    d = build_joint(spec)
    want = [C.theorem1_bound(d, t, pi) for t, pi in C.theorem1_terms(k)]
    assert np.max(np.abs(ev.bounds(spec.aux_pmf) - want)) <= 1e-12
    for w in region.random_directions(k, 10, seed):
        assert ev.support(spec.aux_pmf, w) == pytest.approx(region.model_support(spec, w), abs=1e-9)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_sum_rate_polytope_matches_simplex(k):
    rng = np.random.default_rng(k)
    ts = setfam.power_set(k)
    poly = region.SumRatePolytope(k, ts)
    for _ in range(30):
        c = rng.uniform(0.0, 1.0, size=len(ts))
        c[rng.random(len(ts)) < 0.2] = 0.0
        w = np.abs(rng.standard_normal(k))
        assert poly.support(c, w) == pytest.approx(linprog_max(w, poly.rows, c).value, abs=1e-9)


# ------------------------------------------------------------- projection

def test_split_rate_variables_k2():
    labels = [v.label(2) for v in region.split_rate_variables(2)]
    assert labels == ["R1,1", "R2,2", "R1,12", "R2,12", "r1", "r2"]


def test_projected_constant_aux_is_zero():
    d = build_joint(constant_model(2))
    res = region.projected_support(d, [1.0, 1.0])
    assert res.status == "optimal" and res.value == pytest.approx(0.0, abs=1e-12)


def test_projected_bundled_product_model():
    d = build_joint(models.bundled("k2_product"))
    for w in ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]):
        proj = region.projected_support(d, w)
        assert proj.status == "optimal"
        assert proj.value == pytest.approx(region.theorem1_support(d, w).value, abs=1e-6)


def test_projected_never_exceeds_closed_form_when_feasible():
    # The closed form is a relaxation of the split-rate system; the reverse
    # direction is checked (and recorded) by the acceptance suite.
    hits = 0
    for seed in range(40):
        d = joint(2, seed)
        for w in region.random_directions(2, 5, seed):
            proj = region.projected_support(d, w)
            if proj.status != "optimal":
                continue
            hits += 1
            assert proj.value <= region.theorem1_support(d, w).value + 1e-6
    assert hits > 0


def test_projected_single_receiver_matches_bound_when_feasible():
    checked = 0
    for seed in range(40):
        d = joint(2, seed)
        for k in (1, 2):
            w = np.eye(2)[k - 1]
            proj = region.projected_support(d, w)
            if proj.status != "optimal":
                continue
            single = max(0.0, C.theorem1_bound(d, setfam.subset(k), (k,)))
            assert proj.value <= single + 1e-6
            checked += 1
    assert checked > 0


# ------------------------------------------------------------- comparison

def test_compare_identical_regions(rng):
    sys = C.theorem1_system(build_joint(models.random_model(3, rng)))
    rep = region.compare_regions(sys, sys, 20, 4)
    assert np.all(rep.gaps == 0.0)
    assert rep.contained
    assert rep.summary()["count"] == 20
    assert len(rep.records()) == 20


def test_compare_zero_directions(rng):
    sys = C.theorem1_system(build_joint(models.random_model(2, rng)))
    rep = region.compare_regions(sys, sys, 0, 0)
    assert rep.summary() == {"count": 0}
    assert rep.records() == []


def test_compare_detects_strict_subset():
    big, small = one_bound_system(1, 1.0), one_bound_system(1, 0.5)
    assert region.compare_regions(big, small, 5, 0).contained
    assert not region.compare_regions(small, big, 5, 0).contained


def test_compare_rejects_mismatched_k():
    with pytest.raises(ValueError):
        region.compare_regions(one_bound_system(1, 1.0), one_bound_system(2, 1.0), 3, 0)


def test_random_directions_on_positive_sphere():
    w = region.random_directions(3, 100, 9)
    assert np.all(w >= 0)
    assert np.allclose(np.linalg.norm(w, axis=1), 1.0)
    assert np.array_equal(w, region.random_directions(3, 100, 9))


# ------------------------------------------------------------ optimization

def test_optimize_budget_one_returns_start():
    spec = models.bundled("k2_noiseless")
    res = region.optimize_pmf(spec, [1.0, 1.0], 1, seed=0)
    assert res.evaluations == 1
    assert np.array_equal(res.pmf, spec.aux_pmf / spec.aux_pmf.sum())
    assert res.value == pytest.approx(region.model_support(spec, [1.0, 1.0]), abs=1e-9)


def test_optimize_non_decreasing_in_budget():
    spec = models.bundled("k2_product")
    values = [region.optimize_pmf(spec, [1.0, 1.0], b, seed=3).value for b in (1, 50, 200, 600)]
    assert values == sorted(values)
    hist = region.optimize_pmf(spec, [1.0, 1.0], 600, seed=3).history
    assert all(x <= y for x, y in zip(hist, hist[1:]))


def test_optimize_deterministic():
    spec = models.bundled("k2_noiseless")
    a = region.optimize_pmf(spec, [1.0, 2.0], 300, seed=5)
    b = region.optimize_pmf(spec, [1.0, 2.0], 300, seed=5)
    assert a.value == b.value and np.array_equal(a.pmf, b.pmf)


def test_optimize_rejects_zero_budget():
    with pytest.raises(ValueError):
        region.optimize_pmf(models.bundled("k2_noiseless"), [1.0, 1.0], 0, seed=0)


def _grid(cells, steps):
    for comp in itertools.combinations(range(steps + cells - 1), cells - 1):
        bars = (-1,) + comp + (steps + cells - 1,)
        yield np.array([bars[i + 1] - bars[i] - 1 for i in range(cells)], float) / steps


@pytest.mark.parametrize("name, optimum", [("k2_noiseless", 1.0), ("k2_product", 2.0)])
def test_coarse_grid_optimum(name, optimum):
    spec = models.bundled(name)
    ev = region.Theorem1Evaluator(spec)
    best = max(ev.support(p, [1.0, 1.0]) for p in _grid(spec.aux_pmf.size, 4))
    assert best == pytest.approx(optimum, abs=1e-9)
