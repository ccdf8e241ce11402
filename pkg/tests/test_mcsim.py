import numpy as np
import pytest

from bcregion import mcsim, models, setfam
from bcregion.infodist import CapacityError, JointDistribution, Var, build_joint
from bcregion.setfam import subset as S

from conftest import constant_model, independent_model

TOP2 = S(1, 2)


def coin(p=0.5):
    return JointDistribution((Var("U", 1),), np.array([p, 1 - p]))


def cfg(n, rates, eps=None, k=2, **kw):
    return mcsim.CoverTrialConfig(n, rates, eps or mcsim.default_eps(k, 0.5), **kw)


def correlated_pair(flip=0.2):
    """K=2 with a trivial common part: U1 a fair bit, U2 = U1 flipped w.p. ``flip``."""
    alph = {S(1): 2, S(2): 2, TOP2: 1}
    pmf = np.array([[1 - flip, flip], [flip, 1 - flip]]) / 2
    chan = models.product_channel([models.bsc(0.1), models.bsc(0.1)])
    return models.make_spec(2, alph, pmf.ravel(), np.zeros(4, int), 1, (2, 2), chan[:4])


# -------------------------------------------------------------- typicality

def test_exact_type_is_typical():
    d = coin(0.25)
    seq = [0, 1, 1, 1] * 5
    assert mcsim.typical([seq], d, 1e-6)


def test_zero_probability_symbol_never_typical():
    d = coin(1.0)
    assert mcsim.typical([[0] * 10], d, 0.1)
    assert not mcsim.typical([[0] * 9 + [1]], d, 0.99)


def test_typical_argument_errors():
    d = JointDistribution((Var("U", 1), Var("U", 2)), np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        mcsim.typical([[0, 1], [0]], d, 0.1)
    with pytest.raises(ValueError):
        mcsim.typical([[0, 1]], d, 0.1)
    with pytest.raises(ValueError):
        mcsim.typical([[], []], d, 0.1)


def test_typical_law_of_large_numbers():
    rng = np.random.default_rng(11)
    d = coin()
    hits = sum(mcsim.typical([rng.integers(0, 2, 1000)], d, 0.2) for _ in range(1000))
    assert hits >= 990


# --------------------------------------------------------------- sampling

def test_gen_level_top_needs_blocklength(rng):
    d = build_joint(models.random_model(2, rng))
    with pytest.raises(ValueError):
        mcsim.gen_level(d, 2, {}, {TOP2: 1}, rng)
    books = mcsim.gen_level(d, 2, {}, {TOP2: 1}, rng, n=7)
    assert books[TOP2].shape == (1, 7)


def test_gen_level_deterministic_copy():
    # U1 = U2 = U12 with probability one
    alph = {S(1): 2, S(2): 2, TOP2: 2}
    pmf = np.zeros((2, 2, 2))
    pmf[0, 0, 0] = pmf[1, 1, 1] = 0.5
    spec = models.make_spec(2, alph, pmf.ravel(), np.zeros(8, int), 1, (2, 2), [0.25] * 4)
    d = build_joint(spec)
    parent = np.array([0, 1, 1, 0, 1, 0, 0, 1])
    books = mcsim.gen_level(d, 1, {TOP2: parent}, {S(1): 5, S(2): 3}, np.random.default_rng(0))
    assert books[S(1)].shape == (5, 8) and books[S(2)].shape == (3, 8)
    assert np.all(books[S(1)] == parent) and np.all(books[S(2)] == parent)


def test_gen_level_zero_probability_parent():
    alph = {S(1): 2, S(2): 2, TOP2: 2}
    pmf = np.zeros((2, 2, 2))
    pmf[:, :, 0] = 0.25
    spec = models.make_spec(2, alph, pmf.ravel(), np.zeros(8, int), 1, (2, 2), [0.25] * 4)
    d = build_joint(spec)
    with pytest.raises(ValueError, match="position 2"):
        mcsim.gen_level(d, 1, {TOP2: np.array([0, 0, 1])}, {}, np.random.default_rng(0))


def test_gen_level_missing_parent(rng):
    d = build_joint(models.random_model(3, rng))
    with pytest.raises(ValueError, match="missing parent"):
        mcsim.gen_level(d, 1, {S(1, 2, 3): np.zeros(4, int)}, {}, rng)


def test_gen_level_conditional_frequencies():
    spec = models.bundled("k3_bsbc")
    d = build_joint(spec)
    rng = np.random.default_rng(5)
    n, count = 1000, 100
    top = S(1, 2, 3)
    parents = {top: mcsim.gen_level(d, 3, {}, {top: 1}, rng, n=n)[top][0]}
    books = mcsim.gen_level(d, 2, parents, {s: count for s in setfam.a_level(2, 3)}, rng)
    table = d.marginal(tuple(Var("U", m) for m in (top, S(1, 2))))
    for a in range(table.shape[0]):
        at = parents[top] == a
        cond = table[a] / table[a].sum()
        syms = books[S(1, 2)][:, at].ravel()
        for b, p in enumerate(cond):
            freq = np.mean(syms == b)
            sigma = np.sqrt(p * (1 - p) / syms.size)
            assert abs(freq - p) <= 4 * sigma + 1e-12


# ------------------------------------------------------------------ search

def test_alphabet_one_always_succeeds():
    d = build_joint(constant_model(3))
    c = mcsim.CoverTrialConfig(5, {}, mcsim.default_eps(3), trials=20, seed=1)
    est = mcsim.estimate_cover_failure(d, c)
    assert est.failures == 0


def test_independent_aux_rate_zero_improves_with_n():
    d = build_joint(independent_model(2, np.random.default_rng(2)))
    small = mcsim.estimate_cover_failure(d, cfg(50, {}, trials=200, seed=3))
    large = mcsim.estimate_cover_failure(d, cfg(4000, {}, trials=200, seed=3))
    assert large.estimate <= small.estimate
    assert large.estimate <= 0.05


def test_success_satisfies_typicality(monkeypatch):
    d = build_joint(models.bundled("k3_bsbc"))
    c = mcsim.CoverTrialConfig(12, mcsim.margin_rates(d, 0.3), mcsim.default_eps(3, 0.5))
    books = {}
    real = mcsim.gen_level

    def recording(*args, **kwargs):
        out = real(*args, **kwargs)
        books.update(out)
        return out

    monkeypatch.setattr(mcsim, "gen_level", recording)
    order = setfam.power_set(3)
    aux = d.restrict([Var("U", s) for s in order])
    successes = 0
    for seed in range(40):
        books.clear()
        out = mcsim.cover_search(d, c, np.random.default_rng(seed))
        if not out.success:
            continue
        successes += 1
        assert set(out.chosen) == set(order)
        seqs = [books[s][out.chosen[s]] for s in order]
        assert mcsim.typical(seqs, aux, c.eps[0])
    assert successes > 0


def test_capacity_error():
    d = build_joint(models.bundled("k3_bsbc"))
    c = mcsim.CoverTrialConfig(40, {s: 0.3 for s in setfam.a_level(2, 3)}, mcsim.default_eps(3))
    with pytest.raises(CapacityError, match="level 2"):
        mcsim.cover_search(d, c, np.random.default_rng(0))


@pytest.mark.parametrize("bad", [
    dict(n=0), dict(trials=0), dict(eps=(0.2, 0.3)), dict(eps=(0.3,)), dict(eps=(1.2, 0.3)),
    dict(rates={TOP2: 0.1}), dict(rates={S(1): -0.1}),
])
def test_config_validation(bad):
    args = dict(n=4, rates={}, eps=(0.3, 0.2), trials=1)
    args.update(bad)
    with pytest.raises(ValueError):
        mcsim.CoverTrialConfig(**args).validate(2)


def test_counts_use_ceiling():
    c = cfg(10, {S(1): 0.1, S(2): 0.0, TOP2: 0.0})
    assert c.count(S(1)) == 2
    assert c.count(S(2)) == 1
    assert cfg(3, {S(1): 0.5}).count(S(1)) == 3


# ---------------------------------------------------------------- estimates

def test_clopper_pearson_values():
    assert mcsim.clopper_pearson(0, 1) == pytest.approx((0.0, 0.975), abs=1e-12)
    low, high = mcsim.clopper_pearson(5, 10)
    assert low == pytest.approx(0.187086, abs=1e-6)
    assert high == pytest.approx(0.812914, abs=1e-6)
    assert mcsim.clopper_pearson(10, 10)[1] == 1.0


def test_single_guaranteed_trial():
    d = build_joint(constant_model(2))
    est = mcsim.estimate_cover_failure(d, cfg(3, {}, trials=1))
    assert est.estimate == 0.0
    assert (est.low, est.high) == pytest.approx((0.0, 0.975), abs=1e-12)


def test_reproducible_and_worker_independent():
    d = build_joint(correlated_pair())
    c = cfg(16, mcsim.margin_rates(d, 0.1), trials=60, seed=123)
    a = mcsim.estimate_cover_failure(d, c)
    b = mcsim.estimate_cover_failure(d, c)
    par = mcsim.estimate_cover_failure(d, c, workers=2)
    assert a.record(2) == b.record(2) == par.record(2)
    assert a.levels == par.levels


def test_record_format():
    d = build_joint(constant_model(2))
    est = mcsim.estimate_cover_failure(d, cfg(3, {S(1): 0.25}, trials=4))
    assert est.record(2) == ("n=3\trates=1=0.250000000000\ttrials=4\tfailures=0"
                             "\testimate=0.000000000000\tlow=0.000000000000\thigh=0.602364635616")


def test_paired_rate_monotonicity():
    d = build_joint(models.bundled("k3_bsbc"))
    base = mcsim.margin_rates(d, 0.0)
    raised = {s: r + 0.1 for s, r in base.items()}
    eps = mcsim.default_eps(3, 0.5)
    rng_of = lambda t: np.random.default_rng(77 ^ t)  # noqa: E731
    inversions = 0
    for t in range(500):
        lo = mcsim.cover_search(d, mcsim.CoverTrialConfig(16, base, eps), rng_of(t)).success
        hi = mcsim.cover_search(d, mcsim.CoverTrialConfig(16, raised, eps), rng_of(t)).success
        inversions += lo and not hi
    assert inversions <= 10


def test_bivariate_covering_decays():
    d = build_joint(correlated_pair())
    rates = mcsim.margin_rates(d, 0.2)
    est = [mcsim.estimate_cover_failure(d, cfg(n, rates, trials=300, seed=9)).estimate
           for n in (8, 16, 32)]
    assert est[0] > est[1] >= est[2]
    assert est[2] <= 0.05


# -------------------------------------------------------------- rate design

def test_margin_rates_give_slack():
    d = build_joint(models.bundled("k3_bsbc"))
    rates = mcsim.margin_rates(d, 0.15)
    for ineq in mcsim.covering_system(d):
        if ineq.bound > 1e-10:
            total = sum(rates[v.subset] for v, _ in ineq.coeffs)
            assert total >= ineq.bound + 0.15 - 1e-12
    binding = mcsim.binding_constraints(d, rates, 0.15)
    assert binding
    below = mcsim.undercut_rates(rates, binding[0], 0.15)
    total = sum(below[v.subset] for v, _ in binding[0].coeffs)
    assert total == pytest.approx(binding[0].bound - 0.15, abs=1e-12)


def test_undercut_rejects_large_shortfall():
    d = build_joint(models.bundled("k3_bsbc"))
    rates = mcsim.margin_rates(d, 0.15)
    ineq = mcsim.binding_constraints(d, rates, 0.15)[0]
    with pytest.raises(ValueError):
        mcsim.undercut_rates(rates, ineq, ineq.bound + 1.0)


def test_trial_seeds_differ_between_small_seeds():
    a = {cfg(4, {}, seed=7).trial_seed(t) for t in range(1000)}
    b = {cfg(4, {}, seed=99).trial_seed(t) for t in range(1000)}
    assert len(a) == 1000 and not a & b
    assert cfg(4, {}, seed=7).trial_seed(5) == cfg(4, {}, seed=7).trial_seed(0) ^ 5
