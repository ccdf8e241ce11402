"""Monte Carlo check of the hierarchical covering lemma.

Subcodebooks are generated level by level, top level first.  At level l
every ``U_S`` with ``|S| = l`` gets ``ceil(2^(n r_S))`` sequences drawn
i.i.d. from ``p(u_S | chosen higher-level sequences)``, and the product of
level-l indices is searched for a tuple that is jointly typical with
everything chosen above.  Messages are fixed to 1, so only the excess
indices are simulated.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import setfam
from .constraints import covering_system, cover_excess
from .fmt import fmt_sig
from .infodist import CapacityError, JointDistribution, aux_var

log = logging.getLogger(__name__)

DEFAULT_EPS_BASE = 0.15
DEFAULT_SEARCH_CAP = 2 ** 24


def default_eps(k_total: int, base: float = DEFAULT_EPS_BASE) -> tuple[float, ...]:
    """``eps_l = base * (1 + 0.25 (K - l))`` for l = 1..K."""
    return tuple(base * (1.0 + 0.25 * (k_total - l)) for l in range(1, k_total + 1))


@dataclass(frozen=True)
class CoverTrialConfig:
    """Blocklength, excess rates (bits/symbol), epsilon schedule eps_1 > ... > eps_K."""

    n: int
    rates: dict
    eps: tuple
    trials: int = 1
    seed: int = 0
    search_cap: int = DEFAULT_SEARCH_CAP

    def validate(self, k_total: int) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.eps) != k_total:
            raise ValueError(f"eps schedule needs {k_total} entries, got {len(self.eps)}")
        if any(not 0.0 < e < 1.0 for e in self.eps):
            raise ValueError("every eps must lie in (0, 1)")
        if any(a <= b for a, b in zip(self.eps, self.eps[1:])):
            raise ValueError("eps schedule must be strictly decreasing in level")
        top = setfam.full_set(k_total)
        for s, r in self.rates.items():
            if s == top or s not in setfam.power_set(k_total):
                raise ValueError(f"no excess rate exists for subset {setfam.format_subset(s, k_total)}")
            if not r >= 0.0:
                raise ValueError("rates must be >= 0")

    def count(self, s: int) -> int:
        return math.ceil(2.0 ** (self.n * self.rates.get(s, 0.0)) - 1e-9)

    def trial_seed(self, t: int) -> int:
        """``seed64 ^ t``, where ``seed64`` spreads ``seed`` over 64 bits.

        XOR with a small raw seed would only permute the same low trial
        seeds, so seeds 7 and 99 would share almost every trial.
        """
        seed64 = int(np.random.SeedSequence(self.seed).generate_state(1, np.uint64)[0])
        return seed64 ^ t


@dataclass
class CoverOutcome:
    success: bool
    chosen: dict = field(default_factory=dict)
    failure_level: int | None = None


@dataclass
class CoverEstimate:
    n: int
    rates: dict
    trials: int
    failures: int
    levels: dict
    low: float
    high: float

    @property
    def estimate(self) -> float:
        return self.failures / self.trials

    def record(self, k_total: int) -> str:
        rates = ",".join(f"{setfam.format_subset(s, k_total)}={fmt_sig(r)}"
                         for s, r in sorted(self.rates.items(), key=lambda x: setfam.canonical_key(x[0])))
        return (f"n={self.n}\trates={rates}\ttrials={self.trials}\tfailures={self.failures}"
                f"\testimate={fmt_sig(self.estimate)}\tlow={fmt_sig(self.low)}\thigh={fmt_sig(self.high)}")


# ------------------------------------------------------------- typicality

def _cell_counts(codes: np.ndarray, n_cells: int) -> np.ndarray:
    """Counts per cell for every row of ``codes`` (shape (rows, n))."""
    rows = codes.shape[0]
    flat = codes + (np.arange(rows) * n_cells)[:, None]
    return np.bincount(flat.ravel(), minlength=rows * n_cells).reshape(rows, n_cells)


def _typical_counts(counts: np.ndarray, probs: np.ndarray, n: int, eps: float) -> np.ndarray:
    expected = n * probs
    return np.all(np.abs(counts - expected) <= eps * expected + 1e-9, axis=-1)


def typical(seqs, d: JointDistribution, eps: float) -> bool:
    """Robust typicality: ``|freq(a) - p(a)| <= eps p(a)`` for every joint symbol ``a``.

    ``seqs`` holds one integer sequence per variable of ``d``, in order.
    """
    seqs = [np.asarray(s, dtype=np.int64) for s in seqs]
    if len(seqs) != len(d.variables):
        raise ValueError(f"{len(seqs)} sequences for {len(d.variables)} variables")
    lengths = {s.size for s in seqs}
    if len(lengths) != 1:
        raise ValueError(f"sequence lengths differ: {sorted(lengths)}")
    n = lengths.pop()
    if n < 1:
        raise ValueError("sequences must be nonempty")
    code = np.ravel_multi_index(tuple(seqs), d.sizes)
    counts = np.bincount(code, minlength=d.probs.size)
    return bool(_typical_counts(counts, d.probs.ravel(), n, eps))


# ---------------------------------------------------------------- sampling

def _aux_table(d: JointDistribution, masks) -> np.ndarray:
    return d.marginal(tuple(aux_var(s) for s in masks))


def _parents(s: int, k_total: int) -> tuple[int, ...]:
    return tuple(t for t in setfam.a_all(s, k_total) if t != s)


def gen_level(d: JointDistribution, l: int, parents: dict, counts: dict,
              rng: np.random.Generator, n: int | None = None) -> dict:
    """Subcodebooks for every ``U_S`` with ``|S| = l``, given the chosen higher-level sequences.

    Returns ``{S: array of shape (count_S, n)}``.  Symbol t of every
    codeword is drawn from ``p(u_S | parent symbols at t)``; codewords are
    independent across S and across indices.  ``n`` is only needed at the
    top level, where there are no parents to take the length from.
    """
    k = _k_of(d)
    out = {}
    lengths = {np.asarray(p).size for p in parents.values()}
    if len(lengths) > 1:
        raise ValueError("parent sequences have different lengths")
    if lengths:
        n = lengths.pop()
    for s in setfam.a_level(l, k):
        par = _parents(s, k)
        missing = [t for t in par if t not in parents]
        if missing:
            raise ValueError(f"missing parent sequence for U{setfam.format_subset(missing[0], k)}")
        table = _aux_table(d, par + (s,))
        count = int(counts.get(s, 1))
        if par:
            flat = table.reshape(-1, table.shape[-1])
            pcode = np.ravel_multi_index(tuple(np.asarray(parents[t]) for t in par), table.shape[:-1])
            mass = flat.sum(axis=1)[pcode]
            bad = np.flatnonzero(mass <= 0)
            if bad.size:
                raise ValueError(f"zero-probability parent configuration at position {int(bad[0])}"
                                 f" for U{setfam.format_subset(s, k)}")
            cond = flat[pcode] / mass[:, None]
        else:
            if n is None or n < 1:
                raise ValueError("a blocklength n >= 1 is required at the top level")
            cond = np.broadcast_to(table / table.sum(), (n, table.size))
        cdf = np.cumsum(cond, axis=1)
        cdf /= cdf[:, -1:]
        u = rng.random((count, cdf.shape[0]))
        sym = np.zeros(u.shape, dtype=np.int64)
        for a in range(cdf.shape[1] - 1):
            sym += u >= cdf[:, a]
        out[s] = sym
    return out


# ------------------------------------------------------------------ search

def _search_level(books: dict, order: tuple, base_code: np.ndarray, base_size: int,
                  table: np.ndarray, n: int, eps: float) -> tuple | None:
    """Depth-first search for one index per subset in ``order``.

    Branches whose partial tuple fails typicality of the corresponding
    marginal are cut: marginal typicality is necessary for joint typicality.
    Returns the lexicographically first typical index tuple or None.
    """
    lead = table.ndim - len(order)
    sizes = table.shape[lead:]
    margins = []
    for depth in range(1, len(order) + 1):
        drop = tuple(range(lead + depth, table.ndim))
        m = table.sum(axis=drop) if drop else table
        margins.append(m.ravel())

    def descend(depth: int, code: np.ndarray, size: int, chosen: tuple):
        s = order[depth]
        cands = books[s]
        a = sizes[depth]
        codes = code[None, :] * a + cands
        ok = _typical_counts(_cell_counts(codes, size * a), margins[depth], n, eps)
        for j in np.flatnonzero(ok):
            if depth + 1 == len(order):
                return chosen + (int(j),)
            found = descend(depth + 1, codes[j], size * a, chosen + (int(j),))
            if found is not None:
                return found
        return None

    return descend(0, base_code, base_size, ())


def cover_search(d: JointDistribution, cfg: CoverTrialConfig, rng: np.random.Generator) -> CoverOutcome:
    """Level-descending search for a jointly typical codeword tuple."""
    k = _k_of(d)
    cfg.validate(k)
    n = cfg.n
    top = setfam.full_set(k)
    for l in range(1, k):
        total = 1
        for s in setfam.a_level(l, k):
            total *= cfg.count(s)
        if total > cfg.search_cap:
            raise CapacityError(f"level {l} index space has {total} tuples, cap is {cfg.search_cap}")
    chosen_seq = gen_level(d, k, {}, {top: 1}, rng, n=n)
    chosen_seq = {top: chosen_seq[top][0]}
    chosen_idx = {top: 0}
    top_table = _aux_table(d, (top,))
    if not _typical_counts(np.bincount(chosen_seq[top], minlength=top_table.size),
                           top_table.ravel(), n, cfg.eps[k - 1]):
        return CoverOutcome(False, chosen_idx, k)
    for l in range(k - 1, 0, -1):
        counts = {s: cfg.count(s) for s in setfam.a_level(l, k)}
        books = gen_level(d, l, chosen_seq, counts, rng)
        above = tuple(sorted(chosen_seq, key=setfam.canonical_key))
        order = setfam.a_level(l, k)
        table = _aux_table(d, above + order)
        base_shape = table.shape[:len(above)]
        base_code = np.ravel_multi_index(tuple(chosen_seq[t] for t in above), base_shape)
        found = _search_level(books, order, base_code, int(np.prod(base_shape)), table, n, cfg.eps[l - 1])
        if found is None:
            return CoverOutcome(False, chosen_idx, l)
        for s, j in zip(order, found):
            chosen_idx[s] = j
            chosen_seq[s] = books[s][j]
    return CoverOutcome(True, chosen_idx, None)


def _k_of(d: JointDistribution) -> int:
    ys = [v.index for v in d.variables if v.kind == "Y"]
    if ys:
        return max(ys)
    return max(setfam.popcount(v.index) for v in d.variables if v.kind == "U")


def _trial(args) -> tuple[bool, int | None]:
    d, cfg, t = args
    out = cover_search(d, cfg, np.random.default_rng(cfg.trial_seed(t)))
    return out.success, out.failure_level


def clopper_pearson(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    alpha = 1.0 - level
    low = 0.0 if failures == 0 else float(stats.beta.ppf(alpha / 2, failures, trials - failures + 1))
    high = 1.0 if failures == trials else float(stats.beta.ppf(1 - alpha / 2, failures + 1, trials - failures))
    return low, high


def estimate_cover_failure(d: JointDistribution, cfg: CoverTrialConfig, workers: int = 1) -> CoverEstimate:
    """Failure fraction over ``cfg.trials`` trials, trial t seeded with ``cfg.trial_seed(t)``.

    ``workers > 1`` spreads trials over processes; the result does not
    depend on the worker count.
    """
    k = _k_of(d)
    cfg.validate(k)
    jobs = [(d, cfg, t) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, cfg.trials // (4 * workers))))
    else:
        results = [_trial(j) for j in jobs]
    failures = sum(1 for ok, _ in results if not ok)
    levels: dict[int, int] = {}
    for ok, lvl in results:
        if not ok:
            levels[lvl] = levels.get(lvl, 0) + 1
    low, high = clopper_pearson(failures, cfg.trials)
    return CoverEstimate(cfg.n, dict(cfg.rates), cfg.trials, failures, levels, low, high)


# -------------------------------------------------------------- rate design

def margin_rates(d: JointDistribution, margin: float, tol: float = 1e-10) -> dict:
    """Balanced excess rates giving every nontrivial covering constraint at least ``margin`` slack.

    ``r_S = max over J containing S of (rhs(J) + margin) / |J|``, taken over
    constraints with a positive right-hand side; subsets in no such
    constraint get rate 0.  Splitting each requirement evenly keeps the
    per-level index space balanced.
    """
    k = _k_of(d)
    rates = {s: 0.0 for s in setfam.power_set(k) if s != setfam.full_set(k)}
    for ineq in covering_system(d):
        if ineq.bound <= tol:
            continue
        share = (ineq.bound + margin) / len(ineq.coeffs)
        for v, _ in ineq.coeffs:
            rates[v.subset] = max(rates[v.subset], share)
    return rates


def binding_constraints(d: JointDistribution, rates: dict, margin: float, tol: float = 1e-9) -> list:
    """Nontrivial covering constraints whose slack under ``rates`` is exactly ``margin``."""
    out = []
    for ineq in covering_system(d):
        if ineq.bound <= tol:
            continue
        total = sum(rates.get(v.subset, 0.0) * c for v, c in ineq.coeffs)
        if abs(total - ineq.bound - margin) <= tol:
            out.append(ineq)
    return out


def undercut_rates(rates: dict, ineq, shortfall: float) -> dict:
    """Copy of ``rates`` with the subsets of ``ineq`` lowered evenly to ``bound - shortfall``."""
    target = ineq.bound - shortfall
    if target < 0:
        raise ValueError("constraint bound is smaller than the shortfall")
    out = dict(rates)
    for v, _ in ineq.coeffs:
        out[v.subset] = target / len(ineq.coeffs)
    return out
