"""Polytope analysis of rate-region systems.

Support functions and membership over :class:`RegionSystem`, the split-rate
linear program that stands in for Fourier-Motzkin elimination, seeded
region comparison, and local search over auxiliary pmfs.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from . import setfam
from .constraints import (CANCEL_ULPS, RegionSystem, RateVar, cover_excess, covering_system, packing_system,
                          per_receiver, split_rate, theorem1_expr, theorem1_system,
                          theorem1_terms, tilde_sum)
from .fmt import fmt_sig
from .infodist import JointDistribution, ModelSpec, Var, build_joint
from .lp import LpResult, linprog_max

log = logging.getLogger(__name__)

MEMBER_TOL = 1e-9
CONTAIN_TOL = 1e-8


def _weights(w, k_total: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size != k_total:
        raise ValueError(f"weight vector has {w.size} entries, expected {k_total}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return w


def support(sys: RegionSystem, w) -> LpResult:
    """Maximize ``sum_k w_k R_k`` over the region described by ``sys``."""
    w = _weights(w, sys.k_total)
    col = {v: i for i, v in enumerate(sys.variables)}
    c = np.zeros(len(sys.variables))
    for k in range(1, sys.k_total + 1):
        v = per_receiver(k)
        if v in col:
            c[col[v]] = w[k - 1]
        elif w[k - 1] != 0.0:
            raise ValueError(f"system has no variable R{k}")
    a, b = sys.as_matrix()
    res = linprog_max(c, a, b)
    if res.status == "unbounded":
        log.warning("support is unbounded in direction %s", w.tolist())
    return res


def membership(sys: RegionSystem, point) -> bool:
    """True iff ``point`` (one rate per receiver) satisfies every inequality within 1e-9."""
    point = _weights(point, sys.k_total)
    if np.any(point < -MEMBER_TOL):
        return False
    rates = {per_receiver(k): float(point[k - 1]) for k in range(1, sys.k_total + 1)}
    return all(ineq.holds(rates, MEMBER_TOL) for ineq in sys.inequalities)


def witness_point(sys: RegionSystem, res: LpResult) -> np.ndarray:
    """Per-receiver rates of an LP witness."""
    col = {v: i for i, v in enumerate(sys.variables)}
    return np.array([res.witness[col[per_receiver(k)]] for k in range(1, sys.k_total + 1)])


# ---------------------------------------------------------------- projection

def split_rate_variables(k_total: int) -> tuple[RateVar, ...]:
    """Variables of the pre-elimination system: split rates, then excess rates."""
    top = setfam.full_set(k_total)
    split = [split_rate(k, s) for s in setfam.power_set(k_total) for k in setfam.elements(s)]
    excess = [cover_excess(s) for s in setfam.power_set(k_total) if s != top]
    return tuple(split + excess)


def projected_system(d: JointDistribution) -> tuple[tuple[RateVar, ...], np.ndarray, np.ndarray]:
    """Covering and packing constraints expressed over split and excess rates.

    ``Rtilde_S`` expands to ``sum_k R_{k,S} + r_S``; the top-level codebook
    carries no excess index so ``r_K`` does not exist.
    """
    k = max(v.index for v in d.variables if v.kind == "Y")
    variables = split_rate_variables(k)
    col = {v: i for i, v in enumerate(variables)}
    rows, rhs = [], []
    for ineq in covering_system(d):
        row = np.zeros(len(variables))
        for v, c in ineq.coeffs:
            row[col[v]] -= c
        rows.append(row)
        rhs.append(-ineq.bound)
    for ineq in packing_system(d):
        row = np.zeros(len(variables))
        for v, c in ineq.coeffs:
            s = v.subset
            for r in setfam.elements(s):
                row[col[split_rate(r, s)]] += c
            if cover_excess(s) in col:
                row[col[cover_excess(s)]] += c
        rows.append(row)
        rhs.append(ineq.bound)
    return variables, np.array(rows), np.array(rhs)


def projected_support(d: JointDistribution, w) -> LpResult:
    """Support of the split-rate system, projected onto per-receiver rates.

    An infeasible status means no excess rates satisfy covering and packing
    together for this pmf; it is logged and returned, not raised.
    """
    k = max(v.index for v in d.variables if v.kind == "Y")
    w = _weights(w, k)
    variables, a, b = projected_system(d)
    c = np.array([w[v.receiver - 1] if v.kind == "Rsplit" else 0.0 for v in variables])
    res = linprog_max(c, a, b)
    if res.status == "infeasible":
        log.error("split-rate system is infeasible: covering and packing bounds conflict")
    return res


# ---------------------------------------------------------------- comparison

def random_directions(k_total: int, count: int, seed: int) -> np.ndarray:
    """Uniform draws on the nonnegative unit sphere (normalized |Gaussian|)."""
    rng = np.random.default_rng(seed)
    g = np.abs(rng.standard_normal((count, k_total)))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


@dataclass
class CompareReport:
    seed: int
    directions: np.ndarray
    values_a: np.ndarray
    values_b: np.ndarray
    gaps: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.gaps = self.values_a - self.values_b

    @property
    def contained(self) -> bool:
        """True iff region b lies inside region a in every sampled direction."""
        return bool(np.all(self.gaps >= -CONTAIN_TOL))

    def summary(self) -> dict:
        if self.gaps.size == 0:
            return {"count": 0}
        return {"count": int(self.gaps.size), "min": float(self.gaps.min()),
                "max": float(self.gaps.max()), "mean": float(self.gaps.mean())}

    def records(self) -> list[str]:
        lines = []
        for w, va, vb, g in zip(self.directions, self.values_a, self.values_b, self.gaps):
            dirs = ",".join(fmt_sig(x) for x in w)
            lines.append(f"{dirs}\t{fmt_sig(va)}\t{fmt_sig(vb)}\t{fmt_sig(g)}")
        return lines


def compare_regions(a: RegionSystem, b: RegionSystem, dirs: int, seed: int) -> CompareReport:
    if a.k_total != b.k_total:
        raise ValueError("regions have different receiver counts")
    w = random_directions(a.k_total, dirs, seed)
    va = np.array([_value(support(a, x)) for x in w])
    vb = np.array([_value(support(b, x)) for x in w])
    return CompareReport(seed, w, va, vb)


def _value(res: LpResult) -> float:
    if res.status == "optimal":
        return res.value
    return float("inf") if res.status == "unbounded" else float("-inf")


# ------------------------------------------------------- fast re-evaluation

class Theorem1Evaluator:
    """Theorem-1 bounds for many auxiliary pmfs sharing one channel and encoder.

    Every bound is a fixed linear combination of joint entropies of
    auxiliaries and at most one output, so the entropies are computed with a
    single weighted bincount per output instead of rebuilding the joint.
    """

    def __init__(self, template: ModelSpec):
        template.validate()
        self.template = template
        self.k = k = template.k_total
        self.terms = theorem1_terms(k)
        exprs = [theorem1_expr(k, t, pi) for t, pi in self.terms]
        atoms = sorted({a for e in exprs for a in e}, key=lambda a: sorted(a))
        self.coef = np.zeros((len(exprs), len(atoms)))
        pos = {a: i for i, a in enumerate(atoms)}
        for r, e in enumerate(exprs):
            for a, c in e.items():
                self.coef[r, pos[a]] = c

        order = template.aux_order
        shape = template.aux_shape
        n_aux = int(np.prod(shape))
        aux_index = np.indices(shape).reshape(len(shape), n_aux)
        chan = template.channel_table()
        self._y_given_x = []
        for k_out in range(1, k + 1):
            other = tuple(i for i in range(1, k + 1) if i != k_out)
            self._y_given_x.append(chan.sum(axis=other) if other else chan)
        self._f = template.symbol_map

        # Stack p(u) and p(u, y_k) for every k into one vector; a sparse
        # 0/1 matrix maps it to every marginal cell the atoms need, and a
        # second one sums cell entropies per atom.
        self._channel_rows = [yx[self._f] for yx in self._y_given_x]
        block_start = [0, n_aux]
        for a in template.y_alphabets[:-1]:
            block_start.append(block_start[-1] + n_aux * a)
        width = block_start[-1] + n_aux * template.y_alphabets[-1]
        rows, cols, owner = [], [], []
        n_cells = 0
        for ai, atom in enumerate(atoms):
            ys = [v.index for v in atom if v.kind == "Y"]
            if len(ys) > 1 or any(v.kind == "X" for v in atom):
                raise ValueError("unsupported entropy atom")
            out = ys[0] if ys else 0
            ny = template.y_alphabets[out - 1] if out else 1
            code = np.zeros(n_aux, dtype=np.int64)
            size = 1
            for ax in (order.index(v.index) for v in atom if v.kind == "U"):
                code = code * shape[ax] + aux_index[ax]
                size *= shape[ax]
            cell = (code[:, None] * ny + np.arange(ny)[None, :]).ravel()
            rows.append(cell + n_cells)
            cols.append(block_start[out] + np.arange(n_aux * ny))
            owner.append(np.full(size * ny, ai))
            n_cells += size * ny
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        self._marginals = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n_cells, width))
        owner = np.concatenate(owner)
        self._atom_sum = sparse.csr_matrix((np.ones(n_cells), (owner, np.arange(n_cells))),
                                           shape=(len(atoms), n_cells))
        self._t_list = sorted({t for t, _ in self.terms}, key=setfam.canonical_key)
        tpos = {t: i for i, t in enumerate(self._t_list)}
        self._t_pos = np.array([tpos[t] for t, _ in self.terms])
        self._vertices = SumRatePolytope(k, self._t_list)

    def atom_entropies(self, pmf: np.ndarray) -> np.ndarray:
        pmf = np.asarray(pmf, dtype=float)
        pmf = pmf / pmf.sum()
        stacked = np.concatenate([pmf] + [(pmf[:, None] * w).ravel() for w in self._channel_rows])
        q = self._marginals @ stacked
        ent = np.zeros_like(q)
        nz = q > 0
        ent[nz] = -q[nz] * np.log2(q[nz])
        return self._atom_sum @ ent

    def bounds(self, pmf: np.ndarray) -> np.ndarray:
        """Unclamped Theorem-1 bounds in ``theorem1_terms`` order."""
        h = self.atom_entropies(pmf)
        b = self.coef @ h
        noise = CANCEL_ULPS * 2.0 ** -52 * (np.abs(self.coef) @ np.abs(h))
        b[np.abs(b) <= noise] = 0.0
        return b

    def tightest(self, pmf: np.ndarray) -> np.ndarray:
        """Clamped bound per nonempty T (canonical order), minimized over orderings."""
        b = np.maximum(self.bounds(pmf), 0.0)
        out = np.full(len(self._t_list), np.inf)
        np.minimum.at(out, self._t_pos, b)
        return out

    def support(self, pmf: np.ndarray, w) -> float:
        """Support of the clamped Theorem-1 region in direction ``w``."""
        return self._vertices.support(self.tightest(pmf), _weights(w, self.k))


class SumRatePolytope:
    """``{R >= 0 : sum_{k in T} R_k <= c_T}`` over every nonempty T.

    Bounded and contains the origin when ``c >= 0``, so the support is the
    best feasible vertex.  All bases are pre-inverted once; evaluation is
    a few small matrix products.  Used for K <= 3 where there are at most
    120 bases; larger K falls back to the simplex.
    """

    MAX_BASES = 5000

    def __init__(self, k_total: int, ts: Sequence[int]):
        self.k = k_total
        self.ts = tuple(ts)
        self.rows = np.array([[1.0 if t >> (k - 1) & 1 else 0.0 for k in range(1, k_total + 1)]
                              for t in self.ts])
        full = np.vstack([self.rows, -np.eye(k_total)])
        n_rows = full.shape[0]
        combos = list(itertools.combinations(range(n_rows), k_total))
        self.enumerate = len(combos) <= self.MAX_BASES
        if not self.enumerate:
            return
        inv, sel = [], []
        for c in combos:
            m = full[list(c)]
            if abs(np.linalg.det(m)) > 1e-9:
                inv.append(np.linalg.inv(m))
                sel.append(c)
        self._inv = np.array(inv)
        self._sel = np.array(sel)

    def support(self, c: np.ndarray, w: np.ndarray) -> float:
        if not self.enumerate:
            return _value(linprog_max(w, self.rows, c))
        rhs = np.concatenate([c, np.zeros(self.k)])[self._sel]
        v = np.einsum("bij,bj->bi", self._inv, rhs)
        tol = 1e-9 * max(1.0, float(c.max(initial=0.0)))
        ok = np.all(v >= -tol, axis=1) & np.all(v @ self.rows.T <= c + tol, axis=1)
        return float((v[ok] @ w).max())


@dataclass
class OptimizeResult:
    pmf: np.ndarray
    value: float
    evaluations: int
    history: list[float]


RESTART_EVERY = 400


def optimize_pmf(template: ModelSpec, w, budget: int, seed: int,
                 restart_every: int = RESTART_EVERY) -> OptimizeResult:
    """Random-restart coordinate ascent on the auxiliary pmf.

    Starts from ``template.aux_pmf``.  Each step perturbs one probability
    cell, renormalizes, and keeps the move if the Theorem-1 support in
    direction ``w`` improves.  Every ``restart_every`` evaluations the walk
    restarts from a Dirichlet(1) draw.  The proposal stream does not depend
    on ``budget``, so the best value is non-decreasing in the budget.
    Returns the best pmf found: a lower bound, not a certified optimum.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    ev = Theorem1Evaluator(template)
    w = _weights(w, template.k_total)
    rng = np.random.default_rng(seed)
    cur = template.aux_pmf / template.aux_pmf.sum()
    cur_v = ev.support(cur, w)
    best, best_v = cur.copy(), cur_v
    history = [best_v]
    n = cur.size
    evals = 1
    while evals < budget:
        if evals % restart_every == 0:
            cand = rng.dirichlet(np.ones(n))
            cand_v = ev.support(cand, w)
            cur, cur_v = cand, cand_v
        else:
            cell = int(rng.integers(n))
            step = rng.standard_normal() * 10.0 ** rng.uniform(-3.0, -0.3)
            cand = cur.copy()
            cand[cell] = max(0.0, cand[cell] + step)
            total = cand.sum()
            if total <= 0.0:
                evals += 1
                history.append(best_v)
                continue
            cand /= total
            cand_v = ev.support(cand, w)
            if cand_v > cur_v:
                cur, cur_v = cand, cand_v
        evals += 1
        if cand_v > best_v:
            best, best_v = cand.copy(), cand_v
        history.append(best_v)
    return OptimizeResult(best, best_v, evals, history)


def theorem1_support(d: JointDistribution, w) -> LpResult:
    return support(theorem1_system(d), w)


def model_support(spec: ModelSpec, w) -> float:
    return _value(theorem1_support(build_joint(spec), w))
