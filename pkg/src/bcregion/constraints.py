"""Numeric rate constraints of the exhaustive-splitting Marton scheme.

Every right-hand side is built first as an :class:`EntropyExpr` (a linear
combination of joint entropies) and then evaluated against a
:class:`~bcregion.infodist.JointDistribution`.  Keeping the symbolic form
separate lets the pmf optimizer re-evaluate the same expressions cheaply.

The asymptotic region is computed: slack terms that vanish with the
typicality parameter are dropped and strict inequalities are closed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from . import setfam
from .fmt import fmt_sig
from .infodist import JointDistribution, Var, aux_var, aux_vars, mutual_info, output_var
from .setfam import Family, a_all, a_family, a_level, b_family, b_pi, b_pi_level, popcount

log = logging.getLogger(__name__)

RHS_TOL = 1e-10
CANCEL_ULPS = 64.0


def snap_cancellation(value: float, scale: float) -> float:
    """Zero a difference of entropies that is pure rounding noise.

    ``scale`` is the sum of absolute term magnitudes; anything within
    ``CANCEL_ULPS`` machine epsilons of it cannot be told apart from 0.
    """
    return 0.0 if abs(value) <= CANCEL_ULPS * 2.0 ** -52 * scale else value


class EntropyExpr(dict):
    """Mapping ``frozenset[Var] -> coefficient`` standing for sum c * H(V)."""

    def add_h(self, vars_: Iterable[Var], coef: float = 1.0) -> "EntropyExpr":
        key = frozenset(vars_)
        if not key:
            return self
        c = self.get(key, 0.0) + coef
        if c == 0.0:
            self.pop(key, None)
        else:
            self[key] = c
        return self

    def add_cond(self, a: Iterable[Var], b: Iterable[Var] = (), coef: float = 1.0) -> "EntropyExpr":
        """Add ``coef * H(A | B)``."""
        a, b = frozenset(a), frozenset(b)
        if a & b:
            raise ValueError("conditional entropy with overlapping sets")
        self.add_h(a | b, coef)
        self.add_h(b, -coef)
        return self

    def evaluate(self, d: JointDistribution) -> float:
        terms = [c * d.joint_entropy(v) for v, c in self.items()]
        return snap_cancellation(float(sum(terms)), float(sum(abs(t) for t in terms)))


def parents(s: int, k_total: int) -> Family:
    """Strict supersets of ``s``: the variables ``U_s`` is generated from."""
    return tuple(m for m in a_all(s, k_total) if m != s)


def _k_of(d: JointDistribution) -> int:
    return max(v.index for v in d.variables if v.kind == "Y")


# ---------------------------------------------------------------- variables

class RateVar(NamedTuple):
    """Rate variable: ``R`` per receiver, ``Rsplit`` (k, S), ``Rtilde`` S or ``r`` S."""

    kind: str
    receiver: int
    subset: int

    def label(self, k_total: int | None = None) -> str:
        s = setfam.format_subset(self.subset, k_total) if self.subset else ""
        if self.kind == "R":
            return f"R{self.receiver}"
        if self.kind == "Rsplit":
            return f"R{self.receiver},{s}"
        if self.kind == "Rtilde":
            return f"Rt{s}"
        return f"r{s}"


def per_receiver(k: int) -> RateVar:
    return RateVar("R", k, 0)


def split_rate(k: int, s: int) -> RateVar:
    if not s >> (k - 1) & 1:
        raise ValueError(f"split rate R_{k},S requires {k} in S")
    return RateVar("Rsplit", k, s)


def tilde_sum(s: int) -> RateVar:
    return RateVar("Rtilde", 0, s)


def cover_excess(s: int) -> RateVar:
    return RateVar("r", 0, s)


_KIND_ORDER = {"R": 0, "Rsplit": 1, "Rtilde": 2, "r": 3}


def var_sort_key(v: RateVar):
    return _KIND_ORDER[v.kind], setfam.canonical_key(v.subset), v.receiver


@dataclass(frozen=True)
class RateInequality:
    """``sum coeffs[v] * v  (sense)  bound`` with a provenance tag."""

    coeffs: tuple[tuple[RateVar, float], ...]
    bound: float
    sense: str = "<="
    provenance: tuple = ()

    def __post_init__(self) -> None:
        if self.sense not in ("<=", ">="):
            raise ValueError(f"bad sense {self.sense!r}")
        if not abs(self.bound) < float("inf"):
            raise ValueError("bound must be finite")

    @classmethod
    def of(cls, variables: Iterable[RateVar], bound: float, sense: str = "<=", provenance: tuple = ()):
        coeffs = tuple(sorted(((v, 1.0) for v in set(variables)), key=lambda t: var_sort_key(t[0])))
        return cls(coeffs, float(bound), sense, provenance)

    def lhs(self, point: dict[RateVar, float]) -> float:
        return sum(c * point.get(v, 0.0) for v, c in self.coeffs)

    def holds(self, point: dict[RateVar, float], tol: float = 1e-9) -> bool:
        val = self.lhs(point)
        return val <= self.bound + tol if self.sense == "<=" else val >= self.bound - tol


def provenance_tag(prov: tuple, k_total: int) -> str:
    kind = prov[0] if prov else "?"
    fs = setfam.format_subset
    if kind == "theorem1":
        _, t, pi = prov
        return f"theorem1 T={fs(t, k_total)} pi={','.join(map(str, pi))}"
    if kind == "covering":
        _, l, j = prov
        return f"covering l={l} J={setfam.format_family(j, k_total)}"
    if kind == "packing":
        _, i, supp = prov
        return f"packing i={i} S={setfam.format_family(supp, k_total)}"
    if kind == "corollary3":
        return f"corollary3 {prov[1]}"
    return " ".join(map(str, prov))


@dataclass
class RegionSystem:
    """A polytope: inequalities over ``variables``, all variables nonnegative."""

    k_total: int
    variables: tuple[RateVar, ...]
    inequalities: list[RateInequality] = field(default_factory=list)

    def __post_init__(self) -> None:
        declared = set(self.variables)
        for ineq in self.inequalities:
            for v, _ in ineq.coeffs:
                if v not in declared:
                    raise ValueError(f"inequality references undeclared variable {v}")

    def __len__(self) -> int:
        return len(self.inequalities)

    def as_matrix(self):
        """``(A, b)`` with every row in ``A x <= b`` form (``>=`` rows negated)."""
        import numpy as np

        col = {v: i for i, v in enumerate(self.variables)}
        a = np.zeros((len(self.inequalities), len(self.variables)))
        b = np.zeros(len(self.inequalities))
        for r, ineq in enumerate(self.inequalities):
            sign = 1.0 if ineq.sense == "<=" else -1.0
            for v, c in ineq.coeffs:
                a[r, col[v]] = sign * c
            b[r] = sign * ineq.bound
        return a, b

    def records(self, sig: int = 12) -> list[str]:
        """One line per inequality: tag, coefficients in variable order, bound."""
        lines = []
        for ineq in self.inequalities:
            cmap = dict(ineq.coeffs)
            coeffs = " ".join(fmt_coef(cmap.get(v, 0.0)) for v in self.variables)
            lines.append(f"{provenance_tag(ineq.provenance, self.k_total)}\t{ineq.sense}\t"
                         f"{coeffs}\t{fmt_sig(ineq.bound, sig)}")
        return lines


def fmt_coef(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(c)


# ------------------------------------------------------------ expressions

def covering_expr(k_total: int, l: int, j: Sequence[int]) -> EntropyExpr:
    if not j:
        raise ValueError("covering family must be nonempty")
    if not 1 <= l <= k_total - 1:
        raise ValueError(f"covering level {l} outside 1..{k_total - 1}")
    if any(popcount(s) != l for s in j):
        raise ValueError(f"covering family members must all have cardinality {l}")
    e = EntropyExpr()
    for s in j:
        e.add_cond([aux_var(s)], aux_vars(parents(s, k_total)))
    e.add_cond(aux_vars(j), aux_vars(a_family(0, l + 1, k_total, k_total)), -1.0)
    return e


def packing_expr_support(k_total: int, i: int, support: Sequence[int]) -> EntropyExpr:
    e = EntropyExpr()
    for s in support:
        e.add_cond([aux_var(s)], aux_vars(parents(s, k_total)))
    rest = [m for m in a_all(setfam.subset(i), k_total) if m not in set(support)]
    e.add_cond(aux_vars(support), [output_var(i)] + list(aux_vars(rest)), -1.0)
    return e


def theorem1_expr(k_total: int, t: int, pi: Sequence[int]) -> EntropyExpr:
    e = EntropyExpr()
    for i in range(len(pi)):
        block = b_pi(t, pi, i, k_total)
        for key, c in packing_expr_support(k_total, pi[i], block).items():
            e.add_h(key, c)
    for l in range(1, k_total):
        sliced: list[int] = []
        for i in range(len(pi)):
            sliced.extend(b_pi_level(t, pi, i, l, k_total))
        if not sliced:
            continue
        for key, c in covering_expr(k_total, l, sliced).items():
            e.add_h(key, -c)
    return e


# ---------------------------------------------------------------- covering

def covering_rhs(d: JointDistribution, l: int, j: Sequence[int]) -> float:
    """Lower bound on the summed excess rates of the level-``l`` family ``j``."""
    return covering_expr(_k_of(d), l, j).evaluate(d)


def covering_families(k_total: int) -> list[tuple[int, Family]]:
    out = []
    for l in range(1, k_total):
        for j in setfam.nonempty_subfamilies(a_level(l, k_total)):
            out.append((l, j))
    out.sort(key=lambda lj: (lj[0], len(lj[1]), [setfam.canonical_key(s) for s in lj[1]]))
    return out


def covering_system(d: JointDistribution) -> list[RateInequality]:
    k = _k_of(d)
    out = []
    for l, j in covering_families(k):
        out.append(RateInequality.of((cover_excess(s) for s in j), covering_rhs(d, l, j),
                                     ">=", ("covering", l, j)))
    return out


# ----------------------------------------------------------------- packing

def packing_rhs(d: JointDistribution, i: int, j: Sequence[int]) -> float:
    """Upper bound on the summed codebook rates over ``packing_support(i, j)``."""
    if not j:
        raise ValueError("packing family must be nonempty")
    supp = setfam.packing_support(i, j)
    return packing_expr_support(_k_of(d), i, supp).evaluate(d)


def packing_supports(k_total: int, i: int) -> list[Family]:
    """Distinct supports generated by the nonempty subfamilies of A(i)."""
    seen: dict[Family, None] = {}
    for j in setfam.nonempty_subfamilies(a_all(setfam.subset(i), k_total)):
        seen.setdefault(setfam.packing_support(i, j), None)
    return sorted(seen, key=lambda f: (len(f), [setfam.canonical_key(s) for s in f]))


def packing_system(d: JointDistribution) -> list[RateInequality]:
    k = _k_of(d)
    out = []
    for i in range(1, k + 1):
        for supp in packing_supports(k, i):
            rhs = packing_expr_support(k, i, supp).evaluate(d)
            out.append(RateInequality.of((tilde_sum(s) for s in supp), rhs, "<=",
                                         ("packing", i, supp)))
    return out


# ---------------------------------------------------------- sum-rate system

def theorem1_bound(d: JointDistribution, t: int, pi: Sequence[int]) -> float:
    """Closed-form upper bound on the sum rate over ``t`` for ordering ``pi``."""
    return theorem1_expr(_k_of(d), t, pi).evaluate(d)


def theorem1_terms(k_total: int) -> list[tuple[int, tuple[int, ...]]]:
    return [(t, pi) for t in setfam.power_set(k_total) for pi in setfam.orderings(t)]


def per_receiver_vars(k_total: int) -> tuple[RateVar, ...]:
    return tuple(per_receiver(k) for k in range(1, k_total + 1))


def clamp_bound(value: float, label: str) -> float:
    if value < 0.0:
        log.info("clamping negative bound %.3g for %s to 0", value, label)
        return 0.0
    return value


def system_from_bounds(k_total: int, bounds: Sequence[float]) -> RegionSystem:
    """Theorem-1 system from precomputed (unclamped) bounds in term order."""
    ineqs = []
    for (t, pi), b in zip(theorem1_terms(k_total), bounds):
        prov = ("theorem1", t, tuple(pi))
        b = clamp_bound(float(b), provenance_tag(prov, k_total))
        ineqs.append(RateInequality.of((per_receiver(k) for k in setfam.elements(t)), b,
                                       "<=", prov))
    return RegionSystem(k_total, per_receiver_vars(k_total), ineqs)


def theorem1_system(d: JointDistribution) -> RegionSystem:
    """All sum-rate bounds, one per nonempty T and ordering of T; negatives clamped to 0."""
    k = _k_of(d)
    return system_from_bounds(k, [theorem1_bound(d, t, pi) for t, pi in theorem1_terms(k)])


# ------------------------------------------------------- three receivers

def corollary3_bounds(d: JointDistribution) -> dict[str, float]:
    """The nine explicit K=3 bounds, labelled ``12a`` .. ``12i``.

    Ambiguous terms are resolved so that every bound equals the minimum of
    the matching sum-rate bounds over orderings: the U2;U13 terms condition
    on U12 U23 U123, and a term with a missing separator reads I(Ua;Ub | ...).
    """
    if _k_of(d) != 3:
        raise ValueError("corollary3 applies to K = 3 only")
    u = {name: aux_var(setfam.subset(*map(int, name))) for name in
         ("1", "2", "3", "12", "13", "23", "123")}
    y = {k: output_var(k) for k in (1, 2, 3)}

    def miy(a, k, c=()):
        return mutual_info(d, [u[n] for n in a], [y[k]], [u[n] for n in c])

    def miu(a, b, c=()):
        return mutual_info(d, [u[n] for n in a], [u[n] for n in b], [u[n] for n in c])

    five = ("12", "13", "23", "123")
    i12 = min(miy(("12", "123"), 1), miy(("12", "123"), 2))
    i13 = min(miy(("13", "123"), 1), miy(("13", "123"), 3))
    i23 = min(miy(("23", "123"), 2), miy(("23", "123"), 3))
    delta = (miu(("2",), ("13",), ("12", "23", "123"))
             + miu(("3",), ("12",), ("13", "23", "123"))
             + miu(("1",), ("3",), ("2",) + five)
             + miu(("1",), ("23",), ("12", "13", "123"))
             + miu(("1",), ("2",), five)
             + miu(("2",), ("3",), five))
    b = {}
    b["12a"] = miy(("1", "12", "13", "123"), 1) - miu(("1",), ("23",), ("12", "13", "123"))
    b["12b"] = miy(("2", "12", "23", "123"), 2) - miu(("2",), ("13",), ("12", "23", "123"))
    b["12c"] = miy(("3", "13", "23", "123"), 3) - miu(("3",), ("12",), ("13", "23", "123"))
    b["12d"] = (i12 + miy(("1", "13"), 1, ("12", "123")) + miy(("2", "23"), 2, ("12", "123"))
                - miu(("2",), ("13",), ("12", "23", "123"))
                - miu(("13",), ("23",), ("12", "123"))
                - miu(("1",), ("23",), ("12", "13", "123"))
                - miu(("1",), ("2",), five))
    b["12e"] = (i13 + miy(("1", "12"), 1, ("13", "123")) + miy(("3", "23"), 3, ("13", "123"))
                - miu(("12",), ("23",), ("13", "123"))
                - miu(("3",), ("12",), ("13", "23", "123"))
                - miu(("1",), ("23",), ("12", "13", "123"))
                - miu(("1",), ("3",), five))
    b["12f"] = (i23 + miy(("2", "12"), 2, ("23", "123")) + miy(("3", "13"), 3, ("23", "123"))
                - miu(("12",), ("13",), ("23", "123"))
                - miu(("3",), ("12",), ("13", "23", "123"))
                - miu(("2",), ("13",), ("12", "23", "123"))
                - miu(("2",), ("3",), five))
    b["12g"] = (i12 + miy(("1", "13"), 1, ("12", "123")) + miy(("2", "23"), 2, ("12", "123"))
                + miy(("3",), 3, ("13", "23", "123"))
                - miu(("13",), ("23",), ("12", "123")) - delta)
    b["12h"] = (i13 + miy(("1", "12"), 1, ("13", "123")) + miy(("3", "23"), 3, ("13", "123"))
                + miy(("2",), 2, ("12", "23", "123"))
                - miu(("12",), ("23",), ("13", "123")) - delta)
    b["12i"] = (i23 + miy(("2", "12"), 2, ("23", "123")) + miy(("3", "13"), 3, ("23", "123"))
                + miy(("1",), 1, ("12", "13", "123"))
                - miu(("12",), ("13",), ("23", "123")) - delta)
    return b


COROLLARY3_RECEIVERS = {
    "12a": (1,), "12b": (2,), "12c": (3,),
    "12d": (1, 2), "12e": (1, 3), "12f": (2, 3),
    "12g": (1, 2, 3), "12h": (1, 2, 3), "12i": (1, 2, 3),
}


def corollary3_system(d: JointDistribution) -> RegionSystem:
    bounds = corollary3_bounds(d)
    ineqs = []
    for label, recv in COROLLARY3_RECEIVERS.items():
        prov = ("corollary3", label)
        ineqs.append(RateInequality.of((per_receiver(k) for k in recv),
                                       clamp_bound(bounds[label], f"corollary3 {label}"),
                                       "<=", prov))
    return RegionSystem(3, per_receiver_vars(3), ineqs)


# -------------------------------------------------------- split-bound check

@dataclass
class Lemma2Report:
    ok: bool
    combined: float
    split_sum: float
    parts: list[float]


def lemma2_check(d: JointDistribution, l: int, j: Sequence[int],
                 parts: Sequence[Sequence[int]]) -> Lemma2Report:
    """Check that the covering bound of ``j`` dominates the sum over a partition."""
    flat = [s for p in parts for s in p]
    if any(len(p) == 0 for p in parts) or len(flat) != len(set(flat)) or set(flat) != set(j):
        raise ValueError("parts must be a partition of j into nonempty pieces")
    combined = covering_rhs(d, l, j)
    vals = [covering_rhs(d, l, p) for p in parts]
    split = float(sum(vals))
    return Lemma2Report(combined >= split - RHS_TOL, combined, split, vals)
