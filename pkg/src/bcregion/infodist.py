"""Joint distribution of the auxiliaries, channel input and channel outputs.

The joint law is ``p(u) * 1{x = f(u)} * p(y_1, ..., y_K | x)`` stored as a
dense numpy array with one axis per variable, in the order: auxiliaries in
canonical subset order, then the input, then outputs ``Y_1..Y_K``.
All information quantities are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import setfam

DEFAULT_CELL_CAP = 2 ** 26
NORM_TOL = 1e-9


class ModelValidationError(ValueError):
    """A ModelSpec violates one of its invariants."""


class CapacityError(RuntimeError):
    """A configured size cap would be exceeded."""


class Var(NamedTuple):
    kind: str  # "U", "X" or "Y"
    index: int  # subset mask for "U", receiver for "Y", 0 for "X"

    def __str__(self) -> str:
        if self.kind == "U":
            return f"U{setfam.format_subset(self.index)}"
        if self.kind == "Y":
            return f"Y{self.index}"
        return "X"


def aux_var(mask: int) -> Var:
    if mask <= 0:
        raise ValueError("auxiliary variables are indexed by nonempty subsets")
    return Var("U", mask)


def output_var(k: int) -> Var:
    if k < 1:
        raise ValueError(f"receiver {k} out of range")
    return Var("Y", k)


INPUT = Var("X", 0)


def aux_vars(masks: Iterable[int]) -> tuple[Var, ...]:
    return tuple(aux_var(m) for m in masks)


@dataclass
class ModelSpec:
    """A K-receiver broadcast channel together with an auxiliary pmf and encoder map.

    ``aux_pmf`` and ``symbol_map`` are flat tables over the product of the
    auxiliary alphabets (canonical subset order, last subset fastest).
    ``channel`` is flat with index ``x * prod(|Y_k|) + mixed_radix(y_1..y_K)``.
    """

    k_total: int
    aux_alphabets: dict[int, int]
    aux_pmf: np.ndarray
    symbol_map: np.ndarray
    x_alphabet: int
    y_alphabets: tuple[int, ...]
    channel: np.ndarray

    def __post_init__(self) -> None:
        self.aux_pmf = np.asarray(self.aux_pmf, dtype=float)
        self.symbol_map = np.asarray(self.symbol_map, dtype=np.int64)
        self.channel = np.asarray(self.channel, dtype=float)
        self.y_alphabets = tuple(int(a) for a in self.y_alphabets)
        self.aux_alphabets = {int(k): int(v) for k, v in self.aux_alphabets.items()}

    @property
    def aux_order(self) -> setfam.Family:
        return setfam.power_set(self.k_total)

    @property
    def aux_shape(self) -> tuple[int, ...]:
        return tuple(self.aux_alphabets[s] for s in self.aux_order)

    def validate(self) -> None:
        """Raise ModelValidationError naming the first failing invariant."""
        k = self.k_total
        if not 1 <= k <= setfam.MAX_RECEIVERS:
            raise ModelValidationError(f"k: receiver count {k} outside 1..{setfam.MAX_RECEIVERS}")
        missing = [s for s in setfam.power_set(k) if s not in self.aux_alphabets]
        if missing:
            names = ", ".join(setfam.format_subset(s, k) for s in missing)
            raise ModelValidationError(f"aux: no alphabet for subset(s) {names}")
        extra = [s for s in self.aux_alphabets if s not in setfam.power_set(k)]
        if extra:
            raise ModelValidationError(f"aux: unexpected subset masks {extra}")
        for s, a in self.aux_alphabets.items():
            if a < 1:
                raise ModelValidationError(
                    f"aux: alphabet of U{setfam.format_subset(s, k)} must be >= 1, got {a}")
        n_aux = int(np.prod(self.aux_shape))
        if self.aux_pmf.shape != (n_aux,):
            raise ModelValidationError(f"pmf: expected {n_aux} entries, got {self.aux_pmf.size}")
        if not np.all(np.isfinite(self.aux_pmf)) or np.any(self.aux_pmf < 0):
            raise ModelValidationError("pmf: entries must be finite and >= 0")
        if abs(self.aux_pmf.sum() - 1.0) > NORM_TOL:
            raise ModelValidationError(f"pmf: entries sum to {self.aux_pmf.sum():.12g}, not 1")
        if self.x_alphabet < 1:
            raise ModelValidationError("x_alphabet: must be >= 1")
        if self.symbol_map.shape != (n_aux,):
            raise ModelValidationError(f"f: expected {n_aux} entries, got {self.symbol_map.size}")
        if np.any(self.symbol_map < 0) or np.any(self.symbol_map >= self.x_alphabet):
            raise ModelValidationError(f"f: symbols must lie in 0..{self.x_alphabet - 1}")
        if len(self.y_alphabets) != k:
            raise ModelValidationError(f"y_alphabets: expected {k} entries, got {len(self.y_alphabets)}")
        if any(a < 1 for a in self.y_alphabets):
            raise ModelValidationError("y_alphabets: sizes must be >= 1")
        n_y = int(np.prod(self.y_alphabets))
        if self.channel.shape != (self.x_alphabet * n_y,):
            raise ModelValidationError(
                f"channel: expected {self.x_alphabet * n_y} entries, got {self.channel.size}")
        rows = self.channel.reshape(self.x_alphabet, n_y)
        if not np.all(np.isfinite(rows)) or np.any(rows < 0):
            raise ModelValidationError("channel: entries must be finite and >= 0")
        bad = np.flatnonzero(np.abs(rows.sum(axis=1) - 1.0) > NORM_TOL)
        if bad.size:
            raise ModelValidationError(f"channel: row x={bad[0]} sums to {rows[bad[0]].sum():.12g}, not 1")

    def with_pmf(self, pmf: np.ndarray) -> "ModelSpec":
        return ModelSpec(self.k_total, dict(self.aux_alphabets), np.asarray(pmf, dtype=float),
                         self.symbol_map.copy(), self.x_alphabet, self.y_alphabets,
                         self.channel.copy())

    def channel_table(self) -> np.ndarray:
        """Channel as an array of shape ``(|X|, |Y_1|, ..., |Y_K|)``."""
        return self.channel.reshape((self.x_alphabet,) + self.y_alphabets)


@dataclass(eq=False)
class JointDistribution:
    """Dense joint pmf; immutable after construction.

    Joint entropies are memoized per variable set.
    """

    variables: tuple[Var, ...]
    probs: np.ndarray
    _axis: dict[Var, int] = field(init=False, repr=False)
    _hcache: dict[frozenset, float] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.variables = tuple(self.variables)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != len(self.variables):
            raise ValueError("one array axis per variable required")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variables")
        self.probs.setflags(write=False)
        self._axis = {v: i for i, v in enumerate(self.variables)}
        self._hcache = {}

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    def axis(self, var: Var) -> int:
        try:
            return self._axis[var]
        except KeyError:
            raise ValueError(f"variable {var} not in distribution") from None

    def marginal(self, vars_: Sequence[Var]) -> np.ndarray:
        """Marginal table with axes in the order given."""
        axes = [self.axis(v) for v in vars_]
        if len(set(axes)) != len(axes):
            raise ValueError("repeated variable in marginal")
        drop = tuple(i for i in range(self.probs.ndim) if i not in axes)
        m = self.probs.sum(axis=drop) if drop else self.probs
        kept = sorted(axes)
        return np.transpose(m, [kept.index(a) for a in axes])

    def restrict(self, vars_: Sequence[Var]) -> "JointDistribution":
        return JointDistribution(tuple(vars_), self.marginal(vars_))

    def joint_entropy(self, vars_: Iterable[Var]) -> float:
        key = frozenset(self.axis(v) for v in vars_)
        h = self._hcache.get(key)
        if h is None:
            if not key:
                h = 0.0
            else:
                drop = tuple(i for i in range(self.probs.ndim) if i not in key)
                m = self.probs.sum(axis=drop) if drop else self.probs
                p = m[m > 0]
                h = float(-(p * np.log2(p)).sum())
            self._hcache[key] = h
        return h


def _as_set(vs) -> set[Var]:
    if isinstance(vs, Var):
        return {vs}
    return set(vs)


def entropy(d: JointDistribution, a, b=()) -> float:
    """Conditional entropy H(A | B) in bits."""
    a, b = _as_set(a), _as_set(b)
    if a & b:
        raise ValueError(f"overlapping variable sets: {sorted(map(str, a & b))}")
    if not a:
        return 0.0
    return d.joint_entropy(a | b) - d.joint_entropy(b)


def mutual_info(d: JointDistribution, a, b, c=()) -> float:
    """Conditional mutual information I(A; B | C) in bits."""
    a, b, c = _as_set(a), _as_set(b), _as_set(c)
    if a & b or a & c or b & c:
        raise ValueError("variable sets must be pairwise disjoint")
    return (d.joint_entropy(a | c) + d.joint_entropy(b | c)
            - d.joint_entropy(a | b | c) - d.joint_entropy(c))


def build_joint(spec: ModelSpec, cell_cap: int = DEFAULT_CELL_CAP) -> JointDistribution:
    """Joint law over every auxiliary, the input X and all outputs."""
    spec.validate()
    aux_shape = spec.aux_shape
    cells = int(np.prod(aux_shape, dtype=object)) * spec.x_alphabet * int(np.prod(spec.y_alphabets, dtype=object))
    if cells > cell_cap:
        raise CapacityError(f"joint table needs {cells} cells, cap is {cell_cap}")
    pmf = spec.aux_pmf / spec.aux_pmf.sum()
    n_aux = pmf.size
    n_y = int(np.prod(spec.y_alphabets))
    rows = spec.channel.reshape(spec.x_alphabet, n_y)
    rows = rows / rows.sum(axis=1, keepdims=True)
    joint = np.zeros((n_aux, spec.x_alphabet, n_y))
    idx = np.arange(n_aux)
    joint[idx, spec.symbol_map, :] = pmf[:, None] * rows[spec.symbol_map]
    shape = aux_shape + (spec.x_alphabet,) + spec.y_alphabets
    variables = (aux_vars(spec.aux_order) + (INPUT,)
                 + tuple(output_var(k) for k in range(1, spec.k_total + 1)))
    return JointDistribution(variables, joint.reshape(shape))


def aux_only(d: JointDistribution) -> tuple[Var, ...]:
    return tuple(v for v in d.variables if v.kind == "U")
