"""Combinatorics over the power set of the receiver set {1, ..., K}.

Subsets are plain ``int`` bitmasks: bit ``k - 1`` is set when receiver ``k``
belongs to the subset.  A *family* is a tuple of masks in canonical order
(ascending cardinality, then lexicographic on the sorted elements), which is
the order used by every table and file format in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

MAX_RECEIVERS = 16

SubsetId = int
Family = tuple[int, ...]


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def elements(mask: int) -> tuple[int, ...]:
    """Sorted receivers (1-based) contained in ``mask``."""
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def subset(*receivers: int) -> int:
    """Bitmask of the given receivers, e.g. ``subset(1, 3) == 0b101``."""
    mask = 0
    for k in receivers:
        if k < 1 or k > MAX_RECEIVERS:
            raise ValueError(f"receiver {k} out of range 1..{MAX_RECEIVERS}")
        mask |= 1 << (k - 1)
    return mask


def full_set(k_total: int) -> int:
    return (1 << k_total) - 1


def canonical_key(mask: int) -> tuple[int, tuple[int, ...]]:
    return popcount(mask), elements(mask)


def canonical(masks: Iterable[int]) -> Family:
    """Deduplicate and sort masks into canonical order."""
    return tuple(sorted(set(masks), key=canonical_key))


def format_subset(mask: int, k_total: int | None = None) -> str:
    """Digit string for K <= 9 (``"13"``), comma list otherwise (``"1,13"``)."""
    els = elements(mask)
    if k_total is None:
        k_total = max(els, default=0)
    if k_total <= 9:
        return "".join(str(k) for k in els)
    return ",".join(str(k) for k in els)


def parse_subset(text: str, k_total: int) -> int:
    text = text.strip()
    if not text:
        raise ValueError("empty subset string")
    if "," in text or k_total > 9:
        parts = [p for p in text.split(",") if p.strip()]
        receivers = [int(p) for p in parts]
    else:
        receivers = [int(ch) for ch in text]
    if len(set(receivers)) != len(receivers):
        raise ValueError(f"repeated receiver in subset {text!r}")
    for k in receivers:
        if not 1 <= k <= k_total:
            raise ValueError(f"receiver {k} in {text!r} outside 1..{k_total}")
    return subset(*receivers)


def format_family(family: Iterable[int], k_total: int | None = None) -> str:
    return "{" + ",".join(format_subset(s, k_total) for s in family) + "}"


def _check_k(k_total: int) -> None:
    if not 1 <= k_total <= MAX_RECEIVERS:
        raise ValueError(f"receiver count {k_total} outside 1..{MAX_RECEIVERS}")


@lru_cache(maxsize=None)
def power_set(k_total: int) -> Family:
    """All nonempty subsets of {1..K} in canonical order."""
    _check_k(k_total)
    return canonical(range(1, 1 << k_total))


def a_family(s: int, l: int, l2: int, k_total: int) -> Family:
    """Supersets ``S'`` of ``s`` with ``l <= |S'| <= l2``.

    ``s`` may be 0 (the empty set), in which case this is the level slice
    ``l..l2`` of the power set.
    """
    _check_k(k_total)
    if not 1 <= l <= l2 <= k_total:
        raise ValueError(f"levels must satisfy 1 <= l <= l2 <= K, got l={l}, l2={l2}, K={k_total}")
    if s & ~full_set(k_total):
        raise ValueError(f"subset {elements(s)} not contained in 1..{k_total}")
    return _a_family(s, l, l2, k_total)


@lru_cache(maxsize=None)
def _a_family(s: int, l: int, l2: int, k_total: int) -> Family:
    return tuple(m for m in power_set(k_total) if m & s == s and l <= popcount(m) <= l2)


def a_all(s: int, k_total: int) -> Family:
    """All supersets of ``s`` (every level)."""
    return a_family(s, 1, k_total, k_total)


def a_level(l: int, k_total: int) -> Family:
    """All subsets of cardinality exactly ``l``."""
    return a_family(0, l, l, k_total)


def b_family(k: int, s: int, l: int = 1, l2: int | None = None) -> Family:
    """Subsets ``S'`` of ``s`` that contain receiver ``k``, ``l <= |S'| <= l2``.

    Returns the empty family when ``k`` is not in ``s``.
    """
    size = popcount(s)
    if l2 is None:
        l2 = size
    if s == 0 or not 1 <= l <= l2 <= size:
        raise ValueError(f"levels must satisfy 1 <= l <= l2 <= |s|, got l={l}, l2={l2}, |s|={size}")
    return _b_family(k, s, l, l2)


@lru_cache(maxsize=None)
def _b_family(k: int, s: int, l: int, l2: int) -> Family:
    bit = 1 << (k - 1)
    if not s & bit:
        return ()
    rest = s & ~bit
    out = []
    sub = rest
    while True:
        m = sub | bit
        if l <= popcount(m) <= l2:
            out.append(m)
        if sub == 0:
            break
        sub = (sub - 1) & rest
    return canonical(out)


def _check_ordering(t: int, pi: Sequence[int]) -> None:
    if len(set(pi)) != len(pi) or subset(*pi) != t:
        raise ValueError(f"{tuple(pi)} is not an ordering of {elements(t)}")


def orderings(t: int) -> list[tuple[int, ...]]:
    """All |t|! orderings of the receivers in ``t``, lexicographic."""
    return list(itertools.permutations(elements(t)))


def b_pi(t: int, pi: Sequence[int], i: int, k_total: int) -> Family:
    """Block ``i`` of the disjoint decomposition of the union of A(k), k in t.

    Subsets of ``K minus {pi[0..i-1]}`` that contain ``pi[i]``.
    """
    _check_k(k_total)
    _check_ordering(t, pi)
    if not 0 <= i < len(pi):
        raise ValueError(f"block index {i} outside 0..{len(pi) - 1}")
    removed = subset(*pi[:i]) if i else 0
    return b_family(pi[i], full_set(k_total) & ~removed)


def b_pi_level(t: int, pi: Sequence[int], i: int, l: int, k_total: int) -> Family:
    if not 1 <= l <= k_total:
        raise ValueError(f"level {l} outside 1..{k_total}")
    return tuple(m for m in b_pi(t, pi, i, k_total) if popcount(m) == l)


def b_pi_alt(t: int, pi: Sequence[int], i: int, k_total: int) -> Family:
    """Same block via the set-difference form A(pi[i]) minus the A({pi[i], pi[k]})."""
    _check_ordering(t, pi)
    head = subset(pi[i])
    out = set(a_all(head, k_total))
    for k in range(i):
        out -= set(a_all(head | subset(pi[k]), k_total))
    return canonical(out)


def union_of_a(t: int, k_total: int) -> Family:
    """Subsets that meet ``t``."""
    return tuple(m for m in power_set(k_total) if m & t)


@dataclass
class DecompositionReport:
    ok: bool
    blocks: list[Family]
    violations: list[str] = field(default_factory=list)


def verify_decomposition(t: int, pi: Sequence[int], k_total: int) -> DecompositionReport:
    """Check that the blocks ``b_pi(t, pi, i)`` partition the union of A(k), k in t.

    Also checks the per-level partition and the set-difference form of each
    block.  Every violation is named in the report.
    """
    blocks = [b_pi(t, pi, i, k_total) for i in range(len(pi))]
    violations: list[str] = []
    seen: dict[int, int] = {}
    for i, block in enumerate(blocks):
        for m in block:
            if m in seen:
                violations.append(
                    f"{format_subset(m, k_total)} in blocks {seen[m]} and {i}")
            seen[m] = i
    target = set(union_of_a(t, k_total))
    for m in sorted(target - seen.keys(), key=canonical_key):
        violations.append(f"{format_subset(m, k_total)} missing from blocks")
    for m in sorted(seen.keys() - target, key=canonical_key):
        violations.append(f"{format_subset(m, k_total)} not in union of A(k)")
    for l in range(1, k_total + 1):
        level_union = {m for m in target if popcount(m) == l}
        sliced: list[int] = []
        for i in range(len(pi)):
            sliced.extend(b_pi_level(t, pi, i, l, k_total))
        if len(sliced) != len(set(sliced)) or set(sliced) != level_union:
            violations.append(f"level {l} slices do not partition the level-{l} union")
    for i, block in enumerate(blocks):
        if b_pi_alt(t, pi, i, k_total) != block:
            violations.append(f"block {i} disagrees with its set-difference form")
    return DecompositionReport(ok=not violations, blocks=blocks, violations=violations)


def packing_support(i: int, j: Iterable[int]) -> Family:
    """Union of ``b_family(i, S)`` over the members ``S`` of ``j``."""
    bit = 1 << (i - 1)
    out: set[int] = set()
    for s in j:
        if not s & bit:
            raise ValueError(f"member {elements(s)} does not contain receiver {i}")
        out.update(b_family(i, s))
    return canonical(out)


def nonempty_subfamilies(family: Sequence[int]) -> Iterable[Family]:
    """Every nonempty subfamily of ``family``, members kept in the given order."""
    n = len(family)
    for bits in range(1, 1 << n):
        yield tuple(family[b] for b in range(n) if bits >> b & 1)
