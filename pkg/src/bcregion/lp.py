"""Dense two-phase simplex with Bland's anti-cycling rule.

Solves ``max c.x  s.t.  A x <= b,  x >= 0`` for the small systems that come
up here (a few hundred rows and columns at most).  Ties are broken by the
lowest variable index, so witnesses are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-12


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float
    witness: np.ndarray | None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(t: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    f = t[:, col].copy()
    f[row] = 0.0
    t -= np.outer(f, t[row])
    t[:, col] = 0.0
    t[row, col] = 1.0


def _run(t: np.ndarray, basis: list[int], ncols: int, tol: float, max_iter: int) -> str:
    m = t.shape[0] - 1
    for _ in range(max_iter):
        obj = t[-1, :ncols]
        entering = np.flatnonzero(obj > tol)
        if entering.size == 0:
            return "optimal"
        col = int(entering[0])
        column = t[:m, col]
        pos = np.flatnonzero(column > PIVOT_TOL)
        if pos.size == 0:
            return "unbounded"
        ratios = t[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(t, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit reached")


def linprog_max(c, a_ub, b_ub, tol: float = FEAS_TOL, max_iter: int = 10_000) -> LpResult:
    """Maximize ``c @ x`` subject to ``a_ub @ x <= b_ub`` and ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_ub, dtype=float).reshape(-1, c.size)
    b = np.asarray(b_ub, dtype=float).ravel()
    m, n = a.shape
    if b.size != m:
        raise ValueError("a_ub and b_ub disagree on the number of rows")
    neg = b < 0
    n_art = int(neg.sum())
    width = n + m + n_art + 1
    t = np.zeros((m + 1, width))
    t[:m, :n] = a
    t[:m, n:n + m] = np.eye(m)
    t[:m, -1] = b
    t[:m][neg] *= -1.0
    basis = [n + i for i in range(m)]
    art_cols = []
    for k, i in enumerate(np.flatnonzero(neg)):
        col = n + m + k
        t[i, col] = 1.0
        basis[i] = col
        art_cols.append(col)

    if n_art:
        # phase 1: maximize -sum(artificials)
        t[-1, :] = 0.0
        for i in np.flatnonzero(neg):
            t[-1, :] += t[i, :]
        for col in art_cols:
            t[-1, col] = 0.0
        status = _run(t, basis, n + m + n_art, tol, max_iter)
        if t[-1, -1] > tol * max(1.0, np.abs(b).max()):
            return LpResult("infeasible", float("nan"), None)
        # drive remaining artificials out of the basis
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= n + m:
                nz = np.flatnonzero(np.abs(t[r, :n + m]) > 1e-10)
                if nz.size:
                    _pivot(t, r, int(nz[0]))
                    basis[r] = int(nz[0])
                else:
                    keep[r] = False
        if not keep.all():
            t = t[keep]
            basis = [bcol for bcol, k in zip(basis, keep[:-1]) if k]
        t = np.delete(t, np.arange(n + m, n + m + n_art), axis=1)

    # phase 2
    t[-1, :] = 0.0
    t[-1, :n] = c
    for r, bcol in enumerate(basis):
        if t[-1, bcol] != 0.0:
            t[-1, :] -= t[-1, bcol] * t[r, :]
    status = _run(t, basis, n + m, tol, max_iter)
    if status == "unbounded":
        return LpResult("unbounded", float("inf"), None)
    x = np.zeros(n + m)
    for r, bcol in enumerate(basis):
        x[bcol] = t[r, -1]
    x = np.maximum(x[:n], 0.0)
    return LpResult("optimal", float(c @ x), x)
