"""Dense revised simplex for ``min c'x  s.t.  Ax = b, x >= 0`` from a feasible basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LpError(RuntimeError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    duals: np.ndarray
    objective: float
    basis: list[int]
    iterations: int


def solve(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    basis: list[int],
    *,
    opt_tol: float = 1e-9,
    pivot_tol: float = 1e-9,
    bland_after: int = 50,
    max_pivots: int = 100_000,
    refactor_every: int = 50,
) -> SimplexResult:
    """Phase-II revised simplex.

    ``basis`` must index ``m`` columns of ``A`` forming a nonsingular, primal
    feasible basis. Dantzig pricing is used until ``bland_after`` consecutive
    degenerate pivots occur; from then on Bland's rule guarantees termination.
    """
    m, n = A.shape
    basis = list(basis)
    if len(basis) != m:
        raise LpError(f"basis has {len(basis)} columns for {m} rows")

    def factor() -> np.ndarray:
        try:
            return np.linalg.inv(A[:, basis])
        except np.linalg.LinAlgError:
            raise LpError("singular basis") from None

    Binv = factor()
    xB = Binv @ b
    if (xB < -1e-9).any():
        raise LpError("starting basis is not primal feasible")
    pivots = 0
    since_refactor = 0
    degenerate_run = 0
    bland = False

    while True:
        cB = c[basis]
        pi = cB @ Binv
        d = c - pi @ A
        d[basis] = 0.0
        candidates = np.flatnonzero(d < -opt_tol)
        if candidates.size == 0:
            if since_refactor:
                # confirm optimality on a fresh factorization
                Binv = factor()
                xB = Binv @ b
                since_refactor = 0
                continue
            break
        if pivots >= max_pivots:
            raise LpError(f"no convergence after {pivots} pivots (anti-cycling engaged: {bland})")
        q = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])
        u = Binv @ A[:, q]
        rows = np.flatnonzero(u > pivot_tol)
        if rows.size == 0:
            raise LpError("LP is unbounded")
        ratios = np.maximum(xB[rows], 0.0) / u[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        if bland:
            r = int(min(ties, key=lambda k: basis[k]))
        else:
            r = int(ties[np.argmax(u[ties])])
        if best <= 1e-12:
            degenerate_run += 1
            if degenerate_run >= bland_after:
                bland = True
        else:
            degenerate_run = 0

        # eta update of the explicit inverse
        pivot_row = Binv[r] / u[r]
        Binv -= np.outer(u, pivot_row)
        Binv[r] = pivot_row
        basis[r] = q
        pivots += 1
        since_refactor += 1
        if since_refactor >= refactor_every:
            Binv = factor()
            since_refactor = 0
        xB = Binv @ b
        np.maximum(xB, 0.0, out=xB, where=xB > -1e-9)

    xB = np.where(np.abs(xB) < 1e-13, 0.0, xB)
    if (xB < -1e-7).any():
        raise LpError("numerical loss of primal feasibility")
    xB = np.maximum(xB, 0.0)
    x = np.zeros(n)
    x[basis] = xB
    pi = c[basis] @ Binv
    return SimplexResult(x, pi, float(c[basis] @ xB), basis, pivots)
