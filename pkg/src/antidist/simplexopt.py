"""Convex minimization over the probability simplex.

Exponentiated-gradient (mirror descent) steps with Armijo backtracking,
started from the barycenter.  The stopping certificate is the linearized
(Frank-Wolfe) gap  <g, s> - min_i g_i,  which upper-bounds f(s) - f* for
convex f, so boundary minimizers are certified just like interior ones.
A recursive grid refinement (step halving from 1/8) backs the method up
when mirror descent stalls.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError


class SimplexMin(NamedTuple):
    point: np.ndarray
    value: float
    gap: float


def _fw_gap(s: np.ndarray, g: np.ndarray) -> float:
    return float(np.dot(g, s) - np.min(g))


def minimize_on_simplex(fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
                        r: int,
                        gap_tol: float = 1e-10,
                        max_iter: int = 20000,
                        s0: np.ndarray | None = None) -> SimplexMin:
    """Minimize a smooth convex function over the unit simplex in R^r.

    ``fun_grad(s)`` must return ``(f(s), grad f(s))``.  Returns the best
    point together with its certified optimality gap.  Raises
    ConvergenceError if the gap cannot be brought below 1e-7 even after
    the grid fallback.
    """
    s = np.full(r, 1.0 / r) if s0 is None else np.asarray(s0, dtype=float)
    f, g = fun_grad(s)
    eta = 1.0
    for _ in range(max_iter):
        gap = _fw_gap(s, g)
        if gap <= gap_tol:
            return SimplexMin(s, f, gap)
        accepted = False
        backtracked = False
        for _ in range(60):
            z = s * np.exp(-eta * (g - np.max(g)))
            total = z.sum()
            if total <= 0.0 or not np.isfinite(total):
                eta *= 0.5
                backtracked = True
                continue
            z /= total
            fz, gz = fun_grad(z)
            # Armijo on the linearized decrease
            if fz <= f - 1e-4 * float(np.dot(g, s - z)):
                s, f, g = z, fz, gz
                accepted = True
                # grow the step only when it was accepted outright
                if not backtracked:
                    eta *= 2.0
                break
            eta *= 0.5
            backtracked = True
        if not accepted:
            break

    # mirror descent stalled: polish with a simplex grid refinement
    s, f = _grid_refine(lambda p: fun_grad(p)[0], s, f)
    _, g = fun_grad(s)
    gap = _fw_gap(s, g)
    if gap > 1e-7:
        raise ConvergenceError(
            f"simplex minimization stalled with optimality gap {gap:.3e}",
            best=SimplexMin(s, f, gap))
    return SimplexMin(s, f, gap)


def _grid_refine(fun: Callable[[np.ndarray], float],
                 s: np.ndarray, f: float,
                 step0: float = 0.125, min_step: float = 1e-12) -> tuple[np.ndarray, float]:
    """Local simplex-lattice search: move mass h between coordinate pairs,
    halving h whenever no move improves."""
    r = s.size
    h = step0
    while h >= min_step:
        improved = False
        for i in range(r):
            for j in range(r):
                if i == j or s[j] <= 0.0:
                    continue
                move = min(h, s[j])
                z = s.copy()
                z[j] -= move
                z[i] += move
                fz = fun(z)
                if fz < f - 1e-16:
                    s, f = z, fz
                    improved = True
        if not improved:
            h *= 0.5
    return s, f
