"""Spectrahedral-box trace maximization.

Solves  max Tr[Y]  over Hermitian Y subject to per-index operator bounds
L_i <= Y <= U_i (lower bounds optional), which covers both the
antidistinguishability dual (uppers only) and the two-sided symmetric
program behind the kappa quantity.

Method: log-det barrier on the dual variable with damped Newton steps and
path following (barrier weight divided by 5 per outer stage), a
fraction-to-boundary line search, and multiplier matrices mu * inv(slack)
that yield a certified duality gap.  Two-sided symmetric problems
(L_i = -U_i) are compressed onto the common support of the U_i before
solving, which is what makes degenerate instances (kappa = 0 for states
with disjoint supports) exact rather than a barrier blow-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConvergenceError, ValidationError

_PSD_SLACK = 1e-10


@dataclass
class BoundedTraceProblem:
    """Constraint data: Y <= uppers[i] for all i, and optionally
    lowers[i] <= Y."""

    uppers: list
    lowers: list | None = None

    def __post_init__(self):
        if not self.uppers:
            raise ValidationError("need at least one upper bound")
        self.uppers = [linalg.as_hermitian(U) for U in self.uppers]
        d = self.uppers[0].shape[0]
        if any(U.shape[0] != d for U in self.uppers):
            raise ValidationError("upper bounds have mixed dimensions")
        if self.lowers is not None:
            if len(self.lowers) != len(self.uppers):
                raise ValidationError("lowers and uppers must have equal length")
            self.lowers = [linalg.as_hermitian(L) for L in self.lowers]
            if any(L.shape[0] != d for L in self.lowers):
                raise ValidationError("lower bounds have mixed dimensions")
            for L, U in zip(self.lowers, self.uppers):
                if np.linalg.eigvalsh(U - L)[0] < -_PSD_SLACK:
                    raise ValidationError("found a pair with L_i not below U_i")

    @property
    def dim(self) -> int:
        return self.uppers[0].shape[0]

    @property
    def two_sided(self) -> bool:
        return self.lowers is not None

    def is_symmetric_form(self) -> bool:
        """True when the lower bounds are exactly the negated uppers."""
        if self.lowers is None:
            return False
        return all(np.allclose(L, -U, atol=1e-12)
                   for L, U in zip(self.lowers, self.uppers))


@dataclass
class SdpSolution:
    """Solver output: optimizer, certified value and multiplier matrices.

    ``primal_certificate`` holds the PSD multipliers in constraint order
    (for uppers-only problems these are the POVM candidates; for two-sided
    problems the upper-side multipliers come first, then the lower-side
    ones).  For support-compressed two-sided solves the certificate lives
    on the working subspace and certifies the reduced (equivalent)
    program.  ``gap`` is the certified distance between the recovered
    primal objective and Tr[Y].
    """

    Y: np.ndarray
    value: float
    primal_certificate: list = field(default_factory=list)
    gap: float = 0.0
    iterations: int = 0
    degenerate: bool = False


class _Constraint:
    """Slack C - sign * B X B^dag that must stay positive definite.
    ``identity_B`` marks constraints acting on the full variable (B = I),
    which enables the fast two-term Newton solve."""

    __slots__ = ("C", "B", "sign", "identity_B", "slack", "w", "V",
                 "inv_slack", "A")

    def __init__(self, C, B, sign, identity_B=False):
        self.C = C
        self.B = B
        self.sign = sign
        self.identity_B = identity_B
        self.slack = None
        self.w = None
        self.V = None
        self.inv_slack = None
        self.A = None

    def set_point(self, X):
        self.slack = self.C - self.sign * (self.B @ X @ self.B.conj().T)
        w, V = np.linalg.eigh(self.slack)
        if w[0] <= 0:
            raise FloatingPointError("slack lost positive definiteness")
        self.w, self.V = w, V
        self.inv_slack = (V / w) @ V.conj().T
        if self.identity_B:
            self.A = self.inv_slack
        else:
            BtW = self.B.conj().T @ V
            self.A = (BtW / w) @ BtW.conj().T

    @property
    def block_size(self) -> int:
        return self.C.shape[0]

    def max_step(self, Delta) -> float:
        """Largest alpha keeping the slack PD along X + alpha * Delta."""
        M = self.sign * (self.B @ Delta @ self.B.conj().T)
        isqrt = (self.V / np.sqrt(self.w)) @ self.V.conj().T
        theta = np.linalg.eigvalsh(isqrt @ M @ isqrt)[-1]
        if theta <= 0:
            return math.inf
        return 1.0 / theta


def _pencil_solve(c1, c2, R):
    """Solve S1^-1 D S1^-1 + S2^-1 D S2^-1 = R via a congruence by
    S1^(1/2) and an eigendecomposition of S1^(1/2) S2^-1 S1^(1/2)."""
    sq1 = (c1.V * np.sqrt(c1.w)) @ c1.V.conj().T
    T = sq1 @ c2.inv_slack @ sq1
    t, W = np.linalg.eigh(0.5 * (T + T.conj().T))
    t = np.maximum(t, 0.0)
    Rp = W.conj().T @ (sq1 @ R @ sq1) @ W
    Dp = Rp / (1.0 + np.outer(t, t))
    D = sq1 @ (W @ Dp @ W.conj().T) @ sq1
    return 0.5 * (D + D.conj().T)


def _apply_hessian(constraints, D):
    out = np.zeros_like(D)
    for c in constraints:
        out += c.A @ D @ c.A
    return out


def _newton_direction(constraints, G, mu):
    """Solve  mu * sum_j A_j Delta A_j = G  for Hermitian Delta."""
    R = G / mu
    m = G.shape[0]
    if len(constraints) == 2 and all(c.identity_B for c in constraints):
        Delta = _pencil_solve(constraints[0], constraints[1], R)
        # iterative refinement absorbs the conditioning of the congruence
        r_norm0 = max(np.linalg.norm(R), 1e-300)
        res = np.inf
        for _ in range(3):
            resid = R - _apply_hessian(constraints, Delta)
            res = np.linalg.norm(resid)
            if res <= 1e-10 * r_norm0:
                break
            Delta = Delta + _pencil_solve(constraints[0], constraints[1], resid)
        resid = R - _apply_hessian(constraints, Delta)
        # mildly inexact directions are still fine for damped Newton
        if np.linalg.norm(resid) <= 1e-3 * r_norm0 or m > 32:
            return 0.5 * (Delta + Delta.conj().T)
        # conditioning broke the fast solve on a small problem: fall through
    H = np.zeros((m * m, m * m), dtype=complex)
    for c in constraints:
        H += np.kron(c.A, c.A.conj())
    delta = np.linalg.solve(H, R.reshape(-1))
    Delta = delta.reshape(m, m)
    return 0.5 * (Delta + Delta.conj().T)


def _barrier_solve(constraints, m, tol, max_iter, X0=None, log=None):
    """Path-following maximization of Tr X + mu * sum log det(slack).

    Per stage, damped Newton on the self-concordant centering function
    until the Newton decrement drops below 0.25 (1e-7 at the final stage);
    the step is the full Newton step capped by the fraction-to-boundary
    rule, damped by 1/(1 + decrement) away from the quadratic phase.
    """
    X = np.zeros((m, m), dtype=complex) if X0 is None else X0.copy()
    for c in constraints:
        c.set_point(X)
    total_block = sum(c.block_size for c in constraints)
    mu0 = max(1.0, max(np.linalg.eigvalsh(c.C)[-1] for c in constraints))
    mu = mu0
    iters = 0
    # floor keeps slack conditioning inside what float64 supports
    mu_target = max(tol / (2.0 * total_block), 2e-11 * mu0)

    while True:
        final_stage = mu <= mu_target
        target = 1e-6 if final_stage else 0.25
        prev_dec = math.inf
        stalls = 0
        for _ in range(80):
            G = np.eye(m, dtype=complex)
            for c in constraints:
                G -= (mu * c.sign) * c.A
            Delta = _newton_direction(constraints, G, mu)
            lam2 = float(np.trace(G @ Delta).real) / mu
            decrement = math.sqrt(max(lam2, 0.0))
            if decrement <= target:
                break
            # floating-point floor: in the quadratic phase the decrement
            # should collapse; stop when it no longer shrinks
            if decrement < 0.25:
                stalls = stalls + 1 if decrement > 0.7 * prev_dec else 0
                if stalls >= 3:
                    break
            prev_dec = min(prev_dec, decrement)
            if iters >= max_iter:
                raise ConvergenceError(
                    f"barrier solver hit max_iter={max_iter}",
                    best=_package(constraints, X, mu, iters))
            alpha = min(1.0, 0.99 * min(c.max_step(Delta) for c in constraints))
            if decrement > 0.25:
                alpha = min(alpha, 1.0 / (1.0 + decrement))
            for _ in range(60):
                try:
                    X_try = X + alpha * Delta
                    for c in constraints:
                        c.set_point(X_try)
                    X = X_try
                    break
                except FloatingPointError:
                    alpha *= 0.5
            else:
                for c in constraints:
                    c.set_point(X)
                break
            iters += 1
            if log is not None:
                log({"mu": mu, "iter": iters, "decrement": decrement,
                     "trace": float(np.trace(X).real)})
        if final_stage:
            return _package(constraints, X, mu, iters)
        mu /= 5.0


def _package(constraints, X, mu, iters):
    multipliers = [mu * c.inv_slack for c in constraints]
    return X, multipliers, mu, iters


def _refit_identity_sum(mults):
    """Conjugate the multipliers by (sum M_i)^(-1/2) so they sum to the
    identity exactly (to rounding) while staying PSD.  This removes the
    eigenvalue-inversion noise the raw multipliers pick up at small
    barrier weights.  Falls back to the raw matrices when the sum is far
    from the identity."""
    T = sum(mults)
    w, V = np.linalg.eigh(T)
    if w[0] <= 0.5:
        return mults
    isqrt = (V / np.sqrt(w)) @ V.conj().T
    return [isqrt @ M @ isqrt for M in mults]


def _common_support_basis(mats, cutoff=linalg.SUPPORT_CUTOFF):
    """Orthonormal basis of the intersection of the supports."""
    d = mats[0].shape[0]
    A = np.zeros((d, d), dtype=complex)
    for M in mats:
        A += np.eye(d) - linalg.support_projector(M, cutoff)
    w, V = np.linalg.eigh(A)
    keep = w <= cutoff * max(1.0, w[-1] if w.size else 1.0)
    return V[:, keep]


def solve_bounded_trace(problem: BoundedTraceProblem, tol: float = 1e-8,
                        max_iter: int = 200, log=None) -> SdpSolution:
    """Maximize Tr[Y] subject to the problem's operator bounds.

    Returns an SdpSolution whose ``value`` is the trace of the final
    (strictly feasible) iterate and whose ``gap`` certifies the distance
    to the optimum via the multiplier matrices.
    """
    d = problem.dim

    if not problem.two_sided:
        scale = max(linalg.op_norm(U) for U in problem.uppers)
        X0 = -(scale + 1.0) * np.eye(d, dtype=complex)
        constraints = [_Constraint(U, np.eye(d, dtype=complex), +1, identity_B=True)
                       for U in problem.uppers]
        X, mults, mu, iters = _barrier_solve(constraints, d, tol, max_iter,
                                             X0=X0, log=log)
        value = float(np.trace(X).real)
        mults = _refit_identity_sum(mults)
        primal = sum(float(np.trace(M @ U).real)
                     for M, U in zip(mults, problem.uppers))
        R = np.eye(d, dtype=complex) - sum(mults)
        # any optimizer satisfies ||Y||_2 <= max(u, (d-1)u - value) with
        # u = min_i lambda_max(U_i); the (rounding-level) residual of the
        # refitted multipliers then gives a fully certified bound
        u = min(np.linalg.eigvalsh(U)[-1] for U in problem.uppers)
        c0 = max(abs(u), (d - 1) * abs(u) - value)
        gap = max(primal - value + np.linalg.norm(R, 2) * d * c0, 0.0)
        return SdpSolution(Y=X, value=value, primal_certificate=mults,
                           gap=gap, iterations=iters)

    if problem.is_symmetric_form():
        W = _common_support_basis(problem.uppers)
        m = W.shape[1]
        if m == 0:
            return SdpSolution(Y=np.zeros((d, d), dtype=complex), value=0.0,
                               primal_certificate=[], gap=0.0, iterations=0,
                               degenerate=True)
        constraints = []
        for U in problem.uppers:
            V = linalg.support_basis(U)
            C = V.conj().T @ U @ V
            B = V.conj().T @ W
            constraints.append(_Constraint(C, B, +1))
        for U in problem.uppers:
            V = linalg.support_basis(U)
            C = V.conj().T @ U @ V
            B = V.conj().T @ W
            constraints.append(_Constraint(C, B, -1))
        X, mults, mu, iters = _barrier_solve(constraints, m, tol, max_iter, log=log)
        # dual-feasibility residual on the working subspace
        R = np.eye(m, dtype=complex)
        for c, Z in zip(constraints, mults):
            R -= c.sign * (c.B.conj().T @ Z @ c.B)
        primal = sum(float(np.trace(Z @ c.C).real)
                     for Z, c in zip(mults, constraints))
        value = float(np.trace(X).real)
        # feasible points satisfy -U_i <= Y <= U_i, so ||Y||_2 <= u
        u = min(np.linalg.eigvalsh(U)[-1] for U in problem.uppers)
        gap = max(primal - value + np.linalg.norm(R, 2) * m * abs(u), 0.0)
        Y = W @ X @ W.conj().T
        return SdpSolution(Y=Y, value=value, primal_certificate=mults,
                           gap=gap, iterations=iters)

    # general two-sided: no support reduction; require a strictly feasible
    # midpoint start
    mid = sum(0.5 * (U + L) for U, L in zip(problem.uppers, problem.lowers)) \
        / len(problem.uppers)
    constraints = [_Constraint(U, np.eye(d, dtype=complex), +1, identity_B=True)
                   for U in problem.uppers]
    constraints += [_Constraint(-L, np.eye(d, dtype=complex), -1, identity_B=True)
                    for L in problem.lowers]
    slack_min = min(np.linalg.eigvalsh(c.C - c.sign * mid)[0] for c in constraints)
    if slack_min <= 0:
        raise ValidationError(
            "no strictly feasible start for the general two-sided form; "
            "the pooled midpoint violates a constraint")
    X, mults, mu, iters = _barrier_solve(constraints, d, tol, max_iter,
                                         X0=mid, log=log)
    primal = sum(float(np.trace(Z @ c.C).real)
                 for Z, c in zip(mults, constraints))
    R = np.eye(d, dtype=complex)
    for c, Z in zip(constraints, mults):
        R -= c.sign * Z
    value = float(np.trace(X).real)
    c0 = max(max(linalg.op_norm(U) for U in problem.uppers),
             max(linalg.op_norm(L) for L in problem.lowers))
    gap = max(primal - value + np.linalg.norm(R, 2) * d * c0, 0.0)
    return SdpSolution(Y=X, value=value, primal_certificate=mults,
                       gap=gap, iterations=iters)


def recover_povm(solution: SdpSolution, problem: BoundedTraceProblem) -> list:
    """Measurement operators from an uppers-only solve.

    The solution's multipliers are PSD and sum to the identity up to
    rounding; the remaining (rounding-level) completeness residual is
    assigned to the lowest-index operator.
    """
    if problem.two_sided:
        raise ValidationError("POVM recovery applies to the uppers-only form")
    if not solution.primal_certificate:
        raise ValidationError("solution carries no multipliers")
    d = problem.dim
    povm = [M.copy() for M in solution.primal_certificate]
    R = np.eye(d, dtype=complex) - sum(povm)
    povm[0] = povm[0] + R
    return povm
