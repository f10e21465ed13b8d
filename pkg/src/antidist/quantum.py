"""Quantum antidistinguishability: one-shot SDP error, exponent bounds,
and the divergences behind them.

The exact error exponent of a non-commuting ensemble is unknown; what this
module computes is the certified bracket around it: the best pairwise
quantum Chernoff divergence and measured (classical-after-measurement)
divergences from below, and -ln of the two-sided trace program (kappa)
from above, with the extended max-relative entropy and the log-Euclidean
divergence as companion quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import linalg
from .classical import ClassicalEnsemble, Distribution, multivariate_chernoff
from .errors import (ConvergenceError, DomainError, ResourceLimitError,
                     ValidationError)
from .extreal import ExtReal, ext_max
from .sdp import BoundedTraceProblem, recover_povm, solve_bounded_trace
from .simplexopt import minimize_on_simplex

_SUM_ATOL = 1e-12


@dataclass
class QuantumEnsemble:
    """Positive priors summing to one, paired with same-dimension density
    matrices."""

    priors: np.ndarray
    states: list

    def __post_init__(self):
        eta = np.asarray(self.priors, dtype=float)
        if eta.ndim != 1 or eta.size < 2:
            raise ValidationError("need at least two hypotheses")
        if np.any(eta <= 0):
            raise ValidationError("priors must be strictly positive")
        if abs(eta.sum() - 1.0) > _SUM_ATOL:
            raise ValidationError(f"priors sum to {eta.sum()!r}, not 1 within {_SUM_ATOL}")
        if len(self.states) != eta.size:
            raise ValidationError("number of priors and states differ")
        self.states = [linalg.validate_density(rho) for rho in self.states]
        dims = {rho.shape[0] for rho in self.states}
        if len(dims) != 1:
            raise ValidationError(f"states have mixed dimensions {dims}")
        self.priors = eta

    @property
    def r(self) -> int:
        return self.priors.size

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]


@dataclass
class Povm:
    """Finite set of PSD operators summing to the identity."""

    elements: list

    def __post_init__(self):
        if not self.elements:
            raise ValidationError("POVM needs at least one element")
        self.elements = [linalg.as_hermitian(M, atol=1e-9) for M in self.elements]
        d = self.elements[0].shape[0]
        if any(M.shape[0] != d for M in self.elements):
            raise ValidationError("POVM elements have mixed dimensions")
        for M in self.elements:
            if np.linalg.eigvalsh(M)[0] < -1e-8:
                raise ValidationError("POVM element is not PSD within 1e-8")
        dev = np.linalg.norm(sum(self.elements) - np.eye(d), 2)
        if dev > 1e-7:
            raise ValidationError(f"POVM elements sum to identity only within {dev:.2e}")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class ExponentBounds:
    """Bracket data for the optimal error exponent of one ensemble."""

    lower_pairwise: ExtReal
    lower_measured: ExtReal
    upper_neg_ln_kappa: ExtReal
    log_euclidean: float | None = None
    commuting_exact: ExtReal | None = None


class OneShotResult(NamedTuple):
    error: float
    povm: Povm
    dual_Y: np.ndarray
    gap: float


def one_shot_error(ensemble: QuantumEnsemble, tol: float = 1e-9) -> OneShotResult:
    """Optimal one-shot antidistinguishability error via the trace SDP
    sup {Tr Y : Y <= eta_i rho_i}, with the optimal POVM recovered from
    the multipliers."""
    uppers = [e * rho for e, rho in zip(ensemble.priors, ensemble.states)]
    problem = BoundedTraceProblem(uppers)
    sol = solve_bounded_trace(problem, tol=tol, max_iter=1000)
    povm = Povm(recover_povm(sol, problem))
    error = min(max(sol.value, 0.0), float(ensemble.priors.max()))
    return OneShotResult(error, povm, sol.Y, sol.gap)


def pairwise_upper_bound(ensemble: QuantumEnsemble) -> float:
    """min over pairs of Tr[eta_i rho_i ^ eta_j rho_j]; zero as soon as two
    states are orthogonal, in which case the ensemble is perfectly
    antidistinguishable."""
    eta, states = ensemble.priors, ensemble.states
    best = math.inf
    for i in range(ensemble.r):
        for j in range(i + 1, ensemble.r):
            val = np.trace(linalg.operator_min(eta[i] * states[i],
                                               eta[j] * states[j])).real
            best = min(best, float(val))
    return max(best, 0.0)


class PureStateBounds(NamedTuple):
    bound_exact_pair: float
    bound_overlap: float


def pure_state_bounds(ensemble: QuantumEnsemble) -> PureStateBounds:
    """Pure-state error bounds: the exact best-pair value and the weaker
    half-minimum-overlap bound."""
    vectors = []
    for rho in ensemble.states:
        w, V = linalg.eig_hermitian(rho)
        if w[-2] > 1e-9:
            raise ValidationError("pure_state_bounds requires rank-one states")
        vectors.append(V[:, -1])
    eta = ensemble.priors
    exact = math.inf
    overlap = math.inf
    for i in range(ensemble.r):
        for j in range(i + 1, ensemble.r):
            ov2 = abs(np.vdot(vectors[i], vectors[j])) ** 2
            s = eta[i] + eta[j]
            exact_ij = 0.5 * s * (1.0 - math.sqrt(max(0.0, 1.0 - 4.0 * eta[i] * eta[j] * ov2 / s ** 2)))
            exact = min(exact, exact_ij)
            overlap = min(overlap, 0.5 * ov2)
    return PureStateBounds(exact, overlap)


class ChernoffPairResult(NamedTuple):
    value: ExtReal
    s_star: float


def quantum_chernoff_pair(rho, sigma) -> ChernoffPairResult:
    """Quantum Chernoff divergence -ln inf_{s in [0,1]} Tr[rho^s sigma^(1-s)].

    Endpoints use support projectors (rho^0 projects onto supp rho), which
    is the continuous limit of the interior values.  States with orthogonal
    supports give an infinite divergence.
    """
    rho = linalg.validate_density(rho)
    sigma = linalg.validate_density(sigma)
    wa, Va = linalg.eig_hermitian(rho)
    wb, Vb = linalg.eig_hermitian(sigma)
    ka = wa > linalg.SUPPORT_CUTOFF * max(1.0, wa[-1])
    kb = wb > linalg.SUPPORT_CUTOFF * max(1.0, wb[-1])
    overlap = np.abs(Va[:, ka].conj().T @ Vb[:, kb]) ** 2
    if overlap.size == 0 or np.linalg.norm(overlap) <= linalg.SUPPORT_CUTOFF:
        return ChernoffPairResult(ExtReal.inf(), 0.5)
    la = np.log(wa[ka])
    lb = np.log(wb[kb])

    def f(s):
        return float(np.sum(np.exp(s * la[:, None] + (1.0 - s) * lb[None, :]) * overlap))

    res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": 1e-9})
    candidates = [(f(0.0), 0.0), (f(1.0), 1.0), (float(res.fun), float(res.x))]
    best, s_star = min(candidates)
    return ChernoffPairResult(ExtReal(-math.log(best)), s_star)


def lower_bound_exponent(ensemble: QuantumEnsemble) -> ExtReal:
    """Best pairwise quantum Chernoff divergence: a lower bound on the
    error exponent (infinite when two states have orthogonal supports)."""
    values = []
    for i in range(ensemble.r):
        for j in range(i + 1, ensemble.r):
            values.append(quantum_chernoff_pair(ensemble.states[i],
                                                ensemble.states[j]).value)
    return ext_max(values)


class KappaResult(NamedTuple):
    value: float
    is_zero: bool
    solution: object


KAPPA_ZERO_THRESHOLD = 1e-10


def kappa(states, tol: float = 1e-7) -> KappaResult:
    """sup {Tr Y : -rho_i <= Y <= rho_i}, solved on the common support of
    the states.  Values below 1e-10 are reported as exactly zero."""
    states = [linalg.validate_density(rho) for rho in states]
    if len(states) < 2:
        raise ValidationError("kappa needs at least two states")
    dims = {rho.shape[0] for rho in states}
    if len(dims) != 1:
        raise ValidationError("states have mixed dimensions")
    problem = BoundedTraceProblem(states, lowers=[-rho for rho in states])
    sol = solve_bounded_trace(problem, tol=tol, max_iter=1000)
    if sol.degenerate or sol.value < KAPPA_ZERO_THRESHOLD:
        return KappaResult(max(sol.value, 0.0), True, sol)
    return KappaResult(min(sol.value, 1.0), False, sol)


def upper_bound_exponent(states, tol: float = 1e-7) -> ExtReal:
    """-ln kappa: a single-letter upper bound on the error exponent,
    infinite when kappa = 0."""
    k = kappa(states, tol=tol)
    if k.is_zero:
        return ExtReal.inf()
    return ExtReal(-math.log(k.value))


def dmax(X, sigma) -> ExtReal:
    """Extended max-relative entropy: ln of the least lambda with
    -lambda*sigma <= X <= lambda*sigma; infinite when supp(X) is not
    contained in supp(sigma), else ln ||sigma^(-1/2) X sigma^(-1/2)||."""
    X = linalg.as_hermitian(X)
    sigma = linalg.as_hermitian(sigma)
    if np.linalg.norm(X, 2) == 0.0 or np.linalg.norm(sigma, 2) == 0.0:
        raise ValidationError("dmax requires nonzero operators")
    w, V = linalg.eig_hermitian(sigma)
    if w[0] < -1e-10:
        raise ValidationError("dmax requires a PSD second argument")
    keep = w > linalg.SUPPORT_CUTOFF * max(1.0, abs(w[-1]))
    xnorm = np.linalg.norm(X, 2)
    Vk = V[:, keep]
    off = X - Vk @ (Vk.conj().T @ X @ Vk) @ Vk.conj().T
    if np.linalg.norm(off, 2) > linalg.SUPPORT_CUTOFF * max(1.0, xnorm):
        return ExtReal.inf()
    core = (Vk / np.sqrt(w[keep])).conj().T
    M = core @ X @ core.conj().T
    return ExtReal(math.log(np.linalg.norm(M, 2)))


def dmax_minimax(states, tol: float = 1e-7) -> ExtReal:
    """inf over trace-one Hermitian omega of max_i Dmax(omega || rho_i).

    Equals -ln kappa whenever kappa > 0; the optimizer Y*/Tr[Y*] of the
    kappa program witnesses the equality, which is verified here.
    """
    k = kappa(states, tol=tol)
    if k.is_zero:
        return ExtReal.inf()
    bound = -math.log(k.value)
    omega = k.solution.Y / np.trace(k.solution.Y).real
    witness = max(float(dmax(omega, rho)) for rho in states)
    if witness > bound + 1e-6:
        raise ConvergenceError(
            f"kappa optimizer fails the minimax witness check: "
            f"{witness:.9f} > {bound:.9f} + 1e-6", best=k)
    return ExtReal(bound)


class LogEuclideanResult(NamedTuple):
    value: float
    s_star: np.ndarray


def log_euclidean_divergence(states, gap_tol: float = 1e-10) -> LogEuclideanResult:
    """max over simplex weights of -ln Tr exp(sum_i s_i ln rho_i), for
    positive definite states."""
    states = [linalg.validate_density(rho) for rho in states]
    logs = []
    for rho in states:
        if np.linalg.eigvalsh(rho)[0] <= 1e-10:
            raise DomainError("log_euclidean_divergence requires positive "
                              "definite states")
        logs.append(linalg.matrix_log(rho))
    r = len(logs)

    def fun_grad(s):
        A = sum(si * L for si, L in zip(s, logs))
        w, V = np.linalg.eigh(A)
        m = float(w[-1])
        e = np.exp(w - m)
        tr = float(e.sum())
        f = m + math.log(tr)
        E = (V * e) @ V.conj().T
        grad = np.array([float(np.trace(E @ L).real) / tr for L in logs])
        return f, grad

    res = minimize_on_simplex(fun_grad, r, gap_tol=gap_tol)
    return LogEuclideanResult(-res.value, res.point)


def induced_distributions(ensemble: QuantumEnsemble, povm: Povm) -> list[Distribution]:
    """Outcome distributions p_i(x) = Tr[M_x rho_i] of measuring each state."""
    dists = []
    for rho in ensemble.states:
        w = np.array([max(np.trace(M @ rho).real, 0.0) for M in povm.elements])
        dists.append(Distribution(w / w.sum()))
    return dists


def induced_classical_ensemble(ensemble: QuantumEnsemble, povm: Povm) -> ClassicalEnsemble:
    """Classical ensemble left after the measurement channel (only valid as
    an antidistinguishability instance when the POVM has r outcomes)."""
    return ClassicalEnsemble(ensemble.priors, induced_distributions(ensemble, povm))


def measured_lower_bound(ensemble: QuantumEnsemble, povm: Povm) -> ExtReal:
    """Classical multivariate Chernoff divergence of the measurement
    outcome distributions: a lower bound on the quantum error exponent for
    any POVM (of any outcome count)."""
    if povm.dim != ensemble.dim:
        raise ValidationError("POVM dimension does not match the ensemble")
    return multivariate_chernoff(induced_distributions(ensemble, povm)).value


class MeasuredSearchResult(NamedTuple):
    best: ExtReal
    povm: Povm


def _basis_povm(U) -> Povm:
    cols = [U[:, k] for k in range(U.shape[1])]
    return Povm([np.outer(v, v.conj()) for v in cols])


def _givens(d, p, q, theta, phase):
    G = np.eye(d, dtype=complex)
    c, s = math.cos(theta), math.sin(theta)
    G[p, p] = c
    G[q, q] = c
    G[p, q] = -s * np.conj(phase)
    G[q, p] = s * phase
    return G


def optimize_measured_lower_bound(ensemble: QuantumEnsemble, restarts: int = 8,
                                  seed: int = 0) -> MeasuredSearchResult:
    """Heuristic search over projective measurements for the best measured
    lower bound: Haar-random bases plus canonical candidates, refined by a
    Givens-rotation hill climb.  Whatever it returns is a valid lower
    bound on the exponent; the search only affects tightness.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    d = ensemble.dim

    def value_of(U, gap_tol=1e-6):
        # coarse tolerance while searching; the winner is re-evaluated
        povm = _basis_povm(U)
        dists = induced_distributions(ensemble, povm)
        return multivariate_chernoff(dists, gap_tol=gap_tol).value, povm

    candidates = [np.eye(d, dtype=complex)]
    avg = sum(e * rho for e, rho in zip(ensemble.priors, ensemble.states))
    candidates.append(linalg.eig_hermitian(avg).eigenvectors)
    joint = linalg.simultaneous_eigenbasis(ensemble.states)
    if joint is not None:
        candidates.append(joint)
    for k in range(restarts):
        rng = np.random.Generator(np.random.Philox(key=[seed, k]))
        G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        Q, R = np.linalg.qr(G)
        candidates.append(Q * (np.diag(R) / np.abs(np.diag(R))).conj())

    best_val, best_povm, best_U = None, None, None
    for U in candidates:
        val, povm = value_of(U)
        if best_val is None or val > best_val:
            best_val, best_povm, best_U = val, povm, U

    # local rotation search around the incumbent basis
    if best_val.is_finite:
        step = 0.2
        while step > 1e-2:
            improved = False
            for p in range(d):
                for q in range(p + 1, d):
                    for theta in (step, -step):
                        for phase in (1.0, 1j):
                            U_try = best_U @ _givens(d, p, q, theta, phase)
                            val, povm = value_of(U_try)
                            if val > best_val:
                                best_val, best_povm, best_U = val, povm, U_try
                                improved = True
            if not improved:
                step *= 0.5
    if best_val.is_finite:
        best_val, best_povm = value_of(best_U, gap_tol=1e-10)
    return MeasuredSearchResult(best_val, best_povm)


class SupermultiplicativityCheck(NamedTuple):
    holds: bool
    slack: float


def kappa_supermultiplicativity_check(states_a, states_b,
                                      tol: float = 1e-7) -> SupermultiplicativityCheck:
    """Check kappa(rho_i (x) sigma_i) >= kappa(rho_i) * kappa(sigma_i);
    slack is the left side minus the product."""
    if len(states_a) != len(states_b):
        raise ValidationError("need equally many states on both factors")
    da = states_a[0].shape[0]
    db = states_b[0].shape[0]
    if da * db > linalg.TENSOR_DIM_CAP:
        raise ResourceLimitError(
            f"tensor dimension {da * db} exceeds cap {linalg.TENSOR_DIM_CAP}",
            limit=linalg.TENSOR_DIM_CAP, requested=da * db)
    ka = kappa(states_a, tol=tol)
    kb = kappa(states_b, tol=tol)
    tensors = [linalg.tensor(a, b) for a, b in zip(states_a, states_b)]
    kab = kappa(tensors, tol=tol)
    slack = kab.value - ka.value * kb.value
    return SupermultiplicativityCheck(slack >= -1e-7, slack)


def exponent_bounds(ensemble: QuantumEnsemble, restarts: int = 6,
                    seed: int = 0) -> ExponentBounds:
    """Assemble the full bound bracket for an ensemble: pairwise and
    measured lower bounds, -ln kappa upper bound, the log-Euclidean value
    (full-rank states only) and the exact classical exponent when the
    states commute."""
    lower = lower_bound_exponent(ensemble)
    measured = optimize_measured_lower_bound(ensemble, restarts=restarts,
                                             seed=seed).best
    upper = upper_bound_exponent(ensemble.states)

    log_euc = None
    if all(np.linalg.eigvalsh(rho)[0] > 1e-10 for rho in ensemble.states):
        log_euc = log_euclidean_divergence(ensemble.states).value

    commuting = None
    joint = linalg.simultaneous_eigenbasis(ensemble.states)
    if joint is not None:
        spectra = []
        for rho in ensemble.states:
            p = np.maximum(np.real(np.einsum("ij,jk,ki->i", joint.conj().T, rho, joint)), 0.0)
            spectra.append(Distribution(p / p.sum()))
        commuting = multivariate_chernoff(spectra).value

    if lower.is_finite and upper.is_finite and lower.value > upper.value + 1e-6:
        raise ConvergenceError(
            f"bound bracket inverted: pairwise lower {lower.value:.9f} "
            f"exceeds -ln kappa {upper.value:.9f}")
    return ExponentBounds(lower, measured, upper, log_euc, commuting)
