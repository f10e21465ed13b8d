"""n-fold error scans and exponent estimation.

Ties the one-shot machinery to the asymptotic statements: classical scans
evaluate the exact (or Monte Carlo) n-fold error and fit the decay rate,
quantum scans solve the tensor-power SDP per copy count (routing commuting
ensembles through the classical reduction).  Rows are independent and are
computed on a small thread pool capped by the ANTIDIST_THREADS variable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .classical import (ClassicalEnsemble, Distribution, MonteCarloEstimate,
                        kappa_commuting, multivariate_chernoff, nfold_error,
                        pairwise_chernoff)
from .errors import ResourceLimitError, ValidationError
from .extreal import ExtReal, ext_max, neg_log
from .quantum import ExponentBounds, QuantumEnsemble, exponent_bounds
from .sdp import BoundedTraceProblem, solve_bounded_trace

# SDP scans keep the tensor-power dimension at or below this.
QUANTUM_SCAN_DIM_CAP = 64


def worker_count() -> int:
    """Thread cap for row-parallel scans (ANTIDIST_THREADS, default:
    hardware parallelism)."""
    env = os.environ.get("ANTIDIST_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"ANTIDIST_THREADS={env!r} is not an integer")
    return os.cpu_count() or 1


@dataclass
class ScanRow:
    """One copy count: error probability and its decay rate."""

    n: int
    error: float
    neg_log_rate: ExtReal
    mode: str
    std_err: float | None = None


@dataclass
class ScanReport:
    """Scan rows plus the fitted exponent and the bound bracket."""

    rows: list
    fitted_exponent: ExtReal
    bounds: ExponentBounds

    @property
    def last_rate(self) -> ExtReal:
        return self.rows[-1].neg_log_rate


def _rate(error: float, n: int) -> ExtReal:
    if error <= 0.0:
        return ExtReal.inf()
    return ExtReal(-math.log(error) / n)


def _fit_exponent(rows) -> ExtReal:
    finite = [row for row in rows if row.error > 0.0]
    if len(finite) < len(rows):
        # a zero-error row certifies perfect antidistinguishability
        return ExtReal.inf()
    window = finite[-max(1, math.ceil(len(finite) / 2)):]
    if len(window) == 1:
        return window[0].neg_log_rate
    ns = np.array([row.n for row in window], dtype=float)
    ys = np.array([-math.log(row.error) for row in window])
    slope = np.polyfit(ns, ys, 1)[0]
    return ExtReal(float(slope))


def _map_rows(fn, ns):
    workers = worker_count()
    if workers == 1 or len(ns) == 1:
        return [fn(n) for n in ns]
    with ThreadPoolExecutor(max_workers=min(workers, len(ns))) as pool:
        return list(pool.map(fn, ns))


def classical_bounds(ensemble: ClassicalEnsemble) -> ExponentBounds:
    """Bound bracket of a classical ensemble.  The multivariate divergence
    is the exact exponent; the identity measurement makes the measured
    bound equal to it, and the diagonal two-sided trace program has the
    closed form sum_w min_i p_i(w)."""
    exact = multivariate_chernoff(ensemble.dists).value
    pairs = []
    for i in range(ensemble.r):
        for j in range(i + 1, ensemble.r):
            pairs.append(pairwise_chernoff(ensemble.dists[i], ensemble.dists[j]))
    upper = neg_log(kappa_commuting(ensemble.dists))
    return ExponentBounds(lower_pairwise=ext_max(pairs), lower_measured=exact,
                          upper_neg_ln_kappa=upper, log_euclidean=None,
                          commuting_exact=exact)


def classical_scan(ensemble: ClassicalEnsemble, n_max: int, mode: str = "exact",
                   trials: int = 100_000, seed: int = 0) -> ScanReport:
    """Evaluate the n-fold error for n = 1..n_max and fit the decay rate
    over the largest half of the rows.

    A zero-error row (exact mode) means the ensemble is perfectly
    antidistinguishable at that copy count; the scan stops there and
    reports an infinite exponent.
    """
    if n_max < 2:
        raise ValidationError("n_max must be at least 2")
    if mode not in ("exact", "monte_carlo"):
        raise ValidationError(f"unknown mode {mode!r}")

    def row(n):
        if mode == "exact":
            err = nfold_error(ensemble, n, mode="exact")
            return ScanRow(n, err, _rate(err, n), "exact")
        est: MonteCarloEstimate = nfold_error(
            ensemble, n, mode="monte_carlo", trials=trials,
            seed=seed * 1_000_003 + n)
        return ScanRow(n, est.value, _rate(est.value, n), "monte_carlo",
                       std_err=est.std_err)

    rows = _map_rows(row, list(range(1, n_max + 1)))
    if mode == "exact":
        for k, r in enumerate(rows):
            if r.error <= 0.0:
                rows = rows[:k + 1]
                break
    return ScanReport(rows, _fit_exponent(rows), classical_bounds(ensemble))


class CommutingCheck(NamedTuple):
    commuting: bool
    basis: np.ndarray | None


def commuting_detector(states, tol: float = 1e-10) -> CommutingCheck:
    """True when all pairwise commutators vanish within ``tol`` in operator
    norm; on success also returns a simultaneous eigenbasis."""
    basis = linalg.simultaneous_eigenbasis(states, tol=tol)
    return CommutingCheck(basis is not None, basis)


def spectra_in_basis(states, basis) -> list[Distribution]:
    """Diagonal weights of each state in the given orthonormal basis."""
    dists = []
    for rho in states:
        p = np.real(np.einsum("ji,jk,ki->i", basis.conj(), rho, basis))
        p = np.maximum(p, 0.0)
        dists.append(Distribution(p / p.sum()))
    return dists


# relative weight of the identity added before tensor powering, to keep
# barrier determinants finite; biases the error by at most dim * this
SMOOTHING = 1e-12


def quantum_scan(ensemble: QuantumEnsemble, n_max: int, restarts: int = 4,
                 seed: int = 0, sdp_tol: float = 1e-7) -> ScanReport:
    """Tensor-power error scan of a quantum ensemble.

    Commuting ensembles are detected and routed through the classical
    reduction; otherwise each row solves the antidistinguishability SDP on
    the n-fold states (dimension capped at 64), with the states smoothed
    by a relative 1e-12 mixture of the identity first.
    """
    if n_max < 2:
        raise ValidationError("n_max must be at least 2")
    d = ensemble.dim
    if d ** n_max > QUANTUM_SCAN_DIM_CAP:
        raise ResourceLimitError(
            f"dim**n_max = {d ** n_max} exceeds the SDP scan cap "
            f"{QUANTUM_SCAN_DIM_CAP}; reduce n_max",
            limit=QUANTUM_SCAN_DIM_CAP, requested=d ** n_max)

    bounds = exponent_bounds(ensemble, restarts=restarts, seed=seed)

    check = commuting_detector(ensemble.states)
    if check.commuting:
        spectra = spectra_in_basis(ensemble.states, check.basis)
        classical = classical_scan(ClassicalEnsemble(ensemble.priors, spectra),
                                   n_max, mode="exact")
        return ScanReport(classical.rows, classical.fitted_exponent, bounds)

    smoothed = [(rho + SMOOTHING * np.eye(d)) / (1.0 + SMOOTHING * d)
                for rho in ensemble.states]

    def row(n):
        uppers = [e * linalg.tensor_power(rho, n, cap=QUANTUM_SCAN_DIM_CAP)
                  for e, rho in zip(ensemble.priors, smoothed)]
        sol = solve_bounded_trace(BoundedTraceProblem(uppers), tol=sdp_tol,
                                  max_iter=2000)
        err = min(max(sol.value, 0.0), float(ensemble.priors.max()))
        return ScanRow(n, err, _rate(err, n), "sdp")

    rows = _map_rows(row, list(range(1, n_max + 1)))
    for k, r in enumerate(rows):
        if r.error <= 0.0:
            rows = rows[:k + 1]
            break
    return ScanReport(rows, _fit_exponent(rows), bounds)
