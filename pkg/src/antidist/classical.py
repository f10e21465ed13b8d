"""Classical antidistinguishability at desk scale.

Finite sample spaces with densities taken w.r.t. the counting measure:
Hellinger transform, multivariate and pairwise classical Chernoff
divergences, minimum-likelihood one-shot and n-fold error probabilities,
and the exponential-family diagnostics used to certify the simplex
minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ResourceLimitError, ValidationError
from .extreal import ExtReal
from .simplexopt import minimize_on_simplex

# Cap on |Omega|**n for exact n-fold evaluation.
EXACT_ENUMERATION_CAP = 10**7

_SUM_ATOL = 1e-12


@dataclass
class Distribution:
    """Probability weights on a finite sample space (counting measure)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValidationError("weights must be a nonempty 1-D vector")
        if np.any(w < 0):
            raise ValidationError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > _SUM_ATOL:
            raise ValidationError(f"weights sum to {w.sum()!r}, not 1 within {_SUM_ATOL}")
        if not np.any(w > 0):
            raise ValidationError("distribution has empty support")
        self.weights = w

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0


@dataclass
class ClassicalEnsemble:
    """Positive priors summing to one, paired with same-size distributions."""

    priors: np.ndarray
    dists: list[Distribution] = field(default_factory=list)

    def __post_init__(self):
        eta = np.asarray(self.priors, dtype=float)
        if eta.ndim != 1 or eta.size < 2:
            raise ValidationError("need at least two hypotheses")
        if np.any(eta <= 0):
            raise ValidationError("priors must be strictly positive")
        if abs(eta.sum() - 1.0) > _SUM_ATOL:
            raise ValidationError(f"priors sum to {eta.sum()!r}, not 1 within {_SUM_ATOL}")
        if len(self.dists) != eta.size:
            raise ValidationError("number of priors and distributions differ")
        sizes = {d.size for d in self.dists}
        if len(sizes) != 1:
            raise ValidationError(f"distributions have mixed sizes {sizes}")
        self.priors = eta

    @property
    def r(self) -> int:
        return self.priors.size

    @property
    def size(self) -> int:
        return self.dists[0].size

    def weight_matrix(self) -> np.ndarray:
        return np.stack([d.weights for d in self.dists])


@dataclass
class ChernoffResult:
    """Multivariate classical Chernoff divergence with its certificate data.

    ``hellinger_at_min`` is the common-support restriction of the Hellinger
    transform evaluated at the minimizer (the continuous extension whose
    infimum the divergence takes), so value = -ln(hellinger_at_min) whenever
    the common support is nonempty.
    """

    value: ExtReal
    minimizer: np.ndarray
    hellinger_at_min: float
    common_support_mass: np.ndarray


def check_simplex(s, r: int | None = None, atol: float = _SUM_ATOL) -> np.ndarray:
    """Validate a point of the closed unit simplex and return it as an array."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise ValidationError("simplex point must be a 1-D vector")
    if r is not None and s.size != r:
        raise ValidationError(f"simplex point has length {s.size}, expected {r}")
    if np.any(s < -atol) or abs(s.sum() - 1.0) > atol:
        raise ValidationError("point is not in the unit simplex")
    return np.clip(s, 0.0, None)


def _weight_matrix(dists: list[Distribution]) -> np.ndarray:
    if len(dists) < 1:
        raise ValidationError("need at least one distribution")
    sizes = {d.size for d in dists}
    if len(sizes) != 1:
        raise ValidationError(f"distributions have mixed sizes {sizes}")
    return np.stack([d.weights for d in dists])


def _common_support(W: np.ndarray) -> np.ndarray:
    return np.all(W > 0, axis=0)


def hellinger_transform(dists: list[Distribution], s) -> float:
    """sum_w  prod_i p_i(w)**s_i  with the convention 0**0 = 1.

    Coordinates with s_i = 0 contribute a factor 1 regardless of p_i(w);
    the sum therefore runs over the joint support of the actively-weighted
    densities only.
    """
    W = _weight_matrix(dists)
    s = check_simplex(s, r=W.shape[0])
    active = s > 0
    if not np.any(active):
        raise ValidationError("simplex point has no positive coordinate")
    Wa = W[active]
    on = np.all(Wa > 0, axis=0)
    if not np.any(on):
        return 0.0
    logs = np.log(Wa[:, on])
    return float(np.sum(np.exp(s[active] @ logs)))


def _restricted_log_objective(W: np.ndarray):
    """Log of the common-support Hellinger transform and its gradient,
    as a callable for the simplex optimizer."""
    D = _common_support(W)
    L = np.log(W[:, D])  # (r, |D|), all finite

    def fun_grad(s):
        a = s @ L
        m = np.max(a)
        e = np.exp(a - m)
        total = e.sum()
        f = m + math.log(total)
        grad = (L * e).sum(axis=1) / total
        return f, grad

    return D, L, fun_grad


def multivariate_chernoff(dists: list[Distribution],
                          gap_tol: float = 1e-10) -> ChernoffResult:
    """Multivariate classical Chernoff divergence
    -ln inf_s sum_w prod_i p_i(w)**s_i over the unit simplex.

    The minimization restricts to the common support and minimizes the
    continuous extension over the closed simplex, so the reported
    minimizer may sit on the boundary.  An empty common support gives an
    infinite divergence.
    """
    W = _weight_matrix(dists)
    r = W.shape[0]
    if r < 2:
        raise ValidationError("need at least two distributions")
    D = _common_support(W)
    alpha = W[:, D].sum(axis=1) if np.any(D) else np.zeros(r)
    if not np.any(D):
        return ChernoffResult(ExtReal.inf(), np.full(r, 1.0 / r), 0.0, alpha)

    _, L, fun_grad = _restricted_log_objective(W)
    res = minimize_on_simplex(fun_grad, r, gap_tol=gap_tol)
    s_best, f_best = res.point, res.value

    # boundary minimizers: snap negligible coordinates to exact zeros
    snapped = np.where(s_best < 1e-8, 0.0, s_best)
    total = snapped.sum()
    if total > 0 and not np.array_equal(snapped, s_best):
        snapped /= total
        f_snap = fun_grad(snapped)[0]
        if f_snap <= f_best:
            s_best, f_best = snapped, f_snap

    return ChernoffResult(ExtReal(-f_best), s_best, math.exp(f_best), alpha)


def pairwise_chernoff(P: Distribution, Q: Distribution) -> ExtReal:
    """Classical Chernoff divergence -ln inf_{s in [0,1]} sum_w p^s q^(1-s)."""
    if P.size != Q.size:
        raise ValidationError("distributions have different sizes")
    on = (P.weights > 0) & (Q.weights > 0)
    if not np.any(on):
        return ExtReal.inf()
    lp = np.log(P.weights[on])
    lq = np.log(Q.weights[on])

    def f(s):
        return float(np.sum(np.exp(s * lp + (1.0 - s) * lq)))

    res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": 1e-10})
    best = min(f(0.0), f(1.0), float(res.fun))
    return ExtReal(-math.log(best))


def min_likelihood_error(ensemble: ClassicalEnsemble) -> float:
    """One-shot optimal error: sum_w min_i eta_i p_i(w)."""
    W = ensemble.weight_matrix()
    return float(np.sum(np.min(ensemble.priors[:, None] * W, axis=0)))


class MonteCarloEstimate(NamedTuple):
    """Error-frequency estimate with its sampling uncertainty."""

    value: float
    std_err: float
    wilson_low: float
    wilson_high: float


def _compositions(n: int, k: int):
    """All count vectors of length k summing to n."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _multinomial(n: int, counts) -> int:
    out = 1
    rem = n
    for c in counts:
        out *= math.comb(rem, c)
        rem -= c
    return out


def nfold_error(ensemble: ClassicalEnsemble, n: int, mode: str = "exact",
                trials: int = 100_000, seed: int | None = None):
    """Optimal error probability of the n-fold ensemble.

    exact mode sums min_i eta_i prod_k p_i(w_k) over all product atoms
    (grouped by count vector, whose likelihoods coincide) and requires
    |Omega|**n <= EXACT_ENUMERATION_CAP.  monte_carlo mode samples the
    mixture, applies the minimum-likelihood rule and returns a
    MonteCarloEstimate with a 95% Wilson interval.
    """
    if n < 1:
        raise ValidationError("n must be a positive integer")
    W = ensemble.weight_matrix()
    eta = ensemble.priors
    size = W.shape[1]

    if mode == "exact":
        total_atoms = size ** n
        if total_atoms > EXACT_ENUMERATION_CAP:
            raise ResourceLimitError(
                f"exact mode needs |Omega|**n = {total_atoms} atoms, cap is "
                f"{EXACT_ENUMERATION_CAP}; use mode='monte_carlo'",
                limit=EXACT_ENUMERATION_CAP, requested=total_atoms)
        terms = []
        for counts in _compositions(n, size):
            c = np.array(counts, dtype=float)
            prods = np.prod(W ** c, axis=1)  # 0**0 = 1 covers off-support
            m = float(np.min(eta * prods))
            if m > 0.0:
                terms.append(_multinomial(n, counts) * m)
        return math.fsum(terms)

    if mode != "monte_carlo":
        raise ValidationError(f"unknown mode {mode!r}")
    if trials < 1:
        raise ValidationError("trials must be positive")
    if seed is None:
        raise ValidationError("monte_carlo mode requires an explicit seed")
    rng = np.random.Generator(np.random.Philox(key=seed))
    per_true = rng.multinomial(trials, eta)
    log_eta = np.log(eta)
    safe_log = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)), -1e6)
    wrong = 0
    for i, count in enumerate(per_true):
        if count == 0:
            continue
        counts = rng.multinomial(n, W[i], size=count)  # (count, |Omega|)
        scores = log_eta[None, :] + counts @ safe_log.T
        ruled_out = np.argmin(scores, axis=1)
        wrong += int(np.sum(ruled_out == i))
    p_hat = wrong / trials
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    z = 1.959963984540054  # 95%
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials
                         + z * z / (4.0 * trials * trials)) / denom
    return MonteCarloEstimate(p_hat, std_err,
                              max(0.0, center - half), min(1.0, center + half))


def _conditional_on_common_support(dists: list[Distribution]):
    W = _weight_matrix(dists)
    D = _common_support(W)
    if not np.any(D):
        raise DomainError("empty common support")
    alpha = W[:, D].sum(axis=1)
    cond = W[:, D] / alpha[:, None]
    return W, D, alpha, cond


def _check_noncorner(t, r: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size != r - 1:
        raise ValidationError(f"expected a parameter vector of length {r - 1}")
    if np.any(t < 0) or t.sum() > 1.0 + _SUM_ATOL:
        raise ValidationError("parameter must satisfy t_i >= 0 and sum t_i <= 1")
    if t.sum() >= 1.0:
        raise DomainError("corner point (sum t_i = 1) is excluded")
    return t


def exponential_family_density(dists: list[Distribution], t) -> Distribution:
    """Tilted density  p_t  proportional to  prod_i p~_i(w)**s_i  on the
    common support, where s = (t_1, ..., t_{r-1}, 1 - sum t_j) and p~_i are
    the densities conditioned on the common support.

    At t = 0 this is the conditional r-th density.
    """
    r = len(dists)
    t = _check_noncorner(t, r)
    W, D, alpha, cond = _conditional_on_common_support(dists)
    s = np.append(t, 1.0 - t.sum())
    logc = np.log(cond)
    a = s @ logc
    w_on = np.exp(a - np.max(a))
    w_on /= w_on.sum()
    full = np.zeros(W.shape[1])
    full[D] = w_on
    return Distribution(full)


def gamma_diagnostics(dists: list[Distribution], t) -> np.ndarray:
    """Expected log-likelihood ratios gamma_i = E_t[ln(p~_i / p~_t)] + ln alpha_i
    under the tilted density, evaluated on the common support.

    At the Chernoff minimizer t*, min_i gamma_i(t*) is (up to roundoff) at
    least the log-Hellinger value, which certifies the minimizer.
    """
    r = len(dists)
    t = _check_noncorner(t, r)
    W, D, alpha, cond = _conditional_on_common_support(dists)
    s = np.append(t, 1.0 - t.sum())
    logc = np.log(cond)
    a = s @ logc
    m = np.max(a)
    e = np.exp(a - m)
    H = e.sum()
    w_t = e / H
    log_pt = a - (m + math.log(H))
    gammas = (w_t[None, :] * (logc - log_pt[None, :])).sum(axis=1) + np.log(alpha)
    return gammas


def restricted_log_hellinger(dists: list[Distribution], s) -> float:
    """ln of the common-support Hellinger transform at a simplex point
    (the convex objective whose minimum defines the divergence)."""
    W = _weight_matrix(dists)
    s = check_simplex(s, r=W.shape[0])
    D = _common_support(W)
    if not np.any(D):
        raise DomainError("empty common support")
    logs = np.log(W[:, D])
    a = s @ logs
    m = np.max(a)
    return float(m + math.log(np.sum(np.exp(a - m))))


def kappa_commuting(dists: list[Distribution]) -> float:
    """For diagonal (classical) constraint matrices the two-sided trace
    program decouples per atom, giving sum_w min_i p_i(w)."""
    W = _weight_matrix(dists)
    return float(np.sum(np.min(W, axis=0)))
