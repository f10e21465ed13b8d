"""Dense complex Hermitian matrix algebra.

Everything downstream (SDP solver, quantum divergences, scans) is built on
the handful of primitives here: spectral decomposition, matrix functions,
trace norm, operator minimum, Kronecker products.  All functions are pure;
matrices are plain complex ``numpy`` arrays.

Inputs are validated against a symmetry gate of ``HERMITIAN_ATOL`` and then
symmetrized, so downstream math never sees asymmetry drift.  Eigenvalues
with magnitude below ``SUPPORT_CUTOFF * max(1, ||H||_inf)`` are treated as
zero wherever a support/kernel decision is made.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DomainError, ResourceLimitError, ValidationError

# Absolute tolerance for the Hermiticity validation gate.
HERMITIAN_ATOL = 1e-12

# Relative eigenvalue cutoff for support/kernel decisions (one global
# constant; functions accept an override).
SUPPORT_CUTOFF = 1e-10

# Default cap on the dimension produced by tensor_power.
TENSOR_DIM_CAP = 4096


class SpectralDecomposition(NamedTuple):
    """Eigenvalues sorted ascending and the matching unitary of column
    eigenvectors, so that ``V @ diag(w) @ V.conj().T`` reconstructs the
    input."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_hermitian(H, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate Hermiticity within ``atol`` and return the symmetrized
    matrix (H + H^dagger)/2 as a complex array."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValidationError(f"expected a square matrix, got shape {H.shape}")
    asym = np.max(np.abs(H - H.conj().T))
    if asym > atol:
        raise ValidationError(
            f"matrix is not Hermitian: max |H - H^dag| = {asym:.3e} > {atol:.1e}")
    return 0.5 * (H + H.conj().T)


def validate_density(rho, atol: float = 1e-10) -> np.ndarray:
    """Check PSD (eigenvalues >= -atol) and unit trace within ``atol``;
    returns the symmetrized matrix."""
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValidationError(f"density matrix trace {tr!r} is not 1 within {atol:.1e}")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -atol:
        raise ValidationError(f"density matrix has eigenvalue {lo:.3e} < -{atol:.1e}")
    return rho


def eig_hermitian(H) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix (ascending eigenvalues)."""
    H = as_hermitian(H)
    w, V = np.linalg.eigh(H)
    return SpectralDecomposition(w, V)


def _support_mask(w: np.ndarray, cutoff: float) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    return np.abs(w) > cutoff * scale


def support_projector(P, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Orthogonal projector onto the support (range) of a Hermitian matrix."""
    w, V = eig_hermitian(P)
    keep = _support_mask(w, cutoff)
    Vs = V[:, keep]
    return Vs @ Vs.conj().T


def support_basis(P, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Orthonormal column basis of the support of a Hermitian matrix
    (columns of the eigenvectors with nonzero eigenvalue)."""
    w, V = eig_hermitian(P)
    return V[:, _support_mask(w, cutoff)]


def matrix_power(P, s: float, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """P**s for PSD P, taken spectrally on the support.

    Eigenvalues below the support cutoff are mapped to zero for every s,
    so ``matrix_power(P, 0)`` is the support projector and negative powers
    are support (pseudo) inverses.  Raises DomainError if P has an
    eigenvalue below -1e-10.
    """
    w, V = eig_hermitian(P)
    if w[0] < -1e-10:
        raise DomainError(f"matrix_power requires PSD input; min eigenvalue {w[0]:.3e}")
    keep = _support_mask(np.maximum(w, 0.0), cutoff)
    powered = np.zeros_like(w)
    powered[keep] = np.maximum(w[keep], 0.0) ** s
    return (V * powered) @ V.conj().T


def matrix_exp(H) -> np.ndarray:
    """exp(H) for Hermitian H via eigendecomposition."""
    w, V = eig_hermitian(H)
    return (V * np.exp(w)) @ V.conj().T


def matrix_log(P, min_eig: float = 1e-12) -> np.ndarray:
    """log(P) for positive definite P; requires smallest eigenvalue > min_eig."""
    w, V = eig_hermitian(P)
    if w[0] <= min_eig:
        raise DomainError(
            f"matrix_log requires a positive definite input; min eigenvalue {w[0]:.3e}")
    return (V * np.log(w)) @ V.conj().T


def trace_norm(H) -> float:
    """||H||_1 = sum of absolute eigenvalues (Hermitian input)."""
    H = as_hermitian(H)
    return float(np.sum(np.abs(np.linalg.eigvalsh(H))))


def op_norm(H) -> float:
    """Operator (spectral) norm of a Hermitian matrix."""
    H = as_hermitian(H)
    w = np.linalg.eigvalsh(H)
    return float(max(abs(w[0]), abs(w[-1])))


def positive_part(H) -> np.ndarray:
    """(H + |H|)/2: the PSD part of a Hermitian matrix, taken spectrally."""
    w, V = eig_hermitian(H)
    return (V * np.maximum(w, 0.0)) @ V.conj().T


def operator_min(A, B) -> np.ndarray:
    """A ^ B = (A + B - |A - B|)/2, the operator analogue of min."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    if A.shape != B.shape:
        raise ValidationError(f"dimension mismatch: {A.shape} vs {B.shape}")
    D = A - B
    w, V = np.linalg.eigh(D)
    absD = (V * np.abs(w)) @ V.conj().T
    return 0.5 * (A + B - absD)


def tensor(A, B) -> np.ndarray:
    """Kronecker product with row-major pair indexing: entry for the index
    pair (j, k) sits at j*dim(B) + k."""
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def tensor_power(A, n: int, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """A^(tensor n).  Rejects results whose dimension exceeds ``cap``."""
    A = np.asarray(A, dtype=complex)
    if n < 1:
        raise ValidationError("tensor_power requires n >= 1")
    dim = A.shape[0] ** n
    if dim > cap:
        raise ResourceLimitError(
            f"tensor_power would produce dimension {dim} > cap {cap}",
            limit=cap, requested=dim)
    out = A
    for _ in range(n - 1):
        out = np.kron(out, A)
    return out


def commutator_norm(A, B) -> float:
    """Operator norm of [A, B] (anti-Hermitian, so use singular values)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    C = A @ B - B @ A
    if C.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(C, 2))


def simultaneous_eigenbasis(mats, tol: float = 1e-10):
    """Common eigenbasis of a family of pairwise-commuting Hermitian
    matrices, or None when some pair fails the commutator test.

    Built by refining eigenspaces one matrix at a time: within each block
    found so far, the next matrix is diagonalized and the block is split
    along gaps larger than a degeneracy tolerance.
    """
    mats = [as_hermitian(M) for M in mats]
    d = mats[0].shape[0]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if commutator_norm(mats[i], mats[j]) > tol:
                return None
    V = np.eye(d, dtype=complex)
    blocks = [np.arange(d)]
    for M in mats:
        new_blocks = []
        scale = max(1.0, np.linalg.norm(M, 2))
        for idx in blocks:
            if idx.size == 1:
                new_blocks.append(idx)
                continue
            sub = V[:, idx]
            w, Q = np.linalg.eigh(sub.conj().T @ M @ sub)
            V[:, idx] = sub @ Q
            # split where consecutive eigenvalues separate
            start = 0
            for k in range(1, idx.size):
                if w[k] - w[k - 1] > 1e-8 * scale:
                    new_blocks.append(idx[start:k])
                    start = k
            new_blocks.append(idx[start:])
        blocks = new_blocks
    return V
