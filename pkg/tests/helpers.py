"""Shared random-instance generators for the test suite."""

import numpy as np


def make_rng(seed):
    return np.random.Generator(np.random.Philox(key=seed))


def random_hermitian(rng, d, scale=1.0):
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (G + G.conj().T)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_unitary(rng, d):
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(G)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases.conj()


def random_probability(rng, k, zeros=0):
    """Random probability vector; optionally force `zeros` many zero atoms."""
    w = rng.random(k) + 1e-3
    if zeros:
        idx = rng.choice(k, size=zeros, replace=False)
        w[idx] = 0.0
    if w.sum() <= 0:
        w[0] = 1.0
    return w / w.sum()


def random_isometry(rng, d_in, d_out):
    """Random isometry V with V^dag V = I (d_out >= d_in)."""
    G = rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R))).conj()


def partial_trace_env(X, d_sys, d_env):
    """Trace out the trailing environment factor of a (d_sys*d_env)-dim
    operator laid out as sys (x) env."""
    X = X.reshape(d_sys, d_env, d_sys, d_env)
    return np.einsum("iaja->ij", X)


def random_channel(rng, d_in, d_sys, d_env):
    """CPTP map built from a random isometry d_in -> d_sys (x) d_env
    followed by tracing out the environment."""
    V = random_isometry(rng, d_in, d_sys * d_env)

    def channel(X):
        return partial_trace_env(V @ X @ V.conj().T, d_sys, d_env)

    return channel
