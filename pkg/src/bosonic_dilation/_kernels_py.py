"""NumPy implementation of the single-mode displacement kernels.

Matrix elements ``D[m, n] = <m|D(alpha)|n>`` have the closed form

    D[n + k, n] = sqrt(n! / (n + k)!) alpha^k exp(-|alpha|^2 / 2) L_n^(k)(|alpha|^2)
    D[n, n + k] = (-1)^k conj(D[n + k, n])

The normalized values ``G_n = D[n + k, n]`` obey the Laguerre three-term
recurrence in ``n``,

    sqrt((n + 1)(n + k + 1)) G_{n+1} = (2n + 1 + k - x) G_n - sqrt(n (n + k)) G_{n-1},

with ``x = |alpha|^2``. Running it forward along each band ``k`` is stable
and never forms factorials. (The more common recurrence that mixes the two
indices loses all accuracy once ``|alpha|`` exceeds about 3 at cutoff 40.)
"""
from __future__ import annotations

import numpy as np

_CHUNK = 4096


def _batch_matrices(alphas: np.ndarray, cutoff: int) -> np.ndarray:
    K = alphas.size
    d = cutoff
    D = np.zeros((K, d, d), dtype=complex)
    x = np.abs(alphas) ** 2
    sq = np.sqrt(np.arange(2 * d, dtype=float))
    head = np.exp(-0.5 * x).astype(complex)  # G_0 of band k
    for k in range(d):
        if k:
            head = head * alphas / sq[k]
        sign = -1.0 if k % 2 else 1.0
        g_prev = np.zeros(K, dtype=complex)
        g = head
        for n in range(d - k):
            D[:, n + k, n] = g
            if k:
                D[:, n, n + k] = sign * np.conj(g)
            g_next = ((2 * n + 1 + k - x) * g - sq[n] * sq[n + k] * g_prev) / (sq[n + 1] * sq[n + k + 1])
            g_prev, g = g, g_next
    return D


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """``cutoff x cutoff`` block of the displacement operator ``D(alpha)``."""
    return _batch_matrices(np.array([alpha], dtype=complex), cutoff)[0]


def accumulate_displacements(alphas, weights, cutoff: int) -> np.ndarray:
    """``sum_k weights[k] D(alphas[k])`` restricted to the first ``cutoff`` Fock states."""
    alphas = np.ascontiguousarray(alphas, dtype=complex).ravel()
    weights = np.ascontiguousarray(weights, dtype=complex).ravel()
    out = np.zeros((cutoff, cutoff), dtype=complex)
    for start in range(0, alphas.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        D = _batch_matrices(alphas[sl], cutoff)
        out += np.tensordot(weights[sl], D, axes=(0, 0))
    return out


def displacement_traces(T, alphas) -> np.ndarray:
    """``Tr[T D(alpha_k)]`` for each ``alpha_k``, with ``T`` a ``cutoff x cutoff`` matrix."""
    T = np.ascontiguousarray(T, dtype=complex)
    alphas = np.ascontiguousarray(alphas, dtype=complex).ravel()
    cutoff = T.shape[0]
    out = np.empty(alphas.size, dtype=complex)
    # Tr[T D] = sum_{m,n} T[n, m] D[m, n]
    Tt = T.T.ravel()
    for start in range(0, alphas.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        D = _batch_matrices(alphas[sl], cutoff)
        out[sl] = D.reshape(D.shape[0], -1) @ Tt
    return out
