"""Independent reference computations used by the tests.

Nothing here imports the package; each function follows a textbook formula
directly so that agreement with the library is meaningful.
"""
import math

import mpmath
import numpy as np


def omega_ref(n):
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def displacement_element(alpha, m, k, dps=40):
    """<m|D(alpha)|k> from the Laguerre closed form in extended precision."""
    mpmath.mp.dps = dps
    a = mpmath.mpc(alpha.real, alpha.imag)
    x = abs(a) ** 2
    if m >= k:
        val = mpmath.sqrt(mpmath.factorial(k) / mpmath.factorial(m)) * a ** (m - k) * mpmath.exp(-x / 2) \
            * mpmath.laguerre(k, m - k, x)
    else:
        val = mpmath.sqrt(mpmath.factorial(m) / mpmath.factorial(k)) * (-mpmath.conj(a)) ** (k - m) \
            * mpmath.exp(-x / 2) * mpmath.laguerre(m, k - m, x)
    return complex(val)


def coherent_amplitudes(alpha, cutoff):
    return np.array([np.exp(-abs(alpha) ** 2 / 2) * alpha ** k / math.sqrt(math.factorial(k))
                     for k in range(cutoff)])


def thermal_populations(nbar, cutoff):
    k = np.arange(cutoff)
    return nbar ** k / (1 + nbar) ** (k + 1)


def vacuum_char_ref(xi):
    xi = np.asarray(xi, float)
    return np.exp(-0.25 * np.sum(xi * xi, axis=-1))


def gaussian_state_char_ref(V, s, xi):
    """exp(-1/4 xi^T Omega^T V Omega xi + i s^T Omega xi)."""
    n = len(s) // 2
    Om = omega_ref(n)
    xi = np.atleast_2d(xi)
    eta = xi @ Om.T  # rows: Omega xi
    return np.exp(-0.25 * np.einsum("ki,ij,kj->k", eta, V, eta) + 1j * eta @ np.asarray(s))


def pure_state_trace_distance(psi, phi):
    ov = abs(np.vdot(psi, phi)) ** 2
    return math.sqrt(max(0.0, 1 - ov))


def bk_trace_distance(sigma):
    """Coherent state versus its BK-noised image: the noise is a displacement-invariant
    thermal convolution, so the distance equals that between vacuum and a thermal
    state with nbar = sigma, i.e. 1 - 1/(1+sigma) = sigma/(1+sigma)."""
    return sigma / (1 + sigma)
