"""Linear bosonic channels at the characteristic-function level.

A channel with data ``(X, f)`` maps a characteristic function ``chi`` to
``xi -> chi(X xi) f(xi)``. It is completely positive iff ``f`` is
``J(X)``-positive with ``J(X) = Omega - X^T Omega X``.

For the Gaussian families the complex amplitude is ``alpha = (x + i p)/sqrt(2)``,
so ``|alpha|^2 = xi^T xi / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .char_fn import (
    CharFn,
    Cosine,
    DisplacementMixture,
    GaussianKernel,
    One,
    PositivityCertificate,
    PullBack,
    Sampler,
    bochner_check,
    check_a_positive,
    eval_char,
    gaussian_a_positive_exact,
    product,
)
from .errors import DimensionMismatch, NotCP, NotNormalized
from .phase_space import EIG_TOL, TOL, j_of_x


@dataclass(frozen=True, eq=False)
class LinearBosonicChannel:
    """Channel ``chi(xi) -> chi(X xi) f(xi)`` on ``n`` modes.

    Attributes:
        n: number of modes.
        X: real ``2n x 2n`` matrix.
        f: noise function over ``R^{2n}``.
        certificate: sampled ``J(X)``-positivity certificate, when one was computed.
        label: short human-readable description.
    """

    n: int
    X: np.ndarray
    f: CharFn
    certificate: PositivityCertificate | None = None
    label: str = ""

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.shape != (2 * self.n, 2 * self.n):
            raise DimensionMismatch(f"X must be {2 * self.n}x{2 * self.n}, got {X.shape}")
        if self.f.dim != 2 * self.n:
            raise DimensionMismatch(f"f has dimension {self.f.dim}, expected {2 * self.n}")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def J(self) -> np.ndarray:
        return j_of_x(self.X)

    def __call__(self, chi: CharFn) -> CharFn:
        return apply_to_char(self, chi)


def make_channel(X, f: CharFn, sampler: Sampler | None = None, tol: float = EIG_TOL,
                 label: str = "") -> LinearBosonicChannel:
    """Build a channel after certifying complete positivity by sampling.

    Raises:
        NotNormalized: if ``f(0) != 1`` or ``f`` fails the continuity probe.
        NotCP: if some sampled Gram matrix for ``A = J(X)`` has an eigenvalue below ``-tol``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % 2 or X.shape[0] != f.dim:
        raise DimensionMismatch(f"X of shape {X.shape} does not match f of dimension {f.dim}")
    n = X.shape[0] // 2
    f0 = eval_char(f, np.zeros(2 * n))
    if abs(f0 - 1) > TOL:
        raise NotNormalized(f"f(0) = {f0} but a channel needs f(0) = 1")
    probe = bochner_check(f, Sampler(seed=(sampler or Sampler()).seed, n_sets=0))
    if not probe.continuous:
        raise NotNormalized("f fails the continuity probe at the origin")
    cert = check_a_positive(f, j_of_x(X), sampler, tol)
    if not cert.passed:
        raise NotCP(
            f"f is not J(X)-positive: sampled Gram eigenvalue {cert.min_eig:.3e} "
            f"(point set {cert.witness_index})",
            certificate=cert, min_eig=cert.min_eig,
        )
    return LinearBosonicChannel(n, X, f, cert, label)


def apply_to_char(ch: LinearBosonicChannel, chi_in: CharFn) -> CharFn:
    """Output characteristic function ``xi -> chi_in(X xi) f(xi)``."""
    if chi_in.dim != 2 * ch.n:
        raise DimensionMismatch(f"input has dimension {chi_in.dim}, channel acts on {2 * ch.n}")
    return product([PullBack(chi_in, ch.X), ch.f])


def compose(first: LinearBosonicChannel, second: LinearBosonicChannel) -> LinearBosonicChannel:
    """The channel ``second o first``: data ``(X1 X2, f2(xi) f1(X2 xi))``.

    The composite carries no certificate; it is completely positive whenever
    both factors are.
    """
    if first.n != second.n:
        raise DimensionMismatch("channels act on different mode counts")
    f = product([second.f, PullBack(first.f, second.X)])
    label = f"{second.label or 'channel'} o {first.label or 'channel'}"
    return LinearBosonicChannel(first.n, first.X @ second.X, f, None, label)


def identity_channel(n: int = 1) -> LinearBosonicChannel:
    return LinearBosonicChannel(n, np.eye(2 * n), One(2 * n), None, "identity")


def binary_displacement(s, sampler: Sampler | None = None) -> LinearBosonicChannel:
    """Equal mixture of the displacements by ``+s`` and ``-s``; ``f = cos(s^T Omega xi)``."""
    s = np.asarray(s, dtype=float)
    if not np.any(s):
        raise ValueError("binary displacement needs s != 0")
    return make_channel(np.eye(s.size), Cosine(s), sampler, label=f"binary_displacement{s.tolist()}")


def displacement_mixture_channel(weights, points, sampler: Sampler | None = None) -> LinearBosonicChannel:
    """Random displacement by ``s_j`` with probability ``w_j``."""
    f = DisplacementMixture(weights, points)
    return make_channel(np.eye(f.dim), f, sampler, label="displacement_mixture")


def gaussian_channel(X, N, d=None, sampler: Sampler | None = None, tol: float = EIG_TOL,
                     label: str = "gaussian") -> LinearBosonicChannel:
    """Gaussian channel with noise ``f = GaussianKernel(N, d)``.

    Complete positivity is decided exactly by ``N + i J(X) >= 0``; a sampled
    certificate is attached as well.

    Raises:
        NotCP: with the exact smallest eigenvalue when ``N + i J(X)`` is not PSD.
    """
    X = np.asarray(X, dtype=float)
    f = GaussianKernel(N, d)
    if f.dim != X.shape[0]:
        raise DimensionMismatch(f"N has dimension {f.dim}, X has {X.shape[0]}")
    exact = gaussian_a_positive_exact(f.M, j_of_x(X), tol)
    if not exact.passed:
        raise NotCP(f"N + iJ(X) has eigenvalue {exact.min_eig:.3e} < 0", min_eig=exact.min_eig)
    cert = check_a_positive(f, j_of_x(X), sampler, tol)
    return LinearBosonicChannel(X.shape[0] // 2, X, f, cert, label)


def amplifier(gain: float, n: int = 1, sampler: Sampler | None = None) -> LinearBosonicChannel:
    """Quantum-limited amplifier: ``X = sqrt(G) I``, ``N = (G - 1) I``."""
    if gain < 1:
        raise ValueError(f"amplifier gain must be >= 1, got {gain}")
    return gaussian_channel(np.sqrt(gain) * np.eye(2 * n), (gain - 1) * np.eye(2 * n),
                            sampler=sampler, label=f"amplifier(G={gain})")


def attenuator(eta: float, n: int = 1, sampler: Sampler | None = None) -> LinearBosonicChannel:
    """Pure-loss channel: ``X = sqrt(eta) I``, ``N = (1 - eta) I``."""
    if not 0 <= eta <= 1:
        raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
    return gaussian_channel(np.sqrt(eta) * np.eye(2 * n), (1 - eta) * np.eye(2 * n),
                            sampler=sampler, label=f"attenuator(eta={eta})")


def additive_noise_channel(N, sampler: Sampler | None = None) -> LinearBosonicChannel:
    """Classical Gaussian additive noise: ``X = I``, ``f = GaussianKernel(N)``, ``N >= 0``."""
    N = np.asarray(N, dtype=float)
    return gaussian_channel(np.eye(N.shape[0]), N, sampler=sampler, label="additive_noise")


def bk_noise_channel(sigma: float, n: int = 1, sampler: Sampler | None = None) -> LinearBosonicChannel:
    """Noise of Braunstein-Kimble teleportation: ``f(xi) = exp(-sigma |alpha|^2) = exp(-sigma xi^T xi / 2)``."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    return gaussian_channel(np.eye(2 * n), 2 * sigma * np.eye(2 * n), sampler=sampler,
                            label=f"bk(sigma={sigma})")
