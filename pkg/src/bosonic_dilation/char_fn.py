"""Characteristic functions as small expression trees.

Every node evaluates to 1 at the origin. Evaluation is vectorized: ``f(xi)``
accepts an array of shape ``(..., 2p)`` and returns a complex array of shape
``(...)``.

Positivity is certified in two ways: exactly for Gaussian kernels, through
the Hermitian matrix ``M + iA``, and by sampled Gram matrices
``G[mu, nu] = f(xi_mu - xi_nu) exp(i/2 xi_mu^T A xi_nu)`` for anything else.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidWeights, NotSkewSymmetric, NotSymmetric
from .phase_space import EIG_TOL, TOL, EigCheck, min_eig_hermitian, omega


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _as_points(xi, dim: int) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (dim,):
        raise DimensionMismatch(f"expected phase-space points of dimension {dim}, got shape {xi.shape}")
    return xi


class CharFn:
    """Base class of the characteristic-function expression tree."""

    dim: int

    def __call__(self, xi) -> np.ndarray:
        return self.evaluate(xi)

    def evaluate(self, xi) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def n_modes(self) -> int:
        return self.dim // 2

    def __mul__(self, other: "CharFn") -> "Product":
        return Product((self, other))


@dataclass(frozen=True, eq=False)
class One(CharFn):
    dim: int

    def evaluate(self, xi):
        xi = _as_points(xi, self.dim)
        return np.ones(xi.shape[:-1], dtype=complex)


@dataclass(frozen=True, eq=False)
class GaussianKernel(CharFn):
    """``exp(-1/4 xi^T M xi + i b^T xi)``."""

    M: np.ndarray
    b: np.ndarray = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"M must be square, got shape {M.shape}")
        if M.size and np.max(np.abs(M - M.T)) > TOL * max(1.0, np.max(np.abs(M))):
            raise NotSymmetric("GaussianKernel needs a symmetric M")
        b = np.zeros(M.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        if b.shape != (M.shape[0],):
            raise DimensionMismatch(f"b must have length {M.shape[0]}, got shape {b.shape}")
        object.__setattr__(self, "M", _frozen(0.5 * (M + M.T)))
        object.__setattr__(self, "b", _frozen(b))

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def evaluate(self, xi):
        xi = _as_points(xi, self.dim)
        quad = np.einsum("...i,ij,...j->...", xi, self.M, xi)
        return np.exp(-0.25 * quad + 1j * (xi @ self.b))


@dataclass(frozen=True, eq=False)
class Cosine(CharFn):
    """``cos(s^T Omega xi)``."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 1 or s.size % 2:
            raise DimensionMismatch(f"s must be a vector of even length, got shape {s.shape}")
        object.__setattr__(self, "s", _frozen(s))

    @property
    def dim(self) -> int:
        return self.s.size

    def evaluate(self, xi):
        xi = _as_points(xi, self.dim)
        return np.cos(xi @ (omega(self.n_modes).T @ self.s)).astype(complex)


@dataclass(frozen=True, eq=False)
class DisplacementMixture(CharFn):
    """``sum_j w_j exp(i xi^T Omega s_j)``: the noise of a random displacement by ``s_j``."""

    weights: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if w.ndim != 1 or pts.shape[0] != w.size or pts.shape[1] % 2:
            raise DimensionMismatch(f"weights {w.shape} and points {pts.shape} do not match")
        if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise InvalidWeights(f"weights must be positive and sum to 1 (sum = {w.sum()!r})")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def evaluate(self, xi):
        xi = _as_points(xi, self.dim)
        phases = xi @ omega(self.n_modes) @ self.points.T
        return np.exp(1j * phases) @ self.weights


@dataclass(frozen=True, eq=False)
class Product(CharFn):
    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("Product needs at least one factor")
        dims = {f.dim for f in factors}
        if len(dims) != 1:
            raise DimensionMismatch(f"Product factors have different dimensions {sorted(dims)}")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return self.factors[0].dim

    def evaluate(self, xi):
        out = self.factors[0].evaluate(xi)
        for f in self.factors[1:]:
            out = out * f.evaluate(xi)
        return out


@dataclass(frozen=True, eq=False)
class PullBack(CharFn):
    """``inner(L xi)`` for a real matrix ``L`` of shape ``(inner.dim, dim)``."""

    inner: CharFn
    L: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        if L.ndim != 2 or L.shape[0] != self.inner.dim or L.shape[1] % 2:
            raise DimensionMismatch(f"L of shape {L.shape} does not map into dimension {self.inner.dim}")
        object.__setattr__(self, "L", _frozen(L))

    @property
    def dim(self) -> int:
        return self.L.shape[1]

    def evaluate(self, xi):
        xi = _as_points(xi, self.dim)
        return self.inner.evaluate(xi @ self.L.T)


def gaussian_state_char(V, s=None) -> GaussianKernel:
    """Characteristic function of the Gaussian state with covariance ``V`` and mean ``s``.

    The state form ``exp(-1/4 xi^T Omega^T V Omega xi + i s^T Omega xi)`` is
    stored as the kernel ``GaussianKernel(Omega^T V Omega, Omega^T s)``.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    Om = omega(n)
    s = np.zeros(2 * n) if s is None else np.asarray(s, dtype=float)
    return GaussianKernel(Om.T @ V @ Om, Om.T @ s)


def vacuum_char(n: int) -> GaussianKernel:
    return GaussianKernel(np.eye(2 * n))


def coherent_char(s) -> GaussianKernel:
    """Coherent state ``D(s)|0>``; for one mode this is ``|alpha>`` with ``alpha = -(s_1 + i s_2)/sqrt(2)``."""
    s = np.asarray(s, dtype=float)
    return gaussian_state_char(np.eye(s.size), s)


def thermal_char(nbar, n: int = 1) -> GaussianKernel:
    return GaussianKernel((2 * nbar + 1) * np.eye(2 * n))


def eval_char(f: CharFn, xi) -> complex | np.ndarray:
    """Evaluate ``f`` at a point (returns a complex scalar) or a batch of points."""
    out = f.evaluate(xi)
    return complex(out) if np.ndim(out) == 0 else out


def gram_matrix(f: CharFn, A, points) -> np.ndarray:
    """Gram matrix ``f(xi_mu - xi_nu) exp(i/2 xi_mu^T A xi_nu)`` of a point set."""
    P = _as_points(points, f.dim)
    A = np.asarray(A, dtype=float)
    if A.shape != (f.dim, f.dim):
        raise DimensionMismatch(f"A must be {f.dim}x{f.dim}, got {A.shape}")
    diffs = P[:, None, :] - P[None, :, :]
    return f.evaluate(diffs) * np.exp(0.5j * (P @ A @ P.T))


# --- sampled certificates -------------------------------------------------------------


@dataclass(frozen=True)
class Sampler:
    """Reproducible point-set generator for sampled positivity tests.

    Set ``i`` is drawn from ``numpy.random.default_rng([seed, i])``: the
    origin plus ``n_points - 1`` points uniform in a ball. The ball radius of
    set ``i`` is ``radius * scales[i % len(scales)]``; the small radii make
    violations that only appear close to the origin (typical for Gaussian
    kernels) visible.
    """

    seed: int = 0
    n_points: int = 8
    n_sets: int = 50
    radius: float = 4.0
    scales: tuple = (1.0, 0.5, 0.25, 0.1, 0.03)

    def set_radius(self, i: int) -> float:
        return self.radius * self.scales[i % len(self.scales)]

    def point_set(self, dim: int, i: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, i])
        k = self.n_points - 1
        g = rng.normal(size=(k, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.set_radius(i) * rng.random(k) ** (1.0 / dim)
        return np.vstack([np.zeros(dim), g * r[:, None]])

    def point_sets(self, dim: int) -> list[np.ndarray]:
        return [self.point_set(dim, i) for i in range(self.n_sets)]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_points": self.n_points,
            "n_sets": self.n_sets,
            "radius": self.radius,
            "scales": list(self.scales),
        }


@dataclass(frozen=True, eq=False)
class PositivityCertificate:
    """Outcome of a sampled ``A``-positivity test.

    Attributes:
        A: the skew matrix the test was run against.
        sampler: the sampler that generated the point sets (they can be regenerated from it).
        set_min_eigs: smallest Gram eigenvalue of each point set.
        min_eig: the worst of ``set_min_eigs``.
        passed: ``min_eig >= -tol``.
        tol: the eigenvalue tolerance used.
        witness: the worst point set when the test failed, else ``None``.
        witness_index: index of that point set.
    """

    A: np.ndarray
    sampler: Sampler
    set_min_eigs: np.ndarray
    min_eig: float
    passed: bool
    tol: float
    witness: np.ndarray | None = None
    witness_index: int | None = None

    @property
    def point_sets(self) -> list[np.ndarray]:
        return self.sampler.point_sets(self.A.shape[0])

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "sampler": self.sampler.to_dict(),
            "min_eig": self.min_eig,
            "verdict": "pass" if self.passed else "fail",
            "tol": self.tol,
            "witness": None if self.witness is None else self.witness.tolist(),
            "witness_index": self.witness_index,
        }


def _gram_min_eig(f: CharFn, A: np.ndarray, pts: np.ndarray) -> float:
    G = gram_matrix(f, A, pts)
    # f(-xi) = conj f(xi) makes G Hermitian; a defect is itself a positivity failure
    defect = np.max(np.abs(G - G.conj().T))
    lam = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[0])
    return min(lam, -defect) if defect > 1e-9 else lam


def check_a_positive(f: CharFn, A, sampler: Sampler | None = None, tol: float = EIG_TOL,
                     workers: int = 1) -> PositivityCertificate:
    """Sampled test of ``A``-positivity of ``f``.

    Args:
        f: the function under test.
        A: real skew matrix of the same dimension as ``f``.
        sampler: point-set generator; the default sampler when omitted.
        tol: eigenvalues down to ``-tol`` count as nonnegative.
        workers: number of threads used to evaluate point sets. The result
            does not depend on it.

    Returns:
        A :class:`PositivityCertificate`; on failure it carries the worst point set.
    """
    sampler = sampler or Sampler()
    A = np.asarray(A, dtype=float)
    if A.shape != (f.dim, f.dim):
        raise DimensionMismatch(f"A must be {f.dim}x{f.dim}, got {A.shape}")
    if A.size and np.max(np.abs(A + A.T)) > TOL:
        raise NotSkewSymmetric("A must be skew-symmetric")
    sets = sampler.point_sets(f.dim)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            eigs = list(ex.map(lambda p: _gram_min_eig(f, A, p), sets))
    else:
        eigs = [_gram_min_eig(f, A, p) for p in sets]
    eigs = np.array(eigs)
    worst = int(np.argmin(eigs)) if len(eigs) else 0
    min_eig = float(eigs[worst]) if len(eigs) else 0.0
    passed = min_eig >= -tol
    return PositivityCertificate(
        A=_frozen(A), sampler=sampler, set_min_eigs=_frozen(eigs), min_eig=min_eig,
        passed=passed, tol=tol,
        witness=None if passed else sets[worst], witness_index=None if passed else worst,
    )


def gaussian_a_positive_exact(M, A, tol: float = EIG_TOL) -> EigCheck:
    """Exact test: ``GaussianKernel(M, b)`` is ``A``-positive iff ``M + iA >= 0``."""
    M = np.asarray(M, dtype=float)
    A = np.asarray(A, dtype=float)
    if M.shape != A.shape or M.ndim != 2:
        raise DimensionMismatch(f"M {M.shape} and A {A.shape} must be square of equal size")
    if A.size and np.max(np.abs(A + A.T)) > TOL:
        raise NotSkewSymmetric("A must be skew-symmetric")
    if M.size and np.max(np.abs(M - M.T)) > TOL:
        raise NotSymmetric("M must be symmetric")
    lam = min_eig_hermitian(0.5 * (M + M.T) + 0.5j * (A - A.T)) if M.size else 0.0
    return EigCheck(lam >= -tol, lam)


class BochnerReport(NamedTuple):
    normalized: bool
    continuous: bool
    certificate: PositivityCertificate

    @property
    def passed(self) -> bool:
        return self.normalized and self.continuous and self.certificate.passed


def bochner_check(f: CharFn, sampler: Sampler | None = None, tol: float = EIG_TOL,
                  delta_probe: float = 1e-3, probe_threshold: float = 0.1,
                  n_probe: int = 64) -> BochnerReport:
    """Sampled quantum Bochner test: ``f(0) = 1``, continuity at 0 and ``Omega``-positivity.

    Continuity cannot be decided numerically; the surrogate requires
    ``|f(xi) - 1| <= probe_threshold`` on ``n_probe`` seeded points with
    ``|xi| <= delta_probe``.
    """
    sampler = sampler or Sampler()
    dim = f.dim
    normalized = abs(eval_char(f, np.zeros(dim)) - 1) <= TOL
    rng = np.random.default_rng([sampler.seed, 0xB0C])
    g = rng.normal(size=(n_probe, dim))
    g *= delta_probe * rng.random((n_probe, 1)) / np.linalg.norm(g, axis=1, keepdims=True)
    continuous = bool(np.all(np.abs(f.evaluate(g) - 1) <= probe_threshold))
    cert = check_a_positive(f, omega(dim // 2), sampler, tol)
    return BochnerReport(bool(normalized), continuous, cert)


class BoundReport(NamedTuple):
    passed: bool
    max_excess: float


def bound_check(f: CharFn, sampler: Sampler | None = None, tol: float = TOL) -> BoundReport:
    """Check ``|f(xi)| <= |f(0)| + tol`` on every sampled point."""
    sampler = sampler or Sampler()
    pts = np.vstack(sampler.point_sets(f.dim))
    f0 = abs(eval_char(f, np.zeros(f.dim)))
    excess = float(np.max(np.abs(f.evaluate(pts)) - f0))
    return BoundReport(excess <= tol, excess)


# --- reduction to Gaussian mixtures ------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianMixtureForm:
    """``exp(-1/4 xi^T M xi) * sum_k c_k exp(i b_k^T xi)``: the normal form of every tree."""

    M: np.ndarray
    coeffs: np.ndarray
    shifts: np.ndarray = field(default=None)

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=float)
        quad = np.einsum("...i,ij,...j->...", xi, self.M, xi)
        return np.exp(-0.25 * quad) * (np.exp(1j * xi @ self.shifts.T) @ self.coeffs)


def _merge_terms(coeffs: np.ndarray, shifts: np.ndarray, decimals: int = 12):
    keys = np.round(shifts, decimals)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = np.ravel(inv)
    c = np.zeros(len(uniq), dtype=complex)
    np.add.at(c, inv, coeffs)
    first = np.array([np.flatnonzero(inv == u)[0] for u in range(len(uniq))])
    keep = np.abs(c) > 1e-15
    return c[keep], shifts[first][keep]


def to_gaussian_mixture(f: CharFn) -> GaussianMixtureForm:
    """Rewrite any tree as a common Gaussian envelope times a finite sum of plane waves."""
    dim = f.dim
    if isinstance(f, One):
        return GaussianMixtureForm(np.zeros((dim, dim)), np.ones(1, dtype=complex), np.zeros((1, dim)))
    if isinstance(f, GaussianKernel):
        return GaussianMixtureForm(np.array(f.M), np.ones(1, dtype=complex), f.b[None, :].copy())
    Om = omega(dim // 2)
    if isinstance(f, Cosine):
        b = Om.T @ f.s
        return GaussianMixtureForm(np.zeros((dim, dim)), np.array([0.5, 0.5], dtype=complex), np.array([b, -b]))
    if isinstance(f, DisplacementMixture):
        return GaussianMixtureForm(np.zeros((dim, dim)), f.weights.astype(complex), f.points @ Om.T)
    if isinstance(f, PullBack):
        g = to_gaussian_mixture(f.inner)
        return GaussianMixtureForm(f.L.T @ g.M @ f.L, g.coeffs, g.shifts @ f.L)
    if isinstance(f, Product):
        acc = to_gaussian_mixture(f.factors[0])
        for factor in f.factors[1:]:
            g = to_gaussian_mixture(factor)
            c = np.multiply.outer(acc.coeffs, g.coeffs).ravel()
            b = (acc.shifts[:, None, :] + g.shifts[None, :, :]).reshape(-1, dim)
            c, b = _merge_terms(c, b)
            acc = GaussianMixtureForm(acc.M + g.M, c, b)
        return acc
    raise TypeError(f"unsupported characteristic-function node {type(f).__name__}")


def product(factors: Sequence[CharFn]) -> CharFn:
    """Product of factors, flattening nested products and returning single factors unchanged."""
    flat: list[CharFn] = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Product) else [f])
    return flat[0] if len(flat) == 1 else Product(tuple(flat))
