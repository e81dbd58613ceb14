"""Gaussian dilations of linear bosonic channels.

A Gaussian dilation on ``m`` ancilla modes is a symplectic ``S`` on ``n + m``
modes whose first ``2n`` columns are ``[X; Y]``, together with an ancilla
state ``sigma``. Tracing out the ancilla after the Gaussian unitary of ``S``
gives the channel ``chi -> exp(i s^T Omega xi) chi(X xi) chi_sigma(Y xi)``.

Three constructions are provided:

* :func:`exact_dilation` needs ``J(X)`` invertible and uses ``n`` ancilla modes.
* :func:`approx_var_unitary` shrinks ``X`` to ``(1 - eps) X`` and adds Gaussian
  noise, so the unitary changes with ``eps``.
* :func:`approx_fixed_unitary` keeps ``X`` and ``S`` fixed and uses ``n + k``
  ancilla modes, where ``2k`` is the kernel dimension of ``J(X)``; only the
  ancilla state depends on ``eps``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .channels import LinearBosonicChannel
from .char_fn import (
    CharFn,
    GaussianKernel,
    One,
    PullBack,
    Sampler,
    bochner_check,
    product,
)
from .errors import CutoffTooSmall, DimensionMismatch, EpsilonSingular, SingularJ
from .phase_space import (
    TOL,
    TOL_RANK,
    SymplecticCompletion,
    factor_skew_invertible,
    isometry_residual,
    j_of_x,
    min_eig_hermitian,
    omega,
    skew_canonical,
    symplectic_complete,
    symplectic_residual,
)

#: Canonical values of ``J(X)`` between ``TOL_RANK`` and this are reported as ill-conditioned.
CONDITIONING_WARN = 1e-6

_EMBED = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])


@dataclass(frozen=True, eq=False)
class FixedUnitaryData:
    """Matrices behind the fixed-unitary construction.

    ``J(X) = O^T (blockdiag d_j [[0,1],[-1,0]]) O``; the last ``k`` canonical
    values vanish. ``Y`` is ``2(n+k) x 2n`` and ``Ytilde`` is its
    Moore-Penrose inverse, so ``Ytilde Y = I`` and ``P = Y Ytilde`` is an
    orthogonal projector. ``Q = O^T (blockdiag Q_j) O`` projects onto the kernel
    of ``J(X)``.
    """

    O: np.ndarray
    d: np.ndarray
    k: int
    Y: np.ndarray
    Ytilde: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    kernel: np.ndarray

    def W(self, eps: float) -> np.ndarray:
        """Block-diagonal ``W(eps)``: zero on ``d_j > 0`` blocks, ``diag(eps, 1/eps, eps, 1/eps)`` on kernel blocks."""
        blocks = [np.diag([eps, 1 / eps, eps, 1 / eps]) if z else np.zeros((2, 2)) for z in self.kernel]
        return scipy.linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))

    @property
    def m(self) -> int:
        return self.Y.shape[0] // 2


@dataclass(frozen=True, eq=False)
class GaussianDilation:
    """A Gaussian dilation ``(S, sigma)``.

    Attributes:
        n: system modes.
        m: ancilla modes.
        X: ``2n x 2n`` system block of ``S``.
        Y: ``2m x 2n`` ancilla block of ``S``.
        s: output displacement (zero for every synthesized dilation).
        ancilla: characteristic function of the ancilla state over ``R^{2m}``.
        completion: the symplectic ``S`` and its first columns, if available.
        provenance: ``{"algorithm": "exact" | "var_unitary" | "fixed_unitary", ...}``.
        fixed_data: extra matrices of the fixed-unitary construction.
        epsilon: the approximation parameter, if any.
    """

    n: int
    m: int
    X: np.ndarray
    Y: np.ndarray
    ancilla: CharFn
    completion: SymplecticCompletion | None = None
    s: np.ndarray = None
    provenance: dict = field(default_factory=lambda: {"algorithm": "exact"})
    fixed_data: FixedUnitaryData | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float).reshape(2 * self.m, 2 * self.n)
        s = np.zeros(2 * self.n) if self.s is None else np.array(self.s, dtype=float)
        if X.shape != (2 * self.n, 2 * self.n) or s.shape != (2 * self.n,):
            raise DimensionMismatch("X and s must match the system mode count")
        if self.ancilla.dim != 2 * self.m:
            raise DimensionMismatch(f"ancilla has dimension {self.ancilla.dim}, expected {2 * self.m}")
        for name, arr in (("X", X), ("Y", Y), ("s", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def S(self) -> np.ndarray | None:
        return None if self.completion is None else self.completion.S

    @property
    def algorithm(self) -> str:
        return self.provenance.get("algorithm", "exact")

    @property
    def epsilon(self) -> float | None:
        return self.provenance.get("epsilon")


def apply_dilation_char(d: GaussianDilation, chi_in: CharFn) -> CharFn:
    """Output ``xi -> exp(i s^T Omega xi) chi_in(X xi) chi_sigma(Y xi)``."""
    if chi_in.dim != 2 * d.n:
        raise DimensionMismatch(f"input has dimension {chi_in.dim}, dilation acts on {2 * d.n}")
    factors: list[CharFn] = [PullBack(chi_in, d.X)]
    if d.m:
        factors.append(PullBack(d.ancilla, d.Y))
    if np.any(d.s):
        factors.append(GaussianKernel(np.zeros((2 * d.n, 2 * d.n)), omega(d.n).T @ d.s))
    return product(factors)


def exact_dilation(ch: LinearBosonicChannel, tol_rank: float = TOL_RANK) -> GaussianDilation:
    """Exact Gaussian dilation on ``n`` ancilla modes for a channel with invertible ``J(X)``.

    ``Y`` solves ``Y^T Omega Y = J(X)`` and the ancilla is ``f(Y^{-1} eta)``,
    so the dilation reproduces the channel exactly.

    Raises:
        SingularJ: if ``J(X)`` is singular. Use :func:`approx_var_unitary` or
            :func:`approx_fixed_unitary` instead.
    """
    J = j_of_x(ch.X)
    Y = factor_skew_invertible(J, tol_rank)
    ancilla = PullBack(ch.f, np.linalg.inv(Y))
    completion = symplectic_complete(ch.X, Y)
    return GaussianDilation(ch.n, ch.n, ch.X, Y, ancilla, completion,
                            provenance={"algorithm": "exact"})


def var_unitary_noise(X, eps: float) -> float:
    """``V_eps = || X_eps^T Omega X_eps - X^T Omega X ||_2`` with ``X_eps = (1 - eps) X``."""
    X = np.asarray(X, dtype=float)
    Om = omega(X.shape[0] // 2)
    Xe = (1 - eps) * X
    return float(np.linalg.norm(Xe.T @ Om @ Xe - X.T @ Om @ X, 2))


def var_unitary_channel(ch: LinearBosonicChannel, eps: float) -> LinearBosonicChannel:
    """The approximating channel ``((1 - eps) X, f g_eps)`` with ``g_eps = GaussianKernel(V_eps I)``."""
    v = var_unitary_noise(ch.X, eps)
    g = GaussianKernel(v * np.eye(2 * ch.n))
    return LinearBosonicChannel(ch.n, (1 - eps) * ch.X, product([ch.f, g]), None,
                                f"{ch.label}|var_unitary(eps={eps})")


def approx_var_unitary(ch: LinearBosonicChannel, eps: float, max_retries: int = 20,
                       tol_rank: float = TOL_RANK) -> GaussianDilation:
    """Approximate dilation on ``n`` ancilla modes whose unitary depends on ``eps``.

    ``J((1 - eps) X)`` is invertible except at isolated ``eps``; when it is
    singular the construction retries at ``eps * (1 + 2**-10)``, at most
    ``max_retries`` times.

    Raises:
        ValueError: unless ``0 < eps < 1``.
        EpsilonSingular: when every retry meets a singular ``J``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    e = eps
    for _ in range(max_retries + 1):
        approx = var_unitary_channel(ch, e)
        try:
            d = exact_dilation(approx, tol_rank)
        except SingularJ:
            e *= 1 + 2.0 ** -10
            continue
        prov = {"algorithm": "var_unitary", "epsilon": eps, "epsilon_used": e,
                "V_eps": var_unitary_noise(ch.X, e)}
        return GaussianDilation(d.n, d.m, d.X, d.Y, d.ancilla, d.completion, provenance=prov)
    raise EpsilonSingular(f"J((1 - eps) X) singular at eps = {eps} and {max_retries} nearby values")


def fixed_unitary_data(X, tol_rank: float = TOL_RANK) -> FixedUnitaryData:
    canon = skew_canonical(j_of_x(X))
    kernel = canon.d <= tol_rank
    y_blocks, yt_blocks, q_blocks = [], [], []
    for dj, z in zip(canon.d, kernel):
        if z:
            y_blocks.append(_EMBED)
            yt_blocks.append(_EMBED.T)
            q_blocks.append(np.eye(2))
        else:
            y_blocks.append(np.sqrt(dj) * np.eye(2))
            yt_blocks.append(np.eye(2) / np.sqrt(dj))
            q_blocks.append(np.zeros((2, 2)))
    O = canon.O
    Y = scipy.linalg.block_diag(*y_blocks) @ O
    Yt = O.T @ scipy.linalg.block_diag(*yt_blocks)
    Q = O.T @ scipy.linalg.block_diag(*q_blocks) @ O
    return FixedUnitaryData(O=O, d=canon.d, k=int(kernel.sum()), Y=Y, Ytilde=Yt, P=Y @ Yt, Q=Q,
                            kernel=kernel)


def fixed_unitary_channel(ch: LinearBosonicChannel, eps: float, tol_rank: float = TOL_RANK) -> LinearBosonicChannel:
    """The channel ``(X, f(xi) exp(-eps/4 xi^T Q xi))`` realized by the fixed-unitary dilation."""
    data = fixed_unitary_data(ch.X, tol_rank)
    f = product([ch.f, GaussianKernel(eps * data.Q)]) if data.k else ch.f
    return LinearBosonicChannel(ch.n, ch.X, f, None, f"{ch.label}|fixed_unitary(eps={eps})")


def approx_fixed_unitary(ch: LinearBosonicChannel, eps: float, tol_rank: float = TOL_RANK) -> GaussianDilation:
    """Approximate dilation on ``n + k`` ancilla modes with an ``eps``-independent unitary.

    The ancilla is ``eta -> f(Ytilde eta) exp(-1/4 eta^T W(eps) eta)``, which
    realizes ``chi(X xi) f(xi) exp(-eps/4 xi^T Q xi)``.

    Raises:
        ValueError: unless ``eps > 0``.
    """
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    data = fixed_unitary_data(ch.X, tol_rank)
    parts: list[CharFn] = [PullBack(ch.f, data.Ytilde)]
    if data.k:
        parts.append(GaussianKernel(data.W(eps)))
    completion = symplectic_complete(ch.X, data.Y)
    prov = {"algorithm": "fixed_unitary", "epsilon": eps, "k": data.k}
    return GaussianDilation(ch.n, data.m, ch.X, data.Y, product(parts), completion,
                            provenance=prov, fixed_data=data)


def approximating_channel(ch: LinearBosonicChannel, algorithm: str, eps: float) -> LinearBosonicChannel:
    """The channel a construction actually implements at ``eps``."""
    if algorithm in ("var_unitary", "var-unitary"):
        return var_unitary_channel(ch, eps)
    if algorithm in ("fixed_unitary", "fixed-unitary"):
        return fixed_unitary_channel(ch, eps)
    if algorithm == "exact":
        return ch
    raise ValueError(f"unknown algorithm {algorithm!r}")


def synthesize(ch: LinearBosonicChannel, algorithm: str, eps: float | None = None) -> GaussianDilation:
    """Dispatch on ``exact``, ``var-unitary`` or ``fixed-unitary``."""
    algorithm = algorithm.replace("-", "_")
    if algorithm == "exact":
        return exact_dilation(ch)
    if eps is None:
        raise ValueError(f"algorithm {algorithm} needs an epsilon")
    if algorithm == "var_unitary":
        return approx_var_unitary(ch, eps)
    if algorithm == "fixed_unitary":
        return approx_fixed_unitary(ch, eps)
    raise ValueError(f"unknown algorithm {algorithm!r}")


# --- checks -----------------------------------------------------------------------


class Check(NamedTuple):
    name: str
    passed: bool
    value: float
    detail: str = ""


@dataclass
class DilationReport:
    checks: list[Check]
    warnings: list[str]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c._asdict() for c in self.checks],
            "warnings": list(self.warnings),
        }


def check_dilation(d: GaussianDilation, sampler: Sampler | None = None, tol: float = TOL,
                   eig_tol: float = 1e-8) -> DilationReport:
    """Verify the structural identities of a dilation; failures are listed, never raised."""
    checks: list[Check] = []
    warnings: list[str] = []
    res = isometry_residual(d.X, d.Y)
    checks.append(Check("isometry", res <= tol, res, "X^T Omega X + Y^T Omega Y = Omega"))
    if d.completion is None:
        checks.append(Check("symplectic", False, float("nan"), "no symplectic completion"))
    else:
        r = symplectic_residual(d.S)
        checks.append(Check("symplectic", r <= tol, r, "S^T Omega S = Omega"))
        first = d.S[:, : 2 * d.n]
        same = first.shape == (2 * (d.n + d.m), 2 * d.n) and np.array_equal(first, np.vstack([d.X, d.Y]))
        checks.append(Check("first_columns", bool(same), 0.0 if same else 1.0, "S[:, :2n] == [X; Y]"))
    if d.m:
        rep = bochner_check(d.ancilla, sampler, eig_tol)
        checks.append(Check("ancilla_normalized", rep.normalized, 0.0, "chi_sigma(0) = 1"))
        checks.append(Check("ancilla_continuity", rep.continuous, 0.0, "continuity probe"))
        checks.append(Check("ancilla_positive", rep.certificate.passed, rep.certificate.min_eig,
                            "sampled Omega-positivity"))
    data = d.fixed_data
    if data is not None:
        eps = d.epsilon
        pen = float(np.max(np.abs(data.Ytilde @ data.Y - np.eye(2 * d.n))))
        checks.append(Check("penrose", pen <= tol, pen, "Ytilde Y = I"))
        W = data.W(eps)
        sand = float(np.max(np.abs(data.Y.T @ W @ data.Y - eps * data.Q)))
        checks.append(Check("sandwich", sand <= tol, sand, "Y^T W Y = eps Q"))
        Om = omega(data.m)
        lam = min_eig_hermitian(W - 1j * (Om - data.P @ Om @ data.P))
        checks.append(Check("w_large", lam >= -1e-10, lam, "W - i(Omega - P Omega P) >= 0"))
    for j, dj in enumerate(skew_canonical(j_of_x(d.X)).d):
        if TOL_RANK < dj < CONDITIONING_WARN:
            warnings.append(f"canonical value d_{j} = {dj:.3e} of J(X) is nearly singular")
    return DilationReport(checks, warnings)


# --- Fock truncation ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncatedDilation:
    """A dilation whose ancilla is replaced by a normalized Fock density matrix.

    ``delta`` is ``1 - Tr[P sigma P]`` for the cutoff projector ``P``; it bounds
    the diamond-norm change of the dilated channel caused by the truncation.
    """

    dilation: GaussianDilation
    rho: object
    delta: float
    cutoff: int


def truncate_ancilla(d: GaussianDilation, cutoff: int, method: str = "auto", grid=None) -> TruncatedDilation:
    """Project the ancilla onto ``cutoff`` photons per mode and renormalize.

    Raises:
        CutoffTooSmall: if less than half of the ancilla's trace is captured.
    """
    from .fock import FockOperator, ancilla_captured_trace

    if d.m == 0:
        rho = FockOperator.from_matrix(np.ones((1, 1)), 0, cutoff)
        return TruncatedDilation(d, rho, 0.0, cutoff)
    rho, captured = ancilla_captured_trace(d.ancilla, cutoff, method=method, grid=grid)
    if captured < 0.5:
        raise CutoffTooSmall(f"cutoff {cutoff} captures only {captured:.3f} of the ancilla trace")
    delta = max(0.0, 1.0 - captured)
    return TruncatedDilation(d, rho.scaled(1.0 / rho.trace().real), delta, cutoff)


def one_dilation(n: int) -> GaussianDilation:
    """The trivial dilation of the identity channel: ``S = I`` and no ancilla."""
    X = np.eye(2 * n)
    return GaussianDilation(n, 0, X, np.zeros((0, 2 * n)), One(0), SymplecticCompletion(X.copy(), X.copy()),
                            provenance={"algorithm": "exact"})
