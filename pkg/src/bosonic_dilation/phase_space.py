"""Real symplectic and skew-symmetric linear algebra on phase space.

Phase-space vectors are ordered ``(x_1, p_1, x_2, p_2, ..., x_n, p_n)`` and
the symplectic form is the block-diagonal ``omega(n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NonSymplectic,
    NotHermitian,
    NotSkewSymmetric,
    NotSymmetric,
    PairNotIsometric,
    SingularJ,
)

#: Residual tolerance for structural identities (Omega-isometry, symplecticity).
TOL = 1e-9
#: Tolerance on eigenvalue nonnegativity.
EIG_TOL = 1e-8
#: Canonical skew values at or below this count as exact zeros.
TOL_RANK = 1e-10


class EigCheck(NamedTuple):
    """Outcome of a Hermitian positivity test."""

    passed: bool
    min_eig: float


@dataclass(frozen=True, eq=False)
class SkewCanonicalForm:
    """``A = O.T @ blockdiag([[0, d_j], [-d_j, 0]]) @ O`` with ``O`` orthogonal.

    Attributes:
        O: real orthogonal ``2n x 2n`` matrix.
        d: the ``n`` nonnegative pair magnitudes, sorted descending.
    """

    O: np.ndarray
    d: np.ndarray

    @property
    def n(self) -> int:
        return len(self.d)

    def blocks(self) -> np.ndarray:
        return skew_blocks(self.d)

    def reconstruct(self) -> np.ndarray:
        return self.O.T @ self.blocks() @ self.O


@dataclass(frozen=True, eq=False)
class SymplecticCompletion:
    """A symplectic matrix whose first ``2n`` columns are the stacked ``[X; Y]``."""

    S: np.ndarray
    first_columns: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    def residual(self) -> float:
        return symplectic_residual(self.S)


def omega(n: int) -> np.ndarray:
    """Standard symplectic form on ``n`` modes."""
    if n < 0:
        raise ValueError(f"mode count must be nonnegative, got {n}")
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def skew_blocks(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    return np.kron(np.diag(d), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _modes_of(M: np.ndarray, what: str = "matrix") -> int:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise DimensionMismatch(f"{what} must be square with even dimension, got shape {M.shape}")
    return M.shape[0] // 2


def j_of_x(X) -> np.ndarray:
    """The obstruction matrix ``Omega - X^T Omega X``, made exactly skew."""
    X = np.asarray(X, dtype=float)
    n = _modes_of(X, "X")
    Om = omega(n)
    J = Om - X.T @ Om @ X
    return 0.5 * (J - J.T)


def _require_skew(A: np.ndarray, tol: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    _modes_of(A, "skew matrix")
    defect = np.max(np.abs(A + A.T)) if A.size else 0.0
    if defect > tol:
        raise NotSkewSymmetric(f"matrix is not skew-symmetric: max|A + A^T| = {defect:.3e}")
    return 0.5 * (A - A.T)


def skew_canonical(A, tol: float = TOL) -> SkewCanonicalForm:
    """Orthogonal canonical form of a real skew-symmetric matrix.

    Computed from the real Schur form. Each 2x2 block is sign-normalized so
    that ``d_j >= 0``; pairs of zero eigenvalues become blocks with
    ``d_j = 0``. Blocks are sorted by descending ``d_j`` with ties kept in
    their Schur order.

    Raises:
        NotSkewSymmetric: if ``max|A + A^T| > tol``.
    """
    A = _require_skew(A, tol)
    N = A.shape[0]
    if N == 0:
        return SkewCanonicalForm(O=np.zeros((0, 0)), d=np.zeros(0))
    T, Z = scipy.linalg.schur(A, output="real")

    pairs: list[tuple[float, np.ndarray, np.ndarray]] = []
    zeros: list[np.ndarray] = []
    i = 0
    while i < N:
        if i + 1 < N and T[i + 1, i] != 0.0:
            d = 0.5 * (T[i, i + 1] - T[i + 1, i])
            e, f = Z[:, i], Z[:, i + 1]
            if d < 0:
                e, f, d = f, e, -d
            pairs.append((d, e, f))
            i += 2
        else:
            zeros.append(Z[:, i])
            if len(zeros) == 2:
                pairs.append((0.0, zeros[0], zeros[1]))
                zeros = []
            i += 1
    if zeros:
        raise NotSkewSymmetric("odd number of real Schur 1x1 blocks; input is not skew-symmetric")

    order = sorted(range(len(pairs)), key=lambda k: -pairs[k][0])
    Q = np.empty((N, N))
    d = np.empty(N // 2)
    for slot, k in enumerate(order):
        d[slot], Q[:, 2 * slot], Q[:, 2 * slot + 1] = pairs[k]
    return SkewCanonicalForm(O=Q.T.copy(), d=d)


def factor_skew_invertible(J, tol_rank: float = TOL_RANK, tol: float = TOL) -> np.ndarray:
    """Return an invertible ``Y`` with ``Y^T Omega Y = J``.

    Raises:
        SingularJ: if some canonical value of ``J`` is ``<= tol_rank``.
    """
    canon = skew_canonical(J, tol)
    if canon.n and np.min(canon.d) <= tol_rank:
        raise SingularJ(
            f"J(X) is singular (smallest canonical value {np.min(canon.d):.3e} <= {tol_rank:.1e})"
        )
    scale = np.repeat(np.sqrt(canon.d), 2)
    return scale[:, None] * canon.O


def moore_penrose(Y, rtol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via the SVD.

    Singular values below ``rtol * max(singular values)`` are treated as zero.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.size == 0:
        return np.zeros(Y.shape[::-1])
    return np.linalg.pinv(Y, rcond=rtol)


def symplectic_residual(S) -> float:
    S = np.asarray(S, dtype=float)
    n = _modes_of(S, "S")
    Om = omega(n)
    return float(np.max(np.abs(S.T @ Om @ S - Om))) if n else 0.0


def is_symplectic(S, tol: float = TOL) -> bool:
    return symplectic_residual(S) <= tol


def isometry_residual(X, Y) -> float:
    """``max|X^T Omega X + Y^T Omega Y - Omega|`` for ``X`` 2n x 2n, ``Y`` 2m x 2n."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = _modes_of(X, "X")
    if Y.ndim != 2 or Y.shape[1] != 2 * n or Y.shape[0] % 2:
        raise DimensionMismatch(f"Y must have shape (2m, {2 * n}), got {Y.shape}")
    m = Y.shape[0] // 2
    R = X.T @ omega(n) @ X + Y.T @ omega(m) @ Y - omega(n)
    return float(np.max(np.abs(R))) if R.size else 0.0


def _sym_project(v: np.ndarray, pairs: list[tuple[np.ndarray, np.ndarray]], Om: np.ndarray) -> np.ndarray:
    # remove the components of v along each canonical pair (e, f), omega(e, f) = 1
    for e, f in pairs:
        v = v - (v @ Om @ f) * e + (v @ Om @ e) * f
    return v


def symplectic_complete(X, Y, tol: float = TOL, skip_tol: float = 1e-8) -> SymplecticCompletion:
    """Extend the columns ``[X; Y]`` to a symplectic matrix on ``n + m`` modes.

    Symplectic Gram-Schmidt: the given ``2n`` columns form ``n`` canonical
    pairs; standard basis vectors are projected onto their symplectic
    complement and paired up. At each step the candidate with the largest
    residual norm is taken (ties to the lowest index), then paired with the
    candidate of largest symplectic overlap. Both members of a new pair are
    scaled by ``|omega|^(-1/2)`` to keep the completion balanced.

    Raises:
        PairNotIsometric: if ``[X; Y]`` violates the isometry identity by more than ``tol``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = _modes_of(X, "X")
    if Y.size == 0:
        Y = np.zeros((0, 2 * n))
    residual = isometry_residual(X, Y)
    if residual > tol:
        raise PairNotIsometric(f"X^T Omega X + Y^T Omega Y differs from Omega by {residual:.3e}")
    m = Y.shape[0] // 2
    C = np.vstack([X, Y])
    total = n + m
    Om = omega(total)

    pairs = [(C[:, 2 * j].copy(), C[:, 2 * j + 1].copy()) for j in range(n)]
    candidates = {i: np.eye(2 * total)[:, i] for i in range(2 * total)}
    new_cols: list[np.ndarray] = []
    while len(pairs) < total:
        # two projection sweeps keep round-off from the precondition out of the complement
        for key in candidates:
            v = _sym_project(candidates[key], pairs, Om)
            candidates[key] = _sym_project(v, pairs, Om)
        norms = {k: np.linalg.norm(v) for k, v in candidates.items()}
        live = [k for k in sorted(candidates) if norms[k] >= skip_tol]
        if len(live) < 2:
            raise PairNotIsometric("symplectic complement exhausted before completion")
        ke = max(live, key=lambda k: (norms[k], -k))
        e = candidates.pop(ke) / norms[ke]
        overlaps = {k: e @ Om @ candidates[k] for k in live if k != ke}
        kf = max(overlaps, key=lambda k: (abs(overlaps[k]), -k))
        w = overlaps[kf]
        if abs(w) < skip_tol:
            raise PairNotIsometric("no symplectic partner found while completing the basis")
        f = candidates.pop(kf)
        e, f = e / np.sqrt(abs(w)), np.sign(w) * f / np.sqrt(abs(w))
        pairs.append((e, f))
        new_cols.extend([e, f])

    S = np.hstack([C] + [c[:, None] for c in new_cols]) if new_cols else C.copy()
    res = symplectic_residual(S)
    if res > tol:
        raise PairNotIsometric(f"completed matrix is not symplectic (residual {res:.3e})")
    return SymplecticCompletion(S=S, first_columns=C)


def min_eig_hermitian(M, tol: float = TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Raises:
        NotHermitian: if ``max|M - M^H| > tol``.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    defect = np.max(np.abs(M - M.conj().T)) if M.size else 0.0
    if defect > tol:
        raise NotHermitian(f"matrix is not Hermitian: max|M - M^H| = {defect:.3e}")
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])


def heisenberg_check(V, tol: float = EIG_TOL) -> EigCheck:
    """Uncertainty-principle test ``V + i Omega >= 0`` for a covariance matrix."""
    V = np.asarray(V, dtype=float)
    n = _modes_of(V, "V")
    if np.max(np.abs(V - V.T)) > TOL:
        raise NotSymmetric("covariance matrix must be symmetric")
    lam = min_eig_hermitian(V + 1j * omega(n))
    return EigCheck(lam >= -tol, lam)


# --- helpers for Gaussian unitaries -------------------------------------------------


def xpxp_to_xxpp(n: int) -> np.ndarray:
    """Permutation ``P`` with ``P @ r_xpxp = r_xxpp``."""
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return np.eye(2 * n)[perm]


def passive_to_unitary(O) -> np.ndarray:
    """Complex ``n x n`` unitary ``u`` of an orthogonal symplectic matrix (``a -> u a``)."""
    O = np.asarray(O, dtype=float)
    n = _modes_of(O, "O")
    P = xpxp_to_xxpp(n)
    Oq = P @ O @ P.T
    return Oq[:n, :n] + 1j * Oq[n:, :n]


def unitary_to_passive(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    P = xpxp_to_xxpp(n)
    Oq = np.block([[u.real, -u.imag], [u.imag, u.real]])
    return P.T @ Oq @ P


def passive_generator(O) -> np.ndarray:
    """Real Hamiltonian matrix ``K`` with ``expm(K) = O`` for orthogonal symplectic ``O``."""
    u = passive_to_unitary(O)
    T, Z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(T))
    log_u = (Z * (1j * phases)) @ Z.conj().T
    return unitary_to_passive(log_u)


def euler_decomposition(S, tol: float = TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor ``S = O1 @ Z @ O2`` with ``O1, O2`` orthogonal symplectic.

    ``Z = blockdiag(diag(z_j, 1/z_j))`` with ``z_j >= 1``; the squeezing
    values ``z`` are returned instead of ``Z``.

    Uses the polar factorization ``S = U P`` and diagonalizes the positive
    symplectic factor: if ``P v = lam v`` then ``P (Omega v) = (Omega v) / lam``,
    so eigenvectors with ``lam > 1`` and their images under ``-Omega`` give
    an orthogonal symplectic eigenbasis. The ``lam = 1`` eigenspace is
    Omega-invariant and is paired by Gram-Schmidt.

    Raises:
        NonSymplectic: if ``S`` fails the symplectic identity by more than ``tol``.
    """
    S = np.asarray(S, dtype=float)
    n = _modes_of(S, "S")
    if symplectic_residual(S) > tol * max(1.0, np.linalg.norm(S, 2) ** 2):
        raise NonSymplectic(f"matrix is not symplectic (residual {symplectic_residual(S):.3e})")
    Om = omega(n)
    U, P = scipy.linalg.polar(S, side="right")
    lam, vecs = np.linalg.eigh(0.5 * (P + P.T))
    order = np.argsort(-lam)
    lam, vecs = lam[order], vecs[:, order]
    big = [k for k in range(2 * n) if lam[k] > 1 + 1e-9]
    if len(big) > n:
        raise NonSymplectic("spectrum of the positive factor is not reciprocal")
    cols: list[tuple[np.ndarray, np.ndarray]] = []
    z: list[float] = []
    for k in big:
        v = vecs[:, k]
        cols.append((v, -Om @ v))
        z.append(float(lam[k]))
    # neutral space: everything orthogonal to the squeezed pairs
    basis = [c for pair in cols for c in pair]
    B = np.array(basis).T if basis else np.zeros((2 * n, 0))
    proj = np.eye(2 * n) - B @ B.T
    while len(cols) < n:
        w, V = np.linalg.eigh(proj)
        u = V[:, -1]
        cols.append((u, -Om @ u))
        z.append(1.0)
        B = np.column_stack([B, u, -Om @ u])
        proj = np.eye(2 * n) - B @ B.T
    W = np.column_stack([c for pair in cols for c in pair])
    z_arr = np.array(z)
    # S = U P = U W Z W^T
    Zm = np.diag(np.ravel(np.column_stack([z_arr, 1 / z_arr])))
    O1 = U @ W
    O2 = W.T.copy()
    recon = np.max(np.abs(O1 @ Zm @ O2 - S))
    if recon > 1e-6 * max(1.0, np.max(np.abs(S))):
        raise NonSymplectic(f"Euler decomposition failed to reconstruct S (error {recon:.3e})")
    return O1, z_arr, O2


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random symplectic matrix ``expm(Omega H)`` with ``H`` symmetric Gaussian of size ``scale``."""
    H = rng.normal(scale=scale, size=(2 * n, 2 * n))
    H = 0.5 * (H + H.T)
    return scipy.linalg.expm(omega(n) @ H)
