"""Truncated Fock-space numerics.

Operators on ``n`` modes are stored as ``d^n x d^n`` matrices, ``d`` being the
per-mode cutoff, with mode-major tensor ordering (mode 0 is the slowest
index). Quadratures are ``x = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``,
so ``D(xi) = exp(i xi^T Omega r)`` is the usual ``D(alpha)`` with
``alpha = -(xi_1 + i xi_2)/sqrt(2)`` per mode.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse

from . import kernels
from .char_fn import CharFn, GaussianMixtureForm, gaussian_state_char, to_gaussian_mixture
from .errors import (
    DimensionMismatch,
    GridTooCoarse,
    ModeCountGuard,
    NonSymplectic,
    UnphysicalCovariance,
)
from .phase_space import (
    TOL,
    euler_decomposition,
    heisenberg_check,
    omega,
    passive_generator,
    skew_canonical,
    symplectic_residual,
)

#: Largest Hilbert-space dimension ``d^N`` accepted for dense multi-mode work.
MAX_DIM = 4096


@dataclass(frozen=True, eq=False)
class FockOperator:
    """An operator on ``n`` modes truncated to ``cutoff`` Fock states per mode."""

    n: int
    cutoff: int
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        dim = self.cutoff ** self.n
        if M.shape != (dim, dim):
            raise DimensionMismatch(f"matrix must be {dim}x{dim} for n={self.n}, cutoff={self.cutoff}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_matrix(cls, M, n: int, cutoff: int) -> "FockOperator":
        return cls(n, cutoff, M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def hermiticity_defect(self) -> float:
        M = self.matrix
        return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0

    @property
    def is_hermitian(self) -> bool:
        return self.hermiticity_defect <= TOL

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def scaled(self, c) -> "FockOperator":
        return FockOperator(self.n, self.cutoff, self.matrix * c)

    def hermitized(self) -> "FockOperator":
        return FockOperator(self.n, self.cutoff, 0.5 * (self.matrix + self.matrix.conj().T))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def min_eig(self) -> float:
        return float(self.eigvalsh()[0])

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def tensor(self, other: "FockOperator") -> "FockOperator":
        if other.cutoff != self.cutoff:
            raise DimensionMismatch("tensor factors must share the cutoff")
        return FockOperator(self.n + other.n, self.cutoff, np.kron(self.matrix, other.matrix))

    def partial_trace(self, keep: int) -> "FockOperator":
        """Trace out all modes after the first ``keep``."""
        d = self.cutoff
        a, b = d ** keep, d ** (self.n - keep)
        T = self.matrix.reshape(a, b, a, b)
        return FockOperator(keep, d, np.einsum("ibjb->ij", T))

    def truncated(self, cutoff: int) -> "FockOperator":
        """Restrict every mode to its first ``cutoff`` Fock states."""
        if cutoff > self.cutoff:
            raise DimensionMismatch("cannot enlarge the cutoff by truncation")
        idx = _sub_indices(self.n, self.cutoff, cutoff)
        return FockOperator(self.n, cutoff, self.matrix[np.ix_(idx, idx)])

    def to_dict(self) -> dict:
        return {"n": self.n, "cutoff": self.cutoff,
                "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "FockOperator":
        M = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(int(data["n"]), int(data["cutoff"]), M)


def _sub_indices(n: int, big: int, small: int) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(small)] * n, indexing="ij")
    idx = np.zeros(grids[0].shape, dtype=int) if n else np.zeros((), dtype=int)
    for g in grids:
        idx = idx * big + g
    return np.ravel(idx)


def _guard(n_modes: int, cutoff: int) -> None:
    if cutoff ** n_modes > MAX_DIM:
        raise ModeCountGuard(
            f"{n_modes} modes at cutoff {cutoff} give dimension {cutoff ** n_modes} > {MAX_DIM}"
        )


# --- basic states --------------------------------------------------------------------


def fock_projector(k: int, cutoff: int) -> FockOperator:
    M = np.zeros((cutoff, cutoff), dtype=complex)
    M[k, k] = 1
    return FockOperator(1, cutoff, M)


def vacuum_fock(n: int, cutoff: int) -> FockOperator:
    M = np.zeros((cutoff ** n, cutoff ** n), dtype=complex)
    M[0, 0] = 1
    return FockOperator(n, cutoff, M)


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Amplitudes ``exp(-|alpha|^2/2) alpha^k / sqrt(k!)`` of a coherent state."""
    amps = np.empty(cutoff, dtype=complex)
    amps[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, cutoff):
        amps[k] = amps[k - 1] * alpha / np.sqrt(k)
    return amps


def alpha_of(xi) -> np.ndarray:
    """Per-mode complex amplitudes of ``D(xi)``: ``-(xi_x + i xi_p)/sqrt(2)``."""
    xi = np.asarray(xi, dtype=float)
    return -(xi[..., 0::2] + 1j * xi[..., 1::2]) / np.sqrt(2)


def coherent_fock(s, cutoff: int) -> FockOperator:
    """``D(s)|0><0|D(s)^dag`` on ``len(s)/2`` modes."""
    s = np.asarray(s, dtype=float)
    alphas = alpha_of(s)
    vec = np.ones(1, dtype=complex)
    for a in alphas:
        vec = np.kron(vec, coherent_vector(a, cutoff))
    return FockOperator(len(alphas), cutoff, np.outer(vec, vec.conj()))


def thermal_fock(nbar: float, cutoff: int) -> FockOperator:
    """Single-mode thermal state ``sum_k nbar^k / (1 + nbar)^(k+1) |k><k|`` (untruncated weights)."""
    k = np.arange(cutoff)
    p = (nbar ** k) / (1 + nbar) ** (k + 1) if nbar > 0 else (k == 0).astype(float)
    return FockOperator(1, cutoff, np.diag(p).astype(complex))


# --- displacement operators and characteristic functions ------------------------------


def displacement_op(xi, cutoff: int) -> FockOperator:
    """Truncation of ``D(xi)`` to ``cutoff`` Fock states per mode (exact matrix elements)."""
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    alphas = np.atleast_1d(alpha_of(xi))
    M = np.ones((1, 1), dtype=complex)
    for a in alphas:
        M = np.kron(M, kernels.displacement_matrix(complex(a), cutoff))
    return FockOperator(len(alphas), cutoff, M)


def char_of_operator(T: FockOperator, xi) -> complex:
    """``Tr[T D(xi)]``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2 * T.n,):
        raise DimensionMismatch(f"xi must have length {2 * T.n}")
    return complex(char_of_operator_batch(T, xi[None, :])[0])


def char_of_operator_batch(T: FockOperator, xis) -> np.ndarray:
    """``Tr[T D(xi_k)]`` for a batch of points of shape ``(K, 2n)``."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if xis.shape[1] != 2 * T.n:
        raise DimensionMismatch(f"points must have dimension {2 * T.n}")
    if T.n == 0:
        return np.full(xis.shape[0], T.trace())
    if T.n == 1:
        return kernels.displacement_traces(T.matrix, alpha_of(xis)[:, 0])
    d = T.cutoff
    alphas = alpha_of(xis)
    out = np.empty(xis.shape[0], dtype=complex)
    # Tr[T (D_1 x ... x D_n)] = sum T[(n_1..n_n), (m_1..m_n)] prod_j D_j[m_j, n_j]
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket, bra = letters[: T.n], letters[T.n: 2 * T.n]
    spec = ket + bra + "," + ",".join(bra[j] + ket[j] for j in range(T.n)) + "->"
    Tt = T.matrix.reshape([d] * (2 * T.n))
    for k, row in enumerate(alphas):
        mats = [kernels.displacement_matrix(complex(a), d) for a in row]
        out[k] = np.einsum(spec, Tt, *mats)
    return out


@dataclass(frozen=True)
class QuadratureGrid:
    """Midpoint grid ``-R + h (i + 1/2)`` on each of ``dim`` phase-space axes."""

    radius: float
    step: float
    dim: int

    def __post_init__(self):
        if self.radius <= 0 or self.step <= 0:
            raise ValueError("grid radius and step must be positive")
        ratio = self.radius / self.step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"radius/step must be an integer, got {ratio}")

    @property
    def per_axis(self) -> int:
        return 2 * int(round(self.radius / self.step))

    def axis(self) -> np.ndarray:
        return -self.radius + self.step * (np.arange(self.per_axis) + 0.5)

    def points(self) -> np.ndarray:
        ax = self.axis()
        mesh = np.meshgrid(*[ax] * self.dim, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @property
    def weight(self) -> float:
        """``h^{2n} / (2 pi)^n`` for ``dim = 2n``."""
        return self.step ** self.dim / (2 * np.pi) ** (self.dim // 2)

    def to_dict(self) -> dict:
        return {"radius": self.radius, "step": self.step, "dim": self.dim}


def default_grid(n: int) -> QuadratureGrid:
    if n == 1:
        return QuadratureGrid(8.0, 0.05, 2)
    if n == 2:
        return QuadratureGrid(6.0, 0.1, 4)
    raise ModeCountGuard(f"no default quadrature grid for {n} modes")


def _grid_reconstruct(chi: CharFn, grid: QuadratureGrid, cutoff: int) -> np.ndarray:
    n = chi.dim // 2
    if n == 1:
        pts = grid.points()
        w = chi.evaluate(pts) * grid.weight
        keep = np.abs(w) > 1e-18 * grid.weight
        # T = sum w_k D(-xi_k)
        return kernels.accumulate_displacements(alpha_of(-pts[keep])[:, 0], w[keep], cutoff)
    if n == 2:
        # T = sum_{k1} D(-xi^(1)_k1) x (sum_{k2} chi(k1, k2) D(-xi^(2)_k2)), blocked over k1
        ax = grid.axis()
        plane = np.stack([g.ravel() for g in np.meshgrid(ax, ax, indexing="ij")], axis=1)
        table = np.stack([kernels.displacement_matrix(complex(a), cutoff) for a in alpha_of(-plane)[:, 0]])
        table = table.reshape(len(plane), -1)
        d2 = cutoff * cutoff
        T = np.zeros((d2, d2), dtype=complex)
        block = 256
        for start in range(0, len(plane), block):
            p1 = plane[start:start + block]
            xi = np.concatenate([np.repeat(p1, len(plane), axis=0), np.tile(plane, (len(p1), 1))], axis=1)
            vals = chi.evaluate(xi).reshape(len(p1), len(plane)) * grid.weight
            inner = vals @ table  # (block, d^2): sum over the second mode
            T += np.einsum("ka,kb->ab", table[start:start + block], inner)
        # T[(m1 n1), (m2 n2)] -> [(m1 m2), (n1 n2)]
        return T.reshape(cutoff, cutoff, cutoff, cutoff).transpose(0, 2, 1, 3).reshape(d2, d2)
    raise ModeCountGuard("grid reconstruction supports at most 2 modes")


# --- Gaussian unitaries ---------------------------------------------------------------


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1)


def _quadratic_terms(G: np.ndarray):
    """Split ``1/2 r^T G r`` into ``A_ij a_i a_j``, ``B_ij a_i^dag a_j^dag``, ``C_ij a_i^dag a_j``.

    ``H = 1/2 sum A_ij a_i a_j + 1/2 sum B_ij a_i^dag a_j^dag + sum C_ij a_i^dag a_j``
    up to an additive constant.
    """
    n = G.shape[0] // 2
    # r = L zeta with zeta = (a_1..a_n, a_1^dag..a_n^dag)
    L = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        L[2 * j, j] = L[2 * j, n + j] = 1 / np.sqrt(2)
        L[2 * j + 1, j] = -1j / np.sqrt(2)
        L[2 * j + 1, n + j] = 1j / np.sqrt(2)
    Cz = L.T @ G @ L
    A = Cz[:n, :n]
    B = Cz[n:, n:]
    # cross terms a_i a_j^dag + a_j^dag a_i = 2 a_j^dag a_i + const
    C = Cz[:n, n:].T  # C[j, i] couples a_j^dag a_i
    return A, B, C


def _mode_op(op: np.ndarray, j: int, n: int, cutoff: int):
    eye = scipy.sparse.identity(cutoff, format="csr", dtype=complex)
    mats = [eye] * n
    mats[j] = scipy.sparse.csr_matrix(op)
    out = mats[0]
    for m in mats[1:]:
        out = scipy.sparse.kron(out, m, format="csr")
    return out


def _number_blocks(n: int, cutoff: int) -> list[np.ndarray]:
    occ = np.array(list(itertools.product(range(cutoff), repeat=n)), dtype=int).reshape(-1, n)
    total = occ.sum(axis=1)
    return [np.flatnonzero(total == N) for N in range(total.max() + 1)]


class PassiveBlocks(NamedTuple):
    """A photon-number-conserving unitary stored as blocks ``(indices, U_block)``."""

    dim: int
    blocks: list

    def dense(self) -> np.ndarray:
        U = np.zeros((self.dim, self.dim), dtype=complex)
        for idx, B in self.blocks:
            U[np.ix_(idx, idx)] = B
        return U

    def conjugate(self, rho: np.ndarray) -> np.ndarray:
        """``U rho U^dag`` without forming the dense ``U``."""
        if not self.blocks:
            return rho
        tmp = np.empty_like(rho)
        for idx, B in self.blocks:
            tmp[idx, :] = B @ rho[idx, :]
        out = np.empty_like(rho)
        for idx, B in self.blocks:
            out[:, idx] = tmp[:, idx] @ B.conj().T
        return out


def _passive_blocks(O, cutoff: int) -> PassiveBlocks:
    O = np.asarray(O, dtype=float)
    n = O.shape[0] // 2
    dim = cutoff ** n
    if np.allclose(O, np.eye(2 * n), rtol=0, atol=1e-15):
        return PassiveBlocks(dim, [])
    K = passive_generator(O)
    G = -omega(n) @ K
    _, _, C = _quadratic_terms(0.5 * (G + G.T))
    a = _ladder(cutoff)
    H = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    ops = [_mode_op(a, j, n, cutoff) for j in range(n)]
    for j in range(n):
        for i in range(n):
            if C[j, i] != 0:
                H = H + C[j, i] * (ops[j].conj().T @ ops[i])
    H = H.tocsr()
    blocks = []
    for idx in _number_blocks(n, cutoff):
        Hb = H[idx][:, idx].toarray()
        blocks.append((idx, scipy.linalg.expm(0.5j * (Hb + Hb.conj().T))))
    return PassiveBlocks(dim, blocks)


def passive_unitary(O, cutoff: int) -> np.ndarray:
    """Fock representation of an orthogonal symplectic ``O`` (``U^dag r U = O^{-1} r``).

    The generator conserves the total photon number, so it is exponentiated
    block by block; blocks with total number below the cutoff are exact.
    """
    pb = _passive_blocks(O, cutoff)
    return pb.dense() if pb.blocks else np.eye(pb.dim, dtype=complex)


def squeezer_unitary(z: float, cutoff: int, pad: int | None = None) -> np.ndarray:
    """Single-mode squeezer with ``U^dag x U = x / z`` and ``U^dag p U = z p``.

    Exponentiated at a padded cutoff and then truncated, which keeps the
    low-number matrix elements accurate.
    """
    if z == 1:
        return np.eye(cutoff, dtype=complex)
    pad = pad or max(2 * cutoff, cutoff + 40)
    r = np.log(z)
    K = np.diag([r, -r])
    G = -omega(1) @ K
    A, B, _ = _quadratic_terms(0.5 * (G + G.T))
    a = _ladder(pad)
    H = 0.5 * A[0, 0] * (a @ a) + 0.5 * B[0, 0] * (a.T @ a.T)
    H = 0.5 * (H + H.conj().T)
    return scipy.linalg.expm(1j * H)[:cutoff, :cutoff]


class GaussianUnitary(NamedTuple):
    """Factors of a Gaussian unitary, in order of application: ``U = U_last ... U_first``."""

    n: int
    cutoff: int
    first: PassiveBlocks
    squeeze: list  # one single-mode matrix per mode
    last: PassiveBlocks

    def dense(self) -> np.ndarray:
        Z = np.ones((1, 1), dtype=complex)
        for s in self.squeeze:
            Z = np.kron(Z, s)
        eye = np.eye(Z.shape[0], dtype=complex)
        first = self.first.dense() if self.first.blocks else eye
        last = self.last.dense() if self.last.blocks else eye
        return last @ Z @ first


def gaussian_unitary_factors(S, cutoff: int) -> GaussianUnitary:
    """Factor the Fock representation of ``S`` as passive, squeezers, passive.

    With ``S = O1 Z O2`` the unitary obeying ``U^dag D(zeta) U = D(S zeta)`` is
    ``U = U(O2) U(Z) U(O1)``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    O1, z, O2 = euler_decomposition(S)
    return GaussianUnitary(n, cutoff, _passive_blocks(O1, cutoff),
                           [squeezer_unitary(zj, cutoff) for zj in z], _passive_blocks(O2, cutoff))


class UnitaryResult(NamedTuple):
    U: FockOperator
    unitarity_defect: float


def gaussian_unitary_fock(S, cutoff: int, tol: float = TOL) -> UnitaryResult:
    """Truncated Fock matrix of the Gaussian unitary with ``U^dag D(zeta) U = D(S zeta)``.

    Raises:
        NonSymplectic: if ``S`` is not symplectic within ``tol``.
        ModeCountGuard: if ``cutoff^n`` exceeds ``MAX_DIM``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    if symplectic_residual(S) > tol:
        raise NonSymplectic(f"S is not symplectic (residual {symplectic_residual(S):.3e})")
    _guard(n, cutoff)
    U = gaussian_unitary_factors(S, cutoff).dense()
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    return UnitaryResult(FockOperator(n, cutoff, U), defect)


# --- Gaussian states ------------------------------------------------------------------


def williamson(V) -> tuple[np.ndarray, np.ndarray]:
    """``V = W diag(nu_1, nu_1, ..., nu_n, nu_n) W^T`` with ``W`` symplectic.

    Obtained from the canonical form of the skew matrix ``V^{-1/2} Omega V^{-1/2}``,
    whose canonical values are ``1 / nu_j``.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    w, E = np.linalg.eigh(0.5 * (V + V.T))
    if w[0] <= 0:
        raise UnphysicalCovariance("covariance matrix must be positive definite")
    Vh = (E * np.sqrt(w)) @ E.T
    Vmh = (E / np.sqrt(w)) @ E.T
    canon = skew_canonical(Vmh @ omega(n) @ Vmh, tol=1e-8)
    nu = 1.0 / canon.d
    W = Vh @ canon.O.T @ np.diag(np.repeat(1.0 / np.sqrt(nu), 2))
    return nu, W


def _apply_local(rho: np.ndarray, op: np.ndarray, j: int, n: int, d: int) -> np.ndarray:
    """``op_j rho op_j^dag`` for a single-mode matrix ``op`` on mode ``j``."""
    t = rho.reshape([d] * (2 * n))
    t = np.moveaxis(np.tensordot(op, t, axes=(1, j)), 0, j)
    t = np.moveaxis(np.tensordot(t, op.conj(), axes=(n + j, 1)), -1, n + j)
    return t.reshape(d ** n, d ** n)


def _conjugate(rho: np.ndarray, gu: GaussianUnitary) -> np.ndarray:
    out = gu.first.conjugate(rho)
    for j, s in enumerate(gu.squeeze):
        if not np.array_equal(s, np.eye(gu.cutoff)):
            out = _apply_local(out, s, j, gu.n, gu.cutoff)
    return gu.last.conjugate(out)


def _padded(cutoff: int, n: int) -> int:
    """Working cutoff for building states before truncation: generous, but within ``MAX_DIM``."""
    pad = max(2 * cutoff, cutoff + 20)
    limit = int(np.floor(MAX_DIM ** (1.0 / n) + 1e-9)) if n > 1 else pad
    return max(cutoff, min(pad, limit))


def _gaussian_state_padded(V, pad: int) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    nu, W = williamson(V)
    rho = np.ones((1, 1), dtype=complex)
    for v in nu:
        rho = np.kron(rho, thermal_fock(max(0.0, (v - 1) / 2), pad).matrix)
    # U_S rho U_S^dag has covariance S^{-1} V0 S^{-T}; S = W^{-1} gives V
    return _conjugate(rho, gaussian_unitary_factors(np.linalg.inv(W), pad))


def gaussian_state_exact(V, s=None, cutoff: int = 20) -> FockOperator:
    """Gaussian state built as ``U (thermal states) U^dag`` at a padded cutoff, then truncated.

    The truncated matrix is not renormalized, so its trace deficit measures
    the population beyond the cutoff.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    form = GaussianMixtureForm(omega(n).T @ V @ omega(n), np.ones(1, dtype=complex),
                               (omega(n).T @ (np.zeros(2 * n) if s is None else np.asarray(s, float)))[None, :])
    return FockOperator(n, cutoff, _mixture_reconstruct(form, cutoff))


def _mixture_reconstruct(form: GaussianMixtureForm, cutoff: int) -> np.ndarray:
    """``sum_k c_k D(s_k) rho_M D(s_k)^dag`` with ``rho_M`` the Gaussian state of kernel ``M``."""
    n = form.M.shape[0] // 2
    Om = omega(n)
    V = Om @ form.M @ Om.T
    pad = _padded(cutoff, n)
    base = _gaussian_state_padded(V, pad)
    T = np.zeros_like(base)
    for c, b in zip(form.coeffs, form.shifts):
        s = Om @ b
        if np.any(s):
            D = displacement_op(s, pad).matrix
            T += c * (D @ base @ D.conj().T)
        else:
            T += c * base
    return FockOperator(n, pad, T).truncated(cutoff).matrix


def _mixture_is_state_like(form: GaussianMixtureForm) -> bool:
    n = form.M.shape[0] // 2
    if n == 0:
        return False
    Om = omega(n)
    V = Om @ form.M @ Om.T
    try:
        return bool(heisenberg_check(0.5 * (V + V.T), tol=1e-12).passed) and np.linalg.eigvalsh(V)[0] > 0
    except Exception:
        return False


def operator_from_char(chi: CharFn, cutoff: int, grid: QuadratureGrid | None = None,
                       method: str = "auto", check: bool = True) -> FockOperator:
    """Operator ``T = int d^{2n}xi / (2 pi)^n chi(xi) D(-xi)`` truncated to ``cutoff``.

    Args:
        chi: characteristic function over ``R^{2n}``.
        cutoff: Fock cutoff per mode.
        grid: quadrature grid for ``method="grid"``; the default grid when omitted.
        method: ``"grid"`` evaluates the midpoint Riemann sum. ``"exact"`` rewrites
            ``chi`` as a Gaussian envelope times plane waves and sums displaced
            Gaussian states, which needs the envelope to be a valid state kernel.
            ``"auto"`` uses the grid for one mode and the exact route otherwise.
        check: raise :class:`GridTooCoarse` when the grid result's trace misses ``chi(0)`` by more than 0.05.

    Returns:
        The Hermitized operator.
    """
    n = chi.dim // 2
    if method not in ("auto", "grid", "exact"):
        raise ValueError(f"unknown reconstruction method {method!r}")
    if method == "auto":
        method = "grid" if n == 1 else "exact"
    if method == "exact":
        _guard(n, cutoff)
        form = to_gaussian_mixture(chi)
        if not _mixture_is_state_like(form):
            raise UnphysicalCovariance("Gaussian envelope is not a state kernel; use the grid method")
        T = _mixture_reconstruct(form, cutoff)
    else:
        grid = grid or default_grid(n)
        if grid.dim != chi.dim:
            raise DimensionMismatch("grid dimension does not match the characteristic function")
        T = _grid_reconstruct(chi, grid, cutoff)
        if check:
            target = complex(chi.evaluate(np.zeros(chi.dim)))
            # the trace of the truncated operator only misses the tail beyond the cutoff
            if abs(np.trace(T) - target) > 0.05:
                raise GridTooCoarse(f"reconstructed trace {np.trace(T):.4f} differs from chi(0) = {target:.4f}")
    return FockOperator(n, cutoff, 0.5 * (T + T.conj().T))


def ancilla_captured_trace(chi: CharFn, cutoff: int, method: str = "auto", grid=None):
    """Reconstruct an ancilla state and return it with its captured trace."""
    if method == "auto":
        form = to_gaussian_mixture(chi)
        method = "exact" if _mixture_is_state_like(form) else "grid"
    rho = operator_from_char(chi, cutoff, grid=grid, method=method, check=False)
    return rho, float(rho.trace().real)


def gaussian_state_fock(V, s=None, cutoff: int = 20, grid: QuadratureGrid | None = None,
                        method: str = "auto") -> FockOperator:
    """Fock matrix of the Gaussian state with covariance ``V`` and mean ``s``.

    Raises:
        UnphysicalCovariance: if ``V + i Omega`` is not PSD.
    """
    V = np.asarray(V, dtype=float)
    chk = heisenberg_check(V)
    if not chk.passed:
        raise UnphysicalCovariance(f"V + i Omega has eigenvalue {chk.min_eig:.3e} < 0")
    chi = gaussian_state_char(V, s)
    if method == "auto":
        method = "exact"
    return operator_from_char(chi, cutoff, grid=grid, method=method)


# --- metrics ----------------------------------------------------------------------


def trace_distance(rho: FockOperator, sigma: FockOperator) -> float:
    """``1/2 ||rho - sigma||_1`` (the conventional normalization with the factor 1/2)."""
    if rho.matrix.shape != sigma.matrix.shape:
        raise DimensionMismatch("operators have different dimensions")
    diff = rho.matrix - sigma.matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


class ParsevalReport(NamedTuple):
    operator_side: complex
    phase_space_side: complex
    difference: float


def parseval(T1: FockOperator, T2: FockOperator, grid: QuadratureGrid | None = None) -> ParsevalReport:
    """Compare ``Tr[T1^dag T2]`` with ``int d^{2n}xi / (2 pi)^n conj(chi_1) chi_2``."""
    if T1.matrix.shape != T2.matrix.shape:
        raise DimensionMismatch("operators have different dimensions")
    lhs = complex(np.trace(T1.matrix.conj().T @ T2.matrix))
    grid = grid or default_grid(T1.n)
    pts = grid.points()
    c1 = char_of_operator_batch(T1, pts)
    c2 = c1 if T2 is T1 else char_of_operator_batch(T2, pts)
    rhs = complex(np.sum(np.conj(c1) * c2) * grid.weight)
    return ParsevalReport(lhs, rhs, abs(lhs - rhs))


class BoundProbe(NamedTuple):
    value: float
    violates: bool
    near_boundary: bool


def chi_strict_bound_probe(sigma: FockOperator, zeta, near: float = 1e-3) -> BoundProbe:
    """Report ``|chi_sigma(zeta)|``; states satisfy ``|chi(zeta)| < 1`` for ``zeta != 0``.

    ``violates`` flags values ``>= 1 - 1e-9``; ``near_boundary`` flags values within ``near`` of 1.
    """
    zeta = np.asarray(zeta, dtype=float)
    if not np.any(zeta):
        raise ValueError("zeta must be nonzero")
    v = abs(char_of_operator(sigma, zeta))
    return BoundProbe(v, v >= 1 - 1e-9, v >= 1 - near)


# --- Stinespring simulation ------------------------------------------------------------


class StinespringResult(NamedTuple):
    """Output of a Stinespring simulation.

    Attributes:
        output: system state after tracing out the ancilla (not renormalized).
        ancilla: the renormalized truncated ancilla state that was used.
        leakage: ``1 - Tr[output]``, the weight lost by truncating the unitary.
        ancilla_delta: ``1 - Tr[P sigma P]`` of the ancilla before renormalization.
    """

    output: FockOperator
    ancilla: FockOperator
    leakage: float
    ancilla_delta: float


def stinespring_apply(d, rho: FockOperator, cutoff: int | None = None, ancilla_method: str = "auto") -> StinespringResult:
    """``Tr_E[U (rho x sigma) U^dag]`` for a Gaussian dilation ``d``.

    Args:
        d: a :class:`~bosonic_dilation.dilation.GaussianDilation` with a symplectic completion.
        rho: system input state.
        cutoff: per-mode cutoff; defaults to ``rho.cutoff``.
        ancilla_method: reconstruction method for the ancilla state.

    Returns:
        A :class:`StinespringResult`. The ancilla is projected onto the cutoff
        and renormalized before it enters, exactly as in
        :func:`~bosonic_dilation.dilation.truncate_ancilla`.
    """
    cutoff = cutoff or rho.cutoff
    if rho.cutoff != cutoff:
        rho = rho.truncated(cutoff)
    if rho.n != d.n:
        raise DimensionMismatch(f"input has {rho.n} modes, dilation acts on {d.n}")
    total = d.n + d.m
    _guard(total, cutoff)
    if d.m == 0:
        sigma = FockOperator(0, cutoff, np.ones((1, 1)))
        delta = 0.0
        joint = rho.matrix
    else:
        sigma, captured = ancilla_captured_trace(d.ancilla, cutoff, method=ancilla_method)
        sigma = sigma.scaled(1.0 / captured)
        delta = max(0.0, 1.0 - captured)
        joint = np.kron(rho.matrix, sigma.matrix)
    if d.S is None:
        raise NonSymplectic("dilation carries no symplectic completion")
    gu = gaussian_unitary_factors(d.S, cutoff)
    joint = _conjugate(joint, gu)
    out = FockOperator(total, cutoff, joint).partial_trace(d.n)
    if np.any(d.s):
        D = displacement_op(d.s, cutoff).matrix
        out = FockOperator(d.n, cutoff, D @ out.matrix @ D.conj().T)
    return StinespringResult(out, sigma, float(1 - out.trace().real), delta)
