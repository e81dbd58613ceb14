import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosonic_dilation.errors import (
    DimensionMismatch,
    NotHermitian,
    NotSkewSymmetric,
    NotSymmetric,
    PairNotIsometric,
    SingularJ,
)
from bosonic_dilation.phase_space import (
    euler_decomposition,
    factor_skew_invertible,
    heisenberg_check,
    is_symplectic,
    isometry_residual,
    j_of_x,
    min_eig_hermitian,
    moore_penrose,
    omega,
    passive_to_unitary,
    random_symplectic,
    skew_canonical,
    symplectic_complete,
    symplectic_residual,
    unitary_to_passive,
)
from oracles import omega_ref


class TestOmega:
    def test_single_mode(self):
        np.testing.assert_array_equal(omega(1), [[0, 1], [-1, 0]])

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_structure(self, n):
        Om = omega(n)
        np.testing.assert_array_equal(Om, omega_ref(n))
        np.testing.assert_array_equal(Om.T, -Om)
        np.testing.assert_allclose(Om @ Om, -np.eye(2 * n))
        assert np.linalg.det(Om) == pytest.approx(1.0)


class TestJOfX:
    def test_identity_gives_zero(self):
        np.testing.assert_array_equal(j_of_x(np.eye(4)), np.zeros((4, 4)))

    def test_zero_gives_omega(self):
        np.testing.assert_array_equal(j_of_x(np.zeros((2, 2))), omega(1))

    def test_amplifier_gives_minus_omega(self):
        np.testing.assert_allclose(j_of_x(np.sqrt(2) * np.eye(2)), -omega(1), atol=1e-15)

    def test_bad_shape(self):
        with pytest.raises(DimensionMismatch):
            j_of_x(np.eye(3))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_exactly_skew(self, n, seed):
        X = np.random.default_rng(seed).uniform(-2, 2, (2 * n, 2 * n))
        J = j_of_x(X)
        assert np.max(np.abs(J + J.T)) <= 1e-12


class TestSkewCanonical:
    def test_omega(self):
        c = skew_canonical(omega(1))
        np.testing.assert_allclose(c.d, [1.0])
        np.testing.assert_allclose(c.reconstruct(), omega(1), atol=1e-14)

    def test_zero(self):
        c = skew_canonical(np.zeros((4, 4)))
        np.testing.assert_array_equal(c.d, [0.0, 0.0])

    def test_rejects_non_skew(self):
        with pytest.raises(NotSkewSymmetric):
            skew_canonical(np.eye(2))

    def test_random_against_eigenvalues(self, rng):
        for _ in range(100):
            n = rng.integers(1, 4)
            B = rng.normal(size=(2 * n, 2 * n))
            A = B - B.T
            c = skew_canonical(A)
            ev = np.sort(np.abs(np.linalg.eigvals(A).imag))[::-1][::2]
            np.testing.assert_allclose(c.d, ev, atol=1e-10)
            assert np.all(np.diff(c.d) <= 0)
            np.testing.assert_allclose(c.O.T @ c.O, np.eye(2 * n), atol=1e-12)
            rel = np.max(np.abs(c.reconstruct() - A)) / np.max(np.abs(A))
            assert rel <= 1e-9

    def test_kernel_blocks_sorted_last(self):
        A = np.zeros((4, 4))
        A[:2, :2] = 3 * omega(1)
        c = skew_canonical(A)
        np.testing.assert_allclose(c.d, [3.0, 0.0], atol=1e-14)


class TestFactorSkewInvertible:
    def test_omega(self):
        Y = factor_skew_invertible(omega(1))
        np.testing.assert_allclose(Y.T @ omega(1) @ Y, omega(1), atol=1e-14)

    def test_minus_omega(self):
        Y = factor_skew_invertible(-omega(1))
        np.testing.assert_allclose(Y.T @ omega(1) @ Y, -omega(1), atol=1e-14)
        D = np.diag([1.0, -1.0])
        np.testing.assert_allclose(D.T @ omega(1) @ D, -omega(1))  # the reference solution is also valid

    def test_amplifier(self):
        J = j_of_x(np.sqrt(2) * np.eye(2))
        Y = factor_skew_invertible(J)
        assert np.max(np.abs(Y.T @ omega(1) @ Y - J)) <= 1e-10

    def test_singular(self):
        with pytest.raises(SingularJ):
            factor_skew_invertible(np.zeros((2, 2)))

    def test_random(self, rng):
        for _ in range(50):
            n = rng.integers(1, 4)
            B = rng.normal(size=(2 * n, 2 * n))
            J = B - B.T
            Y = factor_skew_invertible(J)
            assert np.max(np.abs(Y.T @ omega(n) @ Y - J)) <= 1e-9


class TestMoorePenrose:
    def test_identity(self):
        np.testing.assert_allclose(moore_penrose(np.eye(3)), np.eye(3))

    def test_embedding_block(self):
        Y = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(moore_penrose(Y), [[1, 0, 0, 0], [0, 0, 1, 0]], atol=1e-15)

    def test_full_column_rank(self, rng):
        Y = rng.normal(size=(6, 4))
        assert np.max(np.abs(moore_penrose(Y) @ Y - np.eye(4))) <= 1e-10

    def test_penrose_identities(self, rng):
        for p, q in [(4, 4), (6, 3), (3, 5)]:
            for r in range(1, min(p, q) + 1):
                A = rng.normal(size=(p, r)) @ rng.normal(size=(r, q))
                G = moore_penrose(A)
                assert np.max(np.abs(A @ G @ A - A)) <= 1e-9
                assert np.max(np.abs(G @ A @ G - G)) <= 1e-9
                assert np.max(np.abs((A @ G).T - A @ G)) <= 1e-9
                assert np.max(np.abs((G @ A).T - G @ A)) <= 1e-9


class TestSymplecticComplete:
    def test_trivial(self, rng):
        S0 = random_symplectic(1, rng)
        c = symplectic_complete(S0, np.zeros((0, 2)))
        np.testing.assert_array_equal(c.S, S0)

    def test_beam_splitter(self):
        th = 0.4
        X, Y = np.cos(th) * np.eye(2), np.sin(th) * np.eye(2)
        c = symplectic_complete(X, Y)
        assert symplectic_residual(c.S) <= 1e-12
        np.testing.assert_array_equal(c.S[:, :2], np.vstack([X, Y]))
        # the beam splitter [[c, -s], [s, c]] is one valid completion
        B = np.block([[X, -Y], [Y, X]])
        assert symplectic_residual(B) <= 1e-14

    def test_not_isometric(self):
        with pytest.raises(PairNotIsometric):
            symplectic_complete(np.eye(2), 0.5 * np.eye(2))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 2), st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_random_isometric_pairs(self, n, m, seed):
        rng = np.random.default_rng(seed)
        S = random_symplectic(n + m, rng)
        X, Y = S[: 2 * n, : 2 * n], S[2 * n:, : 2 * n]
        assert isometry_residual(X, Y) <= 1e-9
        c = symplectic_complete(X, Y)
        assert symplectic_residual(c.S) <= 1e-9
        assert np.array_equal(c.S[:, : 2 * n], np.vstack([X, Y]))

    def test_deterministic(self, rng):
        S = random_symplectic(2, rng)
        X, Y = S[:2, :2], S[2:, :2]
        np.testing.assert_array_equal(symplectic_complete(X, Y).S, symplectic_complete(X, Y).S)


class TestHermitianChecks:
    def test_min_eig_examples(self):
        assert min_eig_hermitian(np.eye(3)) == pytest.approx(1.0)
        assert min_eig_hermitian(np.eye(2) + 1j * omega(1)) == pytest.approx(0.0, abs=1e-14)
        assert min_eig_hermitian(np.diag([2.0, -3.0])) == pytest.approx(-3.0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            min_eig_hermitian(np.array([[0, 1], [0, 0]]))

    def test_heisenberg(self):
        assert heisenberg_check(np.eye(2)).passed
        chk = heisenberg_check(0.5 * np.eye(2))
        assert not chk.passed and chk.min_eig == pytest.approx(-0.5)
        for r in (0.1, 0.7, 1.5):
            chk = heisenberg_check(np.diag([np.exp(2 * r), np.exp(-2 * r)]))
            assert chk.passed and abs(chk.min_eig) <= 1e-10

    def test_heisenberg_needs_symmetric(self):
        with pytest.raises(NotSymmetric):
            heisenberg_check(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestSymplecticHelpers:
    def test_random_symplectic(self, rng):
        for n in (1, 2, 3):
            assert is_symplectic(random_symplectic(n, rng))

    def test_euler(self, rng):
        for n in (1, 2):
            S = random_symplectic(n, rng, scale=0.8)
            O1, z, O2 = euler_decomposition(S)
            Z = np.diag(np.ravel(np.column_stack([z, 1 / z])))
            np.testing.assert_allclose(O1 @ Z @ O2, S, atol=1e-9)
            assert np.all(z >= 1)
            for O in (O1, O2):
                assert is_symplectic(O)
                np.testing.assert_allclose(O.T @ O, np.eye(2 * n), atol=1e-10)

    def test_euler_passive_input(self):
        th = 0.3
        R = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
        O1, z, O2 = euler_decomposition(R)
        np.testing.assert_allclose(z, [1.0])
        np.testing.assert_allclose(O1 @ O2, R, atol=1e-12)

    def test_passive_roundtrip(self, rng):
        u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        O = unitary_to_passive(u)
        assert is_symplectic(O)
        np.testing.assert_allclose(passive_to_unitary(O), u, atol=1e-12)
