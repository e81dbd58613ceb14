import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosonic_dilation.char_fn import (
    Cosine,
    DisplacementMixture,
    GaussianKernel,
    One,
    Product,
    PullBack,
    Sampler,
    bochner_check,
    bound_check,
    check_a_positive,
    coherent_char,
    eval_char,
    gaussian_a_positive_exact,
    gaussian_state_char,
    gram_matrix,
    product,
    thermal_char,
    to_gaussian_mixture,
    vacuum_char,
)
from bosonic_dilation.errors import DimensionMismatch, InvalidWeights, NotSymmetric
from bosonic_dilation.phase_space import omega
from oracles import gaussian_state_char_ref, vacuum_char_ref


def _random_tree(rng, dim):
    """A random CharFn built from every node kind."""
    G = rng.normal(size=(dim, dim))
    parts = [
        GaussianKernel(G @ G.T, rng.normal(size=dim)),
        Cosine(rng.normal(size=dim)),
        DisplacementMixture(np.array([0.2, 0.3, 0.5]), rng.normal(size=(3, dim))),
        One(dim),
    ]
    return product([PullBack(parts[0], rng.normal(size=(dim, dim))), *parts[1:]])


class TestEvaluation:
    def test_one(self, rng):
        assert eval_char(One(4), rng.normal(size=4)) == 1

    def test_vacuum(self, rng):
        xi = rng.normal(size=(20, 2))
        np.testing.assert_allclose(GaussianKernel(np.eye(2))(xi), vacuum_char_ref(xi), rtol=1e-14)

    def test_cosine_at_two_pi(self):
        s = np.array([1.0, 0.0])
        xi = np.array([0.0, -2 * np.pi])  # s^T Omega xi = s_1 xi_2 - s_2 xi_1 ... evaluated below
        val = s @ omega(1) @ xi
        xi = xi * (2 * np.pi / val)
        assert eval_char(Cosine(s), xi) == pytest.approx(1.0, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_char(GaussianKernel(np.eye(2)), np.zeros(4))

    def test_kernel_needs_symmetric(self):
        with pytest.raises(NotSymmetric):
            GaussianKernel(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_state_form(self, rng):
        V = np.array([[2.0, 0.3], [0.3, 1.0]])
        s = np.array([0.4, -0.7])
        xi = rng.normal(size=(30, 2))
        np.testing.assert_allclose(gaussian_state_char(V, s)(xi), gaussian_state_char_ref(V, s, xi), rtol=1e-13)

    def test_coherent_and_thermal(self, rng):
        xi = rng.normal(size=(10, 2))
        np.testing.assert_allclose(coherent_char([0.3, 0.1])(xi),
                                   gaussian_state_char_ref(np.eye(2), [0.3, 0.1], xi), rtol=1e-13)
        np.testing.assert_allclose(thermal_char(1.0)(xi), np.exp(-0.75 * np.sum(xi * xi, axis=1)), rtol=1e-13)
        np.testing.assert_allclose(vacuum_char(1)(xi), vacuum_char_ref(xi))

    def test_mixture_equals_cosine(self, rng):
        s = rng.normal(size=2)
        xi = rng.normal(size=(100, 2))
        mix = DisplacementMixture(np.array([0.5, 0.5]), np.array([s, -s]))
        np.testing.assert_allclose(mix(xi), Cosine(s)(xi), atol=1e-12)

    def test_invalid_weights(self):
        with pytest.raises(InvalidWeights):
            DisplacementMixture(np.array([0.5, 0.6]), np.zeros((2, 2)))
        with pytest.raises(InvalidWeights):
            DisplacementMixture(np.array([1.2, -0.2]), np.zeros((2, 2)))

    def test_pullback_composition(self, rng):
        f = _random_tree(rng, 4)
        L1, L2 = rng.normal(size=(2, 4, 4))
        xi = rng.normal(size=(50, 4))
        np.testing.assert_allclose(PullBack(PullBack(f, L1), L2)(xi), PullBack(f, L1 @ L2)(xi), atol=1e-12)

    def test_product_flattens(self):
        f = product([product([One(2), Cosine([1.0, 0.0])]), GaussianKernel(np.eye(2))])
        assert isinstance(f, Product) and len(f.factors) == 3

    def test_arrays_read_only(self):
        g = GaussianKernel(np.eye(2))
        with pytest.raises(ValueError):
            g.M[0, 0] = 5.0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_normalization_and_hermitian_symmetry(n, seed):
    rng = np.random.default_rng(seed)
    f = _random_tree(rng, 2 * n)
    assert abs(eval_char(f, np.zeros(2 * n)) - 1) <= 1e-12
    xi = rng.normal(size=(20, 2 * n))
    np.testing.assert_allclose(f(-xi), np.conj(f(xi)), atol=1e-12)


class TestGram:
    def test_one_zero_form(self, rng):
        G = gram_matrix(One(2), np.zeros((2, 2)), rng.normal(size=(5, 2)))
        np.testing.assert_allclose(G, np.ones((5, 5)))

    def test_vacuum_omega_positive(self, rng):
        G = gram_matrix(GaussianKernel(np.eye(2)), omega(1), rng.normal(size=(12, 2)) * 2)
        assert np.linalg.eigvalsh(G).min() >= -1e-10

    def test_half_identity_has_witness(self):
        f = GaussianKernel(0.5 * np.eye(2))
        found = min(
            np.linalg.eigvalsh(gram_matrix(f, omega(1), np.array([[0, 0], [t, 0], [0, t]]))).min()
            for t in np.linspace(0.05, 4, 80)
        )
        assert found < -1e-6


class TestCheckAPositive:
    def test_one(self):
        assert check_a_positive(One(2), np.zeros((2, 2))).passed

    def test_cosine_classical(self):
        cert = check_a_positive(Cosine([1.0, 0.0]), np.zeros((2, 2)))
        assert cert.passed and cert.min_eig >= -1e-10
        assert len(cert.set_min_eigs) == 50

    def test_cosine_not_a_state(self):
        cert = check_a_positive(Cosine([1.0, 0.0]), omega(1))
        assert not cert.passed and cert.min_eig < -1e-6
        assert cert.witness is not None
        np.testing.assert_array_equal(cert.witness[0], [0.0, 0.0])  # origin included
        # the witness replays
        lam = np.linalg.eigvalsh(gram_matrix(Cosine([1.0, 0.0]), omega(1), cert.witness)).min()
        assert lam == pytest.approx(cert.min_eig, abs=1e-12)

    def test_reproducible_and_worker_independent(self):
        f = GaussianKernel(0.7 * np.eye(4))
        a = check_a_positive(f, omega(2), Sampler(seed=3))
        b = check_a_positive(f, omega(2), Sampler(seed=3), workers=3)
        np.testing.assert_array_equal(a.set_min_eigs, b.set_min_eigs)
        assert a.to_dict() == b.to_dict()

    def test_sampler_points_in_ball(self):
        s = Sampler(seed=1, n_points=10, n_sets=10)
        for i, pts in enumerate(s.point_sets(4)):
            assert pts.shape == (10, 4)
            assert np.all(np.linalg.norm(pts, axis=1) <= s.set_radius(i) + 1e-12)


class TestExactGaussian:
    def test_examples(self):
        r = gaussian_a_positive_exact(np.eye(2), omega(1))
        assert r.passed and r.min_eig == pytest.approx(0.0, abs=1e-14)
        assert gaussian_a_positive_exact(np.zeros((2, 2)), np.zeros((2, 2))).passed
        r = gaussian_a_positive_exact(0.5 * np.eye(2), omega(1))
        assert not r.passed and r.min_eig == pytest.approx(-0.5)

    def test_agrees_with_sampling(self):
        from bosonic_dilation.suites import gaussian_case

        counted = 0
        for i in range(200):
            M, A = gaussian_case(7, i)
            exact = gaussian_a_positive_exact(M, A, tol=0.0)
            if abs(exact.min_eig) < 1e-6:
                continue
            counted += 1
            assert check_a_positive(GaussianKernel(M), A, Sampler(seed=i)).passed == exact.passed, i
        assert counted >= 190


class TestBochner:
    def test_vacuum(self):
        assert bochner_check(GaussianKernel(np.eye(2))).passed

    def test_cosine_alone_fails_positivity(self):
        rep = bochner_check(Cosine([1.0, 0.0]))
        assert rep.normalized and rep.continuous and not rep.certificate.passed

    def test_squeezed_vacuum_kernel(self):
        e = 0.1
        assert bochner_check(GaussianKernel(np.diag([e, 1 / e, e, 1 / e]))).passed

    def test_constant_one_is_not_a_state(self):
        # f = 1 would be a state with |chi| = 1 everywhere, which the uncertainty principle forbids
        assert not bochner_check(One(2)).certificate.passed

    def test_continuity_probe(self):
        rep = bochner_check(PullBack(GaussianKernel(np.eye(2)), 1e4 * np.eye(2)))
        assert not rep.continuous


class TestBound:
    @pytest.mark.parametrize("f", [One(2), GaussianKernel(np.eye(2)), Cosine([1.0, 2.0]),
                                   DisplacementMixture(np.array([0.5, 0.5]), np.array([[1.0, 0.0], [-1.0, 0.0]]))])
    def test_bounded(self, f):
        assert bound_check(f).passed


class TestGaussianMixtureForm:
    def test_matches_tree(self, rng):
        for dim in (2, 4):
            f = _random_tree(rng, dim)
            form = to_gaussian_mixture(f)
            xi = rng.normal(size=(40, dim))
            np.testing.assert_allclose(form.evaluate(xi), f(xi), atol=1e-12)
