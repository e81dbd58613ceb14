import numpy as np
import pytest

from bosonic_dilation.channels import (
    LinearBosonicChannel,
    additive_noise_channel,
    amplifier,
    apply_to_char,
    attenuator,
    binary_displacement,
    bk_noise_channel,
    compose,
    displacement_mixture_channel,
    gaussian_channel,
    identity_channel,
    make_channel,
)
from bosonic_dilation.char_fn import (
    Cosine,
    GaussianKernel,
    One,
    Sampler,
    gaussian_a_positive_exact,
    gaussian_state_char,
    vacuum_char,
)
from bosonic_dilation.errors import DimensionMismatch, InvalidWeights, NotCP, NotNormalized
from bosonic_dilation.phase_space import j_of_x, omega
from oracles import vacuum_char_ref


@pytest.fixture
def xi(rng):
    return rng.normal(size=(200, 2)) * 1.5


class TestMakeChannel:
    def test_identity(self):
        ch = make_channel(np.eye(2), One(2))
        assert ch.certificate.passed
        np.testing.assert_array_equal(ch.certificate.A, np.zeros((2, 2)))

    def test_binary_displacement_valid(self):
        assert make_channel(np.eye(2), Cosine([1.0, 0.0])).certificate.passed

    def test_amplifier_with_too_little_noise(self):
        with pytest.raises(NotCP) as info:
            make_channel(np.sqrt(2) * np.eye(2), GaussianKernel(0.5 * np.eye(2)))
        assert info.value.certificate.witness is not None
        assert gaussian_a_positive_exact(0.5 * np.eye(2), -omega(1)).min_eig == pytest.approx(-0.5)

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            make_channel(np.eye(2), _Scaled())

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            make_channel(np.eye(4), One(2))

    def test_certificate_refers_to_j(self):
        ch = amplifier(1.7)
        np.testing.assert_allclose(ch.certificate.A, j_of_x(ch.X))


class _Scaled(One):
    """A deliberately unnormalized factor: 0.5 everywhere."""

    def __init__(self):
        super().__init__(2)

    def evaluate(self, xi):
        return 0.5 * super().evaluate(xi)


class TestApply:
    def test_identity(self, xi):
        chi = gaussian_state_char(np.diag([2.0, 0.5]), [0.3, 0.2])
        np.testing.assert_allclose(apply_to_char(identity_channel(), chi)(xi), chi(xi))

    def test_binary_displacement_on_vacuum(self, xi):
        s = np.array([1.0, 0.0])
        out = apply_to_char(binary_displacement(s), vacuum_char(1))
        want = vacuum_char_ref(xi) * np.cos(xi @ omega(1).T @ s)
        np.testing.assert_allclose(out(xi), want, atol=1e-14)

    def test_gaussian_on_gaussian(self, rng, xi):
        X = rng.normal(size=(2, 2))
        N = np.abs(np.linalg.det(np.eye(2) - X.T @ X)) * np.eye(2) + np.eye(2) * 2
        ch = gaussian_channel(X, N)
        V = np.array([[1.5, 0.2], [0.2, 1.0]])
        out = apply_to_char(ch, gaussian_state_char(V))(xi)
        Om = omega(1)
        K = X.T @ Om.T @ V @ Om @ X + N
        np.testing.assert_allclose(out, np.exp(-0.25 * np.einsum("ki,ij,kj->k", xi, K, xi)), rtol=1e-12)

    def test_composition_law(self, rng, xi):
        c1 = attenuator(0.6)
        c2 = binary_displacement([0.4, -0.3])
        chi = gaussian_state_char(np.eye(2), [0.2, 0.1])
        two_step = apply_to_char(c2, apply_to_char(c1, chi))
        np.testing.assert_allclose(two_step(xi), apply_to_char(compose(c1, c2), chi)(xi), atol=1e-12)
        np.testing.assert_allclose(compose(c1, c2).X, c1.X @ c2.X)


class TestConstructors:
    def test_binary_displacement_f(self, xi):
        ch = binary_displacement([1.0, 0.0])
        np.testing.assert_array_equal(ch.X, np.eye(2))
        # s^T Omega xi = xi_2 for s = (1, 0)
        np.testing.assert_allclose(ch.f(xi), np.cos(xi[:, 1]), atol=1e-15)

    def test_binary_needs_nonzero(self):
        with pytest.raises(ValueError):
            binary_displacement([0.0, 0.0])

    def test_binary_equals_mixture(self, xi):
        s = np.array([0.7, -0.2])
        mix = displacement_mixture_channel([0.5, 0.5], [s, -s])
        np.testing.assert_allclose(mix.f(xi), binary_displacement(s).f(xi), atol=1e-12)

    def test_single_displacement(self, xi):
        ch = displacement_mixture_channel([1.0], [[0.3, 0.4]])
        np.testing.assert_allclose(np.abs(ch.f(xi)), 1.0)

    def test_three_point_mixture(self, rng):
        ch = displacement_mixture_channel([0.2, 0.3, 0.5], rng.normal(size=(3, 2)))
        assert ch.certificate.passed

    def test_mixture_invalid_weights(self):
        with pytest.raises(InvalidWeights):
            displacement_mixture_channel([0.2, 0.2], [[0, 1], [1, 0]])

    def test_attenuator_angle_form(self):
        th = 0.7
        ch = gaussian_channel(np.cos(th) * np.eye(2), np.sin(th) ** 2 * np.eye(2))
        assert ch.certificate.passed

    def test_amplifier_and_identity(self):
        assert amplifier(2.0).certificate.passed
        np.testing.assert_allclose(amplifier(2.0).f.M, np.eye(2))
        assert gaussian_channel(np.eye(2), np.zeros((2, 2))).certificate.passed

    def test_gaussian_not_cp(self):
        with pytest.raises(NotCP) as info:
            gaussian_channel(np.sqrt(2) * np.eye(2), 0.5 * np.eye(2))
        assert info.value.min_eig == pytest.approx(-0.5)

    def test_bk(self, xi):
        ch = bk_noise_channel(0.0)
        np.testing.assert_allclose(ch.f(xi), 1.0)
        ch = bk_noise_channel(0.3)
        assert ch.certificate.passed
        out = apply_to_char(ch, vacuum_char(1))(xi)
        np.testing.assert_allclose(out, np.exp(-0.25 * (1 + 2 * 0.3) * np.sum(xi * xi, axis=1)), rtol=1e-13)
        with pytest.raises(ValueError):
            bk_noise_channel(-0.1)

    def test_additive_noise(self):
        assert additive_noise_channel(np.diag([0.3, 0.1])).certificate.passed

    def test_bad_gain_and_eta(self):
        with pytest.raises(ValueError):
            amplifier(0.5)
        with pytest.raises(ValueError):
            attenuator(1.5)

    def test_channel_dimension_checks(self):
        with pytest.raises(DimensionMismatch):
            LinearBosonicChannel(1, np.eye(4), One(4))
        with pytest.raises(DimensionMismatch):
            apply_to_char(identity_channel(2), vacuum_char(1))


def test_sampled_never_contradicts_exact(rng):
    for i in range(40):
        X = rng.normal(size=(2, 2))
        G = rng.normal(size=(2, 2))
        N = G @ G.T * rng.uniform(0.1, 2.0)
        exact = gaussian_a_positive_exact(N, j_of_x(X), tol=0.0)
        if abs(exact.min_eig) < 1e-6:
            continue
        try:
            make_channel(X, GaussianKernel(N), Sampler(seed=i))
            sampled = True
        except NotCP:
            sampled = False
        assert sampled == exact.passed
