"""Exception types raised by the library."""


class BosonicError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(BosonicError, ValueError):
    """Array shapes do not agree with the mode counts involved."""


class NotSkewSymmetric(BosonicError, ValueError):
    pass


class NotHermitian(BosonicError, ValueError):
    pass


class NotSymmetric(BosonicError, ValueError):
    pass


class SingularJ(BosonicError):
    """J(X) has a vanishing canonical value, so no invertible factor exists.

    The exact dilation construction is inapplicable; the approximate
    constructions (``approx_var_unitary``, ``approx_fixed_unitary``) are not.
    """


class PairNotIsometric(BosonicError):
    """The pair (X, Y) violates X^T Omega X + Y^T Omega Y = Omega."""


class NotCP(BosonicError):
    """The noise function is not J(X)-positive, so the map is not a channel.

    Attributes:
        certificate: the failing :class:`~bosonic_dilation.char_fn.PositivityCertificate`,
            if the verdict came from sampling.
        min_eig: the smallest eigenvalue found (sampled or exact).
    """

    def __init__(self, message, certificate=None, min_eig=None):
        super().__init__(message)
        self.certificate = certificate
        self.min_eig = min_eig


class NotNormalized(BosonicError):
    pass


class EpsilonSingular(BosonicError):
    pass


class InvalidWeights(BosonicError, ValueError):
    pass


class CutoffTooSmall(BosonicError):
    pass


class GridTooCoarse(BosonicError):
    pass


class UnphysicalCovariance(BosonicError):
    pass


class ModeCountGuard(BosonicError):
    pass


class NonSymplectic(BosonicError, ValueError):
    pass


class SpecError(BosonicError, ValueError):
    """A channel, dilation or state specification could not be parsed."""
