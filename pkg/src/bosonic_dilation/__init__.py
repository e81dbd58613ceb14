"""Gaussian dilations of linear bosonic channels.

Channels act on characteristic functions as ``chi(xi) -> chi(X xi) f(xi)``.
The package builds exact and approximate Gaussian dilations of such
channels, certifies complete positivity by sampled twisted Gram matrices,
and checks everything numerically in a truncated Fock space.
"""
__version__ = "0.1.0"

from .channels import (
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
from .char_fn import (
    CharFn,
    Cosine,
    DisplacementMixture,
    GaussianKernel,
    One,
    PositivityCertificate,
    Product,
    PullBack,
    Sampler,
    bochner_check,
    check_a_positive,
    coherent_char,
    gaussian_a_positive_exact,
    gaussian_state_char,
    product,
    thermal_char,
    vacuum_char,
)
from .dilation import (
    GaussianDilation,
    apply_dilation_char,
    approx_fixed_unitary,
    approx_var_unitary,
    check_dilation,
    exact_dilation,
    synthesize,
    truncate_ancilla,
)
from .errors import *  # noqa: F401,F403
from .fock import (
    FockOperator,
    QuadratureGrid,
    char_of_operator,
    coherent_fock,
    displacement_op,
    gaussian_state_fock,
    gaussian_unitary_fock,
    operator_from_char,
    stinespring_apply,
    thermal_fock,
    trace_distance,
    vacuum_fock,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .phase_space import (
    j_of_x,
    moore_penrose,
    omega,
    skew_canonical,
    symplectic_complete,
)
