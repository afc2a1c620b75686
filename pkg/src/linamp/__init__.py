"""Phase-preserving linear amplifiers as parametric-amplifier channels.

Simulates any phase-preserving linear amplifier as a two-mode-squeeze channel
with an arbitrary ancilla state on a truncated Fock space, computes its
phase-space added-noise functions and noise moments in all operator
orderings, and decides from measured moments whether an amplifier is
physically realizable.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ExtentMismatchError,
    InsufficientMomentsError,
    LinampError,
    TruncationOverflowError,
)
from .fock import (
    AncillaState,
    FockOperator,
    KrausSet,
    SqueezeParams,
    apply_kraus,
    coherent_state,
    displacement_matrix,
    laguerre,
    mode_ops,
    number_state,
    squeeze_kraus_general,
    squeeze_kraus_vacuum,
    thermal_state,
    truncation_certificate,
    two_mode_squeeze_apply,
    vacuum_state,
)
from .phasespace import (
    ANTINORMAL,
    NORMAL,
    SYMMETRIC,
    PhaseFunction,
    PhaseGrid,
    SOrder,
    added_noise_char,
    added_noise_fn,
    char_fn,
    char_function,
    char_to_quasi,
    quasi_to_char,
    quasidist,
    state_from_char,
)
from .ampmap import (
    AmplifierSpec,
    MasterEqParams,
    arthurs_kelly_weights,
    char_io,
    map_A_on_displacement,
    map_B_on_displacement,
    master_evolve,
    measurement_model_apply,
    mixture_moments,
    output_variance_from_char,
    parametric_apply,
    quasidist_io,
    trace_distance,
)
from .moments import (
    MomentKind,
    MomentSequence,
    StirlingTable,
    added_noise_numbers,
    ak_from_ml,
    coherent_noise_moments,
    factorial_moments,
    mean_field,
    ml_from_ak,
    moment_io,
    number_moments,
    stirling_first,
    stirling_second,
    sym_product_operator,
    symmetric_noise_moment,
    thermal_noise_moments,
)
from .gate import (
    ConstraintCheck,
    GateVerdict,
    HankelPair,
    closed_form_limits,
    hankel_pair,
    lambda_family,
    sigma_eigen_check,
    stieltjes_classify,
)
