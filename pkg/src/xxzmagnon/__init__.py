"""Single-magnon entanglement dynamics in periodic Heisenberg XXZ chains.

Computes the post-quench entanglement of every spin by two independent
routes (closed-form plane-wave amplitudes and frequency-domain pole
enumeration), plus the exact derivative/transient analytics and the
entanglement-edge velocity estimator.
"""

__version__ = "0.1.0"

from .chain import (
    AmplitudeVector,
    ChainParams,
    MomentumMode,
    amplitude,
    amplitude_vector,
    group_velocity,
    momenta,
)
from .errors import (
    CapabilityError,
    ChainError,
    IncompleteDataError,
    InsufficientDataError,
    InvariantViolationError,
    NotFoundError,
    NumericalError,
    ValidationError,
)
from .oracle import (
    TimeSeries,
    entanglement_from_amplitude,
    evolve_closed_form,
    evolve_dense,
    full_hilbert_check,
    leading_exponent_fit,
)
from .spectrum import (
    Pole,
    Spectrum,
    StringPole,
    classify,
    enumerate_poles,
    first_zero_crossing,
    reconstruct,
    string_poles,
    suppressed_band_weight,
)
from .analytics import (
    DerivativeRecord,
    EdgeEstimate,
    TaylorValue,
    alpha,
    bessel_j,
    derivative_exact,
    edge_fit,
    hyp2f1_terminating,
    moment_derivative,
    moments,
    taylor_series,
    transient,
)

__all__ = [
    "__version__",
    "AmplitudeVector", "ChainParams", "MomentumMode",
    "amplitude", "amplitude_vector", "group_velocity", "momenta",
    "CapabilityError", "ChainError", "IncompleteDataError", "InsufficientDataError",
    "InvariantViolationError", "NotFoundError", "NumericalError", "ValidationError",
    "TimeSeries", "entanglement_from_amplitude", "evolve_closed_form",
    "evolve_dense", "full_hilbert_check", "leading_exponent_fit",
    "Pole", "Spectrum", "StringPole", "classify", "enumerate_poles",
    "first_zero_crossing", "reconstruct", "string_poles", "suppressed_band_weight",
    "DerivativeRecord", "EdgeEstimate", "TaylorValue", "alpha", "bessel_j",
    "derivative_exact", "edge_fit", "hyp2f1_terminating", "moment_derivative",
    "moments", "taylor_series", "transient",
]
