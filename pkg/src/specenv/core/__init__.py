# --- core/__init__.py ---

from .fourier_core import (
    FreqGridFunction,
    Grid,
    GridConfigurationError,
    GridFunction,
    dft_forward,
    dft_inverse,
    gaussian,
    indicator,
    inner_product,
    make_grid,
    norm_inf,
    norm_l1,
    norm_l2,
    sample,
    sample_frequencies,
)
from .window_functions import (
    PiecewiseSymbol,
    SymbolError,
    SymbolNorms,
    WindowFamily,
    create_window,
    exact_norms,
    gamma_time,
    generalized_trapezoid,
    omega_symbol,
    phi_general_time,
    phi_time,
    psi_time,
    sine_integral,
    symbol_identity_exact,
    symbol_identity_residual,
    trapezoid_symbol,
    triangle_symbol,
)
from .l1_bounds import L1Bound, L1BoundCheck, L1BoundError, PrecisionError, l1_bound, l1_bound_check
from .finite_module import (
    APFunction,
    FiniteModuleRep,
    ProximityError,
    SingularityError,
    SpectralDomainError,
    SpectrumSet,
    ap1_apply,
    ap1_reciprocal_norm,
    beurling_spectrum,
    calculus_operator,
    check_spectral_mapping,
    mh_estimate,
    resolvent_norm_check,
)
from .involution_operators import (
    KernelError,
    KernelKind,
    KernelOperator,
    differentiation_operator,
    reflection_operator,
    resolvent_A,
    sandwich_kernel,
    smoothed_kernel,
    vr_smallness,
)
from .similarity_envelope import (
    EigensolverError,
    Envelope,
    EnvelopeError,
    SimilarityError,
    SimilarityReport,
    a_star,
    build_similarity,
    check_containment,
    envelope,
    operator_envelope,
    similarity_residual,
    tail_sequence,
)

__all__ = [
    # fourier_core
    "Grid", "GridFunction", "FreqGridFunction", "GridConfigurationError", "make_grid",
    "dft_forward", "dft_inverse", "norm_l2", "norm_l1", "norm_inf", "inner_product",
    "sample", "sample_frequencies", "indicator", "gaussian",
    # window_functions
    "PiecewiseSymbol", "SymbolNorms", "SymbolError", "WindowFamily", "create_window",
    "trapezoid_symbol", "omega_symbol", "triangle_symbol", "generalized_trapezoid",
    "symbol_identity_exact", "symbol_identity_residual", "exact_norms",
    "phi_time", "phi_general_time", "gamma_time", "psi_time", "sine_integral",
    # l1_bounds
    "L1Bound", "L1BoundCheck", "L1BoundError", "PrecisionError", "l1_bound", "l1_bound_check",
    # finite_module
    "FiniteModuleRep", "APFunction", "SpectrumSet", "SpectralDomainError", "SingularityError",
    "ProximityError", "calculus_operator", "beurling_spectrum", "check_spectral_mapping",
    "resolvent_norm_check", "ap1_apply", "ap1_reciprocal_norm", "mh_estimate",
    # involution_operators
    "KernelOperator", "KernelKind", "KernelError", "reflection_operator", "smoothed_kernel",
    "sandwich_kernel", "differentiation_operator", "resolvent_A", "vr_smallness",
    # similarity_envelope
    "SimilarityReport", "Envelope", "EnvelopeError", "SimilarityError", "EigensolverError",
    "a_star", "build_similarity", "similarity_residual", "tail_sequence", "envelope",
    "check_containment", "operator_envelope",
]
