# --- __init__.py ---

# Import the main public API facade
from .api import ExitCode, SpecEnvAPI
from .config import ConfigError, SpecEnvConfig

# Import custom exceptions for client error handling
from .core.fourier_core import GridConfigurationError
from .core.window_functions import SymbolError
from .core.l1_bounds import L1BoundError, PrecisionError
from .core.finite_module import ProximityError, SingularityError, SpectralDomainError
from .core.involution_operators import KernelError
from .core.similarity_envelope import EigensolverError, EnvelopeError, SimilarityError
from .storage.repository import RepositoryError
from .services.verification import SuiteError

__all__ = [
    "SpecEnvAPI",
    "ExitCode",
    "SpecEnvConfig",
    # validation errors (exit code 1)
    "ConfigError",
    "GridConfigurationError",
    "SymbolError",
    "L1BoundError",
    "PrecisionError",
    "SpectralDomainError",
    "SingularityError",
    "ProximityError",
    "KernelError",
    "EnvelopeError",
    "RepositoryError",
    "SuiteError",
    # numerical failures (exit code 2)
    "SimilarityError",
    "EigensolverError",
]
