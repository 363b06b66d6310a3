# --- services/__init__.py ---

from .containment_trials import TrialResult, random_pair, run_trials
from .verification import (
    ALL_SUITES,
    CheckResult,
    SuiteError,
    VerificationContext,
    VerificationSuite,
    run_verification,
)

__all__ = [
    "TrialResult",
    "random_pair",
    "run_trials",
    "ALL_SUITES",
    "CheckResult",
    "SuiteError",
    "VerificationContext",
    "VerificationSuite",
    "run_verification",
]
