# --- storage/__init__.py ---

from .repository import (
    APFunctionRepository,
    EnvelopeRepository,
    GridFunctionRepository,
    MatrixRepository,
    ReportRepository,
    RepositoryError,
    dumps_report,
    to_serializable,
)

__all__ = [
    "GridFunctionRepository",
    "MatrixRepository",
    "EnvelopeRepository",
    "APFunctionRepository",
    "ReportRepository",
    "RepositoryError",
    "dumps_report",
    "to_serializable",
]
