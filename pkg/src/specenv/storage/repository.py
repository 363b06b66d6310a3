# repository.py
#
# CSV and JSON persistence for grid functions, matrices, envelopes,
# eigenvalue tables, AP1 symbols and reports.

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core.finite_module import APFunction
from ..core.fourier_core import FreqGridFunction, Grid, GridConfigurationError, GridFunction, make_grid
from ..core.similarity_envelope import sorted_eigenvalues

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
# 17 significant digits: CSV tables load back bit-for-bit.
FLOAT_FORMAT = "%.17g"
NODE_TOLERANCE = 1e-9


class RepositoryError(ValueError):
    """Errors related to reading or writing CSV and JSON artifacts."""
    pass


def _read_csv(path: PathLike, required_cols: Iterable[str], what: str) -> pd.DataFrame:
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise RepositoryError(f"{what} file not found at: {path}") from None
    except Exception as e:
        raise RepositoryError(f"Error reading {what} file {path}: {e}") from e
    missing_cols = [col for col in required_cols if col not in df.columns]
    if missing_cols:
        raise RepositoryError(f"Missing required columns in {what} file {path}: {', '.join(missing_cols)}")
    if df.empty:
        raise RepositoryError(f"{what} file {path} has no rows.")
    return df


def _write_csv(df: pd.DataFrame, path: PathLike, what: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except Exception as e:
        raise RepositoryError(f"Error writing {what} file {path}: {e}") from e
    logger.info(f"Wrote {what} ({len(df)} rows) to {path}")


def _complex_column(df: pd.DataFrame, path: PathLike) -> np.ndarray:
    try:
        values = df["re"].to_numpy(dtype=float) + 1j * df["im"].to_numpy(dtype=float)
    except (TypeError, ValueError) as e:
        raise RepositoryError(f"Non-numeric values in {path}: {e}") from e
    if not np.all(np.isfinite(values)):
        raise RepositoryError(f"Non-finite values in {path}.")
    return values


# --- Grid functions ---

class GridFunctionRepository:
    """Reads and writes time samples (`t,re,im`) and frequency samples (`xi,re,im`)."""

    @staticmethod
    def infer_grid(nodes: np.ndarray) -> Grid:
        """
        Recovers (R, N) from node positions.

        Raises:
            RepositoryError: If the nodes are not a uniform symmetric grid.
        """
        n = nodes.size
        if n < 4 or n % 2 != 0:
            raise RepositoryError(f"Grid files need an even number of at least 4 nodes, got {n}.")
        steps = np.diff(nodes)
        spacing = float(np.mean(steps))
        if spacing <= 0 or np.max(np.abs(steps - spacing)) > NODE_TOLERANCE * max(1.0, abs(spacing)):
            raise RepositoryError("Nodes are not uniformly spaced and increasing.")
        half_width = n * spacing / 2.0
        if abs(nodes[0] + half_width) > NODE_TOLERANCE * max(1.0, half_width) or abs(nodes[n // 2]) > NODE_TOLERANCE * max(1.0, half_width):
            raise RepositoryError(f"Nodes are not symmetric about 0 (first node {nodes[0]}, spacing {spacing}).")
        try:
            return make_grid(half_width, n)
        except GridConfigurationError as e:
            raise RepositoryError(str(e)) from e

    def load(self, path: PathLike) -> GridFunction:
        df = _read_csv(path, ["t", "re", "im"], "grid function")
        grid = self.infer_grid(df["t"].to_numpy(dtype=float))
        return GridFunction(grid, _complex_column(df, path))

    def save(self, path: PathLike, f: GridFunction) -> None:
        df = pd.DataFrame({"t": f.grid.nodes, "re": f.values.real, "im": f.values.imag})
        _write_csv(df, path, "grid function")

    def save_window(self, path: PathLike, symbol: FreqGridFunction, time_function: GridFunction) -> None:
        """One table with the symbol on the frequency nodes and its transform on the time nodes."""
        df = pd.DataFrame({
            "xi": symbol.grid.frequencies,
            "symbol": symbol.values.real,
            "t": time_function.grid.nodes,
            "re": time_function.values.real,
            "im": time_function.values.imag,
        })
        _write_csv(df, path, "window")


# --- Matrices ---

class MatrixRepository:
    """
    Long-format matrices `row,col,re,im`; a self-adjoint A may instead be a
    single column `a` of its eigenvalues.
    """

    def load(self, path: PathLike) -> np.ndarray:
        df = _read_csv(path, ["row", "col", "re", "im"], "matrix")
        try:
            rows = df["row"].to_numpy(dtype=int)
            cols = df["col"].to_numpy(dtype=int)
        except (TypeError, ValueError) as e:
            raise RepositoryError(f"Matrix indices in {path} must be integers: {e}") from e
        if rows.min() < 0 or cols.min() < 0:
            raise RepositoryError(f"Negative matrix indices in {path}.")
        size = int(max(rows.max(), cols.max())) + 1
        matrix = np.zeros((size, size), dtype=complex)
        np.add.at(matrix, (rows, cols), _complex_column(df, path))
        return matrix

    def load_self_adjoint(self, path: PathLike) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """
        Returns (eigenvalues, eigenvectors) of A. Eigenvectors are None when
        the file already lists eigenvalues.

        Raises:
            RepositoryError: If a full matrix is not Hermitian.
        """
        try:
            header = pd.read_csv(path, nrows=0).columns.tolist()
        except FileNotFoundError:
            raise RepositoryError(f"matrix file not found at: {path}") from None
        except Exception as e:
            raise RepositoryError(f"Error reading matrix file {path}: {e}") from e
        if header == ["a"]:
            df = _read_csv(path, ["a"], "eigenvalue")
            values = df["a"].to_numpy(dtype=float)
            if not np.all(np.isfinite(values)):
                raise RepositoryError(f"Non-finite eigenvalues in {path}.")
            return values, None
        matrix = self.load(path)
        if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(matrix).max())):
            raise RepositoryError(f"Matrix A in {path} is not Hermitian.")
        eigenvalues, eigenvectors = np.linalg.eigh(matrix)
        return eigenvalues, eigenvectors

    def save(self, path: PathLike, matrix: np.ndarray, nonzero_only: bool = True) -> None:
        matrix = np.asarray(matrix, dtype=complex)
        if nonzero_only:
            rows, cols = np.nonzero(matrix)
        else:
            rows, cols = np.indices(matrix.shape).reshape(2, -1)
        values = matrix[rows, cols]
        df = pd.DataFrame({"row": rows, "col": cols, "re": values.real, "im": values.imag})
        _write_csv(df, path, "matrix")


# --- Envelope and spectra ---

class EnvelopeRepository:
    def save_envelope(self, path: PathLike, r: np.ndarray, f: np.ndarray) -> None:
        _write_csv(pd.DataFrame({"r": r, "f": f}), path, "envelope")

    def save_eigenvalues(self, path: PathLike, eigenvalues: Iterable[complex]) -> None:
        ordered = sorted_eigenvalues(eigenvalues)
        df = pd.DataFrame({"re": [z.real for z in ordered], "im": [z.imag for z in ordered]})
        _write_csv(df, path, "eigenvalue")


# --- AP1 symbols ---

class APFunctionRepository:
    """AP1 symbols as rows `exponent,re,im` of sum_n c_n exp(i xi t_n)."""

    def load(self, path: PathLike) -> APFunction:
        df = _read_csv(path, ["exponent", "re", "im"], "AP1 symbol")
        exponents = df["exponent"].to_numpy(dtype=float)
        return APFunction(coefficients=tuple(_complex_column(df, path)), exponents=tuple(exponents))


# --- Reports ---

def round_significant(value: float) -> float:
    return float(f"{value:.15g}")


def to_serializable(obj: Any) -> Any:
    """Rounds floats to 15 significant digits and writes complex values as {"re", "im"}."""
    if isinstance(obj, dict):
        return {str(k): to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_serializable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_serializable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_serializable(float(obj.real)), "im": to_serializable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not np.isfinite(value):
            return str(value)
        return round_significant(value)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_report(report: Any) -> str:
    return json.dumps(to_serializable(report), sort_keys=True, indent=2, ensure_ascii=False)


class ReportRepository:
    def save(self, path: PathLike, report: Dict[str, Any]) -> None:
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                f.write(dumps_report(report))
                f.write("\n")
        except OSError as e:
            raise RepositoryError(f"Error writing report {path}: {e}") from e
        logger.info(f"Wrote report to {path}")

    def load(self, path: PathLike) -> Dict[str, Any]:
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError:
            raise RepositoryError(f"Report file not found at: {path}") from None
        except json.JSONDecodeError as e:
            raise RepositoryError(f"Malformed report {path}: {e}") from e
