# involution_operators.py
#
# Operators on grid functions built around the reflection (Vx)(t) = v(t) x(-t):
# the smoothed kernels T(h)V and V T(h)V, the spectral differentiation
# operator A = -i d/dt, its resolvent, and Hilbert-Schmidt bookkeeping.

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Optional

import numpy as np

from .fourier_core import Grid, GridFunction, norm_l2
from .window_functions import gamma_time, phi_time, psi_time

logger = logging.getLogger(__name__)

TimeFunction = Callable[[np.ndarray], np.ndarray]
GridSampler = Callable[[Grid], GridFunction]

REAL_AXIS_MARGIN = 1e-9


class KernelError(ValueError):
    """Raised for malformed operator inputs or incompatible operator arithmetic."""
    pass


class KernelKind(Enum):
    INTEGRAL = "integral"
    POINTWISE = "pointwise"
    MULTIPLIER = "multiplier"


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """
    A linear operator on the samples of a grid.

    INTEGRAL:   (Kx)_j = spacing * sum_k matrix[j, k] x_k, matrix holds kernel samples.
    POINTWISE:  (Kx)_j = weights[j] * x[source[j]].
    MULTIPLIER: Kx = F^{-1}(weights * F x), weights holds the symbol at the
                ascending frequency nodes.
    """
    grid: Grid
    kind: KernelKind
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    weights: Optional[np.ndarray] = field(default=None, repr=False)
    source: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        n = self.grid.points
        if self.kind is KernelKind.INTEGRAL:
            if self.matrix is None or self.matrix.shape != (n, n):
                raise KernelError(f"Integral operator needs an {n}x{n} kernel matrix.")
        elif self.weights is None or np.shape(self.weights) != (n,):
            raise KernelError(f"{self.kind.value} operator needs {n} weights.")
        if self.kind is KernelKind.POINTWISE and (self.source is None or np.shape(self.source) != (n,)):
            raise KernelError(f"Pointwise operator needs {n} source indices.")

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    def _apply_columns(self, X: np.ndarray) -> np.ndarray:
        if self.kind is KernelKind.INTEGRAL:
            return self.spacing * (self.matrix @ X)
        if self.kind is KernelKind.POINTWISE:
            return self.weights[:, None] * X[self.source, :]
        # the (-1)^j phases and spacing factors of the transform pair cancel
        symbol = np.fft.ifftshift(self.weights)
        return np.fft.ifft(symbol[:, None] * np.fft.fft(X, axis=0), axis=0)

    def apply(self, x: GridFunction) -> GridFunction:
        if x.grid != self.grid:
            raise KernelError(f"Grid mismatch: operator on {self.grid}, vector on {x.grid}.")
        return GridFunction(self.grid, self._apply_columns(x.values.reshape(-1, 1)).reshape(-1))

    @cached_property
    def operator_matrix(self) -> np.ndarray:
        """Dense matrix of the action on sample vectors."""
        if self.kind is KernelKind.INTEGRAL:
            return self.spacing * self.matrix
        return self._apply_columns(np.eye(self.grid.points, dtype=complex))

    def hs_norm(self) -> float:
        """Frobenius norm of the sample action; for integral kernels spacing * ||matrix||_F."""
        if self.kind is KernelKind.INTEGRAL:
            return float(self.spacing * np.linalg.norm(self.matrix))
        # circulant rows and permuted rows keep the Frobenius norm structural
        return float(np.linalg.norm(self.weights))

    def _require_compatible(self, other: "KernelOperator") -> None:
        if self.grid != other.grid:
            raise KernelError(f"Grid mismatch: {self.grid} vs {other.grid}.")

    def compose(self, other: "KernelOperator") -> "KernelOperator":
        """self o other."""
        self._require_compatible(other)
        if self.kind is KernelKind.MULTIPLIER and other.kind is KernelKind.MULTIPLIER:
            return KernelOperator(self.grid, KernelKind.MULTIPLIER, weights=self.weights * other.weights)
        if self.kind is KernelKind.POINTWISE and other.kind is KernelKind.POINTWISE:
            return KernelOperator(
                self.grid,
                KernelKind.POINTWISE,
                weights=self.weights * other.weights[self.source],
                source=other.source[self.source],
            )
        product = self._apply_columns(other.operator_matrix)
        return KernelOperator(self.grid, KernelKind.INTEGRAL, matrix=product / self.spacing)

    def __matmul__(self, other: "KernelOperator") -> "KernelOperator":
        return self.compose(other)

    def __add__(self, other: "KernelOperator") -> "KernelOperator":
        self._require_compatible(other)
        if self.kind is other.kind is KernelKind.MULTIPLIER:
            return KernelOperator(self.grid, KernelKind.MULTIPLIER, weights=self.weights + other.weights)
        if self.kind is other.kind is KernelKind.INTEGRAL:
            return KernelOperator(self.grid, KernelKind.INTEGRAL, matrix=self.matrix + other.matrix)
        total = self.operator_matrix + other.operator_matrix
        return KernelOperator(self.grid, KernelKind.INTEGRAL, matrix=total / self.spacing)

    def __sub__(self, other: "KernelOperator") -> "KernelOperator":
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> "KernelOperator":
        if self.kind is KernelKind.INTEGRAL:
            return KernelOperator(self.grid, self.kind, matrix=factor * self.matrix)
        return KernelOperator(self.grid, self.kind, weights=factor * self.weights, source=self.source)

    def adjoint(self) -> "KernelOperator":
        if self.kind is KernelKind.MULTIPLIER:
            return KernelOperator(self.grid, self.kind, weights=np.conj(self.weights))
        return KernelOperator(
            self.grid, KernelKind.INTEGRAL, matrix=self.operator_matrix.conj().T / self.spacing
        )

    @classmethod
    def from_operator_matrix(cls, grid: Grid, matrix: np.ndarray) -> "KernelOperator":
        """Integral operator whose sample action is the given dense matrix."""
        return cls(grid, KernelKind.INTEGRAL, matrix=np.asarray(matrix, dtype=complex) / grid.spacing)


# --- Elementary operators ---

def identity_operator(grid: Grid) -> KernelOperator:
    return KernelOperator(
        grid, KernelKind.POINTWISE, weights=np.ones(grid.points, dtype=complex), source=np.arange(grid.points)
    )


def reflection_operator(v: GridFunction) -> KernelOperator:
    """
    (Vx)(t_k) = v(t_k) x(t_{N-k}); the -R node has no mirror and maps to 0.
    """
    weights = np.array(v.values, dtype=complex)
    weights[0] = 0.0
    return KernelOperator(v.grid, KernelKind.POINTWISE, weights=weights, source=v.grid.reflection_indices())


def differentiation_operator(grid: Grid) -> KernelOperator:
    """A = -i d/dt as the Fourier multiplier xi; exact on band-limited samples."""
    return KernelOperator(grid, KernelKind.MULTIPLIER, weights=np.array(grid.frequencies, dtype=complex))


def resolvent_A(z: complex, grid: Grid) -> KernelOperator:
    """
    R(z; A) with symbol 1/(xi - z), so (A - z) R = I.

    Raises:
        KernelError: If z is within 1e-9 of the real axis.
    """
    z = complex(z)
    if abs(z.imag) <= REAL_AXIS_MARGIN:
        raise KernelError(f"Resolvent point z={z} is too close to the real axis.")
    return KernelOperator(grid, KernelKind.MULTIPLIER, weights=1.0 / (grid.frequencies - z))


# --- Smoothed kernels ---

def window_time_function(name: str, a: float) -> TimeFunction:
    """Time-domain window by name: phi, psi or gamma."""
    builders = {"phi": phi_time, "psi": psi_time, "gamma": gamma_time}
    if name not in builders:
        raise KernelError(f"Unknown kernel function '{name}'. Available: {sorted(builders)}.")
    builder = builders[name]
    return lambda t: builder(a, t)


def _half_offsets(grid: Grid) -> np.ndarray:
    """Points d * spacing / 2 for d = -N..N; index d + N."""
    return np.arange(-grid.points, grid.points + 1) * (grid.spacing / 2.0)


def _interpolate_half(v: GridFunction, points: np.ndarray) -> np.ndarray:
    nodes = v.grid.nodes
    real = np.interp(points, nodes, v.values.real, left=0.0, right=0.0)
    imag = np.interp(points, nodes, v.values.imag, left=0.0, right=0.0)
    return real + 1j * imag


def _assemble(grid: Grid, fill_rows: Callable[[np.ndarray], np.ndarray], workers: int) -> np.ndarray:
    n = grid.points
    matrix = np.empty((n, n), dtype=complex)
    workers = max(1, int(workers))
    block = max(1, math.ceil(n / (4 * workers)))
    starts = range(0, n, block)

    def fill(start: int) -> None:
        rows = np.arange(start, min(start + block, n))
        matrix[rows, :] = fill_rows(rows)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fill, starts))
    return matrix


def _check_v(v: GridFunction) -> None:
    if not np.all(np.isfinite(v.values)):
        raise KernelError("Perturbation samples v must be finite.")


def smoothed_kernel(h: TimeFunction, v: GridFunction, workers: int = 1) -> KernelOperator:
    """
    T(h)V as an integral operator with kernel k(s, u) = (1/2) h((s+u)/2) v((s-u)/2).

    h is evaluated exactly at the half-node midpoints; v is linearly
    interpolated between its samples and vanishes outside the grid.

    Args:
        h (Callable): Vectorized time-domain function.
        v (GridFunction): Samples of the perturbation.
        workers (int): Threads for the row-block assembly.
    """
    _check_v(v)
    grid = v.grid
    n = grid.points
    points = _half_offsets(grid)
    h_half = np.asarray(h(points), dtype=complex)
    v_half = _interpolate_half(v, points)
    columns = np.arange(n)

    def rows(j: np.ndarray) -> np.ndarray:
        # (t_j + t_k)/2 sits at half-offset j + k - N, (t_j - t_k)/2 at j - k
        total = j[:, None] + columns[None, :]
        diff = j[:, None] - columns[None, :]
        return 0.5 * h_half[total] * v_half[diff + n]

    matrix = _assemble(grid, rows, workers)
    logger.info(f"Assembled smoothed kernel on N={n} with {workers} worker(s).")
    return KernelOperator(grid, KernelKind.INTEGRAL, matrix=matrix)


def sandwich_kernel(h: TimeFunction, v: GridFunction, workers: int = 1) -> KernelOperator:
    """
    V T(h) V with kernel k(s, u) = (1/2) v(s) h((u-s)/2) v(-(s+u)/2).

    The -R row is zero, matching reflection_operator, so the result equals
    reflection_operator(v) @ smoothed_kernel(h, v).
    """
    _check_v(v)
    grid = v.grid
    n = grid.points
    points = _half_offsets(grid)
    h_half = np.asarray(h(points), dtype=complex)
    v_half = _interpolate_half(v, points)
    v_rows = np.array(v.values, dtype=complex)
    v_rows[0] = 0.0
    columns = np.arange(n)

    def rows(j: np.ndarray) -> np.ndarray:
        diff = columns[None, :] - j[:, None]
        total = j[:, None] + columns[None, :]
        return 0.5 * v_rows[j][:, None] * h_half[diff + n] * v_half[2 * n - total]

    matrix = _assemble(grid, rows, workers)
    logger.info(f"Assembled sandwich kernel on N={n} with {workers} worker(s).")
    return KernelOperator(grid, KernelKind.INTEGRAL, matrix=matrix)


# --- Hilbert-Schmidt values ---

def vr_smallness(v: GridFunction, lam: float) -> float:
    """
    ||V R(i lam; A)||_2 for real lam > 0.

    R is circulant with every row of squared norm (1/N) sum_j |xi_j - i lam|^-2,
    and V selects and weights rows, so the HS norm factorizes.
    """
    if lam <= 0:
        raise KernelError(f"lambda must be positive, got {lam}.")
    grid = v.grid
    weights = np.abs(v.values[1:]) ** 2
    row = np.mean(1.0 / np.abs(grid.frequencies - 1j * lam) ** 2)
    return float(np.sqrt(np.sum(weights) * row))


def hs_predictions(a: float, v_norm: float, lam: Optional[float] = None) -> Dict[str, float]:
    """
    Closed-form Hilbert-Schmidt values for ||v||_2 = v_norm.

    Keys: phi and psi (T(phi_a)V, T(psi_a)V), gamma (T(gamma_a)V),
    sandwich_psi_bound (upper bound for V T(psi_a) V) and, when lam is
    given, vr (V R(i lam; A)).
    """
    if a <= 0:
        raise KernelError(f"Window parameter must be positive, got {a}.")
    predictions = {
        "phi": math.sqrt(2.0 * a / (3.0 * math.pi)) * v_norm,
        "psi": math.sqrt((1.0 - math.log(2.0)) / (a * math.pi)) * v_norm,
        "gamma": math.sqrt(a / (6.0 * math.pi)) * v_norm,
        "sandwich_psi_bound": (math.pi + 1.0) / (math.pi * math.sqrt(2.0)) * v_norm**2,
    }
    if lam is not None:
        predictions["vr"] = v_norm / math.sqrt(2.0 * lam)
    return predictions


def predicted_hs(name: str, a: float, v_norm: float) -> float:
    """Predicted ||T(h)V||_2 for h in {phi, psi, gamma}."""
    predictions = hs_predictions(a, v_norm)
    if name not in ("phi", "psi", "gamma"):
        raise KernelError(f"No closed form for kernel function '{name}'.")
    return predictions[name]


# --- Commutator and invariance checks ---

def w12_norm(x: GridFunction) -> float:
    """sqrt(||x||_2^2 + ||x'||_2^2) with the spectral derivative."""
    derivative = differentiation_operator(x.grid).apply(x)
    return float(math.hypot(norm_l2(x), norm_l2(derivative)))


def commutator_residual(a: float, v: GridFunction, x: GridFunction, workers: int = 1) -> float:
    """
    Relative defect of A K - K A = V - T(phi_a)V with K = T(psi_a)V, applied to x.

    Returns:
        float: ||A K x - K A x - V x + T(phi_a)V x||_2 / ||x||_{W^{1,2}}.
    """
    scale = w12_norm(x)
    if scale == 0.0:
        raise KernelError("Commutator residual needs a nonzero test vector.")
    A = differentiation_operator(v.grid)
    K = smoothed_kernel(window_time_function("psi", a), v, workers)
    K_phi = smoothed_kernel(window_time_function("phi", a), v, workers)
    V = reflection_operator(v)
    defect = A.apply(K.apply(x)).values - K.apply(A.apply(x)).values - V.apply(x).values + K_phi.apply(x).values
    residual = float(np.sqrt(v.grid.spacing * np.sum(np.abs(defect) ** 2)) / scale)
    logger.debug(f"Commutator residual at a={a}: {residual:.3e}")
    return residual


def invariance_ratio(a: float, v: GridSampler, x: GridSampler, coarse: Grid, fine: Grid, workers: int = 1) -> float:
    """W^{1,2} norm of T(psi_a)V x on the fine grid divided by its value on the coarse grid."""
    values = []
    for grid in (coarse, fine):
        K = smoothed_kernel(window_time_function("psi", a), v(grid), workers)
        values.append(w12_norm(K.apply(x(grid))))
    if values[0] == 0.0:
        raise KernelError("Invariance ratio undefined: image vanishes on the coarse grid.")
    return float(values[1] / values[0])
