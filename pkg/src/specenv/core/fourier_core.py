# fourier_core.py
#
# Uniform symmetric grids, the discrete Fourier pair used throughout the
# package and quadrature norms.
#
# Transform convention: f_hat(xi) = integral f(t) exp(-i t xi) dt, with the
# inverse carrying the 1/(2 pi) factor. With this convention
# ||f_hat||_2 = sqrt(2 pi) ||f||_2, and the discrete pair below satisfies the
# same identity exactly.

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

logger = logging.getLogger(__name__)


class GridConfigurationError(ValueError):
    """Raised when a grid or a function sampled on it is malformed."""
    pass


@dataclass(frozen=True)
class Grid:
    """
    Uniform grid over [-R, R) with an even number of points.

    Nodes are t_k = (k - N/2) * spacing for k = 0..N-1, so t_{N/2} = 0 exactly
    and -t_k = t_{N-k} for k = 1..N-1.
    """
    half_width: float
    points: int

    def __post_init__(self):
        if not isinstance(self.points, (int, np.integer)) or isinstance(self.points, bool):
            raise GridConfigurationError(f"Grid points must be an integer, got {type(self.points).__name__}.")
        if self.points < 4 or self.points % 2 != 0:
            raise GridConfigurationError(f"Grid points must be an even integer >= 4, got {self.points}.")
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise GridConfigurationError(f"Grid half-width must be positive, got {self.half_width}.")
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "points", int(self.points))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @cached_property
    def nodes(self) -> np.ndarray:
        offsets = np.arange(self.points) - self.points // 2
        nodes = offsets * self.spacing
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Frequency nodes xi_j = 2 pi j / (N spacing), j = -N/2..N/2-1, ascending."""
        j = np.arange(self.points) - self.points // 2
        freqs = 2.0 * np.pi * j / (self.points * self.spacing)
        freqs.setflags(write=False)
        return freqs

    @property
    def frequency_spacing(self) -> float:
        return 2.0 * np.pi / (self.points * self.spacing)

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    def reflection_indices(self) -> np.ndarray:
        """Index of -t_k for every k; index 0 has no mirror on the grid and maps to itself."""
        idx = (self.points - np.arange(self.points)) % self.points
        idx[0] = 0
        return idx


def make_grid(R: float, N: int) -> Grid:
    """
    Builds a uniform symmetric grid.

    Args:
        R (float): Half-width of the interval (time units).
        N (int): Number of points, even and at least 4.

    Returns:
        Grid: The grid with nodes -R, -R + 2R/N, ..., R - 2R/N.

    Raises:
        GridConfigurationError: If N is odd, too small or R is not positive.
    """
    grid = Grid(half_width=R, points=N)
    logger.debug(f"Grid created: R={grid.half_width}, N={grid.points}, spacing={grid.spacing}")
    return grid


def _as_values(grid: Grid, values) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    if arr.shape[0] != grid.points:
        raise GridConfigurationError(
            f"Sample count {arr.shape[0]} does not match the grid size {grid.points}."
        )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function at the grid nodes."""
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.grid, self.values))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values + other.values)

    def scaled(self, factor: complex) -> "GridFunction":
        return GridFunction(self.grid, factor * self.values)

    def reflected(self) -> "GridFunction":
        """x(-t); the -R node has no mirror and is set to zero."""
        out = self.values[self.grid.reflection_indices()].copy()
        out[0] = 0.0
        return GridFunction(self.grid, out)


@dataclass(frozen=True, eq=False)
class FreqGridFunction:
    """Complex samples at the frequency nodes of a grid."""
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.grid, self.values))

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies

    def __add__(self, other: "FreqGridFunction") -> "FreqGridFunction":
        _require_same_grid(self.grid, other.grid)
        return FreqGridFunction(self.grid, self.values + other.values)

    def scaled(self, factor: complex) -> "FreqGridFunction":
        return FreqGridFunction(self.grid, factor * self.values)


def _require_same_grid(first: Grid, second: Grid) -> None:
    if first != second:
        raise GridConfigurationError(f"Grid mismatch: {first} vs {second}.")


def _alternating_sign(points: int) -> np.ndarray:
    j = np.arange(points) - points // 2
    return np.where(j % 2 == 0, 1.0, -1.0)


def dft_forward(f: GridFunction) -> FreqGridFunction:
    """
    Discrete forward transform, f_hat(xi_j) = spacing * sum_k f(t_k) exp(-i t_k xi_j).

    Since t_k xi_j = 2 pi (k - N/2) j / N, this is a shifted FFT times (-1)^j.
    """
    grid = f.grid
    spectrum = np.fft.fftshift(np.fft.fft(f.values))
    return FreqGridFunction(grid, grid.spacing * _alternating_sign(grid.points) * spectrum)


def dft_inverse(F: FreqGridFunction) -> GridFunction:
    """Inverse of dft_forward: f(t_k) = (1/2 pi) * d_xi * sum_j F(xi_j) exp(i t_k xi_j)."""
    grid = F.grid
    unsigned = F.values * _alternating_sign(grid.points)
    values = np.fft.ifft(np.fft.ifftshift(unsigned)) / grid.spacing
    return GridFunction(grid, values)


GridLike = Union[GridFunction, FreqGridFunction]


def _weight(f: GridLike) -> float:
    if isinstance(f, FreqGridFunction):
        return f.grid.frequency_spacing
    return f.grid.spacing


def norm_l2(f: GridLike) -> float:
    """Periodic trapezoid quadrature of |f|^2, square-rooted."""
    return float(np.sqrt(_weight(f) * np.sum(np.abs(f.values) ** 2)))


def norm_l1(f: GridLike) -> float:
    return float(_weight(f) * np.sum(np.abs(f.values)))


def norm_inf(f: GridLike) -> float:
    return float(np.max(np.abs(f.values)))


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """Quadrature of f * conj(g)."""
    _require_same_grid(f.grid, g.grid)
    return complex(f.grid.spacing * np.sum(f.values * np.conj(g.values)))


# --- Sampling helpers ---

def sample(grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
    """Samples a vectorized time-domain evaluator at the grid nodes."""
    return GridFunction(grid, fn(grid.nodes))


def sample_frequencies(grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> FreqGridFunction:
    """Samples a vectorized symbol at the frequency nodes."""
    return FreqGridFunction(grid, fn(grid.frequencies))


def indicator(grid: Grid, lower: float, upper: float) -> GridFunction:
    """Indicator of [lower, upper]; nodes that hit an endpoint take the jump midpoint 1/2."""
    t = grid.nodes
    tol = 1e-12 * max(1.0, grid.half_width)
    values = np.where((t > lower + tol) & (t < upper - tol), 1.0, 0.0)
    on_edge = np.isclose(t, lower, rtol=0.0, atol=tol) | np.isclose(t, upper, rtol=0.0, atol=tol)
    values = np.where(on_edge, 0.5, values)
    return GridFunction(grid, values)


def gaussian(grid: Grid, width: float = 1.0, center: float = 0.0) -> GridFunction:
    """exp(-(t - center)^2 / (2 width^2))."""
    return GridFunction(grid, np.exp(-((grid.nodes - center) ** 2) / (2.0 * width**2)))


def edge_magnitude(f: GridFunction) -> float:
    """Largest |f| at the two outermost nodes relative to max |f| (0 for f = 0)."""
    peak = norm_inf(f)
    if peak == 0.0:
        return 0.0
    return float(max(abs(f.values[0]), abs(f.values[-1])) / peak)
