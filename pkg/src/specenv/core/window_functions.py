# window_functions.py
#
# Window symbols (trapezoid, omega, triangle, generalized trapezoid) with
# exact piecewise descriptions, their time-domain transforms and closed-form
# norms.

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum, auto
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Type, Union

import numpy as np
from scipy.special import sici

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]


class SymbolError(ValueError):
    """Raised for invalid window parameters or unsupported symbol families."""
    pass


class SegmentKind(Enum):
    CONSTANT = auto()
    LINEAR = auto()
    RECIPROCAL = auto()
    AFFINE_MINUS_RECIPROCAL = auto()


class Parity(Enum):
    EVEN = auto()
    ODD = auto()


@dataclass(frozen=True)
class Segment:
    """One piece of a symbol: c0 + c1*xi + c2/xi (terms absent for the simpler kinds)."""
    kind: SegmentKind
    c0: Number = 0
    c1: Number = 0
    c2: Number = 0

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        out = float(self.c0) + float(self.c1) * xi
        if self.c2 != 0:
            out = out + float(self.c2) / xi
        return out

    def derivative(self, xi: np.ndarray) -> np.ndarray:
        out = np.full_like(xi, float(self.c1), dtype=float)
        if self.c2 != 0:
            out = out - float(self.c2) / xi**2
        return out

    def times_xi(self) -> Tuple[Number, Number, Number]:
        """Coefficients (constant, xi, xi^2) of the polynomial xi * segment."""
        return (self.c2, self.c0, self.c1)


@dataclass(frozen=True)
class SymbolNorms:
    l2: float
    l2_deriv: float


@dataclass(frozen=True)
class PiecewiseSymbol:
    """
    Exact piecewise description of a real symbol on the frequency axis.

    segments[i] applies on [breakpoints[i-1], breakpoints[i]); the first and
    last segments extend to -inf and +inf.
    """
    family: str
    a: float
    breakpoints: Tuple[Number, ...]
    segments: Tuple[Segment, ...]
    parity: Parity
    n: Optional[float] = None

    def __post_init__(self):
        if len(self.segments) != len(self.breakpoints) + 1:
            raise SymbolError(
                f"Symbol '{self.family}' needs {len(self.breakpoints) + 1} segments, got {len(self.segments)}."
            )

    def _segment_index(self, xi: np.ndarray) -> np.ndarray:
        edges = np.array([float(b) for b in self.breakpoints])
        return np.searchsorted(edges, xi, side="right")

    def _piecewise(self, xi, method: str) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        idx = self._segment_index(xi)
        out = np.zeros(xi.shape, dtype=float)
        for i, segment in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = getattr(segment, method)(xi[mask])
        return out

    def __call__(self, xi) -> np.ndarray:
        return self._piecewise(xi, "evaluate")

    def derivative(self, xi) -> np.ndarray:
        """Pointwise derivative; at a kink the right-hand segment is used."""
        return self._piecewise(xi, "derivative")

    def quadrature_norms(self, nodes_per_segment: int = 4001, tail_factor: float = 64.0) -> SymbolNorms:
        """
        Composite trapezoid norms of the symbol and its derivative.

        Interior segments use uniform nodes aligned with the breakpoints; the
        two outer segments use geometric nodes up to tail_factor times the
        outermost breakpoint plus the analytic remainder of their 1/xi term.
        """
        edges = [float(b) for b in self.breakpoints]
        outer = max(abs(edges[0]), abs(edges[-1]))
        cutoff = tail_factor * outer
        value_sq = 0.0
        deriv_sq = 0.0
        for i, segment in enumerate(self.segments):
            if 0 < i < len(self.segments) - 1:
                xi = np.linspace(edges[i - 1], edges[i], nodes_per_segment)
            else:
                start = abs(edges[0]) if i == 0 else abs(edges[-1])
                xi = np.geomspace(start, cutoff, nodes_per_segment)
                if i == 0:
                    xi = -xi[::-1]
                c2 = float(segment.c2)
                value_sq += c2**2 / cutoff
                deriv_sq += c2**2 / (3.0 * cutoff**3)
            value_sq += np.trapezoid(segment.evaluate(xi) ** 2, xi)
            deriv_sq += np.trapezoid(segment.derivative(xi) ** 2, xi)
        return SymbolNorms(l2=float(np.sqrt(value_sq)), l2_deriv=float(np.sqrt(deriv_sq)))


def _require_positive(a: float, name: str = "a") -> None:
    if not np.isfinite(a) or a <= 0:
        raise SymbolError(f"Window parameter '{name}' must be positive, got {a}.")


def _require_index(n: float) -> None:
    if n is None or not np.isfinite(n) or n <= 1:
        raise SymbolError(f"Generalized trapezoid index 'n' must be > 1, got {n}.")


# --- Segment tables ---
# The builders accept floats or Fractions so the same tables serve the exact
# symbol identity check.

def _trapezoid_segments(a: Number, n: Number = 2) -> Tuple[Tuple[Number, ...], Tuple[Segment, ...]]:
    slope = 1 / ((n - 1) * a)
    zero = Segment(SegmentKind.CONSTANT)
    breakpoints = (-n * a, -a, a, n * a)
    segments = (
        zero,
        Segment(SegmentKind.LINEAR, c0=n / (n - 1), c1=slope),
        Segment(SegmentKind.CONSTANT, c0=1),
        Segment(SegmentKind.LINEAR, c0=n / (n - 1), c1=-slope),
        zero,
    )
    return breakpoints, segments


def _omega_segments(a: Number) -> Tuple[Tuple[Number, ...], Tuple[Segment, ...]]:
    breakpoints = (-2 * a, -a, a, 2 * a)
    segments = (
        Segment(SegmentKind.RECIPROCAL, c2=1),
        Segment(SegmentKind.AFFINE_MINUS_RECIPROCAL, c0=-1 / a, c2=-1),
        Segment(SegmentKind.CONSTANT),
        Segment(SegmentKind.AFFINE_MINUS_RECIPROCAL, c0=1 / a, c2=-1),
        Segment(SegmentKind.RECIPROCAL, c2=1),
    )
    return breakpoints, segments


def _triangle_segments(a: Number) -> Tuple[Tuple[Number, ...], Tuple[Segment, ...]]:
    zero = Segment(SegmentKind.CONSTANT)
    breakpoints = (-a, 0 * a, a)
    segments = (
        zero,
        Segment(SegmentKind.LINEAR, c0=1, c1=1 / a),
        Segment(SegmentKind.LINEAR, c0=1, c1=-1 / a),
        zero,
    )
    return breakpoints, segments


def trapezoid_symbol(a: float) -> PiecewiseSymbol:
    """tau_a: 1 on |xi| <= a, linear down to 0 on a < |xi| < 2a, 0 beyond."""
    _require_positive(a)
    breakpoints, segments = _trapezoid_segments(float(a))
    return PiecewiseSymbol("trapezoid", float(a), breakpoints, segments, Parity.EVEN)


def omega_symbol(a: float) -> PiecewiseSymbol:
    """omega_a(xi) = (1 - tau_a(xi)) / xi, with value 0 on |xi| <= a."""
    _require_positive(a)
    breakpoints, segments = _omega_segments(float(a))
    return PiecewiseSymbol("omega", float(a), breakpoints, segments, Parity.ODD)


def triangle_symbol(a: float) -> PiecewiseSymbol:
    """Triangle (1 - |xi|/a) on [-a, a]."""
    _require_positive(a)
    breakpoints, segments = _triangle_segments(float(a))
    return PiecewiseSymbol("triangle", float(a), breakpoints, segments, Parity.EVEN)


def generalized_trapezoid(a: float, n: float) -> PiecewiseSymbol:
    """tau_{a,n}: 1 on |xi| <= a, (n a - |xi|)/((n-1) a) on a < |xi| < n a, 0 beyond."""
    _require_positive(a)
    _require_index(n)
    breakpoints, segments = _trapezoid_segments(float(a), float(n))
    return PiecewiseSymbol("gentrap", float(a), breakpoints, segments, Parity.EVEN, n=float(n))


def symbol_identity_exact(a: float) -> bool:
    """
    Checks xi * omega_a(xi) == 1 - tau_a(xi) on every segment in rational arithmetic.

    Both symbols share their breakpoints, so the identity reduces to equality
    of segment polynomials.
    """
    _require_positive(a)
    exact_a = Fraction(a)
    _, omega = _omega_segments(exact_a)
    _, tau = _trapezoid_segments(exact_a)
    for omega_segment, tau_segment in zip(omega, tau):
        lhs = tuple(Fraction(c) for c in omega_segment.times_xi())
        rhs = (1 - Fraction(tau_segment.c0), -Fraction(tau_segment.c1), Fraction(0))
        if lhs != rhs:
            logger.debug(f"Symbol identity fails on a segment: {lhs} != {rhs}")
            return False
    return True


def symbol_identity_residual(a: float, xi) -> float:
    """max |xi * omega_a(xi) - (1 - tau_a(xi))| over the given points."""
    xi = np.asarray(xi, dtype=float)
    return float(np.max(np.abs(xi * omega_symbol(a)(xi) - (1.0 - trapezoid_symbol(a)(xi)))))


# --- Closed-form norms ---

def exact_norms(symbol: PiecewiseSymbol) -> SymbolNorms:
    """
    Closed-form L2 norms of a window symbol and of its derivative.

    Raises:
        SymbolError: If the symbol family has no closed form.
    """
    a = symbol.a
    if symbol.family == "trapezoid":
        return SymbolNorms(2.0 * np.sqrt(2.0 * a / 3.0), np.sqrt(2.0 / a))
    if symbol.family == "omega":
        return SymbolNorms(np.sqrt((4.0 - 4.0 * np.log(2.0)) / a), np.sqrt(2.0 / (3.0 * a**3)))
    if symbol.family == "triangle":
        return SymbolNorms(np.sqrt(2.0 * a / 3.0), np.sqrt(2.0 / a))
    if symbol.family == "gentrap":
        n = symbol.n
        return SymbolNorms(np.sqrt(2.0 * a * (n + 2.0) / 3.0), np.sqrt(2.0 / (a * (n - 1.0))))
    raise SymbolError(f"No closed-form norms for symbol family '{symbol.family}'.")


# --- Time-domain functions ---
# np.sinc(x) = sin(pi x)/(pi x) carries the removable singularities at t = 0.

def sine_integral(x):
    """Si(x) = integral_0^x sin(u)/u du (odd, tends to pi/2)."""
    si, _ = sici(x)
    if np.ndim(si) == 0:
        return float(si)
    return si


def phi_time(a: float, t) -> np.ndarray:
    """phi_a(t) = 2 sin(3at/2) sin(at/2) / (pi a t^2), inverse transform of tau_a."""
    return phi_general_time(a, 2.0, t)


def phi_general_time(a: float, n: float, t) -> np.ndarray:
    """Inverse transform of tau_{a,n}: (cos(at) - cos(nat)) / (pi (n-1) a t^2)."""
    _require_positive(a)
    _require_index(n)
    t = np.asarray(t, dtype=float)
    return (n + 1.0) * a / (2.0 * np.pi) * np.sinc((n + 1.0) * a * t / (2.0 * np.pi)) * np.sinc(
        (n - 1.0) * a * t / (2.0 * np.pi)
    )


def gamma_time(a: float, t) -> np.ndarray:
    """gamma_a(t) = (a/2pi) (sin(at/2)/(at/2))^2, inverse transform of the triangle."""
    _require_positive(a)
    t = np.asarray(t, dtype=float)
    return a / (2.0 * np.pi) * np.sinc(a * t / (2.0 * np.pi)) ** 2


def psi_time(a: float, t) -> np.ndarray:
    """
    Inverse transform of omega_a, evaluated through Si.

    For t > 0:
        psi_a(t) = (i/pi) [ (cos(at) - cos(2at))/(at) + Si(at) - 2 Si(2at) + pi/2 ]
    and psi_a is odd. psi_a jumps from -i/2 to i/2 at t = 0, where it takes
    the midpoint value 0.
    """
    _require_positive(a)
    t = np.asarray(t, dtype=float)
    x = a * np.abs(t)
    # (cos x - cos 2x)/x = 2 sin(3x/2) sin(x/2)/x
    elementary = 1.5 * x * np.sinc(1.5 * x / np.pi) * np.sinc(0.5 * x / np.pi)
    si_x, _ = sici(x)
    si_2x, _ = sici(2.0 * x)
    magnitude = (elementary + si_x - 2.0 * si_2x + np.pi / 2.0) / np.pi
    return 1j * np.sign(t) * magnitude


# --- Family registry ---

class WindowFamily(ABC):
    """
    A window family at fixed parameters: its symbol, its time-domain
    transform and its closed-form norms. Subclasses register under a
    family id used by the CLI and the verification suites.
    """
    _family_registry: Dict[str, Type["WindowFamily"]] = {}

    def __init_subclass__(cls, *, family_id: str, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if family_id in cls._family_registry:
            raise ValueError(
                f"Duplicate family ID '{family_id}'. Cannot register class {cls.__name__}. "
                f"Already registered to {cls._family_registry[family_id].__name__}."
            )
        cls._family_registry[family_id] = cls
        cls.family_id = family_id

    def __init__(self, a: float, n: Optional[float] = None):
        _require_positive(a)
        self.a = float(a)
        self.n = n

    @abstractmethod
    def symbol(self) -> PiecewiseSymbol:
        ...

    @abstractmethod
    def time_function(self, t) -> np.ndarray:
        ...

    def exact_norms(self) -> SymbolNorms:
        return exact_norms(self.symbol())

    @staticmethod
    def available_families() -> List[str]:
        return sorted(WindowFamily._family_registry.keys())

    @staticmethod
    def get_family_class(family_id: str) -> Type["WindowFamily"]:
        try:
            return WindowFamily._family_registry[family_id]
        except KeyError:
            raise SymbolError(
                f"Unknown window family '{family_id}'. "
                f"Available families: {WindowFamily.available_families()}"
            ) from None


class TrapezoidWindow(WindowFamily, family_id="trapezoid"):
    def symbol(self) -> PiecewiseSymbol:
        return trapezoid_symbol(self.a)

    def time_function(self, t) -> np.ndarray:
        return phi_time(self.a, t)


class OmegaWindow(WindowFamily, family_id="omega"):
    def symbol(self) -> PiecewiseSymbol:
        return omega_symbol(self.a)

    def time_function(self, t) -> np.ndarray:
        return psi_time(self.a, t)


class TriangleWindow(WindowFamily, family_id="triangle"):
    def symbol(self) -> PiecewiseSymbol:
        return triangle_symbol(self.a)

    def time_function(self, t) -> np.ndarray:
        return gamma_time(self.a, t)


class GeneralizedTrapezoidWindow(WindowFamily, family_id="gentrap"):
    def __init__(self, a: float, n: Optional[float] = None):
        _require_index(n)
        super().__init__(a, float(n))

    def symbol(self) -> PiecewiseSymbol:
        return generalized_trapezoid(self.a, self.n)

    def time_function(self, t) -> np.ndarray:
        return phi_general_time(self.a, self.n, t)


def create_window(family: str, a: float, n: Optional[float] = None) -> WindowFamily:
    """
    Factory for window families by id.

    Args:
        family (str): One of the registered family ids.
        a (float): Scale parameter, positive.
        n (float, optional): Index of the generalized trapezoid, > 1.

    Returns:
        WindowFamily: The configured family instance.
    """
    family_class = WindowFamily.get_family_class(family)
    logger.debug(f"Creating window '{family}' with a={a}, n={n}")
    return family_class(a, n)
