# finite_module.py
#
# Finite diagonal unitary representations T(t) = diag(exp(i lambda_j t)):
# Beurling spectra, the calculus T(h) = diag(h(lambda_j)), spectral mapping,
# resolvent identities, almost periodic symbols and spectral admissibility
# estimates.

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .fourier_core import Grid, GridFunction, dft_inverse, norm_l1, sample_frequencies
from .l1_bounds import l1_bound
from .window_functions import generalized_trapezoid, trapezoid_symbol

logger = logging.getLogger(__name__)

Symbol = Callable[[np.ndarray], np.ndarray]

ZERO_TOLERANCE = 1e-12
SPECTRAL_MATCH_TOLERANCE = 1e-9
PROXIMITY_MARGIN = 1e-6
AP1_SAMPLES = 2**16
AP1_TAIL = 1e-10


class SpectralDomainError(ValueError):
    """Raised when a symbol is undefined at a frequency of the representation."""
    pass


class SingularityError(ValueError):
    """Raised when a resolvent is requested at a point of the spectrum."""
    pass


class ProximityError(ValueError):
    """Raised when lambda lies too close to the range of a symbol."""
    pass


@dataclass(frozen=True)
class FiniteModuleRep:
    """Frequencies of a diagonal unitary representation; duplicates allowed."""
    frequencies: Tuple[float, ...]

    def __post_init__(self):
        freqs = tuple(float(f) for f in np.asarray(self.frequencies, dtype=float).reshape(-1))
        if len(freqs) < 1:
            raise SpectralDomainError("A representation needs at least one frequency.")
        if not all(np.isfinite(freqs)):
            raise SpectralDomainError(f"Frequencies must be finite, got {freqs}.")
        object.__setattr__(self, "frequencies", freqs)

    @property
    def size(self) -> int:
        return len(self.frequencies)

    def as_array(self) -> np.ndarray:
        return np.array(self.frequencies, dtype=float)

    def representation(self, t: float) -> np.ndarray:
        return np.diag(np.exp(1j * self.as_array() * t))


@dataclass(frozen=True)
class APFunction:
    """h(xi) = sum_n c_n exp(i xi t_n) with finitely many terms."""
    coefficients: Tuple[complex, ...]
    exponents: Tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        exps = tuple(float(t) for t in self.exponents)
        if len(coeffs) != len(exps):
            raise SpectralDomainError(
                f"AP1 symbol needs matching lengths, got {len(coeffs)} coefficients and {len(exps)} exponents."
            )
        if not coeffs:
            raise SpectralDomainError("AP1 symbol needs at least one term.")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "exponents", exps)

    @property
    def norm(self) -> float:
        return float(sum(abs(c) for c in self.coefficients))

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for c, t in zip(self.coefficients, self.exponents):
            out = out + c * np.exp(1j * xi * t)
        return out


@dataclass(frozen=True)
class SpectrumSet:
    """Finite point set in which points closer than tolerance/2 are merged."""
    points: Tuple[complex, ...]
    tolerance: float = SPECTRAL_MATCH_TOLERANCE

    @classmethod
    def from_points(cls, points, tolerance: float = SPECTRAL_MATCH_TOLERANCE) -> "SpectrumSet":
        ordered = sorted((complex(p) for p in np.asarray(points).reshape(-1)), key=lambda z: (z.real, z.imag))
        merged: List[complex] = []
        for z in ordered:
            if all(abs(z - m) >= tolerance / 2.0 for m in merged):
                merged.append(z)
        return cls(points=tuple(merged), tolerance=tolerance)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    def hausdorff(self, other: "SpectrumSet") -> float:
        if not self.points and not other.points:
            return 0.0
        if not self.points or not other.points:
            return float("inf")
        distances = np.abs(self.as_array()[:, None] - other.as_array()[None, :])
        return float(max(distances.min(axis=1).max(), distances.min(axis=0).max()))

    def matches(self, other: "SpectrumSet") -> bool:
        """Greedy closest-pair matching; every point must pair up within tolerance."""
        if len(self.points) != len(other.points):
            return False
        distances = np.abs(self.as_array()[:, None] - other.as_array()[None, :])
        pairs = sorted(np.ndindex(distances.shape), key=lambda ij: distances[ij])
        used_left, used_right = set(), set()
        for i, j in pairs:
            if i in used_left or j in used_right:
                continue
            if distances[i, j] >= self.tolerance:
                return False
            used_left.add(i)
            used_right.add(j)
        return len(used_left) == len(self.points)


@dataclass(frozen=True)
class SpectralMappingReport:
    sigma: SpectrumSet
    image: SpectrumSet
    equal: bool
    hausdorff: float


@dataclass(frozen=True)
class ResolventReport:
    norm: float
    dist_bound: float
    tight: bool


@dataclass(frozen=True)
class MhEstimate:
    M: float
    a_list: Tuple[float, ...]
    values: Tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class PolynomialResolventReport:
    norm: float
    dist_bound: float
    w12_bound: Optional[float]
    tight: bool


# --- Calculus ---

def _symbol_values(h: Symbol, rep: FiniteModuleRep) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.asarray(h(rep.as_array()), dtype=complex).reshape(-1)
    if values.shape[0] != rep.size:
        raise SpectralDomainError(f"Symbol returned {values.shape[0]} values for {rep.size} frequencies.")
    bad = ~np.isfinite(values)
    if np.any(bad):
        poles = rep.as_array()[bad].tolist()
        raise SpectralDomainError(f"Symbol is undefined at frequencies {poles}.")
    return values


def calculus_operator(h: Symbol, rep: FiniteModuleRep) -> np.ndarray:
    """
    T(h) = diag(h(lambda_1), ..., h(lambda_m)).

    Raises:
        SpectralDomainError: If h is not finite at some frequency.
    """
    return np.diag(_symbol_values(h, rep))


def generator(rep: FiniteModuleRep) -> np.ndarray:
    """The generator T(id)."""
    return calculus_operator(lambda xi: xi, rep)


def beurling_spectrum(rep: FiniteModuleRep, x, tolerance: float = ZERO_TOLERANCE) -> Tuple[float, ...]:
    """Frequencies carried by the nonzero coordinates of x, sorted and deduplicated."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.shape[0] != rep.size:
        raise SpectralDomainError(f"Vector length {x.shape[0]} does not match representation size {rep.size}.")
    active = rep.as_array()[np.abs(x) > tolerance]
    return tuple(sorted(set(active.tolist())))


def operator_module(rep: FiniteModuleRep) -> FiniteModuleRep:
    """Induced module on m x m matrices, T(t) X T(-t); entry (j, k) carries lambda_j - lambda_k."""
    freqs = rep.as_array()
    return FiniteModuleRep(tuple((freqs[:, None] - freqs[None, :]).reshape(-1)))


def matrix_beurling_spectrum(rep: FiniteModuleRep, X, tolerance: float = ZERO_TOLERANCE) -> Tuple[float, ...]:
    X = np.asarray(X, dtype=complex)
    if X.shape != (rep.size, rep.size):
        raise SpectralDomainError(f"Matrix shape {X.shape} does not match representation size {rep.size}.")
    return beurling_spectrum(operator_module(rep), X.reshape(-1), tolerance)


def commutator_generator(rep: FiniteModuleRep) -> np.ndarray:
    """Matrix of X -> AX - XA acting on row-major vec(X), A = T(id)."""
    A = generator(rep)
    identity = np.eye(rep.size)
    return np.kron(A, identity) - np.kron(identity, A.T)


def _spectrum(matrix: np.ndarray) -> np.ndarray:
    return scipy.linalg.eigvals(matrix)


def check_spectral_mapping(rep: FiniteModuleRep, h: Symbol,
                           tolerance: float = SPECTRAL_MATCH_TOLERANCE) -> SpectralMappingReport:
    """Compares the eigenvalues of T(h) with the image h(Lambda)."""
    operator = calculus_operator(h, rep)
    sigma = SpectrumSet.from_points(_spectrum(operator), tolerance)
    image = SpectrumSet.from_points(_symbol_values(h, rep), tolerance)
    distance = sigma.hausdorff(image)
    equal = bool(distance < tolerance and sigma.matches(image))
    logger.debug(f"Spectral mapping on {rep.size} frequencies: hausdorff={distance:.3e}, equal={equal}")
    return SpectralMappingReport(sigma=sigma, image=image, equal=equal, hausdorff=distance)


def check_generator_spectrum(rep: FiniteModuleRep, tolerance: float = SPECTRAL_MATCH_TOLERANCE) -> bool:
    """sigma(T(id)) equals the frequency set."""
    return check_spectral_mapping(rep, lambda xi: xi, tolerance).equal


def resolvent_norm_check(rep: FiniteModuleRep, h: Symbol, lam: complex) -> ResolventReport:
    """
    Operator norm of (lam - T(h))^{-1} against 1 / dist(lam, h(Lambda)).

    Raises:
        SingularityError: If lam lies in the spectrum.
    """
    values = _symbol_values(h, rep)
    distance = float(np.min(np.abs(lam - values)))
    if distance <= ZERO_TOLERANCE:
        raise SingularityError(f"lambda={lam} lies in the spectrum (distance {distance:.3e}).")
    resolvent = scipy.linalg.inv(lam * np.eye(rep.size) - np.diag(values))
    norm = float(np.linalg.norm(resolvent, 2))
    bound = 1.0 / distance
    tight = bool(abs(norm - bound) <= ZERO_TOLERANCE * max(1.0, bound))
    return ResolventReport(norm=norm, dist_bound=bound, tight=tight)


def resolvent(rep: FiniteModuleRep, z: complex) -> np.ndarray:
    """R(z) = T(phi_z) with phi_z(xi) = 1/(xi - z)."""
    return calculus_operator(lambda xi: 1.0 / (xi - z), rep)


def hilbert_resolvent_defect(rep: FiniteModuleRep, z: complex, w: complex) -> float:
    """max |R(z) - R(w) - (z - w) R(z) R(w)|."""
    Rz, Rw = resolvent(rep, z), resolvent(rep, w)
    return float(np.max(np.abs(Rz - Rw - (z - w) * Rz @ Rw)))


def commutation_defect(rep: FiniteModuleRep, f: Symbol, h: Symbol) -> float:
    """max |T(f h) - T(f) T(h)|."""
    product = calculus_operator(lambda xi: f(xi) * h(xi), rep)
    return float(np.max(np.abs(product - calculus_operator(f, rep) @ calculus_operator(h, rep))))


def spectral_inclusion_holds(rep: FiniteModuleRep, h: Symbol, x) -> bool:
    """Beurling spectrum of T(h)x lies in supp h intersected with the spectrum of x."""
    values = _symbol_values(h, rep)
    image = calculus_operator(h, rep) @ np.asarray(x, dtype=complex)
    support = {lam for lam, value in zip(rep.frequencies, values) if abs(value) > ZERO_TOLERANCE}
    return set(beurling_spectrum(rep, image)) <= (support & set(beurling_spectrum(rep, x)))


# --- Almost periodic symbols ---

def ap1_apply(h: APFunction, rep: FiniteModuleRep) -> np.ndarray:
    """T(h) = sum_n c_n T(t_n)."""
    out = np.zeros((rep.size, rep.size), dtype=complex)
    for c, t in zip(h.coefficients, h.exponents):
        out += c * rep.representation(t)
    return out


def common_step(exponents: Sequence[float], max_denominator: int = 10**6) -> float:
    """Largest tau > 0 with every exponent an integer multiple of tau (0.0 if all vanish)."""
    fractions = [Fraction(t).limit_denominator(max_denominator) for t in exponents if t != 0]
    if not fractions:
        return 0.0
    denominator = 1
    for q in fractions:
        denominator = math.lcm(denominator, q.denominator)
    numerators = [abs(q.numerator * (denominator // q.denominator)) for q in fractions]
    step = Fraction(math.gcd(*numerators), denominator)
    for t in exponents:
        ratio = t / float(step)
        if abs(ratio - round(ratio)) > 1e-9:
            raise SpectralDomainError(f"Exponents {list(exponents)} are not commensurate.")
    return float(step)


def ap1_reciprocal_norm(h: APFunction, lam: complex, samples: int = AP1_SAMPLES,
                        margin: float = PROXIMITY_MARGIN, tail: float = AP1_TAIL) -> float:
    """
    AP1 norm of xi -> 1/(lam - h(xi)) for commensurate exponents.

    The reciprocal is sampled over one period, its Fourier coefficients are
    taken by FFT and summed in decreasing magnitude until the remaining mass
    drops below `tail`.

    Raises:
        ProximityError: If lam is within `margin` of the sampled range of h.
    """
    step = common_step(h.exponents)
    if step == 0.0:
        constant = complex(sum(h.coefficients))
        if abs(lam - constant) <= margin:
            raise ProximityError(f"lambda={lam} is within {margin} of the constant symbol {constant}.")
        return float(1.0 / abs(lam - constant))
    if max(abs(t) for t in h.exponents) / step > samples // 4:
        raise SpectralDomainError(
            f"Exponents {list(h.exponents)} need a finer sampling than {samples} points per period."
        )
    period = 2.0 * np.pi / step
    xi = np.arange(samples) * (period / samples)
    values = h(xi)
    gap = float(np.min(np.abs(lam - values)))
    if gap <= margin:
        raise ProximityError(f"lambda={lam} is within {gap:.3e} of the range of h (margin {margin}).")
    coefficients = np.fft.fft(1.0 / (lam - values)) / samples
    magnitudes = np.sort(np.abs(coefficients))[::-1]
    total = float(np.sum(magnitudes))
    partial = np.cumsum(magnitudes)
    cut = int(np.argmax(total - partial < tail))
    return float(partial[cut])


# --- Spectral admissibility ---

def _interval_gap(h: Symbol, lam: complex, lower: float, upper: float, points: int = 10_001) -> float:
    """min |lam - h| on [lower, upper]: dense sampling, then a bounded refinement around the sampled minimum."""
    xi = np.linspace(lower, upper, points)
    distance = np.abs(lam - np.asarray(h(xi), dtype=complex))
    i = int(np.argmin(distance))
    left, right = xi[max(i - 1, 0)], xi[min(i + 1, points - 1)]
    if right <= left:
        return float(distance[i])
    refined = minimize_scalar(
        lambda s: float(np.abs(lam - np.asarray(h(np.array([s])), dtype=complex)[0])),
        bounds=(left, right),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(distance[i], refined.fun))


def _proximity_gap(h: Symbol, lam: complex, support: Sequence[Tuple[float, float]]) -> float:
    return float(min(_interval_gap(h, lam, lower, upper) for lower, upper in support))


def mh_estimate(h: Symbol, lam: complex, support: Sequence[Tuple[float, float]], grid: Grid,
                a_exponents: Tuple[int, int] = (-3, 6), window_n: Optional[float] = None,
                margin: float = PROXIMITY_MARGIN) -> MhEstimate:
    """
    Lower estimate of sup_a ||F^{-1}(tau_a / (lam - h))||_1 over a = 2^k.

    The window is the trapezoid tau_a or, with window_n, the generalized
    trapezoid tau_{a,n}. Values of a for which lam - h vanishes on the support
    of the window are skipped.

    Raises:
        ProximityError: If lam is within `margin` of h on the support intervals.
    """
    gap = _proximity_gap(h, lam, support)
    if gap <= margin:
        raise ProximityError(f"lambda={lam} is within {gap:.3e} of h on the given support.")
    xi = grid.frequencies
    with np.errstate(divide="ignore", invalid="ignore"):
        reciprocal = 1.0 / (lam - np.asarray(h(xi), dtype=complex))
    used: List[float] = []
    values: List[float] = []
    for k in range(a_exponents[0], a_exponents[1] + 1):
        a = float(2.0**k)
        window = trapezoid_symbol(a) if window_n is None else generalized_trapezoid(a, window_n)
        taper = window(xi)
        active = taper != 0.0
        reach = float(window.breakpoints[-1])
        if not np.all(np.isfinite(reciprocal[active])) or _interval_gap(h, lam, -reach, reach) <= margin:
            logger.warning(f"Skipping a={a}: lambda - h vanishes on the window support.")
            continue
        g = np.where(active, taper * np.where(active, reciprocal, 0.0), 0.0)
        values.append(norm_l1(dft_inverse(sample_frequencies(grid, lambda _: g))))
        used.append(a)
    if not values:
        raise ProximityError(f"No admissible window scale for lambda={lam}.")
    return MhEstimate(M=float(max(values)), a_list=tuple(used), values=tuple(values))


def w12_resolvent_bound(h: Symbol, lam: complex, grid: Grid) -> float:
    """sqrt(2 ||g||_2 ||g'||_2) for g = 1/(lam - h) sampled on the frequency grid."""
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 1.0 / (lam - np.asarray(h(grid.frequencies), dtype=complex))
    if not np.all(np.isfinite(g)):
        raise ProximityError(f"lambda={lam} lies in the sampled range of h.")
    return l1_bound(sample_frequencies(grid, lambda _: g)).bound


def polynomial_resolvent_check(rep: FiniteModuleRep, coefficients: Sequence[float], lam: complex,
                               grid: Optional[Grid] = None) -> PolynomialResolventReport:
    """
    Resolvent of T(p) for a real polynomial p (coefficients highest degree first).

    Requires that no root of p - lam lies in the frequency set. The W^{1,2}
    bound is reported only when lam is off p(R) and a grid is given.

    Raises:
        SpectralDomainError: If a preimage of lam lies in the frequency set.
    """
    poly = np.poly1d(np.asarray(coefficients, dtype=float))
    roots = np.roots((poly - lam).coeffs) if poly.order > 0 else np.array([])
    real_roots = [r.real for r in np.atleast_1d(roots) if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]
    freqs = rep.as_array()
    for r in real_roots:
        if np.any(np.abs(freqs - r) <= 1e-9 * max(1.0, abs(r))):
            raise SpectralDomainError(f"lambda={lam} has the preimage {r} in the frequency set.")
    report = resolvent_norm_check(rep, poly, lam)
    w12 = None
    if not real_roots and grid is not None and poly.order > 0:
        w12 = w12_resolvent_bound(poly, lam, grid)
    return PolynomialResolventReport(norm=report.norm, dist_bound=report.dist_bound, w12_bound=w12,
                                     tight=report.tight)


# --- Named symbols ---

def named_symbol(name: str) -> Symbol:
    """
    Symbols addressable by name: id, square, exp and trapezoid:<a>.

    Raises:
        SpectralDomainError: For unknown names.
    """
    if name == "id":
        return lambda xi: np.asarray(xi, dtype=float)
    if name == "square":
        return lambda xi: np.asarray(xi, dtype=float) ** 2
    if name == "exp":
        return lambda xi: np.exp(1j * np.asarray(xi, dtype=float))
    if name.startswith("trapezoid:"):
        try:
            a = float(name.split(":", 1)[1])
        except ValueError:
            raise SpectralDomainError(f"Malformed trapezoid symbol '{name}'.") from None
        return trapezoid_symbol(a)
    raise SpectralDomainError(f"Unknown symbol '{name}'. Known: id, square, exp, trapezoid:<a>, ap1:<file>.")


def spectral_report_dict(report: SpectralMappingReport) -> Dict[str, object]:
    return {
        "sigma": [complex(z) for z in report.sigma.points],
        "image": [complex(z) for z in report.image.points],
        "hausdorff": report.hausdorff,
        "equal": report.equal,
    }
