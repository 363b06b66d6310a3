# similarity_envelope.py
#
# Similarity of A - V to A - B with a Hilbert-Schmidt B, and the spectrum
# envelope |Im lambda| <= f(Re lambda) of a self-adjoint diagonal matrix
# perturbed by B.

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from .fourier_core import GridFunction, norm_l2
from .involution_operators import (
    KernelOperator,
    differentiation_operator,
    reflection_operator,
    sandwich_kernel,
    smoothed_kernel,
    window_time_function,
)

logger = logging.getLogger(__name__)

CONTAINMENT_SIZE_LIMIT = 2000
CONTAINMENT_RELATIVE_SLACK = 1e-9
CONTAINMENT_ABSOLUTE_SLACK = 1e-9


class EnvelopeError(ValueError):
    """Raised for invalid similarity or envelope inputs."""
    pass


class SimilarityError(ArithmeticError):
    """Raised when U = I + T(psi_a)V cannot be inverted numerically."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class EigensolverError(ArithmeticError):
    """Raised when the dense eigensolver fails."""
    pass


# --- Similarity transform ---

def similarity_constant() -> float:
    """(sqrt 2 / pi)(4 sqrt((1 - ln 2)/3) + pi + 1), below 2.45."""
    return math.sqrt(2.0) / math.pi * (4.0 * math.sqrt((1.0 - math.log(2.0)) / 3.0) + math.pi + 1.0)


def b_bound(v_norm: float) -> float:
    return similarity_constant() * v_norm**2


def neumann_bound(q: float) -> float:
    """Bound q/(1-q) for ||(I+K)^{-1} - I|| when ||K|| = q < 1."""
    if not 0.0 <= q < 1.0:
        raise EnvelopeError(f"Neumann bound needs 0 <= q < 1, got {q}.")
    return q / (1.0 - q)


def a_star(v: GridFunction) -> float:
    """
    4 (1 - ln 2) ||v||_2^2 / pi, the scale at which ||T(psi_a)V||_2 = 1/2.

    Raises:
        EnvelopeError: If v vanishes.
    """
    v_norm = norm_l2(v)
    if v_norm == 0.0:
        raise EnvelopeError("Perturbation v must be nonzero.")
    return 4.0 * (1.0 - math.log(2.0)) * v_norm**2 / math.pi


@dataclass(frozen=True, eq=False)
class SimilarityReport:
    """
    U = I + T(psi_a)V, its inverse and B = U^{-1}(V T(psi_a)V + T(phi_a)V)
    at a = a_star(v). Operator fields hold dense sample actions.
    """
    a_star: float
    v_norm: float
    hs_psiV: float
    hs_phiV: float
    U: KernelOperator = field(repr=False)
    U_inv: KernelOperator = field(repr=False)
    B: KernelOperator = field(repr=False)
    V: KernelOperator = field(repr=False)
    psiV: KernelOperator = field(repr=False)
    phiV: KernelOperator = field(repr=False)
    VpsiV: KernelOperator = field(repr=False)
    b_hs: float
    residual: float
    inverse_distance: float

    def as_dict(self) -> dict:
        return {
            "a_star": self.a_star,
            "v_norm": self.v_norm,
            "hs_psiV": self.hs_psiV,
            "hs_phiV": self.hs_phiV,
            "b_hs": self.b_hs,
            "b_bound": b_bound(self.v_norm),
            "inverse_residual": self.residual,
            "inverse_distance": self.inverse_distance,
        }


def build_similarity(v: GridFunction, workers: int = 1) -> SimilarityReport:
    """
    Assembles the similarity transform for (Vx)(t) = v(t) x(-t).

    Args:
        v (GridFunction): Perturbation samples, negligible near the grid edges.
        workers (int): Threads for kernel assembly.

    Returns:
        SimilarityReport: Operators and their Hilbert-Schmidt diagnostics.

    Raises:
        EnvelopeError: If v vanishes.
        SimilarityError: If U is numerically singular.
    """
    a = a_star(v)
    grid = v.grid
    V = reflection_operator(v)
    psiV = smoothed_kernel(window_time_function("psi", a), v, workers)
    phiV = smoothed_kernel(window_time_function("phi", a), v, workers)
    VpsiV = sandwich_kernel(window_time_function("psi", a), v, workers)

    identity = np.eye(grid.points)
    U = identity + psiV.operator_matrix
    try:
        U_inv = scipy.linalg.inv(U)
    except (np.linalg.LinAlgError, ValueError) as e:
        condition = float(np.linalg.cond(U))
        raise SimilarityError(f"U = I + T(psi_a)V is not invertible (condition {condition:.3e}): {e}",
                              condition) from e
    if not np.all(np.isfinite(U_inv)):
        condition = float(np.linalg.cond(U))
        raise SimilarityError(f"U inverse is not finite (condition {condition:.3e}).", condition)

    B = U_inv @ (VpsiV.operator_matrix + phiV.operator_matrix)
    residual = float(np.linalg.norm(U_inv @ U - identity))
    inverse_distance = float(np.linalg.norm(U_inv - identity))
    report = SimilarityReport(
        a_star=a,
        v_norm=norm_l2(v),
        hs_psiV=psiV.hs_norm(),
        hs_phiV=phiV.hs_norm(),
        U=KernelOperator.from_operator_matrix(grid, U),
        U_inv=KernelOperator.from_operator_matrix(grid, U_inv),
        B=KernelOperator.from_operator_matrix(grid, B),
        V=V,
        psiV=psiV,
        phiV=phiV,
        VpsiV=VpsiV,
        b_hs=float(np.linalg.norm(B)),
        residual=residual,
        inverse_distance=inverse_distance,
    )
    logger.info(
        f"Similarity built: a*={a:.6g}, ||T(psi)V||={report.hs_psiV:.6g}, ||B||={report.b_hs:.6g}, "
        f"||U^-1 - I||={inverse_distance:.6g}"
    )
    return report


def first_form_defect(report: SimilarityReport) -> float:
    """Relative HS distance between B and T(phi)V + U^{-1}(V T(psi)V - T(psi)V T(phi)V)."""
    phi = report.phiV.operator_matrix
    first = phi + report.U_inv.operator_matrix @ (
        report.VpsiV.operator_matrix - report.psiV.operator_matrix @ phi
    )
    second = report.B.operator_matrix
    scale = np.linalg.norm(second)
    if scale == 0.0:
        return float(np.linalg.norm(first))
    return float(np.linalg.norm(first - second) / scale)


def similarity_residual(report: SimilarityReport, x: GridFunction) -> float:
    """||(A - V) U x - U (A - B) x||_2 / (||x||_2 + ||A x||_2)."""
    if x.grid != report.V.grid:
        raise EnvelopeError("Test vector lives on a different grid than the similarity transform.")
    A = differentiation_operator(x.grid)
    Ax = A.apply(x)
    scale = norm_l2(x) + norm_l2(Ax)
    if scale == 0.0:
        raise EnvelopeError("Similarity residual needs a nonzero test vector.")
    Ux = report.U.apply(x)
    left = A.apply(Ux).values - report.V.apply(Ux).values
    right = report.U.apply(GridFunction(x.grid, Ax.values - report.B.apply(x).values)).values
    return float(norm_l2(GridFunction(x.grid, left - right)) / scale)


# --- Envelope ---

def _validate_pair(A_diag, B) -> Tuple[np.ndarray, np.ndarray]:
    A_diag = np.asarray(A_diag)
    if np.iscomplexobj(A_diag):
        if np.any(np.abs(A_diag.imag) > 0):
            raise EnvelopeError("A must be self-adjoint: diagonal entries must be real.")
        A_diag = A_diag.real
    A_diag = np.asarray(A_diag, dtype=float).reshape(-1)
    B = np.asarray(B, dtype=complex)
    if B.ndim != 2 or B.shape != (A_diag.size, A_diag.size):
        raise EnvelopeError(f"B has shape {B.shape}, expected {(A_diag.size, A_diag.size)}.")
    if A_diag.size == 0:
        raise EnvelopeError("Envelope needs at least one eigenvalue of A.")
    return A_diag, B


def tail_sequence(A_diag, B) -> np.ndarray:
    """
    b_n = ||B - E_n B E_n||_2 for n = 1..ceil(max|A|)+1, E_n the projector on
    the eigenvalues in [-n, n].

    Each b_n sums |B_ij|^2 over the entries outside the covered block, so the
    sequence is nonincreasing and is exactly 0 once all eigenvalues are covered.
    """
    A_diag, B = _validate_pair(A_diag, B)
    weights = np.abs(B) ** 2
    magnitudes = np.abs(A_diag)
    n_max = int(math.ceil(float(magnitudes.max()))) + 1
    tail = np.empty(n_max)
    for n in range(1, n_max + 1):
        inside = magnitudes <= n
        # Same summation order for every n keeps the rounded sums monotone.
        outside = np.where(np.outer(inside, inside), 0.0, weights)
        tail[n - 1] = math.sqrt(float(outside.sum()))
    return tail


@dataclass(frozen=True, eq=False)
class Envelope:
    """
    Step envelope: f(r) = 2 ||B||_2 unless some n >= 1 satisfies
    n < |r| - 2 ||B||_2, in which case f(r) = min(2 ||B||_2, 3 b_n) with n
    the largest such index.
    """
    hs_total: float
    tail: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return int(self.tail.size)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        cap = 2.0 * self.hs_total
        excess = np.abs(r) - cap
        index = np.minimum(np.ceil(excess) - 1.0, self.n_max)
        covered = index >= 1
        safe = np.where(covered, index, 1).astype(int)
        values = np.where(covered, np.minimum(cap, 3.0 * self.tail[safe - 1]), cap)
        if values.ndim == 0:
            return float(values)
        return values

    def l2_tail_norm(self) -> float:
        return float(np.linalg.norm(self.tail))

    def default_extent(self) -> float:
        return float(self.n_max + 2.0 * self.hs_total + 1.0)

    def sample(self, r_max: Optional[float] = None, samples: int = 2001) -> Tuple[np.ndarray, np.ndarray]:
        if samples < 2:
            raise EnvelopeError(f"Envelope sampling needs at least 2 points, got {samples}.")
        extent = self.default_extent() if r_max is None else float(r_max)
        r = np.linspace(-extent, extent, samples)
        return r, self(r)


def envelope(A_diag, B) -> Envelope:
    A_diag, B = _validate_pair(A_diag, B)
    env = Envelope(hs_total=float(np.linalg.norm(B)), tail=tail_sequence(A_diag, B))
    logger.debug(f"Envelope: ||B||={env.hs_total:.6g}, n_max={env.n_max}, l2 tail={env.l2_tail_norm():.6g}")
    return env


@dataclass(frozen=True)
class ContainmentReport:
    violations: int
    margin: float
    eigenvalues: Tuple[complex, ...] = field(repr=False)


def _eigenvalues(matrix: np.ndarray) -> np.ndarray:
    try:
        eigs = scipy.linalg.eigvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"Dense eigensolver failed on a {matrix.shape[0]}x{matrix.shape[0]} matrix: {e}") from e
    if not np.all(np.isfinite(eigs)):
        raise EigensolverError("Dense eigensolver returned non-finite eigenvalues.")
    return eigs


def _containment(env: Envelope, eigs: np.ndarray) -> Tuple[int, float]:
    bound = env(eigs.real)
    heights = np.abs(eigs.imag)
    violations = int(np.count_nonzero(
        heights > bound * (1.0 + CONTAINMENT_RELATIVE_SLACK) + CONTAINMENT_ABSOLUTE_SLACK
    ))
    margin = float(np.min(bound - heights))
    return violations, margin


def sorted_eigenvalues(eigs, tolerance: float = 1e-9) -> Tuple[complex, ...]:
    """
    Orders by (Re, Im). Real parts closer than tolerance * max(1, max |Re|) are
    treated as equal, so conjugate pairs come out with the negative imaginary part first.
    """
    values = [complex(z) for z in eigs]
    scale = tolerance * max([1.0] + [abs(z.real) for z in values])
    return tuple(sorted(values, key=lambda z: (round(z.real / scale), z.imag)))


def check_containment(A_diag, B, env: Envelope) -> ContainmentReport:
    """
    Counts eigenvalues of diag(A) + B outside |Im lambda| <= f(Re lambda).

    Raises:
        EnvelopeError: For mismatched shapes or matrices above the dense size limit.
        EigensolverError: If the eigensolver fails.
    """
    A_diag, B = _validate_pair(A_diag, B)
    if A_diag.size > CONTAINMENT_SIZE_LIMIT:
        raise EnvelopeError(
            f"Containment check limited to size {CONTAINMENT_SIZE_LIMIT}, got {A_diag.size}."
        )
    eigs = _eigenvalues(np.diag(A_diag) + B)
    violations, margin = _containment(env, eigs)
    if violations:
        logger.warning(f"{violations} eigenvalue(s) outside the envelope (margin {margin:.3e}).")
    return ContainmentReport(violations=violations, margin=margin, eigenvalues=sorted_eigenvalues(eigs))


@dataclass(frozen=True, eq=False)
class OperatorEnvelope:
    env: Envelope
    eigs: Tuple[complex, ...] = field(repr=False)
    similarity: Optional[SimilarityReport] = field(repr=False)
    violations: int
    margin: float


def fourier_conjugate(B: np.ndarray) -> np.ndarray:
    """F B F^H for the unitary DFT F, the basis in which A is diag(2 pi fftfreq)."""
    return np.fft.ifft(np.fft.fft(B, axis=0, norm="ortho"), axis=1, norm="ortho")


def operator_envelope(v: GridFunction, workers: int = 1) -> OperatorEnvelope:
    """
    Envelope of the finite section of A - V through its similar form A - B.

    Containment of the finite-section eigenvalues is advisory: violations
    are logged and reported, not raised.
    """
    grid = v.grid
    A_diag = 2.0 * np.pi * np.fft.fftfreq(grid.points, grid.spacing)
    if not np.any(v.values):
        logger.info("Zero perturbation: envelope vanishes and the spectrum is the frequency grid.")
        B_hat = np.zeros((grid.points, grid.points), dtype=complex)
        similarity = None
    else:
        similarity = build_similarity(v, workers)
        B_hat = -fourier_conjugate(similarity.B.operator_matrix)
    env = envelope(A_diag, B_hat)
    eigs = _eigenvalues(np.diag(A_diag) + B_hat)
    violations, margin = _containment(env, eigs)
    if violations:
        logger.warning(f"Finite section: {violations} eigenvalue(s) outside the envelope (advisory).")
    return OperatorEnvelope(env=env, eigs=sorted_eigenvalues(eigs), similarity=similarity,
                            violations=violations, margin=margin)
