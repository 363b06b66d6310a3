# api.py
#
# Central application controller (facade) shared by the CLI and tests.
# Every operation returns (ExitCode, payload) and never raises; reports
# embed the resolved configuration.

import logging
from enum import IntEnum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import SpecEnvConfig
from .core.finite_module import (
    APFunction,
    FiniteModuleRep,
    ProximityError,
    SpectralDomainError,
    Symbol,
    ap1_reciprocal_norm,
    check_spectral_mapping,
    mh_estimate,
    named_symbol,
    resolvent_norm_check,
    spectral_report_dict,
)
from .core.fourier_core import Grid, GridFunction, gaussian, make_grid, norm_l2, sample, sample_frequencies
from .core.involution_operators import predicted_hs, sandwich_kernel, smoothed_kernel, window_time_function
from .core.l1_bounds import l1_bound_check
from .core.similarity_envelope import (
    EnvelopeError,
    a_star,
    check_containment,
    envelope,
    operator_envelope,
    similarity_residual,
)
from .core.window_functions import create_window
from .services.verification import VerificationContext, run_verification
from .storage.repository import (
    APFunctionRepository,
    EnvelopeRepository,
    GridFunctionRepository,
    MatrixRepository,
    ReportRepository,
)

logger = logging.getLogger(__name__)

Result = Tuple["ExitCode", Any]


class ExitCode(IntEnum):
    OK = 0
    VALIDATION_ERROR = 1
    NUMERICAL_FAILURE = 2


def residual_test_vector(grid: Grid) -> GridFunction:
    """Gaussian bump at 0, narrow against R/4 and band-limited below Nyquist/4."""
    return gaussian(grid, max(0.25, 8.0 * grid.spacing))


def resample(v: GridFunction, points: int) -> GridFunction:
    """Linear interpolation of v onto a grid with the same half-width and `points` nodes."""
    if points == v.grid.points:
        return v
    grid = make_grid(v.grid.half_width, points)
    real = np.interp(grid.nodes, v.grid.nodes, v.values.real, left=0.0, right=0.0)
    imag = np.interp(grid.nodes, v.grid.nodes, v.values.imag, left=0.0, right=0.0)
    return GridFunction(grid, real + 1j * imag)


def parse_frequencies(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(item) for item in text.replace(" ", "").split(",") if item != "")
    except ValueError:
        raise SpectralDomainError(f"Malformed frequency list '{text}'.") from None
    if not values:
        raise SpectralDomainError("Frequency list is empty.")
    return values


class SpecEnvAPI:
    """
    Application logic behind the command line.

    It returns structured data instead of printing to stdout.
    """

    def __init__(self, config: SpecEnvConfig, workers: int = 1):
        self.config = config
        self.workers = workers
        self.grids = GridFunctionRepository()
        self.matrices = MatrixRepository()
        self.envelopes = EnvelopeRepository()
        self.reports = ReportRepository()
        logger.info(f"SpecEnvAPI initialized with {workers} worker thread(s).")

    def _config_block(self, run: Dict[str, Any]) -> Dict[str, Any]:
        block = self.config.as_dict()
        block["run"] = {k: (str(v) if isinstance(v, Path) else v) for k, v in run.items()}
        return block

    def _guard(self, operation: str, action: Callable[[], Any]) -> Result:
        try:
            return ExitCode.OK, action()
        except ArithmeticError as e:
            logger.error(f"Numerical failure in {operation}: {e}", exc_info=True)
            return ExitCode.NUMERICAL_FAILURE, f"Numerical failure in {operation}: {e}"
        except ValueError as e:
            logger.error(f"Invalid input for {operation}: {e}", exc_info=True)
            return ExitCode.VALIDATION_ERROR, f"Invalid input for {operation}: {e}"
        except Exception as e:
            logger.error(f"An unexpected error occurred in {operation}: {e}", exc_info=True)
            return ExitCode.NUMERICAL_FAILURE, f"An unexpected error occurred in {operation}: {e}"

    # --- windows ---

    def windows(self, family: str, a: float, n: Optional[float], R: float, N: int, out: Path) -> Result:
        """Writes the symbol and its time-domain transform on one grid."""
        def action() -> Dict[str, Any]:
            window = create_window(family, a, n)
            grid = make_grid(R, N)
            symbol = sample_frequencies(grid, window.symbol())
            time_function = sample(grid, window.time_function)
            self.grids.save_window(out, symbol, time_function)
            norms = window.exact_norms()
            return {"family": family, "a": a, "n": n, "l2": norms.l2, "l2_deriv": norms.l2_deriv, "out": str(out)}
        return self._guard("windows", action)

    # --- l1bound ---

    def l1bound(self, input_path: Path, out: Path, edge_tolerance: Optional[float] = None) -> Result:
        def action() -> Dict[str, Any]:
            f = self.grids.load(input_path)
            tolerances = self.config.get_tolerances()
            edge = tolerances["edge_decay"] if edge_tolerance is None else edge_tolerance
            check = l1_bound_check(f, edge_tolerance=edge, slack=tolerances["bound_slack"])
            report = check.as_dict()
            report["config"] = self._config_block({"input": input_path, "out": out, "edge_tolerance": edge})
            self.reports.save(out, report)
            return report
        return self._guard("l1bound", action)

    # --- kernel ---

    def kernel(self, h: str, a: float, v_path: Path, sandwich: bool, out: Path, report_path: Path) -> Result:
        """
        Assembles T(h)V (or V T(h)V) for the perturbation in v_path.

        For the sandwich kernel the prediction is the upper bound
        sqrt(1/2) ||h||_inf ||v||_2^2 with ||h||_inf taken over the sampled midpoints.
        """
        def action() -> Dict[str, Any]:
            v = self.grids.load(v_path)
            time_function = window_time_function(h, a)
            v_norm = norm_l2(v)
            if sandwich:
                operator = sandwich_kernel(time_function, v, self.workers)
                points = np.arange(-v.grid.points, v.grid.points + 1) * (v.grid.spacing / 2.0)
                predicted = float(np.sqrt(0.5) * np.max(np.abs(time_function(points))) * v_norm**2)
                prediction = "upper_bound"
            else:
                operator = smoothed_kernel(time_function, v, self.workers)
                predicted = predicted_hs(h, a, v_norm)
                prediction = "identity"
            hs = operator.hs_norm()
            rel_err = abs(hs - predicted) / predicted if predicted else float("inf")
            self.matrices.save(out, operator.matrix)
            report = {
                "hs_norm": hs,
                "hs_predicted": predicted,
                "rel_err": rel_err,
                "prediction": prediction,
                "config": self._config_block(
                    {"h": h, "a": a, "v": v_path, "sandwich": sandwich, "out": out, "report": report_path}
                ),
            }
            self.reports.save(report_path, report)
            return report
        return self._guard("kernel", action)

    # --- specmap ---

    def specmap(self, freqs: str, symbol: str, out: Path, lam: Optional[complex] = None) -> Result:
        def action() -> Dict[str, Any]:
            rep = FiniteModuleRep(parse_frequencies(freqs))
            if symbol.startswith("ap1:"):
                h = APFunctionRepository().load(symbol.split(":", 1)[1])
            else:
                h = named_symbol(symbol)
            tolerances = self.config.get_tolerances()
            report: Dict[str, Any] = spectral_report_dict(check_spectral_mapping(rep, h, tolerances["spectral_match"]))
            if lam is not None:
                resolvent = resolvent_norm_check(rep, h, lam)
                report["resolvent"] = {"lambda": lam, "norm": resolvent.norm, "dist_bound": resolvent.dist_bound,
                                       "tight": resolvent.tight}
                report["resolvent"]["ap1_norm"] = self._ap1_norm(h, lam) if isinstance(h, APFunction) else None
                report["mh_estimate"] = self._mh_estimate(rep, h, lam)
            report["config"] = self._config_block({"freqs": freqs, "symbol": symbol, "out": out, "lambda": lam})
            self.reports.save(out, report)
            return report
        return self._guard("specmap", action)

    def _ap1_norm(self, h: APFunction, lam: complex) -> Optional[float]:
        """||1/(lam - h)||_AP1, or None when lam is too close to the range of h or the exponents are incommensurate."""
        try:
            return ap1_reciprocal_norm(h, lam, **self.config.get_ap1_options())
        except (ProximityError, SpectralDomainError) as e:
            logger.warning(f"No AP1 norm for lambda={lam}: {e}")
            return None

    def _mh_estimate(self, rep: FiniteModuleRep, h: Symbol, lam: complex) -> Optional[Dict[str, Any]]:
        """Window estimate of M_h(lambda) on the hull of the frequencies, or None when lambda is too close to h."""
        grid = self.config.get_grid()
        support = [(min(rep.frequencies), max(rep.frequencies))]
        try:
            estimate = mh_estimate(h, lam, support, make_grid(grid["R"], grid["N"]), **self.config.get_mh_options())
        except (ProximityError, SpectralDomainError) as e:
            logger.warning(f"No M_h estimate for lambda={lam}: {e}")
            return None
        return {"M": estimate.M, "a_list": list(estimate.a_list)}

    # --- envelope ---

    def envelope_from_perturbation(self, v_path: Path, N: Optional[int], out: Path, eigs: Path,
                                   report_path: Path) -> Result:
        """Finite-section envelope of A - V; containment is advisory."""
        def action() -> Dict[str, Any]:
            v = self.grids.load(v_path)
            if N is not None:
                v = resample(v, N)
            result = operator_envelope(v, self.workers)
            samples = self.config.section("envelope")["samples"]
            r, f = result.env.sample(samples=samples)
            self.envelopes.save_envelope(out, r, f)
            self.envelopes.save_eigenvalues(eigs, result.eigs)
            residual = None
            a = None
            if result.similarity is not None:
                residual = similarity_residual(result.similarity, residual_test_vector(v.grid))
                a = a_star(v)
            report = {
                "hs_B": result.env.hs_total,
                "a_star": a,
                "violations": result.violations,
                "margin": result.margin,
                "residual": residual,
                "l2_tail_norm": result.env.l2_tail_norm(),
                "advisory": True,
                "config": self._config_block(
                    {"v": v_path, "N": N, "out": out, "eigs": eigs, "report": report_path}
                ),
            }
            self.reports.save(report_path, report)
            return report
        return self._guard("envelope", action)

    def envelope_from_matrices(self, matrix_a: Path, matrix_b: Path, out: Path, eigs: Path,
                               report_path: Path) -> Result:
        """Envelope of A + B for a self-adjoint A; B is conjugated into the eigenbasis of A."""
        def action() -> Dict[str, Any]:
            A_diag, eigenvectors = self.matrices.load_self_adjoint(matrix_a)
            B = self.matrices.load(matrix_b)
            if eigenvectors is not None:
                if B.shape != eigenvectors.shape:
                    raise EnvelopeError(f"B has shape {B.shape}, expected {eigenvectors.shape}.")
                B = eigenvectors.conj().T @ B @ eigenvectors
            env = envelope(A_diag, B)
            containment = check_containment(A_diag, B, env)
            samples = self.config.section("envelope")["samples"]
            r, f = env.sample(samples=samples)
            self.envelopes.save_envelope(out, r, f)
            self.envelopes.save_eigenvalues(eigs, containment.eigenvalues)
            report = {
                "hs_B": env.hs_total,
                "a_star": None,
                "violations": containment.violations,
                "margin": containment.margin,
                "residual": None,
                "l2_tail_norm": env.l2_tail_norm(),
                "advisory": False,
                "config": self._config_block(
                    {"matrixA": matrix_a, "matrixB": matrix_b, "out": out, "eigs": eigs, "report": report_path}
                ),
            }
            self.reports.save(report_path, report)
            return report
        return self._guard("envelope", action)

    # --- verify ---

    def verify(self, suite: str, out: Optional[Path] = None) -> Result:
        """
        Runs verification suites. A failing check yields NUMERICAL_FAILURE
        with the check list as payload.
        """
        checks: List[Dict[str, Any]] = []

        def action() -> List[Dict[str, Any]]:
            results = run_verification(suite, VerificationContext(self.config, self.workers))
            checks.extend(c.as_dict() for c in results)
            if out is not None:
                self.reports.save(out, {"config": self._config_block({"suite": suite, "out": out}),
                                        "checks": checks})
            return checks

        code, payload = self._guard("verify", action)
        if code is ExitCode.OK and any(not c["pass"] for c in checks):
            return ExitCode.NUMERICAL_FAILURE, payload
        return code, payload
