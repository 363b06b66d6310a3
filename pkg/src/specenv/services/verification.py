# verification.py
#
# Registry of verification suites. Each suite produces named checks of the
# form {check, expected, actual, tol, pass}; the runner executes suites in a
# thread pool and orders checks by name.

import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Type

import numpy as np

from ..config import SpecEnvConfig
from ..core import finite_module as fm
from ..core.fourier_core import Grid, gaussian, indicator, make_grid, norm_inf, norm_l2, sample
from ..core.involution_operators import (
    commutator_residual,
    hs_predictions,
    invariance_ratio,
    sandwich_kernel,
    smoothed_kernel,
    vr_smallness,
    window_time_function,
)
from ..core.l1_bounds import (
    generalized_phi_l1_bound,
    l1_bound_check,
    numeric_a_opt,
    phi_l1_reference_bounds,
    psi_l1_reference_bound,
)
from ..core.similarity_envelope import (
    a_star,
    build_similarity,
    check_containment,
    envelope,
    first_form_defect,
    neumann_bound,
    similarity_residual,
    tail_sequence,
)
from ..core.window_functions import (
    create_window,
    phi_general_time,
    phi_time,
    psi_time,
    symbol_identity_exact,
    symbol_identity_residual,
    gamma_time,
)
from .containment_trials import random_pair, run_trials

logger = logging.getLogger(__name__)

ALL_SUITES = "all"
ALGEBRAIC_EDGE_TOLERANCE = 1e-2


class SuiteError(ValueError):
    """Raised for unknown verification suites."""
    pass


@dataclass(frozen=True)
class CheckResult:
    check: str
    expected: Any
    actual: Any
    tol: float
    passed: bool

    def as_dict(self) -> Dict[str, Any]:
        return {"check": self.check, "expected": self.expected, "actual": self.actual,
                "tol": self.tol, "pass": self.passed}


def relative_check(name: str, expected: float, actual: float, tol: float) -> CheckResult:
    passed = abs(actual - expected) <= tol * abs(expected)
    return CheckResult(name, float(expected), float(actual), tol, bool(passed))


def absolute_check(name: str, expected: float, actual: float, tol: float) -> CheckResult:
    return CheckResult(name, float(expected), float(actual), tol, bool(abs(actual - expected) <= tol))


def upper_bound_check(name: str, bound: float, actual: float, tol: float = 0.0) -> CheckResult:
    """actual <= bound * (1 + tol)."""
    return CheckResult(name, float(bound), float(actual), tol, bool(actual <= bound * (1.0 + tol)))


def boolean_check(name: str, actual: bool) -> CheckResult:
    return CheckResult(name, True, bool(actual), 0.0, bool(actual))


@dataclass
class VerificationContext:
    config: SpecEnvConfig
    workers: int = 1

    def grid(self) -> Grid:
        grid = self.config.get_grid()
        return make_grid(grid["R"], grid["N"])

    def kernel_grid(self, scale: float = 1.0, points_scale: float = 1.0) -> Grid:
        grid = self.config.get_kernel_grid()
        return make_grid(grid["R"] * scale, int(grid["N"] * points_scale))

    @property
    def tolerances(self) -> Dict[str, float]:
        return self.config.get_tolerances()


class VerificationSuite(ABC):
    """Base class; subclasses register under a suite id."""

    _suite_registry: Dict[str, Type["VerificationSuite"]] = {}

    def __init_subclass__(cls, *, suite_id: str, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if suite_id in cls._suite_registry:
            raise TypeError(f"Duplicate verification suite id '{suite_id}'.")
        cls.suite_id = suite_id
        cls._suite_registry[suite_id] = cls

    @abstractmethod
    def run(self, context: VerificationContext) -> List[CheckResult]:
        ...

    @staticmethod
    def available_suites() -> List[str]:
        return sorted(VerificationSuite._suite_registry)

    @staticmethod
    def get_suite_class(suite_id: str) -> Type["VerificationSuite"]:
        if suite_id not in VerificationSuite._suite_registry:
            available = ", ".join(VerificationSuite.available_suites() + [ALL_SUITES])
            raise SuiteError(f"Unknown verification suite '{suite_id}'. Available: {available}.")
        return VerificationSuite._suite_registry[suite_id]


# --- Suites ---

class NormsSuite(VerificationSuite, suite_id="norms"):
    """Closed-form window norms against segment-aligned quadrature, and the symbol identity."""

    LABELS = {"trapezoid": "τ", "omega": "ω", "triangle": "△", "gentrap": "τ"}
    TOLERANCE = 1e-4

    def run(self, context: VerificationContext) -> List[CheckResult]:
        checks = []
        for family, n in (("trapezoid", None), ("omega", None), ("triangle", None), ("gentrap", 3.0)):
            window = create_window(family, 1.0, n)
            exact = window.exact_norms()
            numeric = window.symbol().quadrature_norms()
            label = self.LABELS[family]
            index = "1" if n is None else "{1,3}"
            checks.append(relative_check(f"‖{label}_{index}‖₂", exact.l2, numeric.l2, self.TOLERANCE))
            checks.append(relative_check(f"‖{label}′_{index}‖₂", exact.l2_deriv, numeric.l2_deriv, self.TOLERANCE))
        checks.append(boolean_check("ξ·ω_1(ξ) = 1 − τ_1(ξ) (segment polynomials)", symbol_identity_exact(1.0)))
        xi = np.linspace(-8.0, 8.0, 1_000_000)
        checks.append(upper_bound_check("ξ·ω_1(ξ) = 1 − τ_1(ξ) (10⁶ points)", 1e-12,
                                        symbol_identity_residual(1.0, xi)))
        return checks


class L1Suite(VerificationSuite, suite_id="l1"):
    """L1 bounds for the window transforms and the estimate on the test corpus."""

    def run(self, context: VerificationContext) -> List[CheckResult]:
        grid = context.grid()
        slack = context.tolerances["bound_slack"]
        references = phi_l1_reference_bounds()
        checks = [boolean_check("φ-bounds sharpen: split ≥ log ≥ √3",
                                references["split"] >= references["log"] >= references["sqrt3"])]

        corpus = {
            "φ_1": (sample(grid, lambda t: phi_time(1.0, t)), ALGEBRAIC_EDGE_TOLERANCE),
            "ψ_1": (sample(grid, lambda t: psi_time(1.0, t)), ALGEBRAIC_EDGE_TOLERANCE),
            "γ_1": (sample(grid, lambda t: gamma_time(1.0, t)), ALGEBRAIC_EDGE_TOLERANCE),
            "φ_{1,3}": (sample(grid, lambda t: phi_general_time(1.0, 3.0, t)), ALGEBRAIC_EDGE_TOLERANCE),
            "Gaussian": (gaussian(grid, 1.0), context.tolerances["edge_decay"]),
        }
        results = {}
        for name, (f, edge) in corpus.items():
            results[name] = l1_bound_check(f, edge_tolerance=edge, slack=slack)
            checks.append(boolean_check(f"‖{name}‖₁² ≤ 2‖f̂‖₂‖f̂′‖₂", results[name].holds))

        checks.append(upper_bound_check("‖φ_1‖₁ ≤ √3", references["sqrt3"], results["φ_1"].l1))
        checks.append(upper_bound_check("‖φ_{1,3}‖₁ ≤ √2", generalized_phi_l1_bound(3.0), results["φ_{1,3}"].l1))
        checks.append(upper_bound_check("‖ψ_1‖₁ ≤ 1.35", psi_l1_reference_bound(1.0), results["ψ_1"].l1))
        checks.append(upper_bound_check("‖ψ_1‖_∞ ≤ 1/π + 1", 1.0 / math.pi + 1.0, norm_inf(corpus["ψ_1"][0])))

        exact = create_window("trapezoid", 1.0).exact_norms()
        checks.append(relative_check("a_opt(τ_1) golden section", exact.l2_deriv / exact.l2,
                                     numeric_a_opt(exact.l2, exact.l2_deriv), 1e-6))
        return checks


class KernelsSuite(VerificationSuite, suite_id="kernels"):
    """Hilbert-Schmidt formulas for the smoothed reflection kernels."""

    INDICATOR_PHI_TOLERANCE = 5e-3
    PSI_TOLERANCE = 1e-2
    SMOOTH_TOLERANCE = 1e-3

    def run(self, context: VerificationContext) -> List[CheckResult]:
        grid = context.kernel_grid()
        workers = context.workers
        v = indicator(grid, -1.0, 1.0)
        v_norm = norm_l2(v)
        checks = []
        for label, a in (("0.5", 0.5), ("1", 1.0), ("a*", a_star(v))):
            predicted = hs_predictions(a, v_norm)
            phi = smoothed_kernel(window_time_function("phi", a), v, workers).hs_norm()
            checks.append(relative_check(f"‖𝒯(φ_a)V‖₂, a={label}", predicted["phi"], phi,
                                         self.INDICATOR_PHI_TOLERANCE))
            psi = smoothed_kernel(window_time_function("psi", a), v, workers).hs_norm()
            checks.append(relative_check(f"‖𝒯(ψ_a)V‖₂, a={label}", predicted["psi"], psi, self.PSI_TOLERANCE))

        sandwich = sandwich_kernel(window_time_function("psi", 1.0), v, workers).hs_norm()
        checks.append(upper_bound_check("‖V𝒯(ψ_1)V‖₂ ≤ (π+1)/(π√2)‖v‖₂²",
                                        hs_predictions(1.0, v_norm)["sandwich_psi_bound"], sandwich))

        smooth_v = gaussian(grid, 0.5)
        smooth_norm = norm_l2(smooth_v)
        for name in ("phi", "gamma"):
            actual = smoothed_kernel(window_time_function(name, 1.0), smooth_v, workers).hs_norm()
            symbol = "φ" if name == "phi" else "γ"
            checks.append(relative_check(f"‖𝒯({symbol}_1)V‖₂, Gaussian v", hs_predictions(1.0, smooth_norm)[name],
                                         actual, self.SMOOTH_TOLERANCE))

        fine = make_grid(grid.half_width, 4 * grid.points)
        v_fine = indicator(fine, -1.0, 1.0)
        checks.append(relative_check("‖VR(iλ_ε;A)‖₂, λ_ε=1", norm_l2(v_fine) / math.sqrt(2.0),
                                     vr_smallness(v_fine, 1.0), 1e-3))

        x = gaussian(grid, 0.25)
        checks.append(upper_bound_check("commutator residual A𝒯(ψ_1)V − 𝒯(ψ_1)VA − V + 𝒯(φ_1)V", 5e-3,
                                        commutator_residual(1.0, smooth_v, x, workers)))

        coarse = make_grid(grid.half_width, grid.points // 2)
        ratio = invariance_ratio(
            1.0, lambda g: indicator(g, -1.0, 1.0), lambda g: gaussian(g, 0.25), coarse, grid, workers
        )
        checks.append(absolute_check("W^{1,2} invariance ratio N→2N", 1.0, ratio, 1e-2))
        return checks


class SpectralMappingSuite(VerificationSuite, suite_id="specmap"):
    """Spectral mapping, resolvent identities and AP1 norms on diagonal representations."""

    def run(self, context: VerificationContext) -> List[CheckResult]:
        tolerances = context.tolerances
        match = tolerances["spectral_match"]
        rng = np.random.default_rng(7)
        reps = {
            "{−1,0,2}": fm.FiniteModuleRep((-1.0, 0.0, 2.0)),
            "{0,π}": fm.FiniteModuleRep((0.0, math.pi)),
            "{±1,±3,0.5}": fm.FiniteModuleRep((-3.0, -1.0, 0.5, 1.0, 3.0)),
            "random(12)": fm.FiniteModuleRep(tuple(rng.uniform(-5.0, 5.0, 12))),
        }
        ap1 = fm.APFunction((2.0, 1.0, 0.5j), (0.0, 1.0, 2.0))
        symbols = {
            "id": fm.named_symbol("id"),
            "ξ²": fm.named_symbol("square"),
            "e^{iξ}": fm.named_symbol("exp"),
            "ξ³ − 2ξ": lambda xi: np.asarray(xi) ** 3 - 2.0 * np.asarray(xi),
            "τ_1": fm.named_symbol("trapezoid:1"),
            "AP₁": ap1,
        }
        checks = []
        for rep_name, rep in reps.items():
            for symbol_name, h in symbols.items():
                report = fm.check_spectral_mapping(rep, h, match)
                checks.append(upper_bound_check(f"σ(T({symbol_name})) = h(Λ) on {rep_name}", match, report.hausdorff))

        rep = reps["{−1,0,2}"]
        resolvent = fm.resolvent_norm_check(rep, fm.named_symbol("id"), 3 + 4j)
        checks.append(absolute_check("‖(λ−T(id))⁻¹‖, λ=3+4i", 1.0 / math.sqrt(17.0), resolvent.norm,
                                     tolerances["zero"]))
        checks.append(boolean_check("resolvent norm = 1/dist", resolvent.tight))

        t0 = 1.0
        unitary = reps["{0,π}"]
        shift = fm.APFunction((1.0,), (t0,))
        operator = 2.0 * np.eye(unitary.size) - fm.ap1_apply(shift, unitary)
        norm = float(np.linalg.norm(np.linalg.inv(operator), 2))
        checks.append(absolute_check("‖(2−T(t₀))⁻¹‖ = 1", 1.0, norm, tolerances["zero"]))
        ap1_options = context.config.get_ap1_options()
        checks.append(absolute_check("‖1/(2−e^{iξ})‖_AP₁ = 1", 1.0,
                                     fm.ap1_reciprocal_norm(fm.APFunction((1.0,), (1.0,)), 2.0, **ap1_options), 1e-8))
        checks.append(absolute_check("‖1/(0.5−e^{iξ})‖_AP₁ = 2", 2.0,
                                     fm.ap1_reciprocal_norm(fm.APFunction((1.0,), (1.0,)), 0.5, **ap1_options), 1e-8))
        # h = 0, lambda = 1: every window term is ||phi_a||_1, between |phi_a^(0)| = 1 and sqrt(3).
        zero = lambda xi: np.zeros_like(np.asarray(xi, dtype=float))
        mh = fm.mh_estimate(zero, 1.0, [(-1.0, 1.0)], context.grid(), **context.config.get_mh_options())
        checks.append(upper_bound_check("M_0(1) ≤ √3", math.sqrt(3.0), mh.M, 1e-6))
        checks.append(boolean_check("M_0(1) ≥ 1", mh.M >= 1.0 - 1e-9))
        checks.append(upper_bound_check("T(AP₁) = Σ c_n T(t_n)", tolerances["zero"],
                                        float(np.max(np.abs(fm.ap1_apply(ap1, reps["random(12)"])
                                                            - fm.calculus_operator(ap1, reps["random(12)"]))))))
        checks.append(upper_bound_check("Hilbert resolvent identity", tolerances["zero"],
                                        fm.hilbert_resolvent_defect(reps["random(12)"], 0.3 + 1.1j, -0.7 - 0.4j)))
        checks.append(boolean_check("σ(generator) = Λ", fm.check_generator_spectrum(reps["random(12)"], match)))
        return checks


class SimilaritySuite(VerificationSuite, suite_id="similarity"):
    """The similarity transform U = I + T(psi_a*)V and the operator B."""

    def run(self, context: VerificationContext) -> List[CheckResult]:
        grid = context.kernel_grid()
        v = indicator(grid, -1.0, 1.0)
        report = build_similarity(v, context.workers)
        v_norm = report.v_norm
        x = gaussian(grid, 0.25)
        checks = [
            absolute_check("‖𝒯(ψ_{a*})V‖₂ = 0.5", 0.5, report.hs_psiV, 1e-2),
            absolute_check("‖𝒯(ψ_{a*})V‖₂ closed form at a*", 0.5,
                           hs_predictions(report.a_star, v_norm)["psi"], 1e-12),
            upper_bound_check("‖U⁻¹ − I‖₂ ≤ 1", 1.0, report.inverse_distance, 1e-2),
            upper_bound_check("‖U⁻¹ − I‖₂ ≤ q/(1−q)", neumann_bound(report.hs_psiV), report.inverse_distance, 1e-9),
            upper_bound_check("‖U⁻¹U − I‖₂", 1e-8, report.residual),
            upper_bound_check("‖B‖₂ ≤ 2.45‖v‖₂²", 2.45 * v_norm**2, report.b_hs, 1e-2),
            upper_bound_check("B: displayed forms agree", 1e-8, first_form_defect(report)),
            upper_bound_check("similarity residual", 1e-2, similarity_residual(report, x)),
        ]
        del report

        residuals = []
        for points_scale in (0.25, 0.5):
            refined = context.kernel_grid(scale=0.5, points_scale=points_scale)
            local = build_similarity(indicator(refined, -1.0, 1.0), context.workers)
            residuals.append(similarity_residual(local, gaussian(refined, 0.25)))
            del local
        checks.append(boolean_check("similarity residual decreases under refinement", residuals[1] < residuals[0]))
        return checks


class EnvelopeSuite(VerificationSuite, suite_id="envelope"):
    """Tail sequence, envelope rule and randomized containment."""

    def run(self, context: VerificationContext) -> List[CheckResult]:
        tolerances = context.tolerances
        checks = []

        tail = tail_sequence([0.0, 5.0], [[0.0, 0.1], [0.1, 0.0]])
        expected = np.array([math.sqrt(0.02)] * 4 + [0.0, 0.0])
        checks.append(upper_bound_check("b_n for A=diag(0,5)", tolerances["zero"],
                                        float(np.max(np.abs(tail - expected)))))

        A_small = np.array([0.0, 0.1])
        B_small = np.array([[0.0, 0.5], [-0.5, 0.0]])
        env_small = envelope(A_small, B_small)
        checks.append(absolute_check("f(0) = 2‖B‖₂ for A=diag(0,0.1)", 2.0 * math.sqrt(0.5), env_small(0.0),
                                     tolerances["zero"]))
        checks.append(absolute_check("f(3) = 0 for A=diag(0,0.1)", 0.0, env_small(3.0), tolerances["zero"]))
        checks.append(absolute_check("containment violations, 2×2", 0,
                                     check_containment(A_small, B_small, env_small).violations, 0.0))

        trials = context.config.get_trials()
        results = run_trials(trials["count"], trials["size"], trials["spread"], trials["hs_levels"],
                             trials["base_seed"], context.workers)
        checks.append(absolute_check(f"containment violations, {trials['count']} random trials", 0,
                                     sum(r.violations for r in results), 0.0))

        A_diag, B = random_pair(trials["base_seed"], trials["size"], trials["spread"], 1.0)
        tail = tail_sequence(A_diag, B)
        total = float(np.linalg.norm(B)) ** 2
        defect = 0.0
        for n, b_n in enumerate(tail, start=1):
            inside = np.abs(A_diag) <= n
            inner = float(np.linalg.norm(B[np.ix_(inside, inside)])) ** 2
            defect = max(defect, abs(total - inner - b_n**2) / total)
        checks.append(upper_bound_check("‖B‖₂² = ‖B_n‖₂² + ‖B̃_n‖₂²", 1e-12, defect))
        checks.append(boolean_check("b_n nonincreasing", bool(np.all(np.diff(tail) <= 0.0))))
        checks.append(boolean_check("‖(b_n)‖_ℓ² finite", math.isfinite(envelope(A_diag, B).l2_tail_norm())))
        return checks


# --- Runner ---

def run_verification(suite: str, context: VerificationContext) -> List[CheckResult]:
    """
    Runs one suite or all of them and returns the checks ordered by name.

    Raises:
        SuiteError: If the suite id is unknown.
    """
    suite_ids = VerificationSuite.available_suites() if suite == ALL_SUITES else [suite]
    suites = [VerificationSuite.get_suite_class(suite_id)() for suite_id in suite_ids]
    logger.info(f"Running verification suite(s): {', '.join(suite_ids)}")
    with ThreadPoolExecutor(max_workers=max(1, min(context.workers, len(suites)))) as pool:
        batches = list(pool.map(lambda s: s.run(context), suites))
    checks = sorted((check for batch in batches for check in batch), key=lambda c: c.check)
    failed = [c.check for c in checks if not c.passed]
    if failed:
        logger.warning(f"{len(failed)} check(s) failed: {failed}")
    logger.info(f"Verification finished: {len(checks) - len(failed)}/{len(checks)} check(s) passed.")
    return checks
