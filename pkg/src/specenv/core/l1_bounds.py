# l1_bounds.py
#
# L1 estimate ||f||_1^2 <= 2 ||f_hat||_2 ||f_hat'||_2 for functions whose
# transform lies in W^{1,2}, with the optimal parameter of the split bound.

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.optimize import minimize_scalar

from .fourier_core import FreqGridFunction, GridFunction, dft_forward, edge_magnitude, norm_l1, norm_l2

logger = logging.getLogger(__name__)


class L1BoundError(ValueError):
    """Raised when the bound is undefined (zero input or zero derivative)."""
    pass


class PrecisionError(ValueError):
    """Raised when a sampled function does not decay at the grid edges."""
    pass


@dataclass(frozen=True)
class L1Bound:
    bound: float
    a_opt: float
    l2_hat: float
    l2_hat_deriv: float


@dataclass(frozen=True)
class L1BoundCheck:
    l1: float
    bound: float
    holds: bool
    l2_hat: float
    l2_hat_deriv: float
    a_opt: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "l1": self.l1,
            "l2_hat": self.l2_hat,
            "l2_hat_deriv": self.l2_hat_deriv,
            "bound": self.bound,
            "a_opt": self.a_opt,
            "holds": self.holds,
        }


def frequency_derivative(fhat: FreqGridFunction) -> FreqGridFunction:
    """Centered second-order differences on the frequency grid (one-sided at the ends)."""
    return FreqGridFunction(fhat.grid, np.gradient(fhat.values, fhat.grid.frequency_spacing))


def l1_bound(fhat: FreqGridFunction) -> L1Bound:
    """
    Evaluates sqrt(2 ||f_hat||_2 ||f_hat'||_2) and a_opt = ||f_hat'||_2 / ||f_hat||_2.

    Raises:
        L1BoundError: If either norm vanishes.
    """
    l2_hat = norm_l2(fhat)
    l2_hat_deriv = norm_l2(frequency_derivative(fhat))
    if l2_hat == 0.0 or l2_hat_deriv == 0.0:
        raise L1BoundError(
            f"L1 bound undefined for zero input (||f_hat||_2={l2_hat}, ||f_hat'||_2={l2_hat_deriv})."
        )
    bound = float(np.sqrt(2.0 * l2_hat * l2_hat_deriv))
    return L1Bound(bound=bound, a_opt=l2_hat_deriv / l2_hat, l2_hat=l2_hat, l2_hat_deriv=l2_hat_deriv)


def l1_bound_check(f: GridFunction, edge_tolerance: float = 1e-8, slack: float = 1e-6) -> L1BoundCheck:
    """
    Computes both sides of the L1 estimate for a sampled function.

    Args:
        f (GridFunction): Samples of f; must decay at the grid edges.
        edge_tolerance (float): Largest admissible |f| at the outermost nodes,
            relative to max |f|. Windows with algebraic decay need a looser value.
        slack (float): Relative slack in the comparison l1^2 <= bound^2 (1 + slack).

    Raises:
        L1BoundError: If f is identically zero.
        PrecisionError: If f has not decayed at the grid edges.
    """
    if not np.any(f.values):
        raise L1BoundError("L1 bound check needs a nonzero input.")
    edge = edge_magnitude(f)
    if edge > edge_tolerance:
        raise PrecisionError(
            f"Input does not decay at the grid edges: relative edge magnitude {edge:.3e} > {edge_tolerance:.1e}."
        )
    estimate = l1_bound(dft_forward(f))
    l1 = norm_l1(f)
    holds = bool(l1**2 <= estimate.bound**2 * (1.0 + slack))
    logger.debug(f"L1 check: l1={l1}, bound={estimate.bound}, holds={holds}")
    return L1BoundCheck(
        l1=l1,
        bound=estimate.bound,
        holds=holds,
        l2_hat=estimate.l2_hat,
        l2_hat_deriv=estimate.l2_hat_deriv,
        a_opt=estimate.a_opt,
    )


def split_bound(l2_hat: float, l2_hat_deriv: float, a: float) -> float:
    """(1/sqrt 2)(sqrt(a) ||f_hat||_2 + ||f_hat'||_2 / sqrt(a)), valid for every a > 0."""
    if a <= 0:
        raise L1BoundError(f"Split bound parameter must be positive, got {a}.")
    return float((np.sqrt(a) * l2_hat + l2_hat_deriv / np.sqrt(a)) / np.sqrt(2.0))


def numeric_a_opt(l2_hat: float, l2_hat_deriv: float) -> float:
    """Golden-section minimizer of split_bound over log(a)."""
    center = np.log(l2_hat_deriv / l2_hat)
    result = minimize_scalar(
        lambda s: split_bound(l2_hat, l2_hat_deriv, float(np.exp(s))),
        bracket=(center - 3.0, center + 2.0),
        method="golden",
        options={"xtol": 1e-12},
    )
    return float(np.exp(result.x))


def phi_l1_reference_bounds() -> Dict[str, float]:
    """Successively sharper published upper bounds for ||phi_a||_1 (independent of a)."""
    return {
        "split": float(2.0**1.5 * 3.0**-0.25),
        "log": float(4.0 / np.pi + 2.0 / np.pi * np.log(3.0)),
        "sqrt3": float(np.sqrt(3.0)),
    }


def generalized_phi_l1_bound(n: float) -> float:
    """sqrt((n+1)/(n-1)), the bound for the generalized trapezoid window."""
    if n <= 1:
        raise L1BoundError(f"Generalized trapezoid index must be > 1, got {n}.")
    return float(np.sqrt((n + 1.0) / (n - 1.0)))


def psi_l1_reference_bound(a: float) -> float:
    """1.35 / a."""
    return 1.35 / a
