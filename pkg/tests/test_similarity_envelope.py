# tests/test_similarity_envelope.py

import math

import numpy as np
import pytest

from specenv.core.fourier_core import GridFunction, gaussian, indicator, make_grid, norm_l2
from specenv.core.involution_operators import differentiation_operator, hs_predictions
from specenv.core.similarity_envelope import (
    EigensolverError,
    Envelope,
    EnvelopeError,
    SimilarityError,
    a_star,
    b_bound,
    build_similarity,
    check_containment,
    envelope,
    first_form_defect,
    fourier_conjugate,
    neumann_bound,
    operator_envelope,
    similarity_constant,
    similarity_residual,
    sorted_eigenvalues,
    tail_sequence,
)

A_SMALL = np.array([0.0, 0.1])
B_SMALL = np.array([[0.0, 0.5], [-0.5, 0.0]])


@pytest.fixture(scope="module")
def fine_report():
    """Similarity for v = 1 on [-1, 1] at spacing 0.0195."""
    return build_similarity(indicator(make_grid(10.0, 1024), -1.0, 1.0), workers=2)


@pytest.fixture(scope="module")
def coarse_report():
    return build_similarity(indicator(make_grid(10.0, 512), -1.0, 1.0), workers=2)


# -----------------------------------------------------------------------------
# ## Constants
# -----------------------------------------------------------------------------

def test_similarity_constant():
    assert similarity_constant() == pytest.approx(2.4403, abs=1e-4)
    assert similarity_constant() < 2.45
    assert b_bound(2.0) == pytest.approx(4.0 * similarity_constant())


def test_neumann_bound():
    assert neumann_bound(0.5) == pytest.approx(1.0)
    assert neumann_bound(0.0) == 0.0


def test_a_star_halves_the_psi_kernel():
    # Arrange
    v = indicator(make_grid(10.0, 512), -1.0, 1.0)

    # Act
    a = a_star(v)

    # Assert
    assert a == pytest.approx(4.0 * (1.0 - math.log(2.0)) * norm_l2(v) ** 2 / math.pi)
    assert hs_predictions(a, norm_l2(v))["psi"] == pytest.approx(0.5, abs=1e-12)


# -----------------------------------------------------------------------------
# ## Similarity transform
# -----------------------------------------------------------------------------

def test_similarity_diagnostics(fine_report):
    report = fine_report
    assert report.hs_psiV == pytest.approx(0.5, abs=2e-2)
    assert report.residual <= 1e-8
    assert report.inverse_distance <= neumann_bound(report.hs_psiV) * (1.0 + 1e-9)
    assert report.inverse_distance <= 1.0 * (1.0 + 1e-2)
    assert report.b_hs <= b_bound(report.v_norm) * (1.0 + 1e-2)


def test_both_forms_of_b_agree(fine_report):
    assert first_form_defect(fine_report) <= 1e-8


def test_similarity_residual_small_and_decreasing(fine_report, coarse_report):
    # Act
    fine = similarity_residual(fine_report, gaussian(fine_report.V.grid, 0.25))
    coarse = similarity_residual(coarse_report, gaussian(coarse_report.V.grid, 0.25))

    # Assert
    assert fine <= 1e-2
    assert fine < coarse


def test_report_dict_keys(coarse_report):
    report = coarse_report.as_dict()
    assert set(report) == {"a_star", "v_norm", "hs_psiV", "hs_phiV", "b_hs", "b_bound",
                           "inverse_residual", "inverse_distance"}
    assert report["b_bound"] == pytest.approx(b_bound(coarse_report.v_norm))


# -----------------------------------------------------------------------------
# ## Tail sequence and envelope
# -----------------------------------------------------------------------------

def test_tail_sequence_for_two_by_two():
    # Act
    tail = tail_sequence([0.0, 5.0], [[0.0, 0.1], [0.1, 0.0]])

    # Assert
    assert np.allclose(tail, [math.sqrt(0.02)] * 4 + [0.0, 0.0], atol=1e-15)


def test_tail_sequence_is_nonincreasing_and_ends_at_zero():
    # Arrange
    rng = np.random.default_rng(11)
    A_diag = rng.uniform(-12.0, 12.0, 40)
    B = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))

    # Act
    tail = tail_sequence(A_diag, B)

    # Assert
    assert tail.size == math.ceil(np.max(np.abs(A_diag))) + 1
    assert np.all(np.diff(tail) <= 0.0)
    assert tail[-1] == 0.0
    assert tail[0] <= np.linalg.norm(B)


def test_tail_sequence_matches_projected_difference():
    # Arrange
    rng = np.random.default_rng(5)
    A_diag = rng.uniform(-6.0, 6.0, 25)
    B = rng.standard_normal((25, 25)) + 1j * rng.standard_normal((25, 25))

    # Act
    tail = tail_sequence(A_diag, B)

    # Assert
    for n in range(1, tail.size + 1):
        E = np.diag((np.abs(A_diag) <= n).astype(float))
        assert tail[n - 1] == pytest.approx(np.linalg.norm(B - E @ B @ E), rel=1e-12, abs=1e-12)


def test_envelope_rule():
    # Act
    env = envelope(A_SMALL, B_SMALL)

    # Assert
    cap = 2.0 * math.sqrt(0.5)
    assert env.hs_total == pytest.approx(math.sqrt(0.5))
    assert env(0.0) == pytest.approx(cap)
    assert isinstance(env(0.0), float)
    assert env(3.0) == 0.0
    assert np.allclose(env(np.array([-3.0, 0.0, 3.0])), [0.0, cap, 0.0])


def test_envelope_uses_tail_beyond_the_cap():
    # Arrange
    env = Envelope(hs_total=0.5, tail=np.array([0.3, 0.1, 0.0]))

    # Act / Assert
    assert env(1.5) == pytest.approx(1.0)
    assert env(2.5) == pytest.approx(0.9)
    assert env(3.5) == pytest.approx(0.3)
    assert env(100.0) == 0.0
    assert env.l2_tail_norm() == pytest.approx(math.sqrt(0.1))


def test_envelope_sampling():
    # Arrange
    env = envelope(A_SMALL, B_SMALL)

    # Act
    r, f = env.sample(samples=11)

    # Assert
    assert r.shape == f.shape == (11,)
    assert r[-1] == pytest.approx(env.default_extent())
    assert np.allclose(r, -r[::-1])


def test_containment_for_two_by_two():
    report = check_containment(A_SMALL, B_SMALL, envelope(A_SMALL, B_SMALL))
    assert report.violations == 0
    assert report.margin > 0.0
    assert len(report.eigenvalues) == 2
    assert report.eigenvalues[0].imag < 0.0 < report.eigenvalues[1].imag


def test_sorted_eigenvalues_treats_rounded_real_parts_as_equal():
    # Arrange
    pair = [complex(0.05, -0.497), complex(0.04999999999999999, 0.497)]

    # Act
    ordered = sorted_eigenvalues(pair)

    # Assert
    assert ordered[0].imag < 0.0 < ordered[1].imag
    assert sorted_eigenvalues([2.0, -1.0 + 1j, -1.0 - 1j]) == (-1.0 - 1j, -1.0 + 1j, 2.0 + 0j)


def test_fourier_conjugate_diagonalizes_the_generator():
    grid = make_grid(4.0, 32)
    conjugated = fourier_conjugate(differentiation_operator(grid).operator_matrix)
    assert np.allclose(conjugated, np.diag(2.0 * np.pi * np.fft.fftfreq(32, grid.spacing)), atol=1e-10)


def test_operator_envelope_for_zero_perturbation():
    # Act
    result = operator_envelope(GridFunction(make_grid(4.0, 32), np.zeros(32)))

    # Assert
    assert result.similarity is None
    assert result.env.hs_total == 0.0
    assert result.violations == 0
    assert len(result.eigs) == 32


def test_operator_envelope_conjugates_b():
    # Act
    result = operator_envelope(indicator(make_grid(10.0, 256), -1.0, 1.0), workers=2)

    # Assert
    assert result.similarity is not None
    assert result.env.hs_total == pytest.approx(result.similarity.b_hs, rel=1e-10)
    assert len(result.eigs) == 256


# -----------------------------------------------------------------------------
# ## Failure Scenarios (Validation)
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("q", [1.0, -0.1, 2.0])
def test_neumann_bound_rejects_large_q(q):
    with pytest.raises(EnvelopeError):
        neumann_bound(q)


def test_zero_perturbation_has_no_scale():
    with pytest.raises(EnvelopeError) as excinfo:
        a_star(GridFunction(make_grid(4.0, 32), np.zeros(32)))
    assert "must be nonzero" in str(excinfo.value)


def test_shape_mismatch_raises():
    with pytest.raises(EnvelopeError) as excinfo:
        envelope([0.0, 1.0, 2.0], B_SMALL)
    assert "expected (3, 3)" in str(excinfo.value)


def test_complex_diagonal_raises():
    with pytest.raises(EnvelopeError):
        envelope(np.array([0.0, 1.0j]), B_SMALL)


def test_containment_size_limit(mocker):
    mocker.patch("specenv.core.similarity_envelope.CONTAINMENT_SIZE_LIMIT", 1)
    with pytest.raises(EnvelopeError) as excinfo:
        check_containment(A_SMALL, B_SMALL, envelope(A_SMALL, B_SMALL))
    assert "limited to size 1" in str(excinfo.value)


def test_eigensolver_failure_is_wrapped(mocker):
    mocker.patch("specenv.core.similarity_envelope.scipy.linalg.eigvals",
                 side_effect=np.linalg.LinAlgError("no convergence"))
    with pytest.raises(EigensolverError) as excinfo:
        check_containment(A_SMALL, B_SMALL, envelope(A_SMALL, B_SMALL))
    assert "no convergence" in str(excinfo.value)


def test_singular_similarity_reports_condition(mocker):
    mocker.patch("specenv.core.similarity_envelope.scipy.linalg.inv",
                 side_effect=np.linalg.LinAlgError("singular matrix"))
    with pytest.raises(SimilarityError) as excinfo:
        build_similarity(gaussian(make_grid(4.0, 32), 0.5))
    assert math.isfinite(excinfo.value.condition)
    assert isinstance(excinfo.value, ArithmeticError)
