# tests/test_fourier_core.py

import numpy as np
import pytest

from specenv.core.fourier_core import (
    GridConfigurationError,
    GridFunction,
    dft_forward,
    dft_inverse,
    edge_magnitude,
    gaussian,
    indicator,
    inner_product,
    make_grid,
    norm_l1,
    norm_l2,
    sample,
    sample_frequencies,
)
from specenv.core.window_functions import phi_time, trapezoid_symbol


@pytest.fixture
def grid():
    """A grid wide and fine enough for unit Gaussians to be resolved to machine precision."""
    return make_grid(20.0, 512)


# -----------------------------------------------------------------------------
# ## Success Scenarios
# -----------------------------------------------------------------------------

def test_grid_layout():
    """Nodes start at -R, the middle node is exactly 0 and reflection pairs k with N-k."""
    # Act
    grid = make_grid(10.0, 8)

    # Assert
    assert grid.spacing == 2.5
    assert grid.nodes[0] == -10.0
    assert grid.nodes[4] == 0.0
    assert grid.nodes[-1] == 7.5
    assert list(grid.reflection_indices()) == [0, 7, 6, 5, 4, 3, 2, 1]
    assert grid.frequency_spacing == pytest.approx(2.0 * np.pi / 20.0)
    assert grid.nyquist == pytest.approx(np.pi / 2.5)


def test_forward_transform_of_gaussian(grid):
    """exp(-t^2/2) transforms to sqrt(2 pi) exp(-xi^2/2)."""
    # Arrange
    f = gaussian(grid, 1.0)

    # Act
    F = dft_forward(f)

    # Assert
    expected = np.sqrt(2.0 * np.pi) * np.exp(-grid.frequencies**2 / 2.0)
    assert np.allclose(F.values, expected, atol=1e-10)


def test_forward_transform_sign_convention(grid):
    """A shift by c multiplies the transform by exp(-i c xi)."""
    # Arrange
    f = gaussian(grid, 1.0, center=1.5)

    # Act
    F = dft_forward(f)

    # Assert
    xi = grid.frequencies
    expected = np.sqrt(2.0 * np.pi) * np.exp(-xi**2 / 2.0) * np.exp(-1.5j * xi)
    assert np.allclose(F.values, expected, atol=1e-10)


def test_inverse_undoes_forward(grid):
    # Arrange
    rng = np.random.default_rng(3)
    f = GridFunction(grid, rng.standard_normal(grid.points) + 1j * rng.standard_normal(grid.points))

    # Act
    back = dft_inverse(dft_forward(f))

    # Assert
    assert np.allclose(back.values, f.values, atol=1e-12)


def test_plancherel_identity_is_exact(grid):
    """||f_hat||_2 = sqrt(2 pi) ||f||_2 holds for any samples, not just smooth ones."""
    # Arrange
    f = indicator(grid, -3.0, 2.0)

    # Act
    ratio = norm_l2(dft_forward(f)) / norm_l2(f)

    # Assert
    assert ratio == pytest.approx(np.sqrt(2.0 * np.pi), rel=1e-12)


def test_transforms_are_linear(grid):
    # Arrange
    rng = np.random.default_rng(3)
    f = GridFunction(grid, rng.standard_normal(grid.points) + 1j * rng.standard_normal(grid.points))
    g = GridFunction(grid, rng.standard_normal(grid.points))
    alpha = 0.7 - 1.9j

    # Act
    combined = dft_forward(f.scaled(alpha) + g)

    # Assert
    expected = alpha * dft_forward(f).values + dft_forward(g).values
    assert np.max(np.abs(combined.values - expected)) <= 1e-12 * np.max(np.abs(expected))
    back = dft_inverse(combined)
    assert np.max(np.abs(back.values - (alpha * f.values + g.values))) <= 1e-12 * np.max(np.abs(f.values))


def test_parseval_for_band_limited_gaussian(grid):
    """||f_hat||_2 = sqrt(2 pi) ||f||_2 against the continuous values for exp(-t^2 / 2)."""
    # Arrange
    f = gaussian(grid, 1.0)

    # Act
    transformed = norm_l2(dft_forward(f))

    # Assert
    assert norm_l2(f) == pytest.approx(np.pi**0.25, rel=1e-6)
    assert transformed == pytest.approx(np.sqrt(2.0 * np.pi) * np.pi**0.25, rel=1e-6)


def test_inverse_of_sampled_trapezoid_is_phi():
    # Arrange
    grid = make_grid(40.0, 4096)
    symbol = sample_frequencies(grid, trapezoid_symbol(1.0))

    # Act
    phi = dft_inverse(symbol)

    # Assert
    inner = np.abs(grid.nodes) <= 20.0
    expected = phi_time(1.0, grid.nodes[inner])
    assert np.max(np.abs(phi.values[inner] - expected)) < 1e-3
    assert np.max(np.abs(phi.values.imag)) < 1e-12


def test_indicator_takes_half_at_endpoints():
    # Arrange
    grid = make_grid(4.0, 16)

    # Act
    f = indicator(grid, -1.0, 1.0)

    # Assert
    assert f.values[6] == 0.5
    assert f.values[10] == 0.5
    assert np.all(f.values[7:10] == 1.0)
    assert norm_l1(f) == pytest.approx(2.0)


def test_inner_product_matches_norm(grid):
    # Arrange
    f = sample(grid, lambda t: np.exp(-t**2) * (1.0 + 1j * t))

    # Act
    value = inner_product(f, f)

    # Assert
    assert value.imag == pytest.approx(0.0, abs=1e-14)
    assert value.real == pytest.approx(norm_l2(f) ** 2, rel=1e-12)


def test_reflection_mirrors_nodes(grid):
    # Arrange
    f = gaussian(grid, 1.0, center=1.0)

    # Act
    reflected = f.reflected()

    # Assert
    mirror = gaussian(grid, 1.0, center=-1.0)
    assert reflected.values[0] == 0.0
    assert np.allclose(reflected.values[1:], mirror.values[1:], atol=1e-15)


def test_edge_magnitude():
    # Arrange
    grid = make_grid(4.0, 16)

    # Act / Assert: the outer nodes are -4 and 3.5, so the right edge dominates
    assert edge_magnitude(gaussian(grid, 1.0)) == pytest.approx(np.exp(-3.5**2 / 2.0))
    assert edge_magnitude(GridFunction(grid, np.zeros(16))) == 0.0


# -----------------------------------------------------------------------------
# ## Failure Scenarios (Validation)
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("R, N", [(10.0, 7), (10.0, 2), (0.0, 8), (-1.0, 8), (float("nan"), 8)])
def test_make_grid_rejects_bad_parameters(R, N):
    with pytest.raises(GridConfigurationError):
        make_grid(R, N)


def test_grid_rejects_non_integer_points():
    with pytest.raises(GridConfigurationError) as excinfo:
        make_grid(10.0, 8.0)
    assert "must be an integer" in str(excinfo.value)


def test_grid_function_rejects_wrong_length():
    # Arrange
    grid = make_grid(10.0, 8)

    # Act / Assert
    with pytest.raises(GridConfigurationError) as excinfo:
        GridFunction(grid, np.zeros(6))
    assert "does not match the grid size 8" in str(excinfo.value)


def test_adding_functions_on_different_grids_fails():
    # Arrange
    f = gaussian(make_grid(10.0, 8))
    g = gaussian(make_grid(10.0, 16))

    # Act / Assert
    with pytest.raises(GridConfigurationError) as excinfo:
        f + g
    assert "Grid mismatch" in str(excinfo.value)
