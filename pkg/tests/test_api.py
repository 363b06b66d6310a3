# tests/test_api.py

import json

import numpy as np
import pandas as pd
import pytest

import specenv.api
from specenv.api import ExitCode, SpecEnvAPI, parse_frequencies, resample, residual_test_vector
from specenv.config import SpecEnvConfig
from specenv.core.finite_module import SpectralDomainError
from specenv.core.fourier_core import gaussian, make_grid
from specenv.core.similarity_envelope import SimilarityError
from specenv.services.verification import CheckResult
from specenv.storage.repository import GridFunctionRepository, MatrixRepository


@pytest.fixture
def api() -> SpecEnvAPI:
    return SpecEnvAPI(SpecEnvConfig(), workers=1)


@pytest.fixture
def v_file(tmp_path):
    """A smooth perturbation on a small grid."""
    path = tmp_path / "v.csv"
    GridFunctionRepository().save(path, gaussian(make_grid(4.0, 32), 0.5))
    return path


# -----------------------------------------------------------------------------
# ## Helpers
# -----------------------------------------------------------------------------

def test_parse_frequencies():
    assert parse_frequencies("-1, 0,2") == (-1.0, 0.0, 2.0)
    with pytest.raises(SpectralDomainError):
        parse_frequencies("a,b")
    with pytest.raises(SpectralDomainError):
        parse_frequencies(" , ")


def test_resample_keeps_interval():
    # Arrange
    v = gaussian(make_grid(4.0, 32), 1.0)

    # Act
    w = resample(v, 64)

    # Assert
    assert w.grid.points == 64
    assert w.grid.half_width == 4.0
    assert np.allclose(w.values[::2], v.values)
    assert resample(v, 32) is v


def test_residual_test_vector_width():
    coarse = residual_test_vector(make_grid(4.0, 32))
    assert coarse.values[16] == 1.0
    assert coarse.values[18] == pytest.approx(np.exp(-0.5**2 / 8.0))


# -----------------------------------------------------------------------------
# ## Success Scenarios
# -----------------------------------------------------------------------------

def test_windows_writes_table(api, tmp_path):
    # Act
    code, payload = api.windows("omega", 1.0, None, 10.0, 64, tmp_path / "omega.csv")

    # Assert
    assert code is ExitCode.OK
    assert payload["l2"] == pytest.approx(np.sqrt(4.0 - 4.0 * np.log(2.0)))
    assert list(pd.read_csv(tmp_path / "omega.csv").columns) == ["xi", "symbol", "t", "re", "im"]


def test_l1bound_report(api, tmp_path):
    # Arrange
    f_path = tmp_path / "f.csv"
    GridFunctionRepository().save(f_path, gaussian(make_grid(20.0, 512), 1.0))

    # Act
    code, report = api.l1bound(f_path, tmp_path / "l1.json")

    # Assert
    assert code is ExitCode.OK
    assert report["holds"] is True
    saved = json.loads((tmp_path / "l1.json").read_text(encoding="utf-8"))
    assert saved["config"]["run"]["edge_tolerance"] == 1e-8
    assert saved["config"]["grid"] == {"R": 40.0, "N": 4096}


def test_kernel_report(api, tmp_path, v_file):
    # Act
    code, report = api.kernel("phi", 1.0, v_file, False, tmp_path / "K.csv", tmp_path / "K.json")

    # Assert
    assert code is ExitCode.OK
    assert set(report) == {"hs_norm", "hs_predicted", "rel_err", "prediction", "config"}
    assert report["prediction"] == "identity"
    assert MatrixRepository().load(tmp_path / "K.csv").shape == (32, 32)


def test_sandwich_kernel_report(api, tmp_path, v_file):
    code, report = api.kernel("psi", 1.0, v_file, True, tmp_path / "K.csv", tmp_path / "K.json")
    assert code is ExitCode.OK
    assert report["prediction"] == "upper_bound"


def test_specmap_with_resolvent(api, tmp_path):
    # Act
    code, report = api.specmap("-1,0,2", "id", tmp_path / "specmap.json", lam=3 + 4j)

    # Assert
    assert code is ExitCode.OK
    assert report["equal"] is True
    assert report["resolvent"]["norm"] == pytest.approx(1.0 / np.sqrt(17.0))
    saved = json.loads((tmp_path / "specmap.json").read_text(encoding="utf-8"))
    assert saved["resolvent"]["lambda"] == {"re": 3.0, "im": 4.0}


def test_specmap_with_ap1_file(api, tmp_path):
    # Arrange
    symbol_path = tmp_path / "h.csv"
    pd.DataFrame({"exponent": [0.0, 1.0], "re": [2.0, 1.0], "im": [0.0, 0.0]}).to_csv(symbol_path, index=False)

    # Act
    code, report = api.specmap("0,3.14159", f"ap1:{symbol_path}", tmp_path / "specmap.json")

    # Assert
    assert code is ExitCode.OK
    assert report["equal"] is True


def test_specmap_reports_ap1_norm_and_window_estimate(api, tmp_path):
    # Arrange: h = 2 + e^{i xi}, so 1/(5 - h) = sum_n e^{i n xi} / 3^{n+1}
    symbol_path = tmp_path / "h.csv"
    pd.DataFrame({"exponent": [0.0, 1.0], "re": [2.0, 1.0], "im": [0.0, 0.0]}).to_csv(symbol_path, index=False)

    # Act
    code, report = api.specmap("0,3.14159", f"ap1:{symbol_path}", tmp_path / "specmap.json", lam=5.0)

    # Assert
    assert code is ExitCode.OK
    assert report["resolvent"]["ap1_norm"] == pytest.approx(0.5, rel=1e-9)
    assert report["mh_estimate"]["M"] >= 1.0 / 6.0
    assert report["mh_estimate"]["a_list"][0] == 0.125


def test_specmap_uses_configured_estimator_options(tmp_path, mocker):
    # Arrange
    data = SpecEnvConfig().as_dict()
    data["ap1"]["samples"] = 1024
    data["mh_estimate"] = {"a_exponent_min": 0, "a_exponent_max": 1}
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(data), encoding="utf-8")
    api = SpecEnvAPI(SpecEnvConfig(config_path), workers=1)
    symbol_path = tmp_path / "h.csv"
    pd.DataFrame({"exponent": [1.0], "re": [1.0], "im": [0.0]}).to_csv(symbol_path, index=False)
    ap1_spy = mocker.spy(specenv.api, "ap1_reciprocal_norm")

    # Act
    code, report = api.specmap("0", f"ap1:{symbol_path}", tmp_path / "specmap.json", lam=2.0)

    # Assert
    assert code is ExitCode.OK
    assert ap1_spy.call_args.kwargs == {"samples": 1024, "margin": 1e-6, "tail": 1e-10}
    assert report["mh_estimate"]["a_list"] == [1.0, 2.0]


def test_specmap_without_ap1_symbol_has_no_ap1_norm(api, tmp_path):
    code, report = api.specmap("-1,0,2", "id", tmp_path / "specmap.json", lam=3 + 4j)
    assert code is ExitCode.OK
    assert report["resolvent"]["ap1_norm"] is None
    assert report["mh_estimate"]["a_list"] == [2.0**k for k in range(-3, 7)]


def test_envelope_from_matrices(api, tmp_path):
    # Arrange
    a_path, b_path = tmp_path / "A.csv", tmp_path / "B.csv"
    pd.DataFrame({"a": [0.0, 0.1]}).to_csv(a_path, index=False)
    MatrixRepository().save(b_path, np.array([[0.0, 0.5], [-0.5, 0.0]]))

    # Act
    code, report = api.envelope_from_matrices(a_path, b_path, tmp_path / "env.csv", tmp_path / "eigs.csv",
                                              tmp_path / "env.json")

    # Assert
    assert code is ExitCode.OK
    assert report["violations"] == 0
    assert report["advisory"] is False
    assert report["hs_B"] == pytest.approx(np.sqrt(0.5))
    assert len(pd.read_csv(tmp_path / "env.csv")) == 2001
    assert len(pd.read_csv(tmp_path / "eigs.csv")) == 2


def test_envelope_from_perturbation(api, tmp_path, v_file):
    # Act
    code, report = api.envelope_from_perturbation(v_file, 64, tmp_path / "env.csv", tmp_path / "eigs.csv",
                                                  tmp_path / "env.json")

    # Assert
    assert code is ExitCode.OK
    assert report["advisory"] is True
    assert report["a_star"] > 0.0
    assert report["residual"] >= 0.0
    assert len(pd.read_csv(tmp_path / "eigs.csv")) == 64


def test_verify_writes_checks(api, tmp_path, mocker):
    # Arrange
    mocker.patch("specenv.api.run_verification", return_value=[CheckResult("c", 1.0, 1.0, 0.0, True)])

    # Act
    code, checks = api.verify("norms", tmp_path / "verify.json")

    # Assert
    assert code is ExitCode.OK
    assert checks == [{"check": "c", "expected": 1.0, "actual": 1.0, "tol": 0.0, "pass": True}]
    saved = json.loads((tmp_path / "verify.json").read_text(encoding="utf-8"))
    assert saved["checks"] == checks
    assert saved["config"]["run"]["suite"] == "norms"


# -----------------------------------------------------------------------------
# ## Failure Scenarios
# -----------------------------------------------------------------------------

def test_failed_check_is_numerical_failure(api, mocker):
    mocker.patch("specenv.api.run_verification", return_value=[CheckResult("c", 1.0, 2.0, 0.0, False)])
    code, checks = api.verify("norms")
    assert code is ExitCode.NUMERICAL_FAILURE
    assert checks[0]["pass"] is False


def test_unknown_suite_is_validation_error(api):
    code, message = api.verify("spectra")
    assert code is ExitCode.VALIDATION_ERROR
    assert "Unknown verification suite" in message


def test_unknown_family_is_validation_error(api, tmp_path):
    code, message = api.windows("hann", 1.0, None, 10.0, 64, tmp_path / "w.csv")
    assert code is ExitCode.VALIDATION_ERROR
    assert "Unknown window family" in message


def test_slow_decay_is_validation_error(api, tmp_path):
    f_path = tmp_path / "f.csv"
    GridFunctionRepository().save(f_path, gaussian(make_grid(20.0, 512), 10.0))
    code, message = api.l1bound(f_path, tmp_path / "l1.json")
    assert code is ExitCode.VALIDATION_ERROR
    assert "does not decay" in message


def test_lambda_in_spectrum_is_validation_error(api, tmp_path):
    code, _ = api.specmap("-1,0,2", "id", tmp_path / "specmap.json", lam=0.0)
    assert code is ExitCode.VALIDATION_ERROR


def test_matrix_shape_mismatch_is_validation_error(api, tmp_path):
    # Arrange
    a_path, b_path = tmp_path / "A.csv", tmp_path / "B.csv"
    MatrixRepository().save(a_path, np.eye(2), nonzero_only=False)
    MatrixRepository().save(b_path, np.ones((3, 3)))

    # Act
    code, message = api.envelope_from_matrices(a_path, b_path, tmp_path / "env.csv", tmp_path / "eigs.csv",
                                               tmp_path / "env.json")

    # Assert
    assert code is ExitCode.VALIDATION_ERROR
    assert "shape" in message


def test_singular_similarity_is_numerical_failure(api, tmp_path, v_file, mocker):
    mocker.patch("specenv.api.operator_envelope", side_effect=SimilarityError("U is singular", 1e20))
    code, message = api.envelope_from_perturbation(v_file, None, tmp_path / "env.csv", tmp_path / "eigs.csv",
                                                   tmp_path / "env.json")
    assert code is ExitCode.NUMERICAL_FAILURE
    assert "U is singular" in message


def test_unexpected_error_is_numerical_failure(api, tmp_path, mocker):
    mocker.patch("specenv.api.create_window", side_effect=RuntimeError("boom"))
    code, message = api.windows("trapezoid", 1.0, None, 10.0, 64, tmp_path / "w.csv")
    assert code is ExitCode.NUMERICAL_FAILURE
    assert "unexpected" in message
