import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclab.errors import DivergenceError, ParameterError
from fraclab.lemmas import (
    ScalingFit,
    fit_exponent,
    flat_closed_form,
    integral_case1,
    integral_case2,
    integral_case3,
    minwedge_check,
    radial_integral,
    run_case,
)

from _models import model

SMALL = np.geomspace(1e-3, 1e-1, 9)
MID = np.geomspace(1e-2, 1.0, 9)


def test_minwedge_spot_values():
    assert minwedge_check(1.0) == (1.0, 0.5)
    lhs, rhs = minwedge_check(1e6)
    assert lhs == 1.0 and rhs == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(ParameterError):
        minwedge_check(0.0)


def test_minwedge_sweep():
    for y in np.geomspace(1e-8, 1e8, 1000):
        lhs, rhs = minwedge_check(float(y))
        assert lhs / 2 <= rhs <= lhs


@given(y=st.floats(min_value=1e-300, max_value=1e300))
def test_minwedge_property(y):
    lhs, rhs = minwedge_check(y)
    assert lhs / 2 <= rhs <= lhs


def test_case1_line_closed_form():
    m = model(1, "flat", 50.0, 512, 1e-3)
    fit = integral_case1(m, 1.0, 1.0, MID)
    for t, v in fit.sample_points:
        assert v == pytest.approx(math.pi / t, rel=1e-3)
    assert fit.fitted_exponent == pytest.approx(-1.0, abs=1e-6)


def test_case1_plane_exponent():
    fit = integral_case1(model(2, "flat", 50.0, 512, 1e-3), 2.0, 1.0, MID)
    assert fit.within(0.05) and fit.predicted_exponent == -2.0


def test_case1_log_blend_exponent():
    fit = integral_case1(model(2, "log-blend", 50.0, 512, 1e-4), 2.0, 1.0, SMALL)
    assert abs(fit.fitted_exponent + 2.0) <= 0.05


def test_case2_closed_forms():
    m2 = model(2, "flat", 50.0, 512, 1e-3)
    fit = integral_case2(m2, 0.0, MID)
    for R, v in fit.sample_points:
        assert v == pytest.approx(math.pi * R * R, rel=1e-10)
    fit = integral_case2(m2, 1.0, MID)
    for R, v in fit.sample_points:
        assert v == pytest.approx(2 * math.pi * R, rel=1e-10)
    assert fit.fitted_exponent == pytest.approx(1.0, abs=1e-8)
    m3 = model(3, "flat", 50.0, 512, 1e-3)
    fit = integral_case2(m3, 2.0, MID)
    for R, v in fit.sample_points:
        assert v == pytest.approx(4 * math.pi * R, rel=1e-10)


def test_case2_log_blend_exponent():
    fit = integral_case2(model(2, "log-blend", 50.0, 512, 1e-4), 1.0, SMALL)
    assert fit.within(0.05)


def test_case3_closed_forms():
    R = np.geomspace(0.1, 10.0, 9)
    fit = integral_case3(model(1, "flat", 50.0, 512, 1e-3), 2.0, R)
    for r, v in fit.sample_points:
        assert v == pytest.approx(2.0 / r, rel=1e-8)
    fit = integral_case3(model(2, "flat", 50.0, 512, 1e-3), 4.0, R)
    for r, v in fit.sample_points:
        assert v == pytest.approx(math.pi / r**2, rel=1e-8)
    fit = integral_case3(model(3, "flat", 50.0, 512, 1e-3), 4.0, R)
    for r, v in fit.sample_points:
        assert v == pytest.approx(4 * math.pi / r, rel=1e-8)
    assert fit.tails[0] > 0


def test_divergent_cases_rejected():
    m = model(2, "flat", 50.0, 256)
    with pytest.raises(DivergenceError):
        integral_case1(m, 1.0, 1.0, MID)
    with pytest.raises(DivergenceError):
        integral_case2(m, 2.0, MID)
    with pytest.raises(DivergenceError):
        integral_case3(m, 2.0, MID)
    with pytest.raises(ParameterError):
        run_case(m, "case9", 1.0, MID)


def test_failing_model_rejected():
    m = model(2, "hyperbolic", 10.0, 256)
    with pytest.raises(ParameterError):
        integral_case2(m, 1.0, MID)


def test_scaling_fit_validation(tmp_path):
    with pytest.raises(ParameterError):
        ScalingFit("case1", {}, [(1.0, 1.0), (2.0, 2.0)], 1.0, 1.0, 0.0)
    with pytest.raises(ParameterError):
        ScalingFit("case1", {}, [(1.0 + i, 1.0) for i in range(6)], 1.0, 1.0, 0.0)
    fit = integral_case2(model(2, "flat", 50.0, 256), 1.0, MID)
    d = fit.to_dict()
    assert set(d) >= {"case_id", "params", "sample_points", "fitted_exponent", "predicted_exponent", "residual"}
    path = tmp_path / "fit.csv"
    fit.write_csv(path)
    assert path.read_text().splitlines()[0] == "scale,integral"


def test_fit_exponent_exact_power():
    s = np.geomspace(1, 1000, 7)
    slope, res = fit_exponent(s, 3.0 * s**-1.7)
    assert slope == pytest.approx(-1.7, abs=1e-12) and res < 1e-12


@pytest.mark.parametrize("case,n,gamma", [
    ("case1", 1, 1.0), ("case1", 2, 2.0), ("case1", 3, 2.5),
    ("case2", 1, 0.5), ("case2", 2, 1.0), ("case2", 3, 2.0),
    ("case3", 1, 2.0), ("case3", 2, 4.0), ("case3", 3, 4.0),
])
def test_flat_exponents_and_spot_values(case, n, gamma):
    m = model(n, "flat", 50.0, 512, 1e-3)
    fit = run_case(m, case, gamma, MID)
    assert fit.within(0.05)
    for s, v in fit.sample_points:
        assert v == pytest.approx(flat_closed_form(case, n, gamma, s), rel=1e-3)


def test_radial_integral_range_checks():
    m = model(2, "flat", 10.0, 128)
    with pytest.raises(ParameterError):
        radial_integral(m, lambda r: r, 0.0, 11.0)
    assert radial_integral(m, lambda r: np.ones_like(r), 0.0, 10.0) == pytest.approx(100 * math.pi, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(gamma=st.floats(1.1, 4.0), alpha=st.floats(0.3, 1.9))
def test_case1_exponent_property(gamma, alpha):
    fit = integral_case1(model(2, "flat", 50.0, 512, 1e-3), gamma, alpha, MID)
    assert fit.within(0.05)


def test_case1_integrand_is_radially_decreasing():
    r = np.linspace(0.0, 50.0, 1000)
    for t in (0.01, 1.0):
        f = (t**2 + r * r) ** -2.0
        assert np.all(np.diff(f) < 0)
