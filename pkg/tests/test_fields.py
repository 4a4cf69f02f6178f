import math

import numpy as np
import pytest
from scipy.integrate import quad

from core.errors import ConfigParseError, ConstraintError, FieldRangeError
from fields.models import (
    build_field, eval_b, eval_b_prime, eval_b_second, eval_field, field_bounds, load_tabulated_csv,
)
from fields.params import PhysicalParams


def test_params_reject_zero_mass():
    with pytest.raises(ConstraintError) as exc:
        PhysicalParams(m=0.0)
    assert exc.value.constraint == "params.m > 0"
    assert exc.value.exit_code == 4


@pytest.mark.parametrize("kwargs, key", [
    ({"c": -1.0}, "params.c"),
    ({"q": 0.0}, "params.q"),
    ({"n": 3}, "params.n"),
])
def test_params_constraints(kwargs, key):
    with pytest.raises(ConstraintError) as exc:
        PhysicalParams(**kwargs)
    assert exc.value.key == key


def test_power_law_default_values(params):
    model = build_field("power_law", params)
    assert eval_b(model, 9.0)[0] == pytest.approx(3.0)
    assert eval_b_prime(model, 4.0)[0] == pytest.approx(0.25)
    assert eval_b_second(model, 4.0)[0] == pytest.approx(-1.0 / 32.0)
    assert model.origin_exponent == 0.5


def test_field_is_b_prime_over_charge():
    params = PhysicalParams(q=2.0)
    model = build_field("power_law", params, gamma=0.5, coefficient=3.0)
    t = np.array([0.5, 2.0, 7.0])
    np.testing.assert_allclose(eval_field(model, t), eval_b_prime(model, t) / 2.0)


def test_constant_field_impulse():
    params = PhysicalParams(q=-2.0, n=2)
    model = build_field("constant", params, E0=[1.0, 0.5])
    np.testing.assert_allclose(eval_b(model, 3.0), [-6.0, -3.0])
    np.testing.assert_allclose(eval_field(model, 3.0), [1.0, 0.5])
    assert not model.is_zero
    assert build_field("constant", PhysicalParams(), E0=[0.0]).is_zero


def test_logarithmic_field(params):
    model = build_field("logarithmic", params, e3=2.0, e4=0.5)
    assert eval_b(model, 4.0)[0] == pytest.approx(2.0 * math.log(3.0))
    assert eval_b_prime(model, 4.0)[0] == pytest.approx(1.0 / 3.0)
    assert eval_b_second(model, 4.0)[0] == pytest.approx(-2.0 * 0.25 / 9.0)


def test_power_law_perturbations_match_finite_differences(params):
    model = build_field("power_law", params, gamma=1.0, coefficient=0.5,
                        rho=[0.3, -0.1], theta1=[(0.2, 3.0)])
    t, h = 5.0, 1e-5
    fd1 = (eval_b(model, t + h) - eval_b(model, t - h)) / (2 * h)
    fd2 = (eval_b_prime(model, t + h) - eval_b_prime(model, t - h)) / (2 * h)
    np.testing.assert_allclose(eval_b_prime(model, t), fd1, rtol=1e-7)
    np.testing.assert_allclose(eval_b_second(model, t), fd2, rtol=1e-6)
    assert model.period == pytest.approx(2 * math.pi / 3.0)


def test_theta1_requires_linear_growth(params):
    with pytest.raises(ConstraintError):
        build_field("power_law", params, gamma=0.5, theta1=[(0.1, 1.0)])


def test_sinusoidal_layouts():
    scalar = build_field("sinusoidal", PhysicalParams(), gamma=0.5, amplitude=2.0, frequency=1.0)
    t = math.pi
    assert eval_b(scalar, t)[0] == pytest.approx(math.sqrt(t) + 2.0 * (math.cos(t) - 1.0))

    mixed = build_field("sinusoidal", PhysicalParams(n=2), gamma=0.5, coefficient=3.0,
                        amplitude=1.0, frequency=2.0)
    b = eval_b(mixed, 4.0)
    assert b[0] == pytest.approx(3.0 * 2.0)
    assert b[1] == pytest.approx(4.0 ** 0.25 + math.cos(8.0) - 1.0)


def test_onset_removes_origin_singularity(params):
    model = build_field("power_law", params, gamma=0.5, onset=1.0)
    assert eval_b(model, 0.0)[0] == 0.0
    assert math.isfinite(eval_b_prime(model, 0.0)[0])
    assert model.origin_exponent is None


def test_unknown_kind(params):
    with pytest.raises(ConstraintError):
        build_field("pulsed", params)


def test_axis_must_fit_dimension(params):
    with pytest.raises(ConstraintError):
        build_field("power_law", params, axis=1)


def test_tabulated_constant_field_integrates_exactly(params):
    times = np.linspace(0.0, 10.0, 21)
    model = build_field("tabulated", params, times=times, values=np.ones_like(times))
    np.testing.assert_allclose(eval_b(model, [0.0, 2.5, 9.75]).ravel(), [0.0, 2.5, 9.75], atol=1e-9)
    np.testing.assert_allclose(eval_b_second(model, 3.3).ravel(), [0.0], atol=1e-6)
    assert model.t_max == 10.0


def test_tabulated_quintic_follows_smooth_field(params):
    times = np.linspace(0.0, 4.0, 81)
    model = build_field("tabulated", params, times=times, values=np.cos(times), order=5)
    assert eval_b(model, 3.0)[0] == pytest.approx(math.sin(3.0), abs=1e-8)
    assert eval_b_second(model, 2.0)[0] == pytest.approx(-math.sin(2.0), abs=1e-5)


def test_tabulated_out_of_range(params):
    times = np.linspace(0.0, 1.0, 5)
    model = build_field("tabulated", params, times=times, values=times)
    with pytest.raises(FieldRangeError):
        eval_b(model, 2.0)


@pytest.mark.parametrize("times, values", [
    ([0.5, 1.0, 1.5, 2.0], [1.0, 1.0, 1.0, 1.0]),
    ([0.0, 1.0, 0.5, 2.0], [1.0, 1.0, 1.0, 1.0]),
    ([0.0, 1.0], [1.0, 1.0]),
])
def test_tabulated_rejects_bad_samples(params, times, values):
    with pytest.raises(ConstraintError):
        build_field("tabulated", params, times=np.array(times), values=np.array(values))


def test_load_tabulated_csv_with_header(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("t,E\n0,1\n1,1\n2,1\n3,1\n4,1\n", encoding="utf-8")
    times, values = load_tabulated_csv(path)
    np.testing.assert_allclose(times, [0, 1, 2, 3, 4])
    assert values.shape == (5, 1)


def test_field_bounds_analytic_and_sampled(params):
    const = build_field("constant", PhysicalParams(n=2), E0=[1.0, -2.0])
    assert field_bounds(const, 0.0, 10.0) == (3.0, 0.0)

    sin_model = build_field("sinusoidal", params, gamma=1.0, coefficient=1.0, amplitude=1.0)
    e00, e01 = field_bounds(sin_model, 1.0, 20.0)
    # E = 1 − sin t, E' = −cos t
    assert e00 == pytest.approx(2.0, abs=1e-3)
    assert e01 == pytest.approx(1.0, abs=1e-3)


def test_load_tabulated_csv_rejects_non_numeric_rows(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("0,1\n1,abc\n2,1\n", encoding="utf-8")
    with pytest.raises(ConfigParseError) as exc:
        load_tabulated_csv(path)
    assert exc.value.exit_code == 2


@pytest.mark.parametrize("n, kind, kwargs", [
    (1, "power_law", {"gamma": 0.5, "coefficient": 1.5}),
    (1, "power_law", {"gamma": 1.0, "coefficient": 0.5, "rho": [0.3, -0.1], "theta1": [(0.2, 3.0)]}),
    (1, "power_law", {"gamma": 0.75, "onset": 2.0}),
    (1, "logarithmic", {"e3": 2.0, "e4": 0.5}),
    (1, "sinusoidal", {"gamma": 0.5, "amplitude": 2.0, "frequency": 1.5}),
    (2, "sinusoidal", {"gamma": 0.5, "coefficient": 3.0, "frequency": 2.0}),
    (2, "constant", {"E0": [1.0, -0.5]}),
])
def test_impulse_is_integral_of_charge_times_field(n, kind, kwargs):
    params = PhysicalParams(q=2.0, n=n)
    model = build_field(kind, params, **kwargs)
    for t in (0.5, 7.3, 40.0):
        expected = [
            quad(lambda s, i=i: params.q * float(eval_field(model, s)[i]), 0.0, t,
                 epsabs=1e-13, epsrel=1e-12, limit=400)[0]
            for i in range(n)
        ]
        np.testing.assert_allclose(eval_b(model, t), expected, rtol=1e-8, atol=1e-12)
