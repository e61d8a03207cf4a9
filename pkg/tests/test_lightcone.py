import math

import numpy as np
import pytest

from lrcone.errors import InvalidArgumentError
from lrcone.geometry import GrowthCertificate
from lrcone.lightcone import (ConeParameters, FrontRecord, asymptotic_check, decay_rates, default_epsilon,
                              empirical_front, expected_decay_rate, exponents, fit_power_law, front_curve, r_max,
                              v_g)

V = 3.52372


def test_exponents_for_a_chain():
    e = exponents(1.0, 2.0)
    assert e.kappa == pytest.approx(2.0 / 3.0)
    assert e.eta == pytest.approx(1.0 / 3.0)
    assert e.gamma == pytest.approx(2.0)
    assert e.kappa_below_one


@pytest.mark.parametrize("D", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("offset", [0.5, 1.0, 4.0, 10.0])
def test_exponent_identity(D, offset):
    e = exponents(D, D + offset)
    assert 1.0 / e.eta == pytest.approx(1.0 + e.gamma, abs=1e-12)
    assert e.kappa < 1.0


def test_alpha_must_exceed_D():
    with pytest.raises(InvalidArgumentError):
        exponents(2.0, 2.0)


def test_r_max_oracle():
    assert r_max(1.0, 2.0, V, 1.0 / 3.0) == pytest.approx(350.03, abs=0.01)
    with pytest.raises(InvalidArgumentError):
        r_max(0.0, 2.0, V, 1.0 / 3.0)
    with pytest.raises(InvalidArgumentError):
        r_max(1.0, 1.0, V, 1.0 / 3.0)


def test_group_velocity_is_the_derivative_of_the_front():
    params = ConeParameters.from_model(1.0, 3.0, lam=4.0, v=V)
    t, h = 2.0, 1e-6
    numeric = (params.r_max(t + h) - params.r_max(t - h)) / (2 * h)
    assert params.v_g(t) == pytest.approx(numeric, rel=1e-6)
    assert params.v_g(t) / params.r_max(t) == pytest.approx((1.0 + params.gamma) / t)
    assert params.v_g(t, "paper_display") == pytest.approx(params.v_g(t) / (1.0 + params.gamma))
    with pytest.raises(InvalidArgumentError):
        v_g(t, 4.0, V, params.eta, params.gamma, form="sideways")


def test_front_curve_skips_time_zero():
    params = ConeParameters.from_model(1.0, 2.0, v=V)
    curve = front_curve(params, [0.0, 0.5, 1.0])
    assert [point.t for point in curve] == [0.5, 1.0]
    assert curve[1].r_max == pytest.approx(params.r_max(1.0))


def test_cone_parameters_validation():
    with pytest.raises(InvalidArgumentError):
        ConeParameters.from_model(1.0, 2.0, lam=0.5, v=V)
    with pytest.raises(InvalidArgumentError):
        ConeParameters.from_model(1.0, 2.0, v=0.0)


def test_asymptotic_decay_rates():
    params = ConeParameters.from_model(1.0, 2.0, lam=4.0, v=V)
    rows = asymptotic_check(params, [10.0, 11.0, 20.0, 50.0, 100.0], GrowthCertificate(C=5.0 / 3.0, D=1.0),
                            GrowthCertificate(C=2.0, D=0.0), C_prime=1.0)
    expected = expected_decay_rate(params)
    assert expected == pytest.approx(-3.0 * V)
    for _, rate1, rate3 in decay_rates(rows):
        assert rate1 == pytest.approx(expected, rel=1e-9)
        assert abs(rate3 - expected) <= 0.01 * abs(expected)
    last = rows[-1]
    assert math.exp(last.log_term2) == pytest.approx(last.term2_limit, rel=1e-3)


def test_asymptotic_check_needs_positive_prefactor():
    params = ConeParameters.from_model(1.0, 2.0, v=V)
    with pytest.raises(InvalidArgumentError):
        asymptotic_check(params, [1.0], GrowthCertificate(C=1.0, D=1.0), GrowthCertificate(C=2.0, D=0.0), 0.0)


def _grid(norm):
    return [(t, r, norm(t, r)) for t in (0.5, 1.0, 2.0) for r in (1.0, 2.0, 3.0, 4.0)]


def test_empirical_front():
    # the signal reaches r <= 2t
    front = empirical_front(_grid(lambda t, r: 1.0 if r <= 2 * t else 1e-6), epsilon=1e-3)
    assert [(rec.t, rec.r_star) for rec in front] == [(0.5, 2.0), (1.0, 3.0), (2.0, math.inf)]
    assert [rec.saturated for rec in front] == [False, False, True]


def test_front_on_the_last_site_is_saturated():
    front = empirical_front(_grid(lambda t, r: 1.0 if r <= 3 else 0.0), epsilon=1e-3)
    assert all(rec.r_star == 4.0 and rec.saturated for rec in front)


def test_empirical_front_keeps_the_largest_norm():
    records = _grid(lambda t, r: 0.0) + [(1.0, 3.0, 0.5)]
    front = empirical_front(records, epsilon=1e-3)
    assert front[1].r_star == 4.0


def test_empirical_front_needs_a_rectangular_grid():
    with pytest.raises(InvalidArgumentError):
        empirical_front([(0.5, 1.0, 0.0), (1.0, 2.0, 0.0)], epsilon=1e-3)
    with pytest.raises(InvalidArgumentError):
        empirical_front(_grid(lambda t, r: 0.0), epsilon=0.0)


def test_fit_power_law_recovers_exponent():
    front = [FrontRecord(t=t, r_star=2.0 * t ** 3, epsilon=1.0) for t in np.linspace(1.0, 10.0, 10)]
    fit = fit_power_law(front)
    assert fit.exponent == pytest.approx(3.0, abs=1e-9)
    assert fit.prefactor == pytest.approx(2.0, rel=1e-9)
    assert fit.residual < 1e-9
    assert fit.points_used == 10


def test_fit_power_law_skips_saturated_rows():
    front = [FrontRecord(t=1.0, r_star=1.0, epsilon=1.0), FrontRecord(t=2.0, r_star=4.0, epsilon=1.0),
             FrontRecord(t=3.0, r_star=math.inf, epsilon=1.0, saturated=True)]
    assert fit_power_law(front).exponent == pytest.approx(2.0)
    with pytest.raises(InvalidArgumentError):
        fit_power_law(front[:1])


def test_default_epsilon():
    assert default_epsilon(1.0, 1.0) == pytest.approx(2e-3)


@pytest.mark.parametrize("D, alpha", [(1.0, 2.0), (1.0, 5.0), (2.0, 3.0)])
def test_r_max_is_increasing_and_convex(D, alpha):
    eta = exponents(D, alpha).eta
    values = np.array([r_max(t, 4.0, V, eta) for t in np.linspace(0.1, 5.0, 50)])
    assert np.all(np.diff(values) > 0)
    assert np.all(np.diff(values, 2) > 0)


@pytest.mark.parametrize("norm", [
    lambda t, r: math.exp(2 * t - r),
    lambda t, r: float(np.random.default_rng(int(10 * t + r)).random()),
], ids=["decaying", "irregular"])
def test_front_moves_outward_as_epsilon_shrinks(norm):
    records = _grid(norm)
    fronts = [empirical_front(records, epsilon) for epsilon in (0.9, 0.5, 0.1, 1e-2, 1e-4)]
    for coarse, fine in zip(fronts, fronts[1:]):
        assert all(f.r_star >= c.r_star for c, f in zip(coarse, fine))
