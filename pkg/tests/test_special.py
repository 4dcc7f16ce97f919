"""Tests for the theta series and the upper incomplete gamma."""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy import special as ss

from latsum.special import (
    cosine_theta,
    shifted_theta,
    theta2,
    theta3,
    theta4,
    upper_incomplete_gamma,
)


def brute_shifted(phi, t, terms=400):
    """Plain truncated series sum_{|j|<=terms} exp(-pi t (j+phi)^2)."""
    return sum(math.exp(-math.pi * t * (j + phi) ** 2)
               for j in range(-terms, terms + 1))


def test_theta2_direct_series_oracle():
    # 50-term direct summation at t = 1
    ref = sum(math.exp(-math.pi * (j - 0.5) ** 2) for j in range(-50, 51))
    assert theta2(1.0) == pytest.approx(ref, rel=1e-14)


def test_theta2_large_t_leading_term():
    # single term of the defining series dominates
    assert theta2(50.0) == pytest.approx(2.0 * math.exp(-math.pi * 50.0 / 4.0),
                                         rel=1e-12)


def test_theta2_modular_transform_consistency():
    t = 0.37
    lhs = theta2(t)
    rhs = theta4(1.0 / t) / math.sqrt(t)
    assert abs(lhs - rhs) <= 1e-13 * lhs


def test_theta3_closed_form_at_one():
    # direct summation oracle; coincides with pi^{1/4}/Gamma(3/4)
    ref = sum(math.exp(-math.pi * j * j) for j in range(-50, 51))
    assert theta3(1.0) == pytest.approx(ref, rel=1e-14)
    assert theta3(1.0) == pytest.approx(math.pi ** 0.25 / ss.gamma(0.75),
                                        rel=1e-13)


def test_theta3_large_t_limit():
    assert theta3(40.0) == pytest.approx(1.0 + 2.0 * math.exp(-40.0 * math.pi),
                                         rel=1e-15)


def test_theta_quartic_identities_spot():
    # theta3(q) = theta3(q^4) + theta2(q^4) at q = e^{-0.8 pi}
    t = 0.8
    assert abs(theta3(t) - theta3(4 * t) - theta2(4 * t)) <= 1e-13 * theta3(t)
    # theta4(q) = theta3(q^4) - theta2(q^4) at q = e^{-1.3 pi}
    t = 1.3
    assert abs(theta4(t) - theta3(4 * t) + theta2(4 * t)) <= 1e-13 * theta3(4 * t)


def test_theta_quartic_identities_random_q():
    # residuals relative to the magnitude of the terms combined; the theta4
    # identity subtracts two nearly equal numbers when q -> 1, so the value
    # itself cannot carry more relative accuracy than that scale allows
    rng = np.random.default_rng(20240811)
    for q in rng.uniform(0.0, 0.97, size=100):
        if q < 1e-12:
            continue
        t = -math.log(q) / math.pi
        scale = theta3(4 * t)
        assert abs(theta3(t) - theta3(4 * t) - theta2(4 * t)) <= 1e-12 * theta3(t)
        assert abs(theta4(t) - theta3(4 * t) + theta2(4 * t)) <= 1e-12 * scale


def test_theta4_small_t_asymptote():
    # theta4(e^{-pi t}) ~ 2 t^{-1/2} e^{-pi/(4t)}: the leading coefficient is
    # the 2 of theta2(q) = 2 q^{1/4} + ..., fixed by the modular transform
    t = 0.01
    ratio = theta4(t) * math.sqrt(t) / math.exp(-math.pi / (4.0 * t))
    assert ratio == pytest.approx(2.0, abs=1e-6)


def test_modular_transforms_on_log_grid():
    # 200-point grid over [1e-3, 1e3]; values that underflow to zero on both
    # sides count as agreeing
    for t in np.geomspace(1e-3, 1e3, 200):
        a, b = theta3(t), theta3(1.0 / t) / math.sqrt(t)
        assert abs(a - b) <= 1e-12 * a
        a, b = theta2(t), theta4(1.0 / t) / math.sqrt(t)
        if a > 1e-280 or b > 1e-280:
            assert abs(a - b) <= 1e-12 * a


def test_theta_monotonicity():
    # strict ordering holds while 2 e^{-pi t} stays resolvable in doubles
    grid = np.geomspace(1e-2, 10.0, 80)
    v3 = [theta3(t) for t in grid]
    v4 = [theta4(t) for t in grid]
    assert all(x > y for x, y in zip(v3, v3[1:]))
    assert all(x < y for x, y in zip(v4, v4[1:]))


def test_theta_domain_errors():
    for f in (theta2, theta3, theta4):
        with pytest.raises(ValueError):
            f(0.0)
        with pytest.raises(ValueError):
            f(-1.0)
    with pytest.raises(ValueError):
        shifted_theta(0.3, -0.1)


def test_shifted_theta_special_cases():
    assert shifted_theta(0.0, 1.0) == pytest.approx(theta3(1.0), rel=1e-15)
    assert shifted_theta(0.5, 0.7) == pytest.approx(theta2(0.7), rel=1e-14)


def test_shifted_theta_small_t_poisson_vs_direct():
    # phi = 1/6, t = 0.25: direct series with |j| <= 200 as the oracle
    ref = brute_shifted(1.0 / 6.0, 0.25, terms=200)
    assert shifted_theta(1.0 / 6.0, 0.25) == pytest.approx(ref, rel=1e-13)


def test_shifted_theta_shift_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(50):
        phi = float(rng.uniform(0, 1))
        t = float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2))))
        v = shifted_theta(phi, t)
        assert shifted_theta(1.0 - phi, t) == pytest.approx(v, rel=1e-13)
        assert shifted_theta(phi + 1.0, t) == pytest.approx(v, rel=1e-15)
        assert shifted_theta(-phi, t) == pytest.approx(v, rel=1e-13)


def test_shifted_theta_against_direct_sum_samples():
    rng = np.random.default_rng(11)
    for _ in range(60):
        phi = float(rng.uniform(0, 1))
        t = float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2))))
        assert shifted_theta(phi, t) == pytest.approx(brute_shifted(phi, t),
                                                      rel=1e-12)


def test_cosine_theta_poisson_consistency():
    # theta~[phi](t) = t^{-1/2} theta[phi](1/t); checked on the absolute
    # scale of the transform since the cosine series can be exponentially
    # small where the shifted series is O(1)
    rng = np.random.default_rng(13)
    for _ in range(40):
        phi = float(rng.uniform(0, 1))
        t = float(np.exp(rng.uniform(np.log(0.05), np.log(20.0))))
        lhs = cosine_theta(phi, t)
        rhs = shifted_theta(phi, 1.0 / t) / math.sqrt(t)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), 1e-6)


# ---------------------------------------------------------------------------
# incomplete gamma
# ---------------------------------------------------------------------------

def quad_oracle(a, x):
    """Gamma(a, x) by adaptive quadrature of the defining integral.

    The integrand t^{a-1} e^{-t} is smooth on [x, inf) for every x > 0, so
    no lifting is needed; kept free of recurrences to stay independent of
    the implementation's route (and of its conditioning).
    """
    val, _ = integrate.quad(lambda t: t ** (a - 1.0) * math.exp(-t),
                            x, np.inf, epsabs=1e-300, epsrel=1e-13, limit=400)
    return val


def quad_oracle_lifted(a, x):
    """Gamma(a, x) by quadrature after a recurrence lift above zero order."""
    k = 0
    aa = a
    while aa <= 0.5:
        aa += 1.0
        k += 1
    val, _ = integrate.quad(lambda t: t ** (aa - 1.0) * math.exp(-t),
                            x, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    for _ in range(k):
        aa -= 1.0
        val = (val - x ** aa * math.exp(-x)) / aa
    return val


def test_gamma_closed_forms():
    assert upper_incomplete_gamma(1.0, 2.0) == pytest.approx(math.exp(-2.0),
                                                             rel=1e-15)
    assert upper_incomplete_gamma(0.5, 1.0) == pytest.approx(
        math.sqrt(math.pi) * ss.erfc(1.0), rel=1e-13)


def test_gamma_negative_order_quadrature_oracle():
    assert upper_incomplete_gamma(-1.5, 0.8) == pytest.approx(
        quad_oracle_lifted(-1.5, 0.8), rel=1e-12)
    assert upper_incomplete_gamma(-1.5, 0.8) == pytest.approx(
        quad_oracle(-1.5, 0.8), rel=1e-12)


def test_gamma_accuracy_over_contract_domain():
    rng = np.random.default_rng(3)
    for _ in range(120):
        a = float(rng.uniform(-15, 15))
        x = float(np.exp(rng.uniform(np.log(1e-3), np.log(50.0))))
        assert upper_incomplete_gamma(a, x) == pytest.approx(
            quad_oracle(a, x), rel=2e-12)


def test_gamma_near_integer_orders():
    for a in (-1e-9, -0.9999999, -1.0000001, 0.0, -2.0, -7.0):
        for x in (0.05, 0.7, 3.0, 40.0):
            assert upper_incomplete_gamma(a, x) == pytest.approx(
                quad_oracle(a, x), rel=1e-11)


def test_gamma_recurrence_internal_consistency():
    # Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a across the CF/ladder split
    rng = np.random.default_rng(5)
    for _ in range(60):
        a = float(rng.uniform(-14, -0.2))
        x = float(np.exp(rng.uniform(np.log(1e-2), np.log(45.0))))
        lhs = upper_incomplete_gamma(a, x)
        rhs = (upper_incomplete_gamma(a + 1.0, x)
               - x ** a * math.exp(-x)) / a
        assert lhs == pytest.approx(rhs, rel=1e-11)


def test_gamma_vectorized_matches_scalar():
    xs = np.geomspace(0.01, 45.0, 37)
    for a in (-4.5, -0.25, 2.5):
        vec = upper_incomplete_gamma(a, xs)
        for x, v in zip(xs, vec):
            assert v == pytest.approx(upper_incomplete_gamma(a, float(x)),
                                      rel=1e-14)


def test_gamma_domain_error():
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.0, 0.0)
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.0, np.array([1.0, -2.0]))
