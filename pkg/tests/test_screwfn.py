import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from utils.analysis import TestFunction
from utils.errors import JumpPointError, TableTooSmallError
from utils.screwfn import ScrewContext, jump_size

mpmath.mp.dps = 30


def g_oracle(t, screw):
    """g(t) with every special function taken from mpmath."""
    t = mpmath.mpf(abs(t))
    value = -16 * mpmath.sinh(t / 4) ** 2
    value -= t / 2 * (mpmath.digamma(0.25) - mpmath.log(mpmath.pi))
    value -= (mpmath.psi(1, 0.25) - mpmath.exp(-t / 2) * mpmath.lerchphi(mpmath.exp(-2 * t), 2, 0.25)) / 4
    for n in range(2, int(mpmath.floor(mpmath.exp(t))) + 1):
        lam = screw.mangoldt[n]
        if lam:
            value += lam / mpmath.sqrt(n) * (t - mpmath.log(n))
    return float(value)


def test_g_at_zero_and_evenness(screw):
    assert screw.g(0.0) == 0.0
    t = np.array([0.3, 1.7, 4.4])
    np.testing.assert_array_equal(screw.g(t), screw.g(-t))


@pytest.mark.parametrize("t", [0.5, 1.0, 2.5, 4.0, 7.0])
def test_g_matches_mpmath(screw, t):
    assert screw.g(t) == pytest.approx(g_oracle(t, screw), rel=1e-11, abs=1e-12)


def test_g_is_non_positive(screw):
    t = np.linspace(0.01, 6.0, 300)
    assert np.all(screw.g(t) <= 0.0)


def test_g_continuous_at_log_n(screw):
    for n in (2, 3, 4, 5, 7):
        t = math.log(n)
        assert screw.g(t - 1e-12) == pytest.approx(screw.g(t + 1e-12), abs=1e-10)


def test_g_prime_matches_finite_difference(screw):
    h = 1e-5
    for t in (1.0, 2.5, 3.9):
        fd = (screw.g(t + h) - screw.g(t - h)) / (2 * h)
        assert screw.g_prime(t) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_g_prime_is_odd(screw):
    assert screw.g_prime(-1.3) == pytest.approx(-screw.g_prime(1.3), rel=1e-15)


def test_g_prime_jumps_at_prime_powers(screw):
    eps = 1e-7
    for n in (2, 3, 4, 5, 8, 9):
        t = math.log(n)
        jump = screw.g_prime(t + eps) - screw.g_prime(t - eps)
        # the smooth part changes by O(eps) across the window
        assert jump == pytest.approx(jump_size(n, screw), abs=1e-5)


def test_minus_g_prime_grows_at_the_origin(screw):
    # -g'(t) behaves like (1/2) log(1/t) as t -> 0+
    values = screw.minus_g_prime(np.array([1e-2, 1e-4, 1e-6]))
    assert np.all(np.diff(values) > 0)
    assert values[2] - values[1] == pytest.approx(0.5 * math.log(100.0), rel=1e-2)


def test_jump_points_are_rejected(screw):
    with pytest.raises(JumpPointError):
        screw.g_prime(0.0)
    with pytest.raises(JumpPointError):
        screw.g_prime(math.log(3))


def test_range_guard():
    screw = ScrewContext(t_max=2.0)
    with pytest.raises(TableTooSmallError):
        screw.g(3.0)


def test_g_kernel_is_symmetric(screw):
    t, u = 1.2, 3.1
    assert screw.g_kernel(t, u) == pytest.approx(screw.g_kernel(u, t), rel=1e-14)
    assert screw.g_kernel(t, 0.0) == pytest.approx(0.0, abs=1e-15)


def kernel_double_integral(screw, phi, a, b):
    """Nested adaptive quadrature of phi(t) G(t, u) phi(u), split at the diagonal cusp."""
    def f(u, t):
        return phi(t) * float(screw.g_kernel(t, u)) * phi(u)

    opts = {"epsabs": 1e-14, "epsrel": 1e-10}
    lower, _ = integrate.dblquad(f, a, b, lambda t: a, lambda t: t, **opts)
    upper, _ = integrate.dblquad(f, a, b, lambda t: t, lambda t: b, **opts)
    return lower + upper


def test_herm_form_matches_double_integral(screw):
    phi = TestFunction(2.0, 0.5).derivative()
    est = screw.herm_form_gg(phi, phi)
    assert est.value == pytest.approx(kernel_double_integral(screw, phi, 1.5, 2.5), rel=1e-6)
    assert est.value > 0.0
    assert est.details["path"] == "kernel"


def test_herm_form_with_nonzero_mean(screw):
    phi = TestFunction(1.5, 0.6)
    est = screw.herm_form_gg(phi, phi)
    assert est.value == pytest.approx(kernel_double_integral(screw, phi, 0.9, 2.1), rel=1e-5)


def test_herm_form_of_zero_function(screw):
    zero = TestFunction(amplitude=0.0)
    assert screw.herm_form_gg(zero, TestFunction()).value == 0.0


def test_g_kernel_includes_value_at_origin(screw):
    assert screw.g(0.0) == 0.0
    t, u = 0.7, 2.3
    expected = screw.g(t - u) - screw.g(t) - screw.g(-u) + screw.g(0.0)
    assert screw.g_kernel(t, u) == pytest.approx(expected, rel=1e-15)
    assert screw.g_kernel(u, u) == pytest.approx(-2.0 * screw.g(u), rel=1e-14)
