import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from utils.analysis import QuadratureSpec, TestFunction
from utils.errors import DomainError, ExclusionZoneError, JumpPointError, PoleError
from utils.zeros import p_t_zero_sum

mpmath.mp.dps = 30


def one_plus_theta_oracle(z):
    s = mpmath.mpf(0.5) - 1j * mpmath.mpmathify(z)
    L = 1 / s + 1 / (s - 1) - mpmath.log(mpmath.pi) / 2 + mpmath.digamma(s / 2) / 2
    zeta = mpmath.zeta(s)
    return complex(2 * zeta / ((1 + L) * zeta + mpmath.zeta(s, derivative=1)))


def test_one_plus_theta_at_origin(line):
    assert abs(line.one_plus_theta(0.0) - 2.0) < 1e-12


@pytest.mark.parametrize("z", [3.0 + 0.5j, 20.0, -7.5, 0.2 - 0.3j])
def test_one_plus_theta_matches_mpmath(line, z):
    assert abs(line.one_plus_theta(z) - one_plus_theta_oracle(z)) < 1e-10


def test_theta_is_unimodular_on_the_line(line, table):
    rng = np.random.default_rng(3)
    z = rng.uniform(1.0, 500.0, 100)
    np.testing.assert_allclose(np.abs(line.theta(z)), 1.0, atol=1e-9)


def test_one_plus_theta_vanishes_at_zeros(line, table):
    assert abs(line.one_plus_theta(table.ordinates[0])) < 1e-8


def test_frak_p_poles(line):
    with pytest.raises(PoleError):
        line.frak_p(1.0, 0.5j)
    with pytest.raises(PoleError):
        line.frak_p(1.0, -0.5j)


def test_frak_p_vanishes_at_t_zero(line):
    assert line.frak_p(0.0, 3.0 + 1.0j) == 0.0


def test_frak_p_is_even_in_t(line):
    z = np.array([0.7, 4.0 + 1.0j])
    np.testing.assert_allclose(line.frak_p(-1.3, z), line.frak_p(1.3, z), rtol=1e-15)


def test_frak_p_small_z_series_joins_direct_formula(line):
    below = line.frak_p(1.7, 0.999e-3)
    above = line.frak_p(1.7, 1.001e-3)
    assert abs(below - above) < 1e-5


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 4.0])
def test_zero_limit_is_minus_g(line, t):
    limit, _ = line.richardson_zero_limit(t)
    assert limit == pytest.approx(-line.screw.g(t), abs=1e-6)


@pytest.mark.parametrize("t", [1.0, 2.5])
def test_special_value_limit_is_minus_g_prime(line, t):
    assert line.special_value_limit(t) == pytest.approx(line.screw.minus_g_prime(t), abs=1e-3)


def test_special_value_limit_near_log_n(line):
    with pytest.raises(JumpPointError):
        line.special_value_limit(math.log(2) + 0.005)
    with pytest.raises(JumpPointError):
        line.special_value_limit(0.0)


@pytest.mark.parametrize("t", [1.0, 2.0])
@pytest.mark.parametrize("z", [2.0j, 3.0j])
def test_frak_p_against_zero_expansion(line, table, t, z):
    expansion, tail = p_t_zero_sum(t, z, table, tail_model="density")
    assert abs(line.frak_p(t, z) - expansion) <= tail.bound


def test_frak_s_vanishes_at_t_zero(line):
    np.testing.assert_array_equal(line.frak_s(0.0, np.array([1.0, 30.0])), 0.0)


def test_frak_s_exclusion_zone(line, table):
    with pytest.raises(ExclusionZoneError):
        line.frak_s(1.0, table.ordinates[2] + 1e-7, table)
    line.frak_s(1.0, table.ordinates[2] + 1e-3, table)


def test_frak_s_fused_formula_matches_naive_product(line):
    t, z = 1.4, np.array([3.3, 17.0, 120.5])
    naive = 1j * line.one_plus_theta(z) / (2.0 * math.sqrt(math.pi)) * line.frak_p(t, z)
    np.testing.assert_allclose(line.frak_s(t, z), naive, rtol=1e-10)


def test_frak_s_finite_at_a_zero(line, table):
    value = line.frak_s(1.0, table.ordinates[0])
    assert np.isfinite(value)


def test_frak_s_modulus_is_even_in_z(line):
    z = np.array([2.0, 44.4])
    np.testing.assert_allclose(np.abs(line.frak_s(1.0, -z)), np.abs(line.frak_s(1.0, z)), rtol=1e-10)


def test_frak_s_against_expansion(line, table):
    t, z = 1.0, 3.0
    value, tail = line.expansion_value(t, z, table)
    assert abs(line.frak_s(t, z) - value) <= tail.bound / math.sqrt(math.pi)


def test_p_hat_of_zero_function(line):
    assert line.p_hat_phi(TestFunction(amplitude=0.0), 3.0) == 0.0


def test_p_hat_against_scipy(line):
    phi = TestFunction(2.0, 1.0).derivative()
    z = 5.0
    points = list(line.screw.jump_points(1.0, 3.0))

    def part(fn):
        return integrate.quad(lambda t: fn(line.frak_s(t, z) * phi(t)), 1.0, 3.0,
                              points=points, limit=400, epsabs=1e-13)[0]

    expected = complex(part(lambda v: v.real), part(lambda v: v.imag))
    assert abs(line.p_hat_phi(phi, z) - expected) < 1e-9


def test_p_hat_modulus_is_even_in_z(line):
    phi = TestFunction(1.5, 1.0).derivative()
    z = np.array([0.5, 12.0])
    np.testing.assert_allclose(np.abs(line.p_hat_phi(phi, -z)), np.abs(line.p_hat_phi(phi, z)), rtol=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("t", [1.0, 2.0])
def test_norm_sq_quad_is_minus_two_g(line, table, t):
    est = line.norm_sq_quad(t, QuadratureSpec(radius=2000.0, threads=4), table)
    expected = -2.0 * line.screw.g(t)
    assert abs(est.value - expected) <= est.total_error
    assert abs(est.value - expected) <= 1e-2 * expected


@pytest.mark.slow
@pytest.mark.parametrize("t", [1.0, 3.0])
def test_decay_slope(line, t):
    assert line.decay_slope(t) <= -0.9


def test_frak_p_reflection(line):
    z = np.array([3.3 + 0.7j, 17.0 - 1.0j, 0.2 + 0.1j, 45.0])
    np.testing.assert_allclose(line.frak_p(1.3, -np.conj(z)), np.conj(line.frak_p(1.3, z)), rtol=1e-10)


def test_frak_s_is_smooth_across_a_zero(line, table):
    gamma = table.ordinates[0]
    values = [line.frak_s(1.0, gamma + h, table) for h in (1e-2, 1e-3, 1e-4)]
    first, second = abs(values[0] - values[1]), abs(values[1] - values[2])
    assert second * 5 <= first
    assert abs(values[2] - line.frak_s(1.0, gamma)) <= first


def test_increment_inner_edge_cases(line):
    assert line.increment_inner(0.0, 1.0, 0.5).value == 0.0
    with pytest.raises(DomainError):
        line.increment_inner(1.0, -1.0)


def test_increment_inner_with_base_zero_is_the_norm(line, table):
    spec = QuadratureSpec(radius=200.0)
    inner = line.increment_inner(1.5, 1.5, 0.0, spec, table)
    norm = line.norm_sq_quad(1.5, spec, table)
    assert inner.value == pytest.approx(norm.value, rel=1e-10)


def test_increment_inner_is_symmetric(line, table):
    spec = QuadratureSpec(radius=100.0)
    a = line.increment_inner(1.0, 2.0, 0.5, spec, table)
    b = line.increment_inner(2.0, 1.0, 0.5, spec, table)
    assert a.value == pytest.approx(b.value, rel=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("t, s, u", [(1.0, 2.0, 0.5), (1.5, 1.5, 1.0), (1.0, 0.5, 2.0)])
def test_increment_inner_matches_g_kernel(line, table, t, s, u):
    est = line.increment_inner(t, s, u, QuadratureSpec(radius=2000.0, threads=4), table)
    expected = float(line.screw.g_kernel(t, s))
    assert abs(est.value - expected) <= 1e-2 * abs(expected)
