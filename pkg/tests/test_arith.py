import math

import numpy as np
import pytest

from utils.arith import (
    cutoff_for,
    prime_sum_g,
    prime_sum_osc,
    prime_sum_plain,
    sieve_mangoldt,
    table_for_t,
)
from utils.errors import CapacityError, TableTooSmallError


def naive_mangoldt(n):
    for p in range(2, n + 1):
        if n % p == 0:
            m = n
            while m % p == 0:
                m //= p
            return math.log(p) if m == 1 else 0.0
    return 0.0


def test_small_values():
    table = sieve_mangoldt(30)
    assert table[1] == 0.0
    assert table[6] == 0.0
    assert table[8] == pytest.approx(math.log(2))
    assert table[9] == pytest.approx(math.log(3))
    assert table[29] == pytest.approx(math.log(29))


def test_sieve_matches_trial_division():
    table = sieve_mangoldt(500)
    expected = [naive_mangoldt(n) for n in range(1, 501)]
    np.testing.assert_allclose(table.values[1:], expected)


def test_chebyshev_psi():
    table = sieve_mangoldt(100)
    assert table.chebyshev_psi() == pytest.approx(sum(naive_mangoldt(n) for n in range(1, 101)))
    assert table.chebyshev_psi(10) == pytest.approx(math.log(2 * 2 * 2 * 3 * 3 * 5 * 7))


def test_table_is_read_only():
    table = sieve_mangoldt(50)
    with pytest.raises(ValueError):
        table.values[3] = 1.0


def test_capacity_guard():
    with pytest.raises(CapacityError):
        sieve_mangoldt(0)
    with pytest.raises(CapacityError):
        sieve_mangoldt(10 ** 8 + 1)


def test_cutoff_at_integer_boundary():
    assert cutoff_for(math.log(7)) == 7
    assert cutoff_for(0.0) == 1
    assert cutoff_for(-math.log(30)) == 30


def test_table_for_t_covers_the_range():
    table = table_for_t(5.0)
    assert table.bound == cutoff_for(5.0)
    table.terms_up_to(5.0)
    with pytest.raises(TableTooSmallError):
        table.terms_up_to(5.5)


def test_prime_sums_by_hand():
    table = sieve_mangoldt(20)
    t = math.log(5.5)
    # n = 2, 3, 4, 5
    terms = [(2, math.log(2)), (3, math.log(3)), (4, math.log(2)), (5, math.log(5))]
    plain = sum(lam / math.sqrt(n) for n, lam in terms)
    weighted = sum(lam / math.sqrt(n) * (t - math.log(n)) for n, lam in terms)
    assert prime_sum_plain(t, table) == pytest.approx(plain)
    assert prime_sum_g(t, table) == pytest.approx(weighted)
    assert prime_sum_g(-t, table) == pytest.approx(weighted)


def test_prime_sum_osc_direct_sum():
    table = sieve_mangoldt(100)
    t, z = 4.2, 3.7 - 0.4j
    expected = sum(
        table[n] / math.sqrt(n) * (np.exp(1j * z * (t - math.log(n))) - 1) / (1j * z)
        for n in range(2, 67) if table[n]
    )
    assert abs(prime_sum_osc(t, z, table) - expected) < 1e-12


def test_prime_sum_osc_tends_to_weighted_sum():
    table = sieve_mangoldt(100)
    t = 3.3
    values = prime_sum_osc(t, np.array([0.0, 1e-8, 1e-5]), table)
    assert values.shape == (3,)
    assert abs(values[0] - prime_sum_g(t, table)) < 1e-14
    assert abs(values[1] - prime_sum_g(t, table)) < 1e-6
    assert abs(values[2] - values[1]) < 1e-3


@pytest.mark.parametrize("N", [1000, 10_000, 100_000])
def test_chebyshev_band(N):
    psi = sieve_mangoldt(N).chebyshev_psi()
    assert 0.9 * N <= psi <= 1.2 * N


def test_prime_sum_g_is_convex_across_log_n():
    table = sieve_mangoldt(100)
    h = 1e-4
    for n in (2, 3, 4, 5, 7, 8, 9, 11):
        x = math.log(n)
        left = (prime_sum_g(x, table) - prime_sum_g(x - h, table)) / h
        right = (prime_sum_g(x + h, table) - prime_sum_g(x, table)) / h
        assert right - left == pytest.approx(table[n] / math.sqrt(n), rel=1e-6)


def test_prime_sum_g_derivative_is_plain_sum():
    table = sieve_mangoldt(200)
    h = 1e-6
    for t in (1.0, 1.5, 2.5, 3.3, 4.5):
        slope = (prime_sum_g(t + h, table) - prime_sum_g(t - h, table)) / (2 * h)
        assert slope == pytest.approx(prime_sum_plain(t, table), abs=1e-6)


def test_prime_sums_are_vectorized():
    table = sieve_mangoldt(200)
    t = np.array([0.5, 1.0, 2.0, 4.5])
    assert np.allclose(prime_sum_g(t, table), [prime_sum_g(v, table) for v in t], rtol=1e-15)
    assert np.allclose(prime_sum_plain(t, table), [prime_sum_plain(v, table) for v in t], rtol=1e-15)
    z = np.array([0.5, 2.0 + 1.0j, 3.0j])
    block = prime_sum_osc(t, z, table)
    assert block.shape == (3, 4)
    assert np.allclose(block[:, 2], prime_sum_osc(2.0, z, table), rtol=1e-14)


def test_prime_sum_osc_reflection():
    table = sieve_mangoldt(100)
    for z in (2.0 + 1.0j, 0.3 - 4.0j, 7.5):
        assert prime_sum_osc(2.7, -np.conj(z), table) == pytest.approx(np.conj(prime_sum_osc(2.7, z, table)), rel=1e-14)
