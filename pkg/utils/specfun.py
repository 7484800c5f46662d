"""
Complex special functions in double precision.

All functions accept scalars or numpy arrays and return the same shape.
Gamma-family functions shift the argument into Re(w) >= 10 by upward
recurrence and then use the Stirling/asymptotic expansions; zeta uses
Euler-Maclaurin summation with the derivative taken term by term.
"""
import logging
import math
from fractions import Fraction

import numpy as np

from utils.errors import DomainError, PoleError

logger = logging.getLogger(__name__)

EULER_MASCHERONI = 0.57721566490153286060651209008240243
LOG_PI = math.log(math.pi)
LOG_2PI = math.log(2.0 * math.pi)

# B_2, B_4, ..., B_24
BERNOULLI_EVEN = np.array([
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
])

ZETA_MAX_HEIGHT = 2.0e4
ZETA_CORRECTIONS = 12
_CHUNK_ELEMENTS = 2_000_000


def _prepare(s):
    arr = np.asarray(s, dtype=np.complex128)
    return np.atleast_1d(arr).ravel(), arr.ndim == 0, arr.shape


def _finish(values, scalar, shape):
    if scalar:
        return complex(values[0])
    return values.reshape(shape)


def _check_gamma_poles(s, name):
    bad = (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))
    if np.any(bad):
        raise PoleError(f"{name} has a pole at s={s[bad][0].real:g}")


def _shift(s, threshold):
    """Common upward shift bringing every Re(s) to at least ``threshold``."""
    low = float(np.min(s.real)) if s.size else threshold
    return max(0, int(math.ceil(threshold - low)))


def log_gamma(s):
    """Principal branch of log Gamma(s)."""
    s, scalar, shape = _prepare(s)
    _check_gamma_poles(s, "log_gamma")
    n = _shift(s, 10.0)
    w = s + n
    w2 = w * w
    series = np.zeros_like(w)
    wpow = w.copy()
    for k in range(1, 9):
        b = BERNOULLI_EVEN[k - 1]
        series += b / (2 * k * (2 * k - 1) * wpow)
        wpow = wpow * w2
    value = (w - 0.5) * np.log(w) - w + 0.5 * LOG_2PI + series
    # individual logs keep the principal branch
    for k in range(n):
        value -= np.log(s + k)
    return _finish(value, scalar, shape)


def digamma(s):
    """psi(s) = Gamma'(s)/Gamma(s)."""
    s, scalar, shape = _prepare(s)
    _check_gamma_poles(s, "digamma")
    n = _shift(s, 10.0)
    w = s + n
    w2 = w * w
    value = np.log(w) - 0.5 / w
    wpow = w2.copy()
    for k in range(1, 10):
        value -= BERNOULLI_EVEN[k - 1] / (2 * k * wpow)
        wpow = wpow * w2
    for k in range(n):
        value -= 1.0 / (s + k)
    return _finish(value, scalar, shape)


def polygamma(m, s):
    """m-th derivative of digamma for integer m >= 0."""
    m = int(m)
    if m < 0:
        raise DomainError("polygamma order must be non-negative")
    if m == 0:
        return digamma(s)
    s, scalar, shape = _prepare(s)
    _check_gamma_poles(s, "polygamma")
    n = _shift(s, 10.0 + 2 * m)
    w = s + n
    sign = 1.0 if m % 2 == 1 else -1.0
    fact_m1 = math.factorial(m - 1)
    fact_m = math.factorial(m)
    value = fact_m1 / w ** m + fact_m / (2.0 * w ** (m + 1))
    w2 = w * w
    wpow = w ** (m + 2)
    for k in range(1, 11):
        coeff = BERNOULLI_EVEN[k - 1] * math.factorial(2 * k + m - 1) / math.factorial(2 * k)
        value += coeff / wpow
        wpow = wpow * w2
    value = sign * value
    for k in range(n):
        value += sign * fact_m / (s + k) ** (m + 1)
    return _finish(value, scalar, shape)


def trigamma(s):
    return polygamma(1, s)


def hurwitz_zeta(k, a):
    """zeta(k, a) = sum_{n>=0} (n+a)^-k for integer k >= 2."""
    k = int(k)
    if k < 2:
        raise DomainError("hurwitz_zeta needs integer order k >= 2")
    scale = (-1.0) ** k / math.factorial(k - 1)
    value = polygamma(k - 1, a)
    return value * scale


def _bernoulli_numbers(count):
    """B_0 .. B_{count-1} as exact fractions (B_1 = -1/2)."""
    numbers = []
    for m in range(count):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * numbers[k]
        numbers.append(Fraction(1) if m == 0 else -acc / (m + 1))
    return numbers


_BERNOULLI_ALL = [float(b) for b in _bernoulli_numbers(40)]
_LERCH_SERIES_TERMS = 32
LERCH_NEAR_ONE = 0.35


def bernoulli_poly(n, a):
    a = np.asarray(a, dtype=np.complex128)
    value = np.zeros_like(a)
    for k in range(n + 1):
        value = value + math.comb(n, k) * _BERNOULLI_ALL[k] * a ** (n - k)
    return value


def _lerch_near_one(u, s, a):
    """
    Expansion of Phi(exp(-u), s, a) in powers of u, valid for 0 < u < 2*pi.

    x^{-a} * [sum_{k != s-1} zeta(s-k, a) (-u)^k / k!
              + (-u)^{s-1}/(s-1)! * (psi(s) - psi(a) - log u)]
    """
    total = np.zeros_like(a)
    psi_s = -EULER_MASCHERONI + sum(1.0 / j for j in range(1, s))
    for k in range(_LERCH_SERIES_TERMS):
        weight = (-u) ** k / math.factorial(k)
        if k < s - 1:
            coeff = hurwitz_zeta(s - k, a)
        elif k == s - 1:
            coeff = psi_s - digamma(a) - np.log(u)
        else:
            j = k - s
            coeff = -bernoulli_poly(j + 1, a) / (j + 1)
        total = total + weight * coeff
    return np.exp(u * a) * total


def _lerch_direct(xs, s, av):
    xmax = float(np.max(xs))
    lead = float(np.min(np.abs(av)))
    target = 1e-17 * min(1.0, max(lead, 1e-300) ** (-s))
    if xmax == 0.0:
        n_terms = 1
    else:
        n_terms = int(math.ceil(math.log(target * (1.0 - xmax)) / math.log(xmax))) + 1
    # the omitted terms need |n + a| >= 1
    n_terms = max(n_terms, int(math.ceil(1.0 - float(np.min(av.real)))) + 1, 1)
    if n_terms > 50_000_000:
        raise DomainError(f"lerch_phi: x={xmax} too close to 1")

    n = np.arange(n_terms, dtype=np.float64)
    out = np.empty(xs.size, dtype=np.complex128)
    rows = max(1, _CHUNK_ELEMENTS // n_terms)
    for start in range(0, xs.size, rows):
        stop = start + rows
        powers = np.power(xs[start:stop, None], n[None, :])
        terms = powers / (n[None, :] + av[start:stop, None]) ** s
        out[start:stop] = terms.sum(axis=1)
    return out


def lerch_phi(x, s, a, method="auto"):
    """
    Hurwitz-Lerch transcendent Phi(x, s, a) = sum_{n>=0} x^n (n+a)^-s

    Only real 0 <= x < 1 and integer s >= 1 are supported. The direct series
    takes as many terms as the geometric tail bound asks for; when x is
    close to 1 and |a| is moderate the logarithmic expansion around x = 1
    is used instead. ``method`` forces 'direct' or 'expansion'.
    """
    s = int(s)
    if s < 1:
        raise DomainError("lerch_phi needs integer s >= 1")
    x_arr = np.asarray(x, dtype=np.float64)
    a_arr = np.asarray(a, dtype=np.complex128)
    scalar = x_arr.ndim == 0 and a_arr.ndim == 0
    x_b, a_b = np.broadcast_arrays(x_arr, a_arr)
    shape = x_b.shape
    xs = np.atleast_1d(x_b).ravel().astype(np.float64)
    av = np.atleast_1d(a_b).ravel().astype(np.complex128)
    if np.any(xs < 0) or np.any(xs >= 1):
        raise DomainError("lerch_phi requires 0 <= x < 1")
    _check_gamma_poles(av, "lerch_phi")

    out = np.empty(xs.size, dtype=np.complex128)
    if method == "direct":
        near = np.zeros(xs.size, dtype=bool)
    elif method == "expansion":
        near = xs > 0
    else:
        near = (xs > LERCH_NEAR_ONE) & (np.abs(av) <= 2.0)
    if np.any(near):
        out[near] = _lerch_near_one(-np.log(xs[near]), s, av[near])
    if np.any(~near):
        out[~near] = _lerch_direct(xs[~near], s, av[~near])
    return _finish(out, scalar, shape)


def _zeta_pair(s, cutoff=None):
    """Euler-Maclaurin zeta(s) and zeta'(s) for a flat complex array."""
    if np.any(s.real <= -1.0):
        raise DomainError("zeta is only implemented for Re(s) > -1")
    if np.any(np.abs(s.imag) > ZETA_MAX_HEIGHT):
        raise DomainError(f"zeta height beyond {ZETA_MAX_HEIGHT:g}")
    if np.any(s == 1.0):
        raise PoleError("zeta has a pole at s=1")

    if cutoff is None:
        height = float(np.max(np.abs(s.imag))) if s.size else 0.0
        cutoff = max(10, int(math.ceil(height / 2.0)))
    N = int(cutoff)
    log_n = np.log(np.arange(1, N, dtype=np.float64))
    log_N = math.log(N)

    zeta = np.empty(s.size, dtype=np.complex128)
    dzeta = np.empty(s.size, dtype=np.complex128)
    rows = max(1, _CHUNK_ELEMENTS // max(N, 1))
    for start in range(0, s.size, rows):
        sc = s[start:start + rows]
        powers = np.exp(-sc[:, None] * log_n[None, :])
        zeta[start:start + rows] = powers.sum(axis=1)
        dzeta[start:start + rows] = -(powers * log_n[None, :]).sum(axis=1)

    N_1ms = np.exp((1.0 - s) * log_N)
    N_ms = N_1ms / N
    zeta += N_1ms / (s - 1.0) + 0.5 * N_ms
    dzeta += -log_N * N_1ms / (s - 1.0) - N_1ms / (s - 1.0) ** 2 - 0.5 * log_N * N_ms

    # P_k = s(s+1)...(s+2k-2), carried with its derivative
    P = s.copy()
    dP = np.ones_like(s)
    Npow = N_ms / N  # N^{-s-1}
    fact = 2.0
    for k in range(1, ZETA_CORRECTIONS + 1):
        c = BERNOULLI_EVEN[k - 1] / fact
        zeta += c * P * Npow
        dzeta += c * (dP - log_N * P) * Npow
        for j in (2 * k - 1, 2 * k):
            dP = dP * (s + j) + P
            P = P * (s + j)
        Npow = Npow / (N * N)
        fact *= (2 * k + 1) * (2 * k + 2)
    return zeta, dzeta


def zeta(s, cutoff=None):
    s, scalar, shape = _prepare(s)
    value, _ = _zeta_pair(s, cutoff)
    return _finish(value, scalar, shape)


def zeta_prime(s, cutoff=None):
    s, scalar, shape = _prepare(s)
    _, value = _zeta_pair(s, cutoff)
    return _finish(value, scalar, shape)


def zeta_and_prime(s, cutoff=None):
    """Both zeta(s) and zeta'(s) from one Euler-Maclaurin pass."""
    s, scalar, shape = _prepare(s)
    value, deriv = _zeta_pair(s, cutoff)
    return _finish(value, scalar, shape), _finish(deriv, scalar, shape)


def zlog_deriv(s):
    """(Z'/Z)(s) for the completed zeta Z(s) = pi^{-s/2} Gamma(s/2) zeta(s)."""
    s, scalar, shape = _prepare(s)
    z, dz = _zeta_pair(s)
    value = -0.5 * LOG_PI + 0.5 * digamma(s / 2.0) + dz / z
    return _finish(value, scalar, shape)


def riemann_siegel_theta(t):
    t = np.asarray(t, dtype=np.float64)
    return np.imag(log_gamma(0.25 + 0.5j * t)) - 0.5 * t * LOG_PI


def hardy_z(t):
    """
    Hardy's function Z(t) = exp(i theta(t)) zeta(1/2 + it), real for real t.

    xi(1/2 + it) = -(t^2 + 1/4)/2 * pi^{-1/4} |Gamma(1/4 + it/2)| Z(t), so
    the sign of A on the real axis is the opposite of the sign of Z.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    theta = riemann_siegel_theta(t_arr)
    value = np.real(np.exp(1j * theta) * zeta(0.5 + 1j * t_arr))
    if t_arr.ndim == 0:
        return float(value)
    return value
