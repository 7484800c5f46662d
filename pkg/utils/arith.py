"""
Prime-side arithmetic: the von Mangoldt sieve and the prime sums that show
up in g(t), g'(t) and the screw-line function P_t(z).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from utils.errors import CapacityError, TableTooSmallError

logger = logging.getLogger(__name__)

SIEVE_GUARD = 10 ** 8
BOUNDARY_EPS = 1e-12
OSC_SERIES_RADIUS = 1e-6


@dataclass(frozen=True)
class MangoldtTable:
    """Lambda(1..bound); index 0 is unused and holds 0."""

    bound: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)
        support = np.nonzero(self.values)[0]
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "log_support", np.log(support.astype(np.float64)))
        object.__setattr__(self, "weights", self.values[support] / np.sqrt(support))

    def __getitem__(self, n):
        return float(self.values[n])

    @property
    def max_t(self):
        return math.log(self.bound)

    def chebyshev_psi(self, n=None):
        n = self.bound if n is None else n
        return float(self.values[: n + 1].sum())

    def terms_up_to(self, t):
        """Prime powers n <= e^t: (log n, Lambda(n)/sqrt(n))."""
        cutoff = cutoff_for(t)
        if cutoff > self.bound:
            raise TableTooSmallError(
                f"t={t:g} needs Lambda up to {cutoff}, table stops at {self.bound}"
            )
        k = int(np.searchsorted(self.support, cutoff, side="right"))
        return self.log_support[:k], self.weights[:k]


def cutoff_for(t):
    """Largest n with n <= e^t, tolerant of rounding at integer boundaries."""
    return int(math.floor(math.exp(abs(t)) + BOUNDARY_EPS))


def sieve_mangoldt(N):
    """Smallest-prime-factor sieve, then Lambda(n) = log p on prime powers."""
    N = int(N)
    if N < 1:
        raise CapacityError("sieve bound must be at least 1")
    if N > SIEVE_GUARD:
        raise CapacityError(f"sieve bound {N} beyond the guard {SIEVE_GUARD}")

    spf = np.zeros(N + 1, dtype=np.int64)
    for p in range(2, math.isqrt(N) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    n = np.arange(N + 1, dtype=np.int64)
    primes_mask = (spf == 0) & (n >= 2)
    spf[primes_mask] = n[primes_mask]

    values = np.zeros(N + 1, dtype=np.float64)
    idx = np.arange(2, N + 1, dtype=np.int64)
    p = spf[2:]
    # strip every factor p; a prime power reduces to 1
    rest = idx.copy()
    while True:
        divisible = (rest % p == 0) & (rest > 1)
        if not divisible.any():
            break
        rest[divisible] //= p[divisible]
    prime_power = rest == 1
    values[2:][prime_power] = np.log(p[prime_power].astype(np.float64))
    logger.debug("sieved Lambda up to %d (%d prime powers)", N, int(prime_power.sum()))
    return MangoldtTable(bound=N, values=values)


def table_for_t(t_max):
    """Smallest table covering every t <= t_max."""
    return sieve_mangoldt(max(cutoff_for(t_max), 2))


def _over_t(t, table, profile):
    """sum_n Lambda(n)/sqrt(n) profile(t - log n) for every |t|, n <= e^max|t|."""
    t_arr = np.abs(np.asarray(t, dtype=np.float64))
    ts = np.atleast_1d(t_arr).ravel()
    if ts.size == 0:
        return np.zeros(t_arr.shape)
    logs, w = table.terms_up_to(float(ts.max()))
    value = profile(ts[:, None] - logs[None, :]) @ w
    return float(value[0]) if t_arr.ndim == 0 else value.reshape(t_arr.shape)


def prime_sum_g(t, table):
    """sum_{n <= e^t} Lambda(n)/sqrt(n) (t - log n), vectorized over t"""
    return _over_t(t, table, lambda gap: np.clip(gap, 0.0, None))


def prime_sum_plain(t, table):
    """sum_{n <= e^t} Lambda(n)/sqrt(n), vectorized over t"""
    return _over_t(t, table, lambda gap: (gap >= 0).astype(np.float64))


def prime_sum_osc(t, z, table):
    """
    sum_{n <= e^t} Lambda(n)/sqrt(n) * (exp(iz(t - log n)) - 1)/(iz)

    ``z`` may be an array. A scalar t gives the shape of z; a 1-D t gives a
    (z.size, t.size) block.
    """
    t_arr = np.abs(np.asarray(t, dtype=np.float64))
    ts = np.atleast_1d(t_arr).ravel()
    z_arr = np.asarray(z, dtype=np.complex128)
    zz = np.atleast_1d(z_arr).ravel()
    logs, w = table.terms_up_to(float(ts.max()))
    d = np.clip(ts[:, None] - logs[None, :], 0.0, None)
    arg = 1j * zz[:, None, None] * d[None, :, :]
    small = np.abs(zz) < OSC_SERIES_RADIUS
    safe = np.where(small, 1.0, zz)
    direct = np.expm1(arg) / (1j * safe[:, None, None])
    # (e^{iw}-1)/(iz) = d (1 + w/2 + w^2/6 + w^3/24) for w = i z d
    series = d[None, :, :] * (1 + arg / 2 + arg ** 2 / 6 + arg ** 3 / 24)
    kernel = np.where(small[:, None, None], series, direct)
    block = np.einsum("ztp,p->zt", kernel, w)
    if t_arr.ndim:
        return block
    value = block[:, 0]
    if z_arr.ndim == 0:
        return complex(value[0])
    return value.reshape(z_arr.shape)
