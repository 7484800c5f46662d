"""
The explicit screw function

    g(t) = -4(e^{t/2} + e^{-t/2} - 2) - (t/2)(psi(1/4) - log pi)
           - (1/4)(Phi(1,2,1/4) - e^{-t/2} Phi(e^{-2t},2,1/4))
           + sum_{n <= e^t} Lambda(n)/sqrt(n) (t - log n)

for t >= 0, extended evenly, together with g'(t), the kernel
G_g(t,u) = g(t-u) - g(t) - g(u) + g(0) and its hermitian form.
"""
import logging
import math
from functools import lru_cache

import numpy as np

from utils import specfun
from utils.analysis import Estimate, adaptive_quad, gauss_legendre_panels
from utils.arith import cutoff_for, prime_sum_g, prime_sum_plain, table_for_t
from utils.errors import JumpPointError, TableTooSmallError

logger = logging.getLogger(__name__)

DEFAULT_T_MAX = 12.0
JUMP_RADIUS = 1e-9
_CORRELATION_PANELS = 40


class ScrewContext:
    """Mangoldt table plus the constants psi(1/4), psi_1(1/4), log pi."""

    def __init__(self, mangoldt=None, t_max=DEFAULT_T_MAX):
        self.mangoldt = mangoldt if mangoldt is not None else table_for_t(t_max)
        self.psi_quarter = specfun.digamma(0.25).real
        # Phi(1, 2, 1/4) is psi_1(1/4); never summed at x = 1
        self.trigamma_quarter = specfun.trigamma(0.25).real
        self.log_pi = specfun.LOG_PI
        self.linear_coeff = self.psi_quarter - self.log_pi

    @property
    def t_max(self):
        return self.mangoldt.max_t

    def _check_range(self, t_abs):
        top = float(np.max(t_abs)) if np.size(t_abs) else 0.0
        if cutoff_for(top) > self.mangoldt.bound:
            raise TableTooSmallError(
                f"|t|={top:g} is beyond the Mangoldt table (bound {self.mangoldt.bound})"
            )

    def _prime_sums(self, t_abs, derivative=False):
        if derivative:
            return prime_sum_plain(t_abs, self.mangoldt)
        return prime_sum_g(t_abs, self.mangoldt)

    def g(self, t):
        """g(t), vectorized; g(0) = 0 exactly and g(-t) = g(t)."""
        t_arr = np.asarray(t, dtype=np.float64)
        t_abs = np.abs(np.atleast_1d(t_arr)).ravel()
        self._check_range(t_abs)
        out = np.zeros(t_abs.size)
        pos = t_abs > 0
        if np.any(pos):
            tp = t_abs[pos]
            exp_term = -16.0 * np.sinh(tp / 4.0) ** 2
            lerch = specfun.lerch_phi(np.exp(-2.0 * tp), 2, 0.25).real
            lerch_block = -0.25 * (self.trigamma_quarter - np.exp(-tp / 2.0) * lerch)
            out[pos] = (exp_term - 0.5 * tp * self.linear_coeff + lerch_block
                        + self._prime_sums(tp))
        if t_arr.ndim == 0:
            return float(out[0])
        return out.reshape(t_arr.shape)

    def minus_g_prime(self, t):
        """
        -g'(t) = 2(e^{t/2} - e^{-t/2}) - sum_{n <= e^t} Lambda(n)/sqrt(n)
                 + (psi(1/4) - log pi)/2 + e^{-t/2} Phi(e^{-2t}, 1, 1/4)/2
        for t > 0 away from every log n.
        """
        t_arr = np.asarray(t, dtype=np.float64)
        t_flat = np.atleast_1d(t_arr).ravel()
        if np.any(t_flat == 0):
            raise JumpPointError("g' is unbounded at t = 0")
        t_abs = np.abs(t_flat)
        self._check_range(t_abs)
        self.check_jump_points(t_abs)
        lerch = specfun.lerch_phi(np.exp(-2.0 * t_abs), 1, 0.25).real
        value = (4.0 * np.sinh(t_abs / 2.0) - self._prime_sums(t_abs, derivative=True)
                 + 0.5 * self.linear_coeff + 0.5 * np.exp(-t_abs / 2.0) * lerch)
        value = np.sign(t_flat) * value
        if t_arr.ndim == 0:
            return float(value[0])
        return value.reshape(t_arr.shape)

    def g_prime(self, t):
        value = self.minus_g_prime(t)
        return -value

    def check_jump_points(self, t_abs, radius=JUMP_RADIUS):
        logs = self.mangoldt.log_support
        if len(logs) == 0:
            return
        idx = np.searchsorted(logs, t_abs)
        left = logs[np.clip(idx - 1, 0, len(logs) - 1)]
        right = logs[np.clip(idx, 0, len(logs) - 1)]
        nearest = np.minimum(np.abs(t_abs - left), np.abs(t_abs - right))
        if np.any(nearest < radius):
            bad = float(t_abs[np.argmin(nearest)])
            raise JumpPointError(f"t={bad:.12g} is within {radius:g} of some log n")

    def jump_points(self, t_lo, t_hi):
        """All log n (n a prime power) inside [t_lo, t_hi]."""
        logs = self.mangoldt.log_support
        return logs[(logs >= t_lo) & (logs <= t_hi)]

    def g_kernel(self, t, u):
        """G_g(t, u) = g(t - u) - g(t) - g(u) + g(0)."""
        t = np.asarray(t, dtype=np.float64)
        u = np.asarray(u, dtype=np.float64)
        return self.g(t - u) - self.g(t) - self.g(u) + self.g(0.0)

    def _kink_points(self, lo, hi):
        kinks = self.jump_points(0.0, max(abs(lo), abs(hi)))
        points = [0.0, *kinks, *(-kinks)]
        return [p for p in points if lo < p < hi]

    def correlation(self, phi1, phi2, v, panels=_CORRELATION_PANELS):
        """C(v) = integral phi2(t) phi1(t - v) dt by composite Gauss-Legendre."""
        lo, hi = phi2.support
        nodes, weights = gauss_legendre_panels(lo, hi, panels)
        v = np.atleast_1d(np.asarray(v, dtype=np.float64))
        weighted = phi2(nodes) * weights
        return phi1(nodes[None, :] - v[:, None]) @ weighted

    def herm_form_gg(self, phi1, phi2, tol=1e-9):
        """
        <phi1, phi2>_G = double integral G_g(t,u) phi1(u) conj(phi2(t)) du dt.

        The g(t - u) part becomes a single integral of g against the
        cross-correlation of the two test functions; the g(t), g(u) parts
        only survive for test functions with nonzero mean.
        """
        if phi1.is_zero or phi2.is_zero:
            return Estimate(0.0, details={"path": "kernel"})
        lo1, hi1 = phi1.support
        lo2, hi2 = phi2.support
        v_lo, v_hi = lo2 - hi1, hi2 - lo1
        self._check_range(np.array([abs(v_lo), abs(v_hi), abs(lo1), abs(hi1), abs(lo2), abs(hi2)]))

        def inner(v):
            return self.g(v) * self.correlation(phi1, phi2, v)

        main, main_err = adaptive_quad(inner, v_lo, v_hi, rel_tol=tol, abs_tol=tol * 1e-3,
                                       breakpoints=self._kink_points(v_lo, v_hi))
        # inner rule error: compare against a rule with half the panels
        offsets = np.linspace(v_lo, v_hi, 9)
        coarse = self.correlation(phi1, phi2, offsets, panels=_CORRELATION_PANELS // 2)
        fine = self.correlation(phi1, phi2, offsets)
        g_peak = float(np.max(np.abs(self.g(np.linspace(v_lo, v_hi, 33)))))
        inner_err = float(np.max(np.abs(coarse - fine))) * (v_hi - v_lo) * g_peak

        value = main
        quad_error = main_err + inner_err
        mean1, mean2 = phi1.mass(), phi2.mass()
        for mean, other in ((mean1, phi2), (mean2, phi1)):
            if mean == 0.0:
                continue
            olo, ohi = other.support
            part, err = adaptive_quad(lambda t, f=other: self.g(t) * f(t), olo, ohi,
                                      rel_tol=tol, abs_tol=tol * 1e-3,
                                      breakpoints=self._kink_points(olo, ohi))
            value -= mean * part
            quad_error += abs(mean) * err
        logger.debug("herm_form_gg: value=%.12g err=%.3g", value, quad_error)
        return Estimate(value, quad_error=quad_error, details={"path": "kernel"})


@lru_cache(maxsize=4)
def default_context(t_max=DEFAULT_T_MAX):
    return ScrewContext(t_max=t_max)


def g(t, context=None):
    return (context or default_context()).g(t)


def g_prime(t, context=None):
    return (context or default_context()).g_prime(t)


def g_kernel(t, u, context=None):
    return (context or default_context()).g_kernel(t, u)


def herm_form_gg(phi1, phi2, tol=1e-9, context=None):
    return (context or default_context()).herm_form_gg(phi1, phi2, tol)


def jump_size(n, context=None):
    """Jump of g' at t = log n, right limit minus left: Lambda(n)/sqrt(n)."""
    ctx = context or default_context()
    return ctx.mangoldt[n] / math.sqrt(n)

