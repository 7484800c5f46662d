"""
The analytic screw line.

With s = 1/2 - iz, h = iz/2 and x = e^{-2t},

    P_t(z) = 4(e^{t/2}-1)/(1-2iz) + 4(e^{-t/2}-1)/(1+2iz)
             - sum_{n <= e^t} Lambda(n)/sqrt(n) (e^{iz(t-log n)}-1)/(iz)
             + (e^{itz}-1)/(iz) * B(z)
             + (psi(1/4+h) - psi(1/4))/(2iz)
             - e^{-t/2} (Phi(x,1,1/4) - Phi(x,1,1/4+h))/(2iz)

    B(z) = (Z'/Z)(s) - (1/2) log pi + (1/2) psi(1/4+h)
    S_t(z) = i (1 + Theta(z)) / (2 sqrt(pi)) * P_t(z)

1 + Theta = 2A/E is evaluated as 2 zeta/D with D = (1+L) zeta + zeta',
L = 1/s + 1/(s-1) - (1/2) log pi + (1/2) psi(s/2); no Gamma factor is ever
formed. In S_t the product (1+Theta) B is fused so the pole of zeta'/zeta
at a zero never meets the zero of 1+Theta.
"""
import logging
import math
import warnings
from functools import lru_cache

import numpy as np

from utils import specfun
from utils.arith import prime_sum_osc
from utils.analysis import (
    Estimate,
    QuadratureSpec,
    adaptive_quad,
    gauss_legendre_panels,
    loglog_slope,
    richardson,
)
from utils.errors import (
    DomainError,
    ExclusionZoneError,
    JumpPointError,
    LossOfPrecisionWarning,
    PoleError,
    UnstableExtrapolationWarning,
)
from utils.screwfn import DEFAULT_T_MAX, ScrewContext
from utils.zeros import p_t_zero_sum

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
SMALL_Z = 1e-3
SERIES_TERMS = 8
EXCLUSION_RADIUS = 1e-6
POLE_EPS = 1e-12
SPECIAL_VALUE_MIN_GAP = 0.01
_BLOCK_ELEMENTS = 2_000_000
_P_HAT_BATCH = 256


def _exprel(w):
    """(e^w - 1)/w with value 1 at w = 0."""
    out = np.ones_like(w)
    nz = w != 0
    out[nz] = np.expm1(w[nz]) / w[nz]
    return out


def nearest_zero_distance(z, ordinates):
    """Distance from each real z to the closest +-gamma."""
    z = np.abs(np.atleast_1d(np.asarray(z, dtype=np.float64)))
    if ordinates.size == 0:
        return np.full(z.shape, np.inf)
    idx = np.searchsorted(ordinates, z)
    left = ordinates[np.clip(idx - 1, 0, ordinates.size - 1)]
    right = ordinates[np.clip(idx, 0, ordinates.size - 1)]
    return np.minimum(np.abs(z - left), np.abs(z - right))


class ScrewLineContext:
    def __init__(self, screw=None, quad_defaults=None):
        self.screw = screw if screw is not None else ScrewContext()
        self.mangoldt = self.screw.mangoldt
        self.quad_defaults = quad_defaults or QuadratureSpec()
        ks = np.arange(1, SERIES_TERMS + 1)
        # (psi(1/4+h) - psi(1/4))/(4h) = sum_k (-1)^{k+1} zeta(k+1, 1/4) h^{k-1} / 4
        self._digamma_series = np.array(
            [(-1) ** (k + 1) * specfun.hurwitz_zeta(k + 1, 0.25).real / 4.0 for k in ks]
        )

    # -- z-dependent pieces -------------------------------------------------

    def z_data(self, z):
        zz = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
        if np.any(np.abs(zz - 0.5j) < POLE_EPS) or np.any(np.abs(zz + 0.5j) < POLE_EPS):
            raise PoleError("the screw line has poles at z = +-i/2")
        s = 0.5 - 1j * zz
        h = 0.5j * zz
        zeta, dzeta = specfun.zeta_and_prime(s)
        psi_half = specfun.digamma(s / 2.0)
        psi_h = specfun.digamma(0.25 + h)
        L = 1.0 / s + 1.0 / (s - 1.0) - 0.5 * specfun.LOG_PI + 0.5 * psi_half
        D = (1.0 + L) * zeta + dzeta
        scale = np.abs((1.0 + L) * zeta) + np.abs(dzeta)
        if np.any(np.abs(D) < 1e-12 * scale):
            warnings.warn("1 + Theta: denominator lost all significant digits",
                          LossOfPrecisionWarning)
        opt = 2.0 * zeta / D
        common = -specfun.LOG_PI + 0.5 * psi_half + 0.5 * psi_h
        return {
            "z": zz,
            "h": h,
            "zeta": zeta,
            "dzeta": dzeta,
            "psi_h": psi_h,
            "common": common,
            "one_plus_theta": opt,
            # (1 + Theta) * B without forming zeta'/zeta
            "fused_b": opt * common + 2.0 * dzeta / D,
        }

    def one_plus_theta(self, z):
        z_arr = np.asarray(z, dtype=np.complex128)
        value = self.z_data(z_arr)["one_plus_theta"]
        return complex(value[0]) if z_arr.ndim == 0 else value.reshape(z_arr.shape)

    def theta(self, z):
        return self.one_plus_theta(z) - 1.0

    # -- t-dependent blocks -------------------------------------------------

    def _prime_block(self, t, z):
        """sum_n Lambda(n)/sqrt(n) (e^{iz(t - log n)} - 1)/(iz) as a (nz, nt) array."""
        return prime_sum_osc(t, z, self.mangoldt)

    def _lerch_block(self, t, z, h, small):
        """-e^{-t/2}(Phi(x,1,1/4) - Phi(x,1,1/4+h))/(2iz) as a (nz, nt) array."""
        x = np.exp(-2.0 * t)
        pref = np.exp(-t / 2.0)
        out = np.zeros((z.size, t.size), dtype=np.complex128)
        big = ~small
        if np.any(big):
            base = specfun.lerch_phi(x, 1, 0.25)
            shifted = specfun.lerch_phi(x[None, :], 1, (0.25 + h[big])[:, None])
            out[big] = -pref[None, :] * (base[None, :] - shifted) / (2j * z[big][:, None])
        if np.any(small):
            # e^{-t/2} sum_k (-1)^k Phi(x, k+1, 1/4) h^{k-1} / 4
            hs = h[small][:, None]
            series = np.zeros((hs.shape[0], t.size), dtype=np.complex128)
            for k in range(SERIES_TERMS, 0, -1):
                coeff = (-1) ** k * specfun.lerch_phi(x, k + 1, 0.25) / 4.0
                series = series * hs + coeff[None, :]
            out[small] = pref[None, :] * series
        return out

    def _blocks(self, t, zd):
        """
        Split P_t(z) = rest + E_t(z) B(z) on a (nz, nt) grid, where
        E_t(z) = (e^{itz} - 1)/(iz).
        """
        t = np.abs(np.atleast_1d(np.asarray(t, dtype=np.float64)))
        z, h = zd["z"], zd["h"]
        live = t > 0
        tl = np.where(live, t, 1.0)
        small = np.abs(z) < SMALL_Z
        z_safe = np.where(small, 1.0, z)
        Z, T = z[:, None], tl[None, :]

        rest = (4.0 * np.expm1(T / 2.0) / (1.0 - 2j * Z)
                + 4.0 * np.expm1(-T / 2.0) / (1.0 + 2j * Z))
        rest = rest - self._prime_block(tl, z)
        d_direct = (zd["psi_h"] - self.screw.psi_quarter) / (2j * z_safe)
        d_series = np.polyval(self._digamma_series[::-1], h)
        rest = rest + np.where(small, d_series, d_direct)[:, None]
        rest = rest + self._lerch_block(tl, z, h, small)
        E = T * _exprel(1j * Z * T)

        rest[:, ~live] = 0.0
        E[:, ~live] = 0.0
        return rest, E

    def _rows_per_chunk(self, t):
        t = np.abs(np.atleast_1d(t))
        logs, _ = self.mangoldt.terms_up_to(float(np.max(t)))
        return max(1, _BLOCK_ELEMENTS // (t.size * max(1, logs.size)))

    # -- public operations --------------------------------------------------

    def frak_p(self, t, z):
        """P_t(z) for complex z; even in t."""
        t = abs(float(t))
        z_arr = np.asarray(z, dtype=np.complex128)
        zz = np.atleast_1d(z_arr).ravel()
        if np.any(np.abs(zz - 0.5j) < POLE_EPS) or np.any(np.abs(zz + 0.5j) < POLE_EPS):
            raise PoleError("P_t has poles at z = +-i/2")
        out = np.zeros(zz.size, dtype=np.complex128)
        if t > 0:
            self.screw._check_range(np.array([t]))
            rows = self._rows_per_chunk(t)
            for start in range(0, zz.size, rows):
                zd = self.z_data(zz[start:start + rows])
                rest, E = self._blocks(t, zd)
                with np.errstate(divide="ignore", invalid="ignore"):
                    B = zd["common"] + zd["dzeta"] / zd["zeta"]
                out[start:start + rows] = rest[:, 0] + E[:, 0] * B
        if z_arr.ndim == 0:
            return complex(out[0])
        return out.reshape(z_arr.shape)

    def screw_matrix(self, t, z):
        """S_t(z) for every pair of t (nt,) and real z (nz,) as an (nz, nt) array."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        zz = np.atleast_1d(np.asarray(z, dtype=np.float64)).ravel()
        self.screw._check_range(np.abs(t))
        out = np.zeros((zz.size, t.size), dtype=np.complex128)
        order = np.argsort(np.abs(zz), kind="stable")
        rows = self._rows_per_chunk(t)
        for start in range(0, zz.size, rows):
            idx = order[start:start + rows]
            zd = self.z_data(zz[idx])
            rest, E = self._blocks(t, zd)
            out[idx] = (1j / (2.0 * SQRT_PI)) * (
                zd["one_plus_theta"][:, None] * rest + zd["fused_b"][:, None] * E
            )
        return out

    def frak_s(self, t, z, table=None):
        """S_t(z) for real z; even in t."""
        z_arr = np.asarray(z, dtype=np.float64)
        if table is not None:
            dist = nearest_zero_distance(z_arr, table.ordinates)
            if np.any(dist < EXCLUSION_RADIUS):
                raise ExclusionZoneError(
                    f"z within {EXCLUSION_RADIUS:g} of a zero ordinate (distance {float(np.min(dist)):.2e})"
                )
        values = self.screw_matrix([abs(float(t))], z_arr)[:, 0]
        if z_arr.ndim == 0:
            return complex(values[0])
        return values.reshape(z_arr.shape)

    def expansion_value(self, t, z, table):
        """Truncated orthonormal expansion sum sqrt(m)(e^{i gamma t}-1)/gamma F_gamma(z)."""
        zero_sum, tail = p_t_zero_sum(t, z, table)
        value = 1j * self.one_plus_theta(z) / (2.0 * SQRT_PI) * zero_sum
        return value, tail

    # -- L2 norms -----------------------------------------------------------

    def _exclusion_zones(self, table, radius):
        if table is None:
            return []
        ords = table.ordinates[table.ordinates <= radius + 1.0]
        return [(g - EXCLUSION_RADIUS, g + EXCLUSION_RADIUS) for g in ords]

    def _half_line_norm(self, integrand, spec, table):
        """
        2 * integral_0^T integrand + fitted tail, with the tail density
        c log^2 z / z^2 matched on [T/2, T].
        """
        T = float(spec.radius)
        zones = self._exclusion_zones(table, T)
        max_intervals = max(1000, spec.max_nodes // 15)
        low, low_err = adaptive_quad(integrand, 0.0, 0.5 * T, rel_tol=spec.rel_tol,
                                     exclude=zones, max_intervals=max_intervals,
                                     threads=spec.threads)
        high, high_err = adaptive_quad(integrand, 0.5 * T, T, rel_tol=spec.rel_tol,
                                       exclude=zones, max_intervals=max_intervals,
                                       threads=spec.threads)
        excluded = 0.0
        for lo, hi in zones:
            edge = integrand(np.array([lo, hi]))
            excluded += 2.0 * (hi - lo) * float(np.max(np.abs(edge)))

        nodes, weights = gauss_legendre_panels(0.5 * T, T, 16)
        shape_mass = float(np.sum(weights * np.log(nodes) ** 2 / nodes ** 2))
        c = high / shape_mass
        log_T = math.log(T)
        tail = c * (log_T ** 2 + 2.0 * log_T + 2.0) / T

        value = 2.0 * (low + high)
        if spec.tail_model == "log_sq_over_t":
            value += 2.0 * tail
        return Estimate(
            value,
            quad_error=2.0 * (low_err + high_err + excluded),
            tail_bound=2.0 * tail,
            details={"radius": T, "tail_constant": c, "upper_half_mass": 2.0 * high},
        )

    def norm_sq_quad(self, t, spec=None, table=None):
        """||S_t||^2 on the real line by quadrature."""
        spec = spec or self.quad_defaults
        if t == 0:
            return Estimate(0.0, details={"path": "quadrature"})
        t = abs(float(t))

        def integrand(z):
            values = self.screw_matrix([t], z)[:, 0]
            return values.real ** 2 + values.imag ** 2

        est = self._half_line_norm(integrand, spec, table)
        est.details["path"] = "quadrature"
        logger.info("norm_sq_quad t=%g: %.10g (+- %.2g)", t, est.value, est.total_error)
        return est

    def increment_inner(self, t, s, u=0.0, spec=None, table=None):
        """
        <S_{t+u} - S_u, S_{s+u} - S_u> on the real line by quadrature.

        The increments of a screw line are stationary, so the value is
        G_g(t, s) whatever the base point u.
        """
        spec = spec or self.quad_defaults
        t, s, u = float(t), float(s), float(u)
        if min(t, s, u) < 0:
            raise DomainError("increment_inner needs t, s, u >= 0")
        if t == 0 or s == 0:
            return Estimate(0.0, details={"path": "quadrature", "base": u})

        def integrand(z):
            m = self.screw_matrix([t + u, s + u, u], z)
            a = m[:, 0] - m[:, 2]
            b = m[:, 1] - m[:, 2]
            return (a * np.conj(b)).real

        est = self._half_line_norm(integrand, spec, table)
        est.details.update({"path": "quadrature", "base": u})
        logger.info("increment_inner t=%g s=%g u=%g: %.10g (+- %.2g)", t, s, u, est.value, est.total_error)
        return est

    def _t_rule(self, phi, z_max, refine=1):
        lo, hi = phi.support
        cuts = {lo, hi}
        for p in (0.0, *self.screw.jump_points(0.0, max(abs(lo), abs(hi)))):
            for q in (p, -p):
                if lo < q < hi:
                    cuts.add(q)
        edges = sorted(cuts)
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            panels = refine * max(2, int(math.ceil((b - a) * max(z_max, 1.0) / 4.0)))
            n, w = gauss_legendre_panels(a, b, panels)
            nodes.append(n)
            weights.append(w)
        return np.concatenate(nodes), np.concatenate(weights)

    def p_hat_phi(self, phi, z, refine=1):
        """integral S_t(z) phi(t) dt for real z."""
        z_arr = np.asarray(z, dtype=np.float64)
        zz = np.atleast_1d(z_arr).ravel()
        out = np.zeros(zz.size, dtype=np.complex128)
        if not phi.is_zero and zz.size:
            order = np.argsort(np.abs(zz), kind="stable")
            # sorted batches share one t-rule sized for their largest |z|
            for start in range(0, zz.size, _P_HAT_BATCH):
                idx = order[start:start + _P_HAT_BATCH]
                t_nodes, t_weights = self._t_rule(phi, float(np.max(np.abs(zz[idx]))), refine)
                weighted = phi(t_nodes) * t_weights
                out[idx] = self.screw_matrix(t_nodes, zz[idx]) @ weighted
        if z_arr.ndim == 0:
            return complex(out[0])
        return out.reshape(z_arr.shape)

    def norm_sq_p_hat(self, phi, spec=None, table=None):
        """||P_hat_phi||^2 on the real line, with the Minkowski ceiling in details."""
        spec = spec or self.quad_defaults
        if phi.is_zero:
            return Estimate(0.0, details={"path": "quadrature"})

        def integrand(z):
            values = self.p_hat_phi(phi, z)
            return values.real ** 2 + values.imag ** 2

        est = self._half_line_norm(integrand, spec, table)
        sample_z = np.linspace(0.5, min(spec.radius, 60.0), 7)
        fine = self.p_hat_phi(phi, sample_z, refine=2)
        coarse = self.p_hat_phi(phi, sample_z)
        inner = float(np.max(np.abs(np.abs(fine) ** 2 - np.abs(coarse) ** 2)))
        est.quad_error += 2.0 * inner * spec.radius

        lo, hi = phi.support
        nodes, weights = gauss_legendre_panels(lo, hi, 40)
        ceiling = float(np.sum(weights * np.abs(phi(nodes)) * np.sqrt(np.maximum(-2.0 * self.screw.g(nodes), 0.0))))
        est.details.update({"path": "quadrature", "minkowski_ceiling": ceiling ** 2})
        if est.value > ceiling ** 2 * 1.01 + est.total_error:
            logger.warning("norm_sq_p_hat %.6g exceeds the Minkowski ceiling %.6g", est.value, ceiling ** 2)
        return est

    # -- special values -----------------------------------------------------

    def richardson_zero_limit(self, t, levels=7, degree=3):
        """
        P_t(0) by extrapolation from z = 0.1 * 2^-k. Re P_t is even in real
        z, so the fit runs in z^2.
        """
        z = 0.1 * 2.0 ** -np.arange(levels)
        values = self.frak_p(t, z)
        limit, spread = richardson(z ** 2, values.real, degree)
        return limit, spread

    def special_value_bracket(self, t, y):
        """y P_t(iy) - (1/2) psi(1/4 + y/2) + (1/2) log pi."""
        y = np.asarray(y, dtype=np.float64)
        values = y * self.frak_p(t, 1j * y).real
        return values - 0.5 * specfun.digamma(0.25 + y / 2.0).real + 0.5 * specfun.LOG_PI

    def special_value_limit(self, t, return_details=False):
        """Limit of the bracket as y -> +inf; equals -g'(t)."""
        t = abs(float(t))
        if t == 0:
            raise JumpPointError("the special value is taken for t > 0")
        logs = self.screw.jump_points(0.0, t + SPECIAL_VALUE_MIN_GAP)
        gaps = np.abs(t - logs)
        if gaps.size and float(np.min(gaps)) <= SPECIAL_VALUE_MIN_GAP:
            raise JumpPointError(f"t={t:g} is within {SPECIAL_VALUE_MIN_GAP} of some log n")
        below = gaps[logs < t]
        delta = float(np.min(below)) if below.size else math.inf
        y0 = max(50.0, 25.0 / delta)
        ys = y0 * 2.0 ** np.arange(4)
        # keep clear of the cancelling poles at y = 2k + 1/2
        ys = np.where(np.abs((ys - 0.5) / 2.0 - np.round((ys - 0.5) / 2.0)) < 1e-3, ys + 0.01, ys)
        brackets = self.special_value_bracket(t, ys)
        steps = np.diff(brackets)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            warnings.warn(f"special-value bracket not monotone along y = {ys.tolist()}",
                          UnstableExtrapolationWarning)
        limit, spread = richardson(1.0 / ys, brackets, degree=3)
        if return_details:
            return limit, {"y": ys, "bracket": brackets, "spread": spread}
        return limit

    # -- decay --------------------------------------------------------------

    def decay_profile(self, t, z_lo=1e2, z_hi=1e4, windows=9, half_window=2.0, samples=101):
        centres = np.geomspace(z_lo, z_hi, windows)
        rms = np.empty(windows)
        for k, c in enumerate(centres):
            zs = np.linspace(c - half_window, c + half_window, samples)
            values = self.screw_matrix([abs(float(t))], zs)[:, 0]
            rms[k] = math.sqrt(float(np.mean(np.abs(values) ** 2)))
        return centres, rms

    def decay_slope(self, t, **kwargs):
        """Fitted log-log slope of the windowed RMS of |S_t(z)|."""
        centres, rms = self.decay_profile(t, **kwargs)
        return loglog_slope(centres, rms)


@lru_cache(maxsize=4)
def default_context(t_max=DEFAULT_T_MAX):
    return ScrewLineContext(ScrewContext(t_max=t_max))


def one_plus_theta(z, context=None):
    return (context or default_context()).one_plus_theta(z)


def theta(z, context=None):
    return (context or default_context()).theta(z)


def frak_p(t, z, context=None):
    return (context or default_context()).frak_p(t, z)


def frak_s(t, z, table=None, context=None):
    return (context or default_context()).frak_s(t, z, table)


def norm_sq_quad(t, spec=None, table=None, context=None):
    return (context or default_context()).norm_sq_quad(t, spec, table)


def increment_inner(t, s, u=0.0, spec=None, table=None, context=None):
    return (context or default_context()).increment_inner(t, s, u, spec, table)


def p_hat_phi(phi, z, context=None):
    return (context or default_context()).p_hat_phi(phi, z)


def special_value_limit(t, context=None):
    return (context or default_context()).special_value_limit(t)
