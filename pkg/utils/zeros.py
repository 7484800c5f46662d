"""
Zeros side of the explicit formula.

A ZeroTable stores positive ordinates gamma_k of nontrivial zeros (assumed
on the critical line); every sum below adds the mirrored -gamma_k
implicitly. Zeros are located from sign changes of Hardy's Z(t), whose
sign is opposite to that of A(t) = xi(1/2 - it) on the real axis.
"""
import logging
import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from utils import specfun
from utils.analysis import gauss_legendre_panels, pairwise_sum
from utils.arith import cutoff_for, sieve_mangoldt
from utils.errors import (
    ConfigError,
    PoleProximityError,
    SuspectedMultipleZeroWarning,
    ZeroTableValidationError,
)
from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

EMBEDDED_ZEROS_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                                   "data", "zeros_100.txt")
FIRST_ORDINATE = 14.134725141734693
TAIL_SAFETY = 1.2
POLE_RADIUS = 1e-8
SCAN_STEP = 0.05
LOCATE_MAX_HEIGHT = 1.0e4
COUNT_SLACK = 2.0
RESONANCE_WIDTH = 1.0
IBP_MIN_PHASE = 32.0
FAR_FACTOR = 1.0e3
TAIL_MODELS = ("none", "density", "explicit")


def riemann_von_mangoldt(T):
    """Smooth zero count (T/2pi) log(T/2pi) - T/2pi + 7/8."""
    T = np.asarray(T, dtype=np.float64)
    x = np.where(T > 0, T, 1.0) / (2.0 * math.pi)
    value = np.where(T > 0, x * np.log(x) - x + 7.0 / 8.0, 0.0)
    return float(value) if value.ndim == 0 else value


def zero_density(gamma):
    """dN/dgamma = log(gamma/2pi)/2pi."""
    return np.log(np.asarray(gamma) / (2.0 * math.pi)) / (2.0 * math.pi)


def height_for_count(count):
    """Height H with smooth count N(H) = count, by bisection."""
    if count <= 0:
        return 0.0
    lo, hi = 2.0 * math.pi, 20.0
    while riemann_von_mangoldt(hi) < count:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if riemann_von_mangoldt(mid) < count:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _log_moment(H, power):
    """integral_H^inf log(gamma/2pi) gamma^{-power} dgamma / 2pi."""
    L = math.log(H / (2.0 * math.pi))
    m1 = power - 1.0
    return H ** (-m1) * (L / m1 + 1.0 / m1 ** 2) / (2.0 * math.pi)


@dataclass(frozen=True)
class TailBound:
    truncation_height: float
    bound: float
    model: complex = 0.0

    def as_dict(self):
        return {"truncation_height": self.truncation_height, "bound": self.bound,
                "model": self.model}


@dataclass(frozen=True, eq=False)
class ZeroTable:
    ordinates: np.ndarray
    multiplicities: np.ndarray = None
    source: str = "file"
    checked: bool = field(default=True, compare=False)

    def __post_init__(self):
        ords = np.asarray(self.ordinates, dtype=np.float64)
        ords.setflags(write=False)
        object.__setattr__(self, "ordinates", ords)
        mult = self.multiplicities
        mult = np.ones(ords.size, dtype=np.int64) if mult is None else np.asarray(mult, dtype=np.int64)
        mult.setflags(write=False)
        object.__setattr__(self, "multiplicities", mult)
        if self.checked:
            self.validate()

    def __len__(self):
        return int(self.ordinates.size)

    @property
    def height(self):
        return float(self.ordinates[-1]) if len(self) else 0.0

    def validate(self):
        ords = self.ordinates
        if self.multiplicities.shape != ords.shape:
            raise ZeroTableValidationError("one multiplicity per ordinate required", "shape")
        if np.any(self.multiplicities < 1):
            raise ZeroTableValidationError("multiplicities must be positive", "multiplicity")
        if ords.size == 0:
            return
        if np.any(ords <= 0):
            bad = int(np.argmax(ords <= 0))
            raise ZeroTableValidationError(f"entry {bad + 1} is not positive ({ords[bad]})", "positive")
        steps = np.diff(ords)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0))
            raise ZeroTableValidationError(
                f"entries {bad + 1} and {bad + 2} are not increasing ({ords[bad]} >= {ords[bad + 1]})",
                "strictly-increasing",
            )
        if abs(ords[0] - FIRST_ORDINATE) > 1e-4:
            raise ZeroTableValidationError(f"first ordinate {ords[0]} is not 14.1347...", "first-ordinate")
        counts = np.cumsum(self.multiplicities)
        spots = np.unique(np.linspace(0, ords.size - 2, 9).astype(int)) if ords.size > 1 else []
        for k in spots:
            mid = 0.5 * (ords[k] + ords[k + 1])
            if abs(counts[k] - riemann_von_mangoldt(mid)) > COUNT_SLACK:
                raise ZeroTableValidationError(
                    f"{counts[k]} zeros below {mid:.3f}, smooth count {riemann_von_mangoldt(mid):.2f}",
                    "zero-count",
                )

    def head(self, count):
        count = min(int(count), len(self))
        return ZeroTable(self.ordinates[:count], self.multiplicities[:count], self.source)

    def perturbed(self, index, shift):
        """Copy with one ordinate moved; skips validation (used as a negative control)."""
        ords = np.array(self.ordinates)
        ords[index] += shift
        return replace(self, ordinates=ords, source="perturbed", checked=False)

    def truncation_height(self):
        return height_for_count(int(np.sum(self.multiplicities)))


def load_zeros(path=None, file_handler=None):
    """Read and validate a zero table; the embedded 100-zero file by default."""
    handler = file_handler or FileHandler()
    source = "file"
    if path is None:
        path, source = EMBEDDED_ZEROS_PATH, "embedded"
    ordinates = handler.read_zero_table(path)
    return ZeroTable(ordinates, source=source)


def embedded_zeros():
    return load_zeros()


def _scan_signs(grid):
    values = specfun.hardy_z(grid)
    return np.sign(values), values


def _bisect(lo, hi, s_lo, tol):
    lo, hi = lo.copy(), hi.copy()
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        s_mid = np.sign(specfun.hardy_z(mid))
        left = s_mid == s_lo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def locate_zeros(t_max, refine_tol=1e-10, step=SCAN_STEP):
    """
    Every sign change of A(t) on (0, t_max], found on a grid of the given
    step and refined by bisection.

    Where |Z| dips to a local minimum without changing sign the interval is
    rescanned twenty times finer; a count still short of the smooth estimate
    raises SuspectedMultipleZeroWarning.
    """
    t_max = float(t_max)
    if t_max > LOCATE_MAX_HEIGHT:
        raise ConfigError(f"locate_zeros is limited to t_max <= {LOCATE_MAX_HEIGHT:g}")
    if t_max < FIRST_ORDINATE - 1.0:
        return ZeroTable(np.zeros(0), source="located")

    grid = np.arange(1.0, t_max, step)
    grid = np.append(grid, t_max)
    signs, values = _scan_signs(grid)
    brackets = list(np.nonzero(signs[:-1] * signs[1:] < 0)[0])
    lo = [grid[i] for i in brackets]
    hi = [grid[i + 1] for i in brackets]

    mag = np.abs(values)
    dips = np.nonzero((mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])
                      & (signs[:-2] == signs[1:-1]) & (signs[1:-1] == signs[2:]))[0] + 1
    for i in dips:
        fine = np.linspace(grid[i - 1], grid[i + 1], 41)
        fs = np.sign(specfun.hardy_z(fine))
        hits = np.nonzero(fs[:-1] * fs[1:] < 0)[0]
        if hits.size:
            logger.info("close pair near t=%.3f resolved by a finer scan", grid[i])
        for j in hits:
            lo.append(fine[j])
            hi.append(fine[j + 1])

    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    s_lo = np.sign(specfun.hardy_z(lo)) if lo.size else lo
    roots = np.sort(_bisect(lo, hi, s_lo, refine_tol))

    expected = riemann_von_mangoldt(t_max)
    if expected - roots.size > COUNT_SLACK:
        warnings.warn(
            f"found {roots.size} sign changes below {t_max:g}, smooth count {expected:.1f}: "
            "suspected multiple or close zeros",
            SuspectedMultipleZeroWarning,
        )
    logger.info("located %d zeros up to %g", roots.size, t_max)
    return ZeroTable(roots, source="located", checked=False)


def a_function(t):
    """
    A(t) = xi(1/2 - it) for real t, assembled from log-magnitudes so the
    Gamma factor cannot underflow before the final exponential.
    """
    t = np.asarray(t, dtype=np.float64)
    log_mag = (np.log((t * t + 0.25) / 2.0) - 0.25 * specfun.LOG_PI
               + np.real(specfun.log_gamma(0.25 + 0.5j * t)))
    z = specfun.hardy_z(t)
    return -np.sign(z) * np.exp(log_mag + np.log(np.abs(z) + 1e-300))


def _check_poles(z, gammas):
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if gammas.size == 0:
        return
    for sign in (1.0, -1.0):
        dist = np.min(np.abs(z[:, None] - sign * gammas[None, :]))
        if dist < POLE_RADIUS:
            raise PoleProximityError(f"z is within {dist:.1e} of a zero ordinate")


def _pair_tail_bound(table, z_abs):
    H = max(table.height, 2.0 * math.pi * math.e)
    if z_abs >= H:
        return math.inf
    return TAIL_SAFETY * 4.0 * _log_moment(H, 2.0) * H / (H - z_abs)


def _pole_factor(a):
    """1/(gamma (gamma - a)) with its first two derivatives."""
    def derivs(gamma):
        q = gamma * (gamma - a)
        dq = 2.0 * gamma - a
        return 1.0 / q, -dq / q ** 2, (2.0 * dq ** 2 - 2.0 * q) / q ** 3
    return derivs


def _density_weighted(derivs):
    """Same factor times the zero density, product rule applied."""
    def weighted(gamma):
        u0, u1, u2 = derivs(gamma)
        r0 = zero_density(gamma)
        r1 = 1.0 / (2.0 * math.pi * gamma)
        r2 = -r1 / gamma
        return r0 * u0, r1 * u0 + r0 * u1, r2 * u0 + 2.0 * r1 * u1 + r0 * u2
    return weighted


def _ibp_tail(omega, derivs, H):
    h0, h1, h2 = derivs(H)
    w = 1j * omega
    return -np.exp(w * H) * (h0 / w - h1 / w ** 2 + h2 / w ** 3)


def oscillatory_tail(omega, derivs, H):
    """
    integral_H^inf e^{i omega gamma} h(gamma) dgamma for h decaying like
    gamma^-2; ``derivs`` returns (h, h', h'').

    Integration by parts once |omega| H is large, otherwise Gauss-Legendre
    in log(gamma) up to the height where it is.
    """
    omega = float(omega)
    if abs(omega) * H >= IBP_MIN_PHASE:
        return complex(_ibp_tail(omega, derivs, H))
    far = H * FAR_FACTOR
    if omega != 0.0:
        far = min(far, IBP_MIN_PHASE / abs(omega))
    s, w = gauss_legendre_panels(math.log(H), math.log(far), 40)
    gamma = np.exp(s)
    near = np.sum(w * gamma * np.exp(1j * omega * gamma) * derivs(gamma)[0])
    if abs(omega) * far >= IBP_MIN_PHASE * (1.0 - 1e-12):
        rest = _ibp_tail(omega, derivs, far)
    else:
        # h ~ c/gamma^2 from here on, phase frozen
        rest = np.exp(1j * omega * far) * derivs(far)[0] * far
    return complex(near + rest)


def density_tail_model(H_star, z, t=None):
    """
    integral_{H*}^inf f(gamma) dN(gamma) against the smooth zero density, where
    f is the pair term

        2/(gamma^2 - z^2) - e^{i gamma t}/(gamma (gamma - z)) - e^{-i gamma t}/(gamma (gamma + z)).

    The non-oscillating part is expanded in powers of (z/gamma)^2; the
    oscillating part is only added when t is given.
    """
    z = complex(z)
    z2 = z ** 2
    total = 0j
    for k in range(40):
        term = 2.0 * z2 ** k * _log_moment(H_star, 2.0 + 2 * k)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
    if t:
        t = abs(float(t))
        total -= oscillatory_tail(t, _density_weighted(_pole_factor(z)), H_star)
        total -= oscillatory_tail(-t, _density_weighted(_pole_factor(-z)), H_star)
    return total


def resonant_tail_model(H_star, z, t, mangoldt=None, width=RESONANCE_WIDTH):
    """
    Prime-power part of the omitted pairs beyond H*.

    Past its smooth density the zero counting measure carries
    -(1/pi) sum_n Lambda(n)/sqrt(n) cos(gamma log n) dgamma. Against the
    e^{+-i gamma t} factors, prime powers with log n within ``width`` of t
    beat slowly and set the size of the truncation error.
    """
    t = abs(float(t))
    if t == 0.0:
        return 0j
    if mangoldt is None:
        mangoldt = sieve_mangoldt(max(cutoff_for(t + width), 2))
    logs, weights = mangoldt.log_support, mangoldt.weights
    near = np.abs(t - logs) <= width
    minus, plus = _pole_factor(complex(z)), _pole_factor(-complex(z))
    total = 0j
    for ell, w in zip(logs[near], weights[near]):
        omega = t - ell
        total += w * (oscillatory_tail(omega, minus, H_star) + oscillatory_tail(-omega, plus, H_star))
    return total / (2.0 * math.pi)


def p_t_zero_sum(t, z, table, tail_model="none", average=1):
    """
    P_t(z) = sum over +-gamma of m (e^{i gamma t} - 1)/gamma * 1/(z - gamma).

    Returns (value, TailBound). tail_model='density' adds the smooth-density
    estimate of the omitted pairs, 'explicit' adds their prime-power part
    as well. With average > 1 the value is the mean over the last
    ``average`` truncation points, each carrying its own tail estimate.
    """
    if tail_model not in TAIL_MODELS:
        raise ConfigError(f"unknown tail model {tail_model!r}")
    if int(average) < 1:
        raise ConfigError("average must be at least 1")
    t = abs(float(t))
    z_arr = np.asarray(z, dtype=np.complex128)
    zz = np.atleast_1d(z_arr).ravel()
    gam = table.ordinates
    _check_poles(zz, gam)
    m = table.multiplicities.astype(np.float64)
    average = min(int(average), max(gam.size, 1))
    model = 0.0
    tail_table = table
    if t == 0.0 or gam.size == 0:
        value = np.zeros(zz.size, dtype=np.complex128)
    else:
        plus = np.expm1(1j * gam * t) / gam
        minus = np.expm1(-1j * gam * t) / (-gam)
        terms = (m * plus)[None, :] / (zz[:, None] - gam[None, :]) \
            + (m * minus)[None, :] / (zz[:, None] + gam[None, :])
        full = np.array([pairwise_sum(row) for row in terms])
        # column k drops the last k pairs
        dropped = np.cumsum(terms[:, ::-1][:, :average - 1], axis=1)
        partial = full[:, None] - np.hstack([np.zeros((zz.size, 1)), dropped])
        estimates = np.zeros_like(partial)
        if tail_model != "none":
            mangoldt = None
            if tail_model == "explicit":
                mangoldt = sieve_mangoldt(max(cutoff_for(t + RESONANCE_WIDTH), 2))
            for k, count in enumerate(np.cumsum(m)[::-1][:average]):
                H_star = height_for_count(count)
                for i, zi in enumerate(zz):
                    estimates[i, k] = density_tail_model(H_star, zi, t)
                    if mangoldt is not None:
                        estimates[i, k] += resonant_tail_model(H_star, zi, t, mangoldt)
        value = np.mean(partial + estimates, axis=1)
        model = np.mean(estimates, axis=1)
        tail_table = table.head(len(table) - average + 1)
    z_abs = float(np.max(np.abs(zz))) if zz.size else 0.0
    bound = 0.0 if t == 0.0 else _pair_tail_bound(tail_table, z_abs)
    tail = TailBound(tail_table.height, bound, model if np.ndim(model) == 0 else complex(model[0]))
    if z_arr.ndim == 0:
        return complex(value[0]), tail
    return value.reshape(z_arr.shape), tail


def g_tail_bound(table):
    if len(table) == 0:
        return math.inf
    H = max(table.height, 2.0 * math.pi * math.e)
    return TAIL_SAFETY * 4.0 * _log_moment(H, 2.0)


def g_zero_sum(t, table, tail_model="none"):
    """-g(t) = sum over +-gamma of m (1 - cos(gamma t))/gamma^2."""
    t = abs(float(t))
    if t == 0.0:
        return 0.0, TailBound(table.height, 0.0)
    gam = table.ordinates
    terms = table.multiplicities * 2.0 * np.sin(0.5 * gam * t) ** 2 / gam ** 2
    value = 2.0 * float(pairwise_sum(terms))
    model = 0.0
    if tail_model == "density":
        model = 2.0 * _log_moment(table.truncation_height(), 2.0)
        value += model
    return value, TailBound(table.height, g_tail_bound(table), model)


def norm_sq_zero_sum(t, table):
    """||S_t||^2 = sum over +-gamma of m |e^{i gamma t} - 1|^2 / gamma^2."""
    t = abs(float(t))
    if t == 0.0:
        return 0.0, TailBound(table.height, 0.0)
    gam = table.ordinates
    coeff = np.expm1(1j * gam * t) / gam
    terms = table.multiplicities * (coeff.real ** 2 + coeff.imag ** 2)
    value = 2.0 * float(pairwise_sum(terms))
    return value, TailBound(table.height, 2.0 * g_tail_bound(table))


def coefficient_square_sum(t, table):
    """
    Partial sums of m |(e^{i gamma t} - 1)/gamma|^2 over the table with the
    ceiling 4 sum m/gamma^2 they must stay under.
    """
    gam = table.ordinates
    m = table.multiplicities
    coeff = np.abs(np.expm1(1j * gam * abs(float(t))) / gam) ** 2 * m
    return np.cumsum(coeff), float(np.sum(4.0 * m / gam ** 2))


def _decay_constant(values, gammas, power):
    """max |f(gamma)| gamma^power over the top tenth of the table."""
    if gammas.size == 0:
        return 0.0
    top = max(1, gammas.size // 10)
    return float(np.max(np.abs(values[-top:]) * gammas[-top:] ** power))


def weil_form(psi_hat, table):
    """
    Weil's form sum over +-gamma of m psi_hat(gamma) conj(psi_hat(conj gamma));
    for real ordinates this is sum m |psi_hat(gamma)|^2 over both signs.

    ``psi_hat`` is a vectorized callable on real arguments.
    """
    gam = table.ordinates
    if gam.size == 0:
        return 0.0, TailBound(0.0, math.inf)
    m = table.multiplicities
    plus = np.asarray(psi_hat(gam))
    minus = np.asarray(psi_hat(-gam))
    terms = m * (np.abs(plus) ** 2 + np.abs(minus) ** 2)
    value = float(pairwise_sum(terms))
    C = max(_decay_constant(plus, gam, 2.0), _decay_constant(minus, gam, 2.0))
    H = max(table.height, 2.0 * math.pi * math.e)
    bound = TAIL_SAFETY * 2.0 * C ** 2 * _log_moment(H, 4.0)
    return value, TailBound(table.height, bound)


def gg_form_zero_sum(phi_hat, table, phi_hat_zero=None):
    """
    sum over +-gamma of m |(phi_hat(gamma) - phi_hat(0))/gamma|^2, the
    spectral side of the G_g hermitian form.
    """
    gam = table.ordinates
    if gam.size == 0:
        return 0.0, TailBound(0.0, math.inf)
    m = table.multiplicities
    at_zero = complex(phi_hat(np.array([0.0]))[0]) if phi_hat_zero is None else complex(phi_hat_zero)
    plus = np.asarray(phi_hat(gam)) - at_zero
    minus = np.asarray(phi_hat(-gam)) - at_zero
    terms = m * (np.abs(plus) ** 2 + np.abs(minus) ** 2) / gam ** 2
    value = float(pairwise_sum(terms))
    C = max(_decay_constant(plus + at_zero, gam, 2.0), _decay_constant(minus + at_zero, gam, 2.0))
    H = max(table.height, 2.0 * math.pi * math.e)
    # |phi_hat(gamma) - phi_hat(0)| <= C/gamma^2 + |phi_hat(0)| beyond H
    lead = abs(at_zero) + C / H ** 2
    bound = TAIL_SAFETY * 2.0 * lead ** 2 * _log_moment(H, 2.0)
    return value, TailBound(table.height, bound)
