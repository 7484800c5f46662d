"""
Shared numerics: Gauss-Kronrod adaptive quadrature, the bump test-function
family with its Fourier transform, error-budget bookkeeping and Richardson
extrapolation.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from utils.errors import ConfigError, QuadratureError

logger = logging.getLogger(__name__)

# Kronrod 15-point abscissae (non-negative half) and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss 7-point weights on _XGK[1], _XGK[3], _XGK[5], _XGK[7]
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]

BUMP_MASS = 0.44399381616807943782304443
_GL_ORDER = 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class QuadratureSpec:
    radius: float = 2000.0
    rel_tol: float = 1e-8
    max_nodes: int = 4_000_000
    tail_model: str = "log_sq_over_t"
    threads: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("quadrature radius must be positive")
        if not 0 < self.rel_tol < 0.1:
            raise ConfigError("rel_tol must lie in (0, 0.1)")
        if self.tail_model not in ("none", "log_sq_over_t"):
            raise ConfigError(f"unknown tail model {self.tail_model!r}")


@dataclass
class Estimate:
    """A value with its error budget split by origin."""

    value: complex
    quad_error: float = 0.0
    tail_bound: float = 0.0
    zero_trunc_bound: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def total_error(self):
        return self.quad_error + self.tail_bound + self.zero_trunc_bound

    def as_dict(self):
        out = asdict(self)
        out["total_error"] = self.total_error
        return out


def pairwise_sum(values):
    """Fixed-order pairwise reduction; same input order gives the same bits."""
    values = np.asarray(values)
    if values.size <= 256:
        return values.sum()
    half = values.size // 2
    return pairwise_sum(values[:half]) + pairwise_sum(values[half:])


def _evaluate(f, x, threads):
    if threads <= 1 or x.size < 64 * threads:
        return np.asarray(f(x))
    chunks = np.array_split(x, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(f, chunks))
    return np.concatenate([np.asarray(p) for p in parts])


def _gk15(f, lo, hi, threads):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = (centre[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    fx = _evaluate(f, x, threads).reshape(lo.size, 15)
    kronrod = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    return kronrod, np.abs(kronrod - gauss)


def adaptive_quad(f, a, b, rel_tol=1e-10, abs_tol=0.0, exclude=(), breakpoints=(),
                  max_intervals=200_000, threads=1):
    """
    Integrate a vectorized f over [a, b] minus the ``exclude`` intervals.

    Locally adaptive Gauss-Kronrod G7/K15: every interval whose |K15 - G7|
    exceeds its length-proportional share of the tolerance is bisected,
    all at once per round. Returns (value, error).
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0, 0.0
    if b < a:
        value, err = adaptive_quad(f, b, a, rel_tol, abs_tol, exclude, breakpoints,
                                   max_intervals, threads)
        return -value, err

    edges = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    pieces = list(zip(edges[:-1], edges[1:]))
    for lo_x, hi_x in sorted(exclude):
        trimmed = []
        for lo, hi in pieces:
            if hi_x <= lo or lo_x >= hi:
                trimmed.append((lo, hi))
                continue
            if lo < lo_x:
                trimmed.append((lo, lo_x))
            if hi_x < hi:
                trimmed.append((hi_x, hi))
        pieces = trimmed
    if not pieces:
        return 0.0, 0.0
    length = sum(hi - lo for lo, hi in pieces)

    done_lo, done_val, done_err = [], [], []
    lo = np.array([p[0] for p in pieces])
    hi = np.array([p[1] for p in pieces])
    accepted_total = 0.0
    accepted_abs = 0.0
    rounds = 0
    while lo.size:
        rounds += 1
        vals, errs = _gk15(f, lo, hi, threads)
        estimate = abs(accepted_total + pairwise_sum(vals))
        magnitude = accepted_abs + float(np.sum(np.abs(vals)))
        tol = max(abs_tol, rel_tol * estimate, 1e-14 * magnitude)
        local = tol * (hi - lo) / length
        accept = errs <= local
        done_lo.append(lo[accept])
        done_val.append(vals[accept])
        done_err.append(errs[accept])
        accepted_total = accepted_total + pairwise_sum(vals[accept])
        accepted_abs += float(np.sum(np.abs(vals[accept])))
        n_open = int((~accept).sum())
        n_total = sum(x.size for x in done_lo) + 2 * n_open
        if n_open and n_total > max_intervals:
            worst = int(np.argmax(np.where(accept, -np.inf, errs)))
            raise QuadratureError(
                f"adaptive_quad: {n_total} intervals exceed the budget {max_intervals}",
                worst_interval=(float(lo[worst]), float(hi[worst])),
                error=float(errs[worst]),
            )
        mid = 0.5 * (lo[~accept] + hi[~accept])
        lo, hi = (np.concatenate([lo[~accept], mid]),
                  np.concatenate([mid, hi[~accept]]))
        if lo.size and np.min(hi - lo) < 1e-15 * max(1.0, abs(a), abs(b)):
            raise QuadratureError(
                "adaptive_quad: interval width underflow",
                worst_interval=(float(lo[0]), float(hi[0])),
            )

    order = np.argsort(np.concatenate(done_lo), kind="stable")
    values = np.concatenate(done_val)[order]
    errors = np.concatenate(done_err)[order]
    logger.debug("adaptive_quad [%g, %g]: %d intervals, %d rounds", a, b, values.size, rounds)
    value = pairwise_sum(values)
    if np.iscomplexobj(value):
        value = complex(value)
    else:
        value = float(value)
    return value, float(pairwise_sum(errors))


def gauss_legendre_panels(a, b, panels):
    """Nodes and weights of a composite 20-point Gauss-Legendre rule."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    centre = 0.5 * (edges[:-1] + edges[1:])
    nodes = (centre[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class TestFunction:
    """
    Smooth bump amplitude * exp(-1/(1-u^2)), u = (t - center)/half_width,
    or its t-derivative (kind='bump_derivative', zero mean).
    """

    __test__ = False

    center: float = 0.0
    half_width: float = 1.0
    amplitude: float = 1.0
    kind: str = "bump"

    def __post_init__(self):
        if self.kind not in ("bump", "bump_derivative"):
            raise ConfigError(f"unknown test-function kind {self.kind!r}")
        if not self.half_width > 0:
            raise ConfigError("half_width must be positive")

    @property
    def support(self):
        return self.center - self.half_width, self.center + self.half_width

    @property
    def is_zero(self):
        return self.amplitude == 0.0

    @property
    def parent(self):
        """The bump whose derivative this is."""
        return TestFunction(self.center, self.half_width, self.amplitude, "bump")

    def derivative(self):
        if self.kind != "bump":
            raise ConfigError("only the plain bump has a derivative in the family")
        return TestFunction(self.center, self.half_width, self.amplitude, "bump_derivative")

    def shifted(self, c):
        return TestFunction(self.center + c, self.half_width, self.amplitude, self.kind)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        u = (t - self.center) / self.half_width
        inside = np.abs(u) < 1.0
        us = np.where(inside, u, 0.0)
        q = 1.0 - us * us
        profile = np.where(inside, np.exp(-1.0 / q), 0.0)
        if self.kind == "bump":
            value = self.amplitude * profile
        else:
            value = self.amplitude * profile * (-2.0 * us / (q * q)) / self.half_width
        return value if value.ndim else float(value)

    def mass(self):
        if self.kind == "bump_derivative":
            return 0.0
        return self.amplitude * self.half_width * BUMP_MASS

    def l1_norm(self):
        if self.kind == "bump":
            return abs(self.mass())
        # |psi'| integrates to twice the peak height
        return 2.0 * abs(self.amplitude) * math.exp(-1.0)


def fourier(phi, z, rel_tol=1e-12):
    """
    phi_hat(z) = integral phi(t) exp(izt) dt over the support.

    ``z`` may be an array. Composite Gauss-Legendre with panels doubled until
    two consecutive rules agree; the profile is flat to all orders at the
    support ends, so convergence is fast once oscillations are resolved.
    """
    z_arr = np.asarray(z, dtype=np.complex128)
    zz = np.atleast_1d(z_arr).ravel()
    if np.any(np.abs(zz.imag) > 1.0):
        raise ConfigError("fourier is only evaluated for |Im z| <= 1")
    if phi.is_zero:
        out = np.zeros(zz.size, dtype=np.complex128)
    else:
        lo, hi = phi.support
        zmax = float(np.max(np.abs(zz.real))) if zz.size else 0.0
        panels = max(4, int(math.ceil(zmax * (hi - lo) / 6.0)))
        previous = None
        for _ in range(12):
            nodes, weights = gauss_legendre_panels(lo, hi, panels)
            values = phi(nodes) * weights
            out = np.exp(1j * np.outer(zz, nodes)) @ values
            if previous is not None:
                scale = max(float(np.max(np.abs(out))), phi.l1_norm() * 1e-300, 1e-300)
                if np.max(np.abs(out - previous)) <= rel_tol * scale:
                    break
            previous = out
            panels *= 2
        else:
            logger.warning("fourier: panel doubling did not settle for %s", phi)
        if phi.kind == "bump_derivative":
            out = np.where(zz == 0, 0.0, out)
    if z_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(z_arr.shape)


def richardson(h, values, degree=3):
    """
    Extrapolate values(h) to h = 0 with a polynomial of the given degree.

    Returns (limit, spread) where spread compares against one degree less.
    """
    h = np.asarray(h, dtype=np.float64)
    values = np.asarray(values)

    def fit(deg):
        re = np.polyfit(h, np.real(values), deg)[-1]
        if np.iscomplexobj(values):
            return complex(re, np.polyfit(h, np.imag(values), deg)[-1])
        return float(re)

    best = fit(degree)
    return best, abs(best - fit(degree - 1))


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)

