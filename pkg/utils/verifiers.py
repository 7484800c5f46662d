"""
Three-way identity verifiers and the acceptance checks.

Every check returns a plain report dict with a boolean 'passed'; values and
error budgets ride along so the CLI can print or serialize them.
"""
import logging
import math

import numpy as np

from utils.analysis import Estimate, QuadratureSpec, TestFunction, fourier
from utils.errors import ConfigError, ExclusionZoneError, JumpPointError
from utils.screwline import EXCLUSION_RADIUS, ScrewLineContext, nearest_zero_distance
from utils.zeros import (
    FIRST_ORDINATE,
    embedded_zeros,
    g_zero_sum,
    gg_form_zero_sum,
    height_for_count,
    locate_zeros,
    norm_sq_zero_sum,
    p_t_zero_sum,
    riemann_von_mangoldt,
    weil_form,
)

logger = logging.getLogger(__name__)

REL_LIMIT = 1e-2
CONTROL_SHIFT = 0.1
LARGE_TABLE_SIZE = 2000
SMALL_TABLE_SIZE = 500
EXPANSION_AVERAGE = 25

CHECK_NAMES = (
    "zero-limit",
    "special-value",
    "expansion",
    "zero-sum",
    "consistency",
    "norm",
    "norm-identity",
    "weil-identity",
    "decay",
    "theta",
    "zeros",
    "increment",
)

# Equation-style names accepted on the command line
CHECK_ALIASES = {
    "eq401": "zero-limit",
    "eq402": "special-value",
    "prop21": "expansion",
    "eq302": "zero-sum",
    "thm14": "norm-identity",
    "cor16": "weil-identity",
}


def resolve_check(name):
    """Canonical check name for ``name`` or one of its aliases."""
    canonical = CHECK_ALIASES.get(name, name)
    if canonical not in CHECK_NAMES:
        raise ConfigError(f"unknown check: {name}")
    return canonical


def _compare(paths, rel_limit=REL_LIMIT):
    """Pairwise gaps between path estimates against their combined budgets."""
    names = list(paths)
    pairs = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            ea, eb = paths[a], paths[b]
            gap = abs(complex(ea.value) - complex(eb.value))
            budget = ea.total_error + eb.total_error
            scale = max(abs(ea.value), abs(eb.value))
            relative = gap / scale if scale > 0 else 0.0
            pairs.append({
                "paths": [a, b],
                "gap": gap,
                "budget": budget,
                "relative_gap": relative,
                "passed": bool(gap <= budget and relative <= rel_limit),
            })
    return pairs


def _identity_report(name, paths, rel_limit):
    pairs = _compare(paths, rel_limit)
    passed = all(p["passed"] for p in pairs)
    for p in pairs:
        mark = "ok" if p["passed"] else "FAIL"
        logger.info("%s %s vs %s: gap %.3g budget %.3g [%s]", name, *p["paths"], p["gap"], p["budget"], mark)
    return {
        "check": name,
        "paths": {k: v.as_dict() for k, v in paths.items()},
        "pairs": pairs,
        "passed": passed,
    }


def _spectral_norm_form(phi, table):
    value, tail = gg_form_zero_sum(lambda z: fourier(phi, z), table,
                                   phi_hat_zero=0.0 if phi.mass() == 0.0 else None)
    return Estimate(value, zero_trunc_bound=tail.bound, details={"path": "spectral", "zeros": len(table)})


def _spectral_weil_form(psi, table):
    value, tail = weil_form(lambda z: fourier(psi, z), table)
    return Estimate(value, zero_trunc_bound=tail.bound, details={"path": "spectral", "zeros": len(table)})


def verify_norm_identity(phi, table, spec=None, context=None, rel_limit=REL_LIMIT):
    """
    ||P_hat_phi||^2 on the line against <phi, phi>_G by kernel quadrature and
    by the zero sum, for a zero-mean test function phi.
    """
    if phi.mass() != 0.0:
        raise ConfigError("the norm identity needs a zero-mean test function")
    ctx = context or ScrewLineContext()
    if phi.is_zero:
        zero = Estimate(0.0)
        return _identity_report("norm-identity", {"quadrature": zero, "kernel": zero, "spectral": zero}, rel_limit)
    paths = {
        "quadrature": ctx.norm_sq_p_hat(phi, spec, table),
        "kernel": ctx.screw.herm_form_gg(phi, phi),
        "spectral": _spectral_norm_form(phi, table),
    }
    return _identity_report("norm-identity", paths, rel_limit)


def verify_weil_identity(psi, table, spec=None, context=None, rel_limit=REL_LIMIT, paths=None):
    """
    ||P_hat_{psi'}||^2 against Weil's form of psi and <psi', psi'>_G.

    ``paths`` lets a caller reuse the table-independent estimates when only
    the zero table changes.
    """
    ctx = context or ScrewLineContext()
    if psi.is_zero:
        zero = Estimate(0.0)
        return _identity_report("weil-identity", {"quadrature": zero, "kernel": zero, "spectral": zero}, rel_limit)
    d_psi = psi.derivative()
    if paths is None:
        paths = {
            "quadrature": ctx.norm_sq_p_hat(d_psi, spec, table),
            "kernel": ctx.screw.herm_form_gg(d_psi, d_psi),
        }
    paths = dict(paths, spectral=_spectral_weil_form(psi, table))
    return _identity_report("weil-identity", paths, rel_limit)


class AcceptanceSuite:
    """Acceptance checks over one screw-line context and one zero table."""

    def __init__(self, context=None, table=None, options=None):
        self.context = context or ScrewLineContext()
        self.table = table if table is not None else embedded_zeros()
        self.options = options or {}
        self._large = None
        self.reports = []

    @property
    def threads(self):
        return int(self.options.get("threads", 1))

    @property
    def screw(self):
        return self.context.screw

    def large_table(self):
        """A table of at least LARGE_TABLE_SIZE zeros, located once if needed."""
        if self._large is None:
            if len(self.table) >= LARGE_TABLE_SIZE:
                self._large = self.table
            else:
                height = height_for_count(LARGE_TABLE_SIZE) + 5.0
                logger.info("locating zeros up to %.1f for the zero-sum checks", height)
                self._large = locate_zeros(height)
        return self._large

    def _report(self, name, rows, passed=None, **extra):
        if passed is None:
            passed = all(r["passed"] for r in rows)
        report = {"check": name, "rows": rows, "passed": bool(passed)}
        report.update(extra)
        self.reports.append(report)
        return report

    # 1. zero limit of P_t against -g(t)
    def check_zero_limit(self, t_values=(0.5, 1.0, 2.0, 4.0), tol=1e-6):
        rows = []
        for t in t_values:
            limit, spread = self.context.richardson_zero_limit(t)
            expected = -self.screw.g(t)
            gap = abs(limit - expected)
            rows.append({"t": t, "extrapolated": limit, "expected": expected,
                         "gap": gap, "spread": spread, "passed": gap <= tol})
        return self._report("zero-limit", rows, tolerance=tol)

    # 2. special value at i*infinity against -g'(t)
    def check_special_value(self, t_values=(1.0, 2.5), tol=1e-3):
        rows = []
        for t in t_values:
            limit = self.context.special_value_limit(t)
            expected = self.screw.minus_g_prime(t)
            gap = abs(limit - expected)
            rows.append({"t": t, "limit": limit, "expected": expected, "gap": gap, "passed": gap <= tol})
        return self._report("special-value", rows, tolerance=tol)

    # 3. closed form of P_t against the truncated zero expansion
    def check_expansion(self, t_values=(1.0, 2.0), z_values=(2j, 3j), shrink=3.0, average=EXPANSION_AVERAGE):
        large = self.large_table()
        small = large.head(SMALL_TABLE_SIZE + average - 1)
        rows = []
        for t in t_values:
            for z in z_values:
                closed = self.context.frak_p(t, z)
                value, tail = p_t_zero_sum(t, z, large, tail_model="explicit", average=average)
                coarse, _ = p_t_zero_sum(t, z, small, tail_model="explicit", average=average)
                raw, _ = p_t_zero_sum(t, z, large)
                gap = abs(closed - value)
                coarse_gap = abs(closed - coarse)
                ratio = coarse_gap / gap if gap > 0 else math.inf
                rows.append({
                    "t": t, "z": z, "closed_form": closed, "zero_sum": value,
                    "gap": gap, "raw_gap": abs(closed - raw), "tail_bound": tail.bound,
                    "coarse_gap": coarse_gap, "shrink": ratio,
                    "passed": gap <= tail.bound and ratio >= shrink,
                })
        return self._report("expansion", rows, zeros=len(large), average=average)

    # 4. zero sum for g
    def check_zero_sum(self, t_values=(1.0, 2.0, 3.0)):
        large = self.large_table()
        rows = []
        for t in t_values:
            value, tail = g_zero_sum(t, large)
            gap = abs(value + self.screw.g(t))
            rows.append({"t": t, "zero_sum": value, "minus_g": -self.screw.g(t),
                         "gap": gap, "tail_bound": tail.bound, "passed": gap <= tail.bound})
        return self._report("zero-sum", rows, zeros=len(large))

    # 5. norm sum is twice the g sum
    def check_consistency(self, t_values=(1.0, 2.0, 3.0), tol=1e-15):
        large = self.large_table()
        rows = []
        for t in t_values:
            norm, _ = norm_sq_zero_sum(t, large)
            g_sum, _ = g_zero_sum(t, large)
            gap = abs(norm - 2.0 * g_sum)
            rows.append({"t": t, "norm_sum": norm, "twice_g_sum": 2.0 * g_sum,
                         "gap": gap, "passed": gap <= tol})
        return self._report("consistency", rows)

    # 6. ||S_t||^2 by quadrature against -2g(t)
    def check_norm(self, t_values=(1.0, 2.0), radius=None):
        spec = QuadratureSpec(radius=radius or self.options.get("radius", 2000.0),
                              rel_tol=self.options.get("rel_tol", 1e-8),
                              threads=self.threads)
        rows = []
        for t in t_values:
            est = self.context.norm_sq_quad(t, spec, self.table)
            expected = -2.0 * self.screw.g(t)
            gap = abs(est.value - expected)
            parts = {"quad_error": est.quad_error, "tail_bound": est.tail_bound}
            rows.append({
                "t": t, "estimate": est.as_dict(), "expected": expected, "gap": gap,
                "relative_gap": gap / abs(expected),
                "dominant_error": max(parts, key=parts.get),
                "passed": gap <= est.total_error and gap <= REL_LIMIT * abs(expected),
            })
        return self._report("norm", rows, radius=spec.radius)

    def _identity_spec(self):
        return QuadratureSpec(radius=self.options.get("identity_radius", 300.0),
                              rel_tol=self.options.get("rel_tol", 1e-8),
                              threads=self.threads)

    # 7. norm identity for a zero-mean test function
    def check_norm_identity(self, center=2.0, half_width=1.0):
        phi = TestFunction(center, half_width).derivative()
        report = verify_norm_identity(phi, self.table, self._identity_spec(), self.context)
        report["test_function"] = {"center": center, "half_width": half_width, "kind": phi.kind}
        self.reports.append(report)
        return report

    # 8. Weil form identity, with a perturbed table that must fail
    def check_weil_identity(self, center=1.5, half_width=1.0):
        psi = TestFunction(center, half_width)
        report = verify_weil_identity(psi, self.table, self._identity_spec(), self.context)
        reused = {k: v for k, v in report["paths"].items() if k != "spectral"}
        reused = {k: Estimate(v["value"], v["quad_error"], v["tail_bound"], v["zero_trunc_bound"])
                  for k, v in reused.items()}
        control = verify_weil_identity(psi, self.table.perturbed(0, CONTROL_SHIFT),
                                       context=self.context, paths=reused)
        report["control"] = {"shift": CONTROL_SHIFT, "pairs": control["pairs"],
                             "rejected": not control["passed"]}
        report["passed"] = bool(report["passed"] and not control["passed"])
        report["test_function"] = {"center": center, "half_width": half_width, "kind": psi.kind}
        self.reports.append(report)
        return report

    # 9. decay of |S_t| along the line
    def check_decay(self, t_values=(1.0, 3.0), limit=-0.9):
        rows = []
        for t in t_values:
            slope = self.context.decay_slope(t)
            rows.append({"t": t, "slope": slope, "passed": slope <= limit})
        return self._report("decay", rows, limit=limit)

    # 10. |Theta| = 1 on the real line
    def check_theta(self, count=100, lo=1.0, hi=500.0, tol=1e-9):
        rng = np.random.default_rng(self.options.get("seed", 0))
        z = rng.uniform(lo, hi, count)
        clash = nearest_zero_distance(z, self.table.ordinates) < EXCLUSION_RADIUS
        while np.any(clash):
            z[clash] = rng.uniform(lo, hi, int(clash.sum()))
            clash = nearest_zero_distance(z, self.table.ordinates) < EXCLUSION_RADIUS
        deviation = np.abs(np.abs(self.context.theta(z)) - 1.0)
        worst = int(np.argmax(deviation))
        row = {"samples": count, "max_deviation": float(deviation[worst]),
               "worst_z": float(z[worst]), "passed": bool(deviation[worst] <= tol)}
        return self._report("theta", [row], tolerance=tol)

    # 11. zero locator
    def check_zeros(self, height=500.0, tol=1e-6):
        located = locate_zeros(height)
        reference = embedded_zeros()
        first_gap = abs(float(located.ordinates[0]) - FIRST_ORDINATE)
        k = min(len(located), len(reference))
        table_gap = float(np.max(np.abs(located.ordinates[:k] - reference.ordinates[:k]))) if k else math.inf
        smooth = riemann_von_mangoldt(height)
        rows = [
            {"quantity": "first ordinate", "value": float(located.ordinates[0]),
             "gap": first_gap, "passed": first_gap <= tol},
            {"quantity": "bundled table", "compared": k, "gap": table_gap, "passed": table_gap <= tol},
            {"quantity": "count", "value": len(located), "smooth": smooth,
             "gap": abs(len(located) - smooth), "passed": abs(len(located) - smooth) <= 2.0},
        ]
        return self._report("zeros", rows, height=height)

    # 12. stationary increments: <S_{t+u} - S_u, S_{s+u} - S_u> against G_g(t, s)
    def check_increment(self, triples=((1.0, 2.0, 0.5), (1.5, 1.5, 1.0)), radius=None):
        spec = QuadratureSpec(radius=radius or self.options.get("radius", 2000.0),
                              rel_tol=self.options.get("rel_tol", 1e-8),
                              threads=self.threads)
        rows = []
        for t, s, u in triples:
            est = self.context.increment_inner(t, s, u, spec, self.table)
            expected = float(self.screw.g_kernel(t, s))
            gap = abs(est.value - expected)
            rows.append({
                "t": t, "s": s, "u": u, "estimate": est.as_dict(), "expected": expected,
                "gap": gap, "relative_gap": gap / abs(expected),
                "passed": gap <= est.total_error and gap <= REL_LIMIT * abs(expected),
            })
        return self._report("increment", rows, radius=spec.radius)

    def run(self, names=CHECK_NAMES):
        handlers = {
            "zero-limit": self.check_zero_limit,
            "special-value": self.check_special_value,
            "expansion": self.check_expansion,
            "zero-sum": self.check_zero_sum,
            "consistency": self.check_consistency,
            "norm": self.check_norm,
            "norm-identity": self.check_norm_identity,
            "weil-identity": self.check_weil_identity,
            "decay": self.check_decay,
            "theta": self.check_theta,
            "zeros": self.check_zeros,
            "increment": self.check_increment,
        }
        names = [resolve_check(n) for n in names]
        results = []
        for name in names:
            try:
                results.append(handlers[name]())
            except (ExclusionZoneError, JumpPointError) as e:
                logger.error("%s could not run: %s", name, e)
                results.append(self._report(name, [], passed=False, error=str(e)))
        return results
