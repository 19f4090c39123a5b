"""Tail quadrature with underflow-safe scaling.

Every integral over [a, inf) is computed on the rescaled integrand
g(x)/g-scale with the scale factored out in log space, so relative accuracy
survives down to survival values near 1e-300.  The workhorse substitution is
v = a + s/(1-s), s in [0, 1), handed to scipy's adaptive quadrature.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate

__all__ = [
    "tail_quad_scaled",
    "survival_tail_integral",
    "TailIntegralTable",
    "WeightedTailMassTable",
    "doubling_tail_integral",
    "weighted_tail_moment",
    "tail_weight_integral_batch",
]

_EPSREL = 1e-10
_EPSABS = 1e-14
_LIMIT = 200


def tail_quad_scaled(log_integrand, a: float, log_scale: float) -> tuple[float, float]:
    """Integrate exp(log_integrand(v)) over [a, inf), factoring out log_scale.

    Returns (value, abserr) with value = exp(log_scale) * integral of the
    rescaled integrand.  log_integrand must accept numpy arrays.
    """

    def g(s):
        s = np.asarray(s, dtype=float)
        v = a + s / (1.0 - s)
        return np.exp(log_integrand(v) - log_scale) / (1.0 - s) ** 2

    val, err = integrate.quad(g, 0.0, 1.0, epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
    scale = np.exp(log_scale)
    return float(val * scale), float(err * scale)


def survival_tail_integral(law, u: float) -> float:
    """Raw integral of the survival function over [u, inf), no clipping.

    Handles a positive left endpoint of the support exactly (survival is 1
    there) and keeps relative accuracy 1e-10 by rescaling with the survival
    at the integration start.  Infinite-mean laws raise ValueError.
    """
    if not law.mean_is_finite():
        raise ValueError("survival function is not integrable (infinite mean)")
    if u < 0:
        raise ValueError("u must be >= 0")
    lo = law.support_left
    flat = 0.0
    if u < lo:
        flat = lo - u
        u = lo
    log_scale = law.log_survival(u)
    if log_scale < -700.0:
        # value below ~1e-304; report 0 rather than a denormal guess
        return flat
    val, _ = tail_quad_scaled(law.log_survival, u, log_scale)
    return flat + val


class TailIntegralTable:
    """Cumulative tail integrals of a survival function on a log-spaced grid.

    Stores exact (quadrature-grade) values at the knots; an evaluation at an
    arbitrary point completes the nearest upper knot with a fixed-order
    Gauss-Legendre panel over the short gap, so table lookups agree with
    direct quadrature to ~1e-12 relative.  Evaluation is vectorized and
    nonincreasing by construction.
    """

    def __init__(self, law, lo: float, hi: float, n_knots: int = 160, panel_order: int = 64):
        if not (0.0 <= lo < hi):
            raise ValueError("need 0 <= lo < hi")
        self.law = law
        start = max(lo, law.support_left, 1e-9)
        self.knots = np.concatenate([[lo], np.geomspace(start, hi, n_knots)])
        self.knots = np.unique(self.knots)
        self.values = np.array([survival_tail_integral(law, float(k)) for k in self.knots])
        self._gl_x, self._gl_w = np.polynomial.legendre.leggauss(panel_order)

    @property
    def hi(self) -> float:
        return float(self.knots[-1])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        uu = np.atleast_1d(u)
        out = np.empty_like(uu)
        inside = uu < self.hi
        for i in np.flatnonzero(~inside):
            out[i] = survival_tail_integral(self.law, float(uu[i]))
        if inside.any():
            ui = np.clip(uu[inside], self.knots[0], None)
            j = np.searchsorted(self.knots, ui, side="left")
            upper = self.knots[j]
            # GL panel over [u, knot_j], then add the cached tail at knot_j
            half = 0.5 * (upper - ui)
            mid = 0.5 * (upper + ui)
            nodes = mid[:, None] + half[:, None] * self._gl_x[None, :]
            panel = half * (self.law.survival(nodes) * self._gl_w[None, :]).sum(axis=1)
            out[inside] = self.values[j] + panel
        if scalar:
            return float(out[0])
        return out


class WeightedTailMassTable:
    """Fast evaluator for M(T) = integral of weight(r) * density(r) over [T, inf).

    Same layout as TailIntegralTable: quadrature-grade values at log-spaced
    knots, Gauss-Legendre panel completion from an arbitrary query point to the
    nearest upper knot.  Queries below ``lo`` are clamped to ``lo``; queries at
    or beyond ``hi`` return 0.0, so pick ``hi`` deep enough that the discarded
    mass is below the accuracy you need (``law.isf`` of something tiny).

    Holds only plain arrays and dataclasses, so instances survive pickling
    into worker processes.
    """

    def __init__(self, law, weight_fn, lo: float, hi: float,
                 n_knots: int = 256, panel_order: int = 64):
        if not hi > lo > 0.0:
            raise ValueError("need 0 < lo < hi")
        self.law = law
        self.weight_fn = weight_fn
        # clamping the bottom knot to the support edge keeps every panel
        # inside the smooth region; M is constant below the support anyway
        left = getattr(law, "support_left", 0.0)
        start = max(lo, left, 1e-9)
        knots = np.geomspace(start, hi, n_knots)
        self.knots = np.unique(knots)
        self.values = np.array([
            weighted_tail_moment(law, weight_fn, float(k), 0) for k in self.knots
        ])
        x, w = np.polynomial.legendre.leggauss(panel_order)
        self._gl_x = x
        self._gl_w = w

    def __call__(self, t):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        scalar = np.isscalar(t) or np.asarray(t).ndim == 0
        out = np.zeros(tt.shape)
        ti = np.clip(tt, self.knots[0], None)
        inside = np.isfinite(ti) & (ti < self.knots[-1])
        if inside.any():
            ui = ti[inside]
            j = np.searchsorted(self.knots, ui, side="left")
            upper = self.knots[j]
            half = 0.5 * (upper - ui)
            mid = 0.5 * (upper + ui)
            nodes = mid[:, None] + half[:, None] * self._gl_x[None, :]
            dens = np.exp(self.law.log_density(nodes))
            panel = half * (self.weight_fn(nodes) * dens * self._gl_w[None, :]).sum(axis=1)
            out[inside] = self.values[j] + panel
        if scalar:
            return float(out[0])
        return out


def doubling_tail_integral(fn, a: float, rel_tol: float = 1e-12,
                           max_doublings: int = 64) -> dict:
    """Integrate fn over [a, inf) by doubling the upper bound until converged.

    Convergence: the last panel contributes less than rel_tol of the
    accumulated total.  Returns a dict with the value, the panel trace, and
    a converged flag (False signals a divergent or too-slowly-converging
    integral).
    """
    b0 = max(2.0 * abs(a), 1.0)
    edges = [a, a + b0]
    total = 0.0
    panels = []
    converged = False
    for _ in range(max_doublings):
        lo, hi = edges[-2], edges[-1]
        panel, _ = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=1e-11, limit=_LIMIT)
        total += panel
        panels.append({"upper": hi, "panel": panel, "accumulated": total})
        if total == 0.0 or abs(panel) <= rel_tol * abs(total):
            converged = True
            break
        edges.append(a + 2.0 * (hi - a))
    return {"value": total, "converged": converged, "panels": panels}


def weighted_tail_moment(law, weight_fn, a: float, power: int = 0,
                         shift: float = 0.0, slope: float = 1.0) -> float:
    """Integral of weight(r) * (slope*r - shift)^power * density(r) on [a, inf).

    The (slope*r - shift) factor covers the overshoot moments needed by the
    halfspace reduction; power 0 gives plain weighted tail mass.  Scaled by
    the survival at the start for deep-tail stability.
    """
    if getattr(weight_fn, "is_const", False) and weight_fn.value == 0.0:
        return 0.0
    a = max(a, law.support_left)
    log_scale = law.log_survival(a)
    if log_scale < -700.0:
        return 0.0

    def log_integrand(v):
        base = law.log_density(v) + np.log(np.maximum(weight_fn(v), 1e-300))
        if power:
            base = base + power * np.log(np.maximum(slope * v - shift, 1e-300))
        return base

    val, _ = tail_quad_scaled(log_integrand, a, log_scale)
    return val


@lru_cache(maxsize=8)
def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def tail_weight_integral_batch(law, weight_fn, T: np.ndarray, order: int = 96) -> np.ndarray:
    """Vectorized integral of weight(r)*density(r) over [T_i, inf) per row.

    Uses the substitution r = T + t*s/(1-s) with a per-row scale t matched to
    the local mean residual life (survival / density at T), then fixed-order
    Gauss-Legendre in s.  Agrees with adaptive quadrature to ~1e-9 relative
    for the smooth laws used here; validated against scipy quad in the tests.
    """
    T = np.maximum(np.asarray(T, dtype=float), law.support_left + 1e-12)
    log_surv = law.log_survival(T)
    t_scale = np.exp(np.clip(log_surv - law.log_density(T), -18.0, 18.0))
    x, w = _gl(order)
    s = 0.5 * (x + 1.0)
    jac = 0.5 / (1.0 - s) ** 2
    r = T[:, None] + t_scale[:, None] * (s / (1.0 - s))[None, :]
    log_f = law.log_density(r) - log_surv[:, None]
    vals = weight_fn(r) * np.exp(log_f) * jac[None, :]
    scaled = (vals * w[None, :]).sum(axis=1) * t_scale
    return scaled * np.exp(log_surv)
