"""Closed-form and quadrature evaluation of the ruin asymptotics.

Two quantities drive everything here.  The asymptotic approximation is the
integrated radial tail over the L1 norm of the drift.  The halfspace
integral is the exact overshoot functional for the set {sum of coordinates
above u}: since the summed drift equals the drift norm for a componentwise
negative mean, membership of x in the v-shifted halfspace reduces to
sum(x) > u + v*||c||, collapsing the d-dimensional occupation integral to
one-dimensional quadrature against the law of T = sum(X).

The halfspace tail H(u) = min(1, halfspace_integral(u)), viewed as the
survival function of a nonnegative variable (with an atom at zero for the
mass the integral never reaches), feeds the same convolution-ratio
machinery used for the radial law; that is the A6 check.  A5 is the
finiteness of the occupation integral itself, probed by doubling the
integration horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import l1_norm
from .model import IncrementModel
from .quadrature import (
    doubling_tail_integral,
    survival_tail_integral,
    weighted_tail_moment,
)
from .taildiag import DiagnosticReport, check_a1

__all__ = [
    "AsymptoticApprox",
    "asymptotic_ruin",
    "sum_tail",
    "halfspace_integral",
    "HalfspaceTail",
    "check_a5",
    "check_a6",
    "equivalence_gap",
    "u_grid_for_asym_span",
]


@dataclass(frozen=True)
class AsymptoticApprox:
    """One point of the closed asymptotic formula."""

    u: float
    value: float
    method: str
    error_bound: float
    clip_binds: bool = False  # true when min(1, value) would differ


def asymptotic_ruin(law, c, u: float) -> AsymptoticApprox:
    """Integrated tail of the radial law at u over the L1 norm of c.

    Returns the raw (unclipped) value; clip_binds flags when it exceeds 1.
    Nonintegrable tails raise.
    """
    c = np.asarray(c, dtype=float)
    normc = l1_norm(c)
    if normc <= 0:
        raise ValueError("need a nonzero drift vector")
    raw = survival_tail_integral(law, u)
    value = raw / normc
    return AsymptoticApprox(u=float(u), value=float(value), method="quadrature",
                            error_bound=1e-9 * max(value, 1e-300),
                            clip_binds=value > 1.0)


def _off_sum(model: IncrementModel) -> float:
    return float(model.angular.off_direction.sum())


def sum_tail(model: IncrementModel, s: float) -> float:
    """P(T > s) for T = sum of increment coordinates, s > 0.

    On the core branch the direction sums to 1 (positive diamond), so T = R
    there and the branch contributes the w-weighted radial tail.  The off
    branch sums to off_sum < 1; it contributes only when off_sum > 0, with
    the radius threshold rescaled accordingly.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    law = model.radial
    w = model.angular.weight
    total = weighted_tail_moment(law, w, s, power=0)
    sig = _off_sum(model)
    if sig > 0:
        total += weighted_tail_moment(law, w.complement(), s / sig, power=0)
    return total


def halfspace_integral(model: IncrementModel, u: float, *,
                       require_certified: bool = True) -> float:
    """(1/||c||) * integral over [u, inf) of P(T > s) ds, by Fubini.

    Exchanging the order of integration turns the s-integral into the
    overshoot moment E[w(R) (R - u)^+] plus, when the off direction has a
    positive coordinate sum, the matching off-branch term.  A const-1 weight
    takes the same code path as asymptotic_ruin, so the two agree to the
    last bit in that degenerate case.
    """
    if u < 0:
        raise ValueError("u must be >= 0")
    if require_certified and not model.drift_certified:
        raise ValueError("model drift is not certified; build with certify=True "
                         "or pass require_certified=False for diagnostics")
    law = model.radial
    if not law.mean_is_finite():
        raise ValueError("halfspace integral diverges: radial law has infinite mean")
    normc = model.drift_norm
    if normc <= 0:
        raise ValueError("drift norm is zero")
    w = model.angular.weight
    if w.is_const_one:
        return survival_tail_integral(law, u) / normc
    total = weighted_tail_moment(law, w, u, power=1, shift=u, slope=1.0)
    sig = _off_sum(model)
    if sig > 0:
        total += weighted_tail_moment(law, w.complement(), u / sig, power=1,
                                      shift=u, slope=sig)
    return total / normc


class HalfspaceTail:
    """min(1, halfspace_integral) as a one-dimensional tail law.

    The mass the integral never covers sits as an atom at zero, so the
    object is a genuine distribution on [0, inf) and plugs into the generic
    convolution-ratio machinery.  Scalar evaluations are memoized; the
    adaptive quadrature in the convolution check revisits grid points.
    """

    def __init__(self, model: IncrementModel):
        if not model.radial.mean_is_finite():
            raise ValueError("halfspace tail undefined for infinite-mean radial law")
        self.model = model
        self.support_left = 0.0
        self._surv_cache: dict = {}
        self._dens_cache: dict = {}
        h0 = self._raw(0.0)
        self.atom_mass = max(0.0, 1.0 - min(1.0, h0))
        self.atom_at = 0.0

    def _raw(self, x: float) -> float:
        key = float(x)
        if key not in self._surv_cache:
            self._surv_cache[key] = halfspace_integral(
                self.model, key, require_certified=False)
        return self._surv_cache[key]

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return min(1.0, self._raw(float(x))) if x >= 0 else 1.0
        return np.array([self.survival(float(v)) for v in x.ravel()]).reshape(x.shape)

    def log_survival(self, x):
        s = self.survival(x)
        with np.errstate(divide="ignore"):
            return np.log(s)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            xv = float(x)
            if xv <= 0:
                return 0.0
            if xv not in self._dens_cache:
                # derivative of the clipped survival: zero while the clip binds
                if self._raw(xv) >= 1.0:
                    d = 0.0
                else:
                    d = sum_tail(self.model, xv) / self.model.drift_norm
                self._dens_cache[xv] = d
            return self._dens_cache[xv]
        return np.array([self.density(float(v)) for v in x.ravel()]).reshape(x.shape)

    def log_density(self, x):
        d = self.density(x)
        with np.errstate(divide="ignore"):
            return np.log(d)


def check_a5(model: IncrementModel, rel_tol: float = 1e-12,
             max_doublings: int = 40) -> DiagnosticReport:
    """Finiteness probe for the occupation integral of the halfspace.

    Doubles the upper integration bound of P(T > s) from s = 1 until one
    more doubling changes the total by less than rel_tol; non-convergence
    (including any infinite-mean radial law) is reported inconsistent.
    """
    infinite_mean = not model.radial.mean_is_finite()
    res = doubling_tail_integral(lambda s: sum_tail(model, float(s)), 1.0,
                                 rel_tol=rel_tol, max_doublings=max_doublings)
    normc = model.drift_norm if model.drift_norm > 0 else 1.0
    points = [p["upper"] for p in res["panels"]]
    values = [p["accumulated"] / normc for p in res["panels"]]
    consistent = res["converged"] and not infinite_mean
    notes = ""
    if infinite_mean:
        notes = "radial mean is infinite; the overshoot integral cannot converge"
    elif not res["converged"]:
        notes = "doubling the horizon kept adding mass above tolerance"
    return DiagnosticReport(
        assumption="A5",
        points=points,
        values=values,
        verdict="consistent" if consistent else "inconsistent",
        tolerances={"rel_tol": rel_tol, "max_doublings": max_doublings},
        notes=notes,
    )


def check_a6(model: IncrementModel, grid=None) -> DiagnosticReport:
    """Convolution-ratio trend check applied to the halfspace tail law."""
    if not model.radial.mean_is_finite():
        return DiagnosticReport(
            assumption="A6", points=[], values=[], verdict="inconsistent",
            tolerances={},
            notes="halfspace tail law undefined: radial mean infinite")
    htail = HalfspaceTail(model)
    inner = check_a1(htail, grid=grid)
    return DiagnosticReport(
        assumption="A6",
        points=inner.points,
        values=inner.values,
        verdict=inner.verdict,
        tolerances=inner.tolerances,
        notes=("convolution ratio of the halfspace tail law; atom mass "
               f"{htail.atom_mass:.6g} at 0. " + inner.notes).strip(),
    )


def equivalence_gap(model: IncrementModel, u: float, *,
                    require_certified: bool = True) -> float:
    """halfspace_integral(u) / asymptotic_ruin(u) - 1.

    nan when the asymptotic value underflows (inconclusive point).  Exactly
    zero for a const-1 weight, where the two quantities share a code path.
    """
    h = halfspace_integral(model, u, require_certified=require_certified)
    a = asymptotic_ruin(model.radial, model.drift, u).value
    if not np.isfinite(a) or a < 1e-300:
        return float("nan")
    return h / a - 1.0


def u_grid_for_asym_span(law, c, targets) -> np.ndarray:
    """Thresholds at which the asymptotic formula hits each target value.

    Solves asymptotic_ruin(u) = p by bisection on the log scale; targets
    must be positive and the law integrable.
    """
    from scipy.optimize import brentq

    targets = np.asarray(targets, dtype=float)
    if np.any(targets <= 0):
        raise ValueError("targets must be positive")
    normc = l1_norm(np.asarray(c, dtype=float))

    def logval(u):
        raw = survival_tail_integral(law, u)
        if raw <= 0:
            return -np.inf
        return np.log(raw / normc)

    out = []
    for p in targets:
        lo = max(law.support_left, 0.0) + 1e-9
        hi = max(2.0 * lo, 2.0)
        lp = np.log(p)
        while logval(hi) > lp:
            hi *= 2.0
            if hi > 1e12:
                raise ValueError("failed to bracket the target threshold")
        out.append(brentq(lambda x: logval(x) - lp, lo, hi, xtol=1e-10, rtol=1e-14))
    return np.array(out)
