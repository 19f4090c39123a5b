"""Heavy-tail diagnostics: integrated tails and convolution tail ratios.

The two executable checks here probe, for a configured radial law,

  A1: the two-fold convolution tail ratio tends to 2 (the defining property
      of a subexponential law), and
  A2: the integrated tail at gamma*u is asymptotically negligible against
      the integrated tail at u for every gamma > 1.

Both are limit statements, so verdicts are trend-based over a grid rather
than thresholded at a single point; every report carries its full numeric
trace and the tolerances used.

The convolution machinery accepts any law-like object exposing survival,
log_survival, density, log_density and support_left (plus an optional atom
at a point), so the halfspace tail distribution can be fed through the same
A1 check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .quadrature import TailIntegralTable, survival_tail_integral

__all__ = [
    "DiagnosticReport",
    "integrated_tail",
    "IntegratedTail",
    "conv_tail_ratio",
    "a2_ratio",
    "check_a1",
    "check_a2",
]

# below this survival level a ratio of tails is numerically meaningless
UNDERFLOW_FLOOR = 1e-280
_LOG_FLOOR = np.log(UNDERFLOW_FLOOR)

A1_LAST_POINT_TOL = 0.3
TREND_SLACK = 1.05
A2_LIMIT_TOL = 0.1

DEFAULT_A1_GRID = tuple(np.geomspace(10.0, 1000.0, 5))
DEFAULT_A2_GRID = (10.0, 100.0, 1000.0)
DEFAULT_GAMMAS = (1.5, 2.0)


@dataclass
class DiagnosticReport:
    """Outcome of one assumption check with its full numeric trace."""

    assumption: str
    points: list
    values: object
    verdict: str  # consistent | inconsistent | inconclusive
    tolerances: dict = field(default_factory=dict)
    notes: str = ""

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, dict):
                return {str(k): plain(v) for k, v in x.items()}
            if isinstance(x, (list, tuple, np.ndarray)):
                return [plain(v) for v in x]
            if isinstance(x, (np.floating, np.integer)):
                return float(x)
            return x

        return {
            "assumption": self.assumption,
            "points": plain(self.points),
            "values": plain(self.values),
            "verdict": self.verdict,
            "tolerances": plain(self.tolerances),
            "notes": self.notes,
        }


def integrated_tail(law, u: float) -> float:
    """min(1, integral of survival over [u, inf)).

    Nonintegrable tails (infinite mean) are clipped at 1 with a warning; the
    unclipped integral is available from quadrature.survival_tail_integral.
    """
    if u < 0:
        raise ValueError("u must be >= 0")
    if not law.mean_is_finite():
        warnings.warn("survival tail is not integrable; integrated tail clipped at 1")
        return 1.0
    return min(1.0, survival_tail_integral(law, u))


class IntegratedTail:
    """Clipped integrated tail with a log-spaced cumulative cache.

    Evaluations inside the cached range complete the nearest knot with a
    short fixed-order panel, matching direct quadrature to ~1e-12 relative;
    points beyond the range fall back to direct quadrature.
    """

    def __init__(self, law, hi: float | None = None, n_knots: int = 160):
        if not law.mean_is_finite():
            raise ValueError("integrated tail cache needs an integrable survival tail")
        if hi is None:
            hi = float(law.isf(1e-14))
        self.law = law
        self.table = TailIntegralTable(law, 0.0, hi, n_knots=n_knots)

    def __call__(self, u):
        return np.minimum(1.0, self.table(u))


def _atom(law) -> tuple[float, float]:
    return float(getattr(law, "atom_mass", 0.0)), float(getattr(law, "atom_at", 0.0))


def conv_tail_ratio(law, x: float) -> float:
    """Two-fold convolution tail over the plain tail at x.

    Computed against the closed-form density in a survival-rescaled form,
    split symmetrically at x/2 so neither factor is evaluated where it
    underflows.  Returns nan when the survival at x is below the underflow
    floor (1e-280); that point is reported inconclusive by the A1 check.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    ls_x = float(law.log_survival(x))
    if ls_x < _LOG_FLOOR:
        return float("nan")
    p0, a0 = _atom(law)
    left = float(law.support_left)
    half = x / 2.0

    def near(y):
        # mass where the second variable is moderate: survival ratio blows up
        # to at most survival(x/2)/survival(x), which is finite pre-floor
        return np.exp(law.log_survival(x - y) - ls_x) * law.density(y)

    def far(z):
        # substituted mirror half: density deep in the tail, tame survival
        return law.survival(z) * np.exp(law.log_density(x - z) - ls_x)

    kw = dict(epsabs=0.0, epsrel=1e-8, limit=200)
    i1 = 0.0
    if half > left:
        pts = None
        i1, _ = integrate.quad(near, left, half, points=pts, **kw)
    pts = [left] if 0.0 < left < half else None
    i2, _ = integrate.quad(far, 0.0, half, points=pts, **kw)
    atom_term = 0.0
    if p0 > 0.0:
        atom_term = p0 * float(np.exp(law.log_survival(x - a0) - ls_x))
    return 1.0 + atom_term + i1 + i2


def a2_ratio(law, gamma: float, u: float) -> float:
    """integrated_tail(gamma*u) / integrated_tail(u).

    nan when the denominator is below the underflow floor.
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    if u <= 0:
        raise ValueError("u must be positive")
    denom = integrated_tail(law, u)
    if denom < UNDERFLOW_FLOOR:
        return float("nan")
    return integrated_tail(law, gamma * u) / denom


def _trend_nonincreasing(values: np.ndarray, slack: float = TREND_SLACK) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] <= v[:-1] * slack + 1e-12))


def check_a1(law, grid=None) -> DiagnosticReport:
    """Convolution-ratio trend check for a subexponential tail.

    Consistent iff the ratio at the largest feasible grid point lies within
    A1_LAST_POINT_TOL of 2 and the distance to 2 is nonincreasing over the
    top half of the feasible points.  Fewer than two feasible points gives
    an inconclusive verdict.
    """
    pts = np.asarray(DEFAULT_A1_GRID if grid is None else grid, dtype=float)
    if not np.all(np.diff(pts) > 0):
        raise ValueError("grid must be increasing")
    ratios = np.array([conv_tail_ratio(law, float(x)) for x in pts])
    feasible = np.isfinite(ratios)
    tol = {"last_point": A1_LAST_POINT_TOL, "trend_slack": TREND_SLACK,
           "underflow_floor": UNDERFLOW_FLOOR}
    notes = ""
    if feasible.sum() < 2:
        verdict = "inconclusive"
        notes = "fewer than two grid points above the underflow floor"
    else:
        r = ratios[feasible]
        dist = np.abs(r - 2.0)
        top = dist[len(dist) // 2:]
        last_ok = dist[-1] <= A1_LAST_POINT_TOL
        trend_ok = _trend_nonincreasing(top)
        verdict = "consistent" if (last_ok and trend_ok) else "inconsistent"
        if feasible.sum() < len(pts):
            notes = "tail underflow truncated the grid; verdict uses feasible points"
    return DiagnosticReport(
        assumption="A1",
        points=list(map(float, pts)),
        values=[None if not np.isfinite(v) else float(v) for v in ratios],
        verdict=verdict,
        tolerances=tol,
        notes=notes,
    )


def check_a2(law, gammas=None, grid=None) -> DiagnosticReport:
    """Integrated-tail decay check across scale factors.

    For every gamma the ratio sequence over the u grid must decrease and end
    below A2_LIMIT_TOL.  A constant positive limit (the regularly varying
    signature) fails both conditions.
    """
    gam = tuple(DEFAULT_GAMMAS if gammas is None else gammas)
    pts = np.asarray(DEFAULT_A2_GRID if grid is None else grid, dtype=float)
    if any(g <= 1.0 for g in gam):
        raise ValueError("all gammas must exceed 1")
    values = {}
    per_gamma_ok = []
    any_feasible = False
    for g in gam:
        ratios = np.array([a2_ratio(law, g, float(u)) for u in pts])
        values[g] = [None if not np.isfinite(v) else float(v) for v in ratios]
        feas = ratios[np.isfinite(ratios)]
        if len(feas) < 2:
            per_gamma_ok.append(None)
            continue
        any_feasible = True
        decreasing = bool(np.all(feas[1:] < feas[:-1] * (1.0 - 1e-3)))
        small = bool(feas[-1] < A2_LIMIT_TOL)
        per_gamma_ok.append(decreasing and small)
    tol = {"limit": A2_LIMIT_TOL, "underflow_floor": UNDERFLOW_FLOOR}
    if not any_feasible:
        verdict = "inconclusive"
    elif all(ok for ok in per_gamma_ok if ok is not None):
        verdict = "consistent"
    else:
        verdict = "inconsistent"
    return DiagnosticReport(
        assumption="A2",
        points=list(map(float, pts)),
        values=values,
        verdict=verdict,
        tolerances=tol,
    )
