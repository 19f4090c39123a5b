"""L1 cone geometry: diamond caps, swelling, membership, jump thresholds.

All norms are L1 and the unit sphere is the diamond {x : sum|x_k| = 1}.
Angular sets are finite unions of diamond caps (L1 metric balls intersected
with the diamond), optionally constrained to the strictly positive part.
Truncated cones are {x : ||x|| > u, x/||x|| in Theta}; all membership
inequalities are strict, so boundary points are excluded.

The jump-threshold algebra lives here: for a walk position confined to a ball
around -n*c, any jump longer than `jump_threshold` in an admissible direction
lands inside the swollen truncated cone.  `sample_jump_batch` and
`check_jump_batch` form the randomized harness that validates that guarantee
together with the two inequality chains behind it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .streams import ORACLE, derive_rng

__all__ = [
    "l1_norm",
    "l1_norm_rows",
    "normalize",
    "DiamondCap",
    "AngularSet",
    "swell",
    "angular_contains",
    "cone_contains",
    "cone_contains_rows",
    "min_component_lower_bound",
    "jump_threshold",
    "jump_hits_cone",
    "admissibility_report",
    "set_distance",
    "sample_l1_ball",
    "sample_cap_directions",
    "sample_jump_batch",
    "check_jump_batch",
]

_DIAMOND_TOL = 1e-12


def l1_norm(x) -> float:
    """L1 norm of a single vector."""
    return float(np.abs(np.asarray(x, dtype=float)).sum())


def l1_norm_rows(X: np.ndarray) -> np.ndarray:
    """Row-wise L1 norms of an (m, d) array."""
    return np.abs(X).sum(axis=-1)


def normalize(x) -> np.ndarray:
    """Project a nonzero vector onto the unit diamond."""
    x = np.asarray(x, dtype=float)
    n = np.abs(x).sum()
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return x / n


@dataclass(frozen=True, eq=False)
class DiamondCap:
    """L1 ball around a diamond point, intersected with the diamond.

    Args:
        center: unit-L1-norm direction.
        radius: cap radius in the L1 metric, >= 0.  Membership is strict, so
            a radius-0 cap has no members; it is still usable as a point-mass
            sampling atom.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", c)
        if c.ndim != 1 or c.shape[0] < 2:
            raise ValueError("cap center must be a vector of dimension >= 2")
        if abs(np.abs(c).sum() - 1.0) > _DIAMOND_TOL:
            raise ValueError("cap center must lie on the unit diamond")
        if not np.isfinite(self.radius) or self.radius < 0:
            raise ValueError("cap radius must be finite and >= 0")

    @property
    def d(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True, eq=False)
class AngularSet:
    """Union of diamond caps, optionally within the strictly positive part.

    When `require_positive` is set, membership additionally demands every
    component strictly positive.
    """

    caps: tuple
    require_positive: bool = True

    def __post_init__(self):
        caps = tuple(self.caps)
        object.__setattr__(self, "caps", caps)
        if not caps:
            raise ValueError("angular set needs at least one cap")
        d = caps[0].d
        if any(c.d != d for c in caps):
            raise ValueError("all caps must share the same dimension")

    @property
    def d(self) -> int:
        return self.caps[0].d

    def centers(self) -> np.ndarray:
        return np.stack([c.center for c in self.caps])

    def radii(self) -> np.ndarray:
        return np.array([c.radius for c in self.caps])

    def contains_rows(self, Y: np.ndarray) -> np.ndarray:
        """Vectorized membership for directions Y of shape (m, d)."""
        Y = np.asarray(Y, dtype=float)
        hit = np.zeros(Y.shape[0], dtype=bool)
        for cap in self.caps:
            hit |= np.abs(Y - cap.center).sum(axis=1) < cap.radius
        if self.require_positive:
            hit &= (Y > 0.0).all(axis=1)
        return hit


def swell(aset: AngularSet, delta: float) -> AngularSet:
    """Enlarge every cap radius by delta (the delta-swelling)."""
    if delta < 0:
        raise ValueError("swelling amount must be >= 0")
    return AngularSet(
        caps=tuple(DiamondCap(c.center, c.radius + delta) for c in aset.caps),
        require_positive=aset.require_positive,
    )


def angular_contains(aset: AngularSet, y) -> bool:
    """Strict membership of a direction in the angular set."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    return bool(aset.contains_rows(y)[0])


def cone_contains(aset_swollen: AngularSet, u: float, x) -> bool:
    """Membership of x in the truncated cone at threshold u.

    The set passed in is used as-is; swell it first if a swollen cone is
    intended.
    """
    x = np.asarray(x, dtype=float)
    n = np.abs(x).sum()
    if not (n > u):
        return False
    return angular_contains(aset_swollen, x / n)


def cone_contains_rows(aset_swollen: AngularSet, u: float, X: np.ndarray) -> np.ndarray:
    """Vectorized `cone_contains` over rows of X."""
    X = np.asarray(X, dtype=float)
    n = l1_norm_rows(X)
    inside = n > u
    out = np.zeros(X.shape[0], dtype=bool)
    if inside.any():
        dirs = X[inside] / n[inside, None]
        out[inside] = aset_swollen.contains_rows(dirs)
    return out


def min_component_lower_bound(aset: AngularSet) -> float:
    """Lower bound on the minimum component over all members of the set.

    Every member y of cap (c, r) satisfies y_k > c_k - r, so the bound is
    min over caps of (min_k center_k - radius).  Negative values signal the
    set may leave the positive part.
    """
    return float(min(c.center.min() - c.radius for c in aset.caps))


def jump_threshold(u: float, n: int, c, eps: float, delta: float, K: float = 0.0,
                   d: int | None = None) -> float:
    """Minimal jump length guaranteeing a cone hit from the drift ball.

    For a position x with ||x + n*c|| < K + n*eps and a jump direction y with
    all components above delta/(4+delta), any length t > jump_threshold lands
    x + t*y in the truncated swollen cone at threshold u.

    Args:
        u: cone threshold, > 0.
        n: step index, >= 0.
        c: positive drift vector (componentwise > 0).
        eps: ball growth rate per step, > 0.
        delta: swelling amount, > 0.
        K: additive ball radius offset, >= 0.
        d: dimension; defaults to len(c) and must agree with it.
    """
    c = np.asarray(c, dtype=float)
    if u <= 0 or eps <= 0 or delta <= 0 or K < 0 or n < 0:
        raise ValueError("jump_threshold domain: u, eps, delta > 0; n, K >= 0")
    if (c <= 0).any():
        raise ValueError("drift vector must be componentwise positive")
    if d is None:
        d = c.shape[0]
    elif d != c.shape[0]:
        raise ValueError("dimension does not match the drift vector")
    m = n * float(c.sum()) + n * d * eps + d * K
    return max(u + m, (4.0 + delta) / delta * m)


def jump_hits_cone(x, y, t: float, u: float, aset_swollen: AngularSet) -> bool:
    """Whether the jump x + t*y lands in the truncated swollen cone."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return cone_contains(aset_swollen, u, x + t * y)


def admissibility_report(theta: AngularSet, delta: float) -> dict:
    """Record whether the min-component condition holds after swelling.

    Two variants are checked: the half-swelling (what the jump-threshold
    guarantee needs) and the full-swelling (the stronger form used as the
    validation gate).  Both flags are recorded.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    threshold = delta / (4.0 + delta)
    bound_half = min_component_lower_bound(swell(theta, delta / 2.0))
    bound_full = min_component_lower_bound(swell(theta, delta))
    return {
        "delta": delta,
        "component_threshold": threshold,
        "min_component_half_swell": bound_half,
        "min_component_full_swell": bound_full,
        "admissible_half": bound_half > threshold,
        "admissible_full": bound_full > threshold,
    }


# ---------------------------------------------------------------------------
# distance between truncated cones


def _cap_point(center: np.ndarray, radius: float, p: np.ndarray) -> np.ndarray:
    # sum-zero tangent perturbation keeps the point on the diamond hyperplane
    t = p - p.mean()
    nrm = np.abs(t).sum()
    if nrm > radius:
        if nrm == 0.0:
            return center.copy()
        t = t * (radius / nrm)
    return center + t


def set_distance(a: AngularSet, b: AngularSet, n_starts: int = 24) -> float:
    """Distance between the truncated cones of two angular sets at u = 1.

    Numerical estimate of inf ||r_a y_a - r_b y_b|| over y_a in A, y_b in B,
    r_a, r_b >= 1, by multistart derivative-free minimization over cap pairs
    (documented tolerance ~1e-6; exact only for positive-part sets in low
    dimension).  Returns 0 when the sets overlap.
    """
    if a.d != b.d:
        raise ValueError("sets must share a dimension")
    # overlap shortcut, exact for caps inside the positive part: the simplex
    # segment between two centers realizes the L1 distance
    if a.require_positive and b.require_positive:
        if min_component_lower_bound(a) > 0 and min_component_lower_bound(b) > 0:
            for ca in a.caps:
                for cb in b.caps:
                    if np.abs(ca.center - cb.center).sum() < ca.radius + cb.radius:
                        return 0.0
    d = a.d
    rng = derive_rng(0, ORACLE, 11)
    best = np.inf

    def objective(z, ca, ra, cb, rb):
        ya = _cap_point(ca, ra, z[:d])
        yb = _cap_point(cb, rb, z[d : 2 * d])
        pen = 0.0
        if a.require_positive:
            pen += np.square(np.minimum(ya, 0.0)).sum()
        if b.require_positive:
            pen += np.square(np.minimum(yb, 0.0)).sum()
        sa = 1.0 + z[2 * d] ** 2
        sb = 1.0 + z[2 * d + 1] ** 2
        return np.abs(sa * ya - sb * yb).sum() + 1e4 * pen

    for capa in a.caps:
        for capb in b.caps:
            args = (capa.center, capa.radius, capb.center, capb.radius)
            for _ in range(n_starts):
                z0 = np.concatenate([
                    rng.normal(0.0, max(capa.radius, 0.05), d),
                    rng.normal(0.0, max(capb.radius, 0.05), d),
                    rng.uniform(0.0, 0.7, 2),
                ])
                res = optimize.minimize(
                    objective, z0, args=args, method="Nelder-Mead",
                    options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
                )
                if res.fun < best:
                    best = res.fun
                    best_z, best_args = res.x, args
    if np.isfinite(best):
        res = optimize.minimize(
            objective, best_z, args=best_args, method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 8000},
        )
        best = min(best, res.fun)
    if best < 1e-9:
        return 0.0
    return float(best)


# ---------------------------------------------------------------------------
# sampling primitives


def sample_l1_ball(rng: np.random.Generator, radius: float, d: int, size: int) -> np.ndarray:
    """Uniform draws from the open L1 ball of given radius around 0.

    Rejection from the bounding cube; acceptance 1/d! so intended for d <= 3.
    Radius 0 returns zeros.
    """
    out = np.zeros((size, d))
    if radius <= 0:
        return out
    need = np.ones(size, dtype=bool)
    while need.any():
        k = int(need.sum())
        cand = rng.uniform(-radius, radius, (k, d))
        ok = np.abs(cand).sum(axis=1) < radius
        idx = np.flatnonzero(need)[ok]
        out[idx] = cand[ok]
        need[idx] = False
    return out


def sample_cap_directions(rng: np.random.Generator, cap: DiamondCap, size: int) -> np.ndarray:
    """Cap center plus uniform L1 perturbation, renormalized to the diamond.

    The renormalization can move a draw slightly outside the nominal cap
    radius; the sampling support is the post-normalization image.  Centers
    must keep all components positive within the cap radius.
    """
    if cap.center.min() - cap.radius <= 0:
        raise ValueError("cap must stay strictly positive for direction sampling")
    raw = cap.center + sample_l1_ball(rng, cap.radius, cap.d, size)
    return raw / raw.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# randomized jump-guarantee harness


@dataclass
class JumpBatch:
    """One vectorized batch of admissible jump instances (single-cap sets)."""

    d: int
    center: np.ndarray
    cap_radius: np.ndarray
    delta: np.ndarray
    c: np.ndarray
    eps: np.ndarray
    K: np.ndarray
    n: np.ndarray
    u: np.ndarray
    u_n: np.ndarray
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray


def _resample_until(rng, size, draw, ok):
    vals = draw(size)
    bad = ~ok(vals)
    guard = 0
    while bad.any():
        k = int(bad.sum())
        fresh = draw(k)
        vals[bad] = fresh
        bad_idx = np.flatnonzero(bad)
        bad[bad_idx] = ~ok(fresh)
        guard += 1
        if guard > 10_000:
            raise RuntimeError("rejection sampling failed to converge")
    return vals


def sample_jump_batch(rng: np.random.Generator, size: int, d: int) -> JumpBatch:
    """Draw admissible random instances of the jump-threshold guarantee.

    Instance law: single random positive cap with margin, delta drawn so the
    half-swollen set clears the delta/(4+delta) component threshold, random
    positive drift c, eps in (0, 0.2], K either 0 or positive, step index
    n in [0, 50], x uniform in the open ball around -n*c of radius n*eps + K,
    y sampled inside the half-swollen cap, t in (u_n, 10*u_n].
    """
    center = _resample_until(
        rng, size,
        lambda k: rng.dirichlet(np.full(d, 5.0), k),
        lambda v: v.min(axis=1) > 0.08,
    )
    cap_radius = rng.uniform(0.01, np.minimum(0.15, center.min(axis=1) - 0.05))
    margin = center.min(axis=1) - cap_radius

    delta = np.empty(size)
    bad = np.ones(size, dtype=bool)
    while bad.any():
        idx = np.flatnonzero(bad)
        cand = rng.uniform(0.02, np.minimum(0.9, 1.5 * margin[idx]))
        admissible = margin[idx] - cand / 2.0 - cand / (4.0 + cand) > 1e-3
        delta[idx[admissible]] = cand[admissible]
        bad[idx[admissible]] = False

    c = rng.uniform(0.2, 2.0, (size, d))
    eps = rng.uniform(1e-3, 0.2, size)
    K = np.where(rng.random(size) < 0.5, 0.0, rng.uniform(0.1, 5.0, size))
    n = rng.integers(0, 51, size).astype(float)
    u = 10.0 ** rng.uniform(0.0, 3.0, size)

    m = n * c.sum(axis=1) + n * d * eps + d * K
    u_n = np.maximum(u + m, (4.0 + delta) / delta * m)

    ball_radius = n * eps + K
    x = -n[:, None] * c + sample_l1_ball(rng, 1.0, d, size) * ball_radius[:, None]
    # rescale rejection draws to each row's radius: sample in unit ball then scale
    # (sample_l1_ball draws radius-1; multiplication keeps uniformity per row)

    half = cap_radius + delta / 2.0
    y = np.empty((size, d))
    bad = np.ones(size, dtype=bool)
    while bad.any():
        idx = np.flatnonzero(bad)
        pert = sample_l1_ball(rng, 1.0, d, idx.size) * (0.97 * half[idx, None])
        raw = center[idx] + pert
        cand = raw / raw.sum(axis=1, keepdims=True)
        ok = (np.abs(cand - center[idx]).sum(axis=1) < half[idx]) & (cand > 0).all(axis=1)
        y[idx[ok]] = cand[ok]
        bad[idx[ok]] = False

    t = u_n * (1.0 + 9.0 * (1.0 - rng.random(size)))
    return JumpBatch(
        d=d, center=center, cap_radius=cap_radius, delta=delta, c=c, eps=eps,
        K=K, n=n, u=u, u_n=u_n, x=x, y=y, t=t,
    )


def check_jump_batch(batch: JumpBatch) -> dict:
    """Evaluate the cone-hit guarantee and its two inequality chains.

    Returns counts of violations; all three should be zero for admissible
    instances.  Tolerances cover only floating-point rounding of exact
    inequalities (1e-9 relative).
    """
    z = batch.x + batch.t[:, None] * batch.y
    nrm = np.abs(z).sum(axis=1)
    dirs = z / nrm[:, None]

    full = batch.cap_radius + batch.delta
    in_cone = (
        (nrm > batch.u)
        & (dirs > 0).all(axis=1)
        & (np.abs(dirs - batch.center).sum(axis=1) < full)
    )

    d = batch.d
    m = batch.n * batch.c.sum(axis=1) + batch.n * d * batch.eps + d * batch.K
    rhs = batch.t - m
    norm_ok = nrm >= rhs - 1e-9 * np.maximum(1.0, np.abs(rhs))

    angle = np.abs(dirs - batch.y).sum(axis=1)
    angle_ok = angle < batch.delta / 2.0 + 1e-12

    return {
        "size": int(batch.t.shape[0]),
        "cone_misses": int((~in_cone).sum()),
        "norm_chain_violations": int((~norm_ok).sum()),
        "angle_chain_violations": int((~angle_ok).sum()),
        "in_cone": in_cone,
        "norm_ok": norm_ok,
        "angle_ok": angle_ok,
    }
