"""Monte Carlo ruin estimators over a blocked, stream-keyed lane engine.

Paths run in fixed blocks of 8192 lanes.  Each block derives its own
counter-based generator from (seed, purpose, block index) and consumes the
same per-step draw channels (radius uniform, branch uniform, cap uniform,
L1-ball perturbation) for every lane on every iteration, dead or alive.
Two consequences the tests rely on:

  * results are bit-identical for any worker count, because a block's
    draws depend only on its index and the reduction runs in block order;
  * runs at different thresholds u under one seed share every increment,
    so hitting events nest pathwise when the stopping rule is pinned.

The big-jump estimator conditions every lane's radii below a split
threshold and integrates out the first exceedance analytically: at each
step the lane banks the exact mass of exceedance outcomes certified to
enter the cone, weighted by the probability the exceedance lands on that
step, while a single sampled shell branch per lane carries the outcomes
the certificate cannot decide.  It is unbiased for the same
truncated-horizon functional as the crude estimator under the same
stopping rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AngularSet,
    admissibility_report,
    cone_contains_rows,
    sample_l1_ball,
    set_distance,
    swell,
)
from .model import IncrementModel
from .quadrature import WeightedTailMassTable
from .streams import PATHS, derive_rng

__all__ = [
    "BLOCK_LANES",
    "StoppingRule",
    "RuinEstimate",
    "TwoConeResult",
    "wilson_interval",
    "ruin_mc_cone",
    "ruin_mc_halfspace",
    "ruin_mc_bigjump",
    "two_cone_mc",
    "step_schedule",
    "step_schedule_alternative",
]

BLOCK_LANES = 8192
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class StoppingRule:
    """Barrier-plus-horizon stopping for the infinite-horizon functional.

    Default behaviour: a lane stops once its coordinate sum falls below
    -rho*u after the drift time u/min_k(c_k), or at the horizon
    n_max = 4 * ceil(u / min_k(c_k)).  Setting `barrier` overrides rho*u
    with an absolute level and drops the drift-time gate, making the
    stopping behaviour independent of u; that is the hook for exact
    common-random-number nesting across thresholds.
    """

    rho: float = 1.5
    n_max: int | None = None
    barrier: float | None = None

    def __post_init__(self):
        if self.rho < 1.0:
            raise ValueError("rho must be >= 1")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.barrier is not None and self.barrier <= 0:
            raise ValueError("barrier must be positive")

    def resolve(self, u: float, drift) -> tuple[int, float, int]:
        """(n_max, barrier level, barrier gate step) for threshold u."""
        drift = np.asarray(drift, dtype=float)
        min_c = float(drift.min())
        drift_steps = math.ceil(u / min_c) if min_c > 0 else None
        if self.n_max is not None:
            n_max = self.n_max
        elif drift_steps is not None:
            n_max = 4 * drift_steps
        else:
            raise ValueError("drift has a nonpositive component; provide n_max")
        if self.barrier is not None:
            return n_max, float(self.barrier), 0
        if drift_steps is None:
            raise ValueError("drift has a nonpositive component; provide barrier")
        return n_max, self.rho * float(u), drift_steps


@dataclass
class RuinEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    n_paths: int
    n_hits: int
    truncated_paths: int
    mean_hit_time: float
    method: str
    below_resolution: bool = False
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n_paths": self.n_paths,
            "n_hits": self.n_hits,
            "truncated_paths": self.truncated_paths,
            "mean_hit_time": self.mean_hit_time,
            "method": self.method,
            "below_resolution": self.below_resolution,
        }
        extras = {k: v for k, v in self.extras.items()
                  if not isinstance(v, np.ndarray)}
        if extras:
            out["extras"] = extras
        return out


@dataclass
class TwoConeResult:
    p_a: RuinEstimate
    p_b: RuinEstimate
    p_both: RuinEstimate
    p_union: RuinEstimate
    extras: dict = field(default_factory=dict)


def wilson_interval(hits: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """95% score interval; well behaved at zero and full counts."""
    if n <= 0:
        return 0.0, 1.0
    p = hits / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    # the score bound is exactly 0 (resp. 1) at empty (resp. full) counts;
    # keep it free of roundoff residue
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == n else min(1.0, center + half)
    return lo, hi


# ---------------------------------------------------------------------------
# block workers


def _angular_arrays(model: IncrementModel):
    ang = model.angular
    core = ang.core
    return (core.centers(), core.radii(), np.cumsum(ang.cap_masses),
            ang.off_direction)


def _directions_from_uniforms(centers, radii, cum, off, weight, r, v, capu, pert):
    """Branch/cap/perturbation logic shared by every worker.

    Returns (directions, core branch mask, sampled core direction per lane,
    cap index).  The core direction is materialized for every lane, branch
    taken or not, so the big-jump certificate can integrate over it.
    """
    w = weight(r)
    branch = v < w
    idx = np.minimum(np.searchsorted(cum, capu, side="right"), len(cum) - 1)
    raw = centers[idx] + radii[idx, None] * pert
    core_dirs = raw / np.abs(raw).sum(axis=1, keepdims=True)
    dirs = np.where(branch[:, None], core_dirs, off[None, :])
    return dirs, branch, core_dirs, idx


def _crude_block(model, target, u, n_max, barrier, gate, seed, block_idx,
                 lanes, primary):
    """One block of plain pathwise simulation.

    primary selects which hit stops a lane ("cone" or "half"); the halfspace
    flag is tracked in both modes.
    """
    rng = derive_rng(seed, PATHS, block_idx)
    law = model.radial
    weight = model.angular.weight
    centers, radii, cum, off = _angular_arrays(model)
    d = model.dim
    pos = np.zeros((lanes, d))
    alive = np.ones(lanes, dtype=bool)
    cone_hit = np.zeros(lanes, dtype=bool)
    half_hit = np.zeros(lanes, dtype=bool)
    hit_time = np.full(lanes, -1, dtype=np.int64)
    trunc = np.zeros(lanes, dtype=bool)
    for n in range(1, n_max + 1):
        if not alive.any():
            break
        u_r = np.maximum(rng.random(lanes), 1e-300)
        v = rng.random(lanes)
        capu = rng.random(lanes)
        pert = sample_l1_ball(rng, 1.0, d, lanes)
        r = law.isf(1.0 - u_r)
        dirs, _, _, _ = _directions_from_uniforms(
            centers, radii, cum, off, weight, r, v, capu, pert)
        pos += (r[:, None] * dirs) * alive[:, None]
        ssum = pos.sum(axis=1)
        new_half = alive & ~half_hit & (ssum > u)
        half_hit |= new_half
        if target is not None:
            cand = alive & ~cone_hit
            new_cone = np.zeros(lanes, dtype=bool)
            if cand.any():
                new_cone[cand] = cone_contains_rows(target, u, pos[cand])
            cone_hit |= new_cone
        if primary == "cone":
            newly = cone_hit & alive & (hit_time < 0)
        else:
            newly = half_hit & alive & (hit_time < 0)
        hit_time[newly] = n
        alive &= ~newly
        stop = alive & (ssum < -barrier) & (n >= gate)
        trunc |= stop
        alive &= ~stop
    trunc |= alive
    return {
        "cone": cone_hit,
        "half": half_hit,
        "time": hit_time,
        "truncated": int(trunc.sum()),
    }


def _certified_entry_radius(x, y, c, rho, u, floor):
    """Per-lane radius above which x + r*y is certain to lie in the cone cap.

    For r past the positivity threshold every component of x + r*y is
    positive, the L1 norm equals sig + r with sig = sum(x), and cap
    membership reads g(r) = sum_k |a_k + b_k r| - rho*(sig + r) <= 0 with
    a = x - sig*c and b = y - c.  g is convex piecewise linear; a ray
    certificate exists precisely when its slope at infinity, |b|_1 - rho,
    is negative, in which case g decreases strictly on the whole line and
    the ray endpoint is the unique crossing, solved exactly segment by
    segment.  Lanes without a ray return inf.  Soundness is load bearing
    here: the caller books the mass above the returned radius as a certain
    hit with no sampled correction, so a bounded dip of g below zero must
    never be mistaken for a ray.
    """
    m, d = x.shape
    sig = x.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tp = np.where(x < 0, -x / y, 0.0)
    t_pos = tp.max(axis=1)
    lo = np.maximum.reduce([
        np.full(m, float(floor)),
        t_pos * (1.0 + 1e-12) + 1e-12,
        u - sig,
        np.full(m, 1e-9),
    ])
    a = x - sig[:, None] * c
    b = y - c
    ok = (np.abs(b).sum(axis=1) < rho) & (y > 0).all(axis=1)
    slope_inf = np.abs(b).sum(axis=1) - rho
    # anchors: lo plus every kink above it; segments between consecutive
    # anchors are linear, and kinks below lo are irrelevant on [lo, inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = np.where(b != 0.0, -a / b, -np.inf)
    bp = np.where(bp > lo[:, None], bp, np.inf)
    bp.sort(axis=1)
    pts = np.concatenate([lo[:, None], bp], axis=1)
    finite = np.isfinite(pts)
    g = np.full(pts.shape, np.inf)
    for jcol in range(d + 1):
        col = pts[:, jcol]
        rows = np.flatnonzero(finite[:, jcol] & ok)
        if rows.size:
            z = a[rows] + col[rows, None] * b[rows]
            g[rows, jcol] = (np.abs(z).sum(axis=1)
                             - rho[rows] * (sig[rows] + col[rows]))
    neg = g <= 0.0
    has = neg.any(axis=1)
    first = np.argmax(neg, axis=1)
    root = np.full(m, np.inf)
    rows = np.flatnonzero(ok & has)
    if rows.size:
        j = first[rows]
        at_lo = j == 0
        r0 = rows[at_lo]
        root[r0] = lo[r0]
        r1 = rows[~at_lo]
        if r1.size:
            j1 = j[~at_lo]
            p0 = pts[r1, j1 - 1]
            p1 = pts[r1, j1]
            g0 = g[r1, j1 - 1]
            g1 = g[r1, j1]
            root[r1] = p0 + (p1 - p0) * g0 / (g0 - g1)
    rows = np.flatnonzero(ok & ~has)
    if rows.size:
        jlast = finite[rows].sum(axis=1) - 1
        pl = pts[rows, jlast]
        gl = g[rows, jlast]
        root[rows] = pl - gl / slope_inf[rows]
    # conservative slack keeps the guarantee strict under roundoff
    return np.where(np.isfinite(root), root * (1.0 + 1e-9) + 1e-9, np.inf)


def _bigjump_block(model, target, u, split, exceed_prob, n_max, barrier, gate,
                   seed, block_idx, lanes, mass_table, depth):
    """One block of the nested conditioned-backbone split estimator.

    Level 0 is a walker whose radii are conditioned below the split,
    standing in for every path whose first exceedance is still pending.
    Per step an active conditioned walker banks the analytic mass of
    exceedance outcomes certain to enter the cone, weighted by the
    probability the exceedance lands exactly there; a hit of the walker
    itself is banked with the probability the exceedance is still pending.
    At a geometric step matching the exceedance law it launches one child
    walker carrying the non-certified outcomes with weight one.  Children
    up to `depth` levels deep are conditioned walkers of the same kind;
    the last child runs unconditioned.  Each level's three channels
    partition its continuation exactly, so by induction the total score is
    unbiased for the crude stopped functional.  The analytic channel is
    legitimate only because the entry radius is sound.  Nesting matters
    for variance: hits caused by a second exceedance inside a child are a
    fixed fraction of the mass, and only deeper certificates remove them.
    """
    rng = derive_rng(seed, PATHS, block_idx)
    law = model.radial
    weight = model.angular.weight
    centers, radii, cum, off = _angular_arrays(model)
    tcenters = target.centers()
    trho = target.radii()
    # certify each sampled model cap against its nearest target cap; a far
    # pairing has an empty ray, so the pairing only affects variance while
    # the sampled children keep the estimator exact
    cap_map = np.array([int(np.abs(tcenters - c).sum(axis=1).argmin())
                        for c in centers])
    d = model.dim
    q = exceed_prob
    fq = 1.0 - q
    L = depth
    nst = rng.geometric(q, size=(L, lanes))
    pos = np.zeros((L + 1, lanes, d))
    act = np.zeros((L + 1, lanes), dtype=bool)
    act[0] = True
    age = np.zeros((L, lanes), dtype=np.int64)
    wg = np.ones((L, lanes))
    xi = np.zeros(lanes)
    any_hit = np.zeros(lanes, dtype=bool)
    hit_time = np.full(lanes, -1, dtype=np.int64)
    trunc = np.zeros(lanes, dtype=bool)
    cert_mass = 0.0
    launches = 0
    weighted_hits = 0
    unit_hits = 0

    def _mark(rows, step):
        any_hit[rows] = True
        hit_time[rows] = np.where(hit_time[rows] < 0, step, hit_time[rows])

    for n in range(1, n_max + 1):
        if not act.any():
            break
        moving = act.copy()
        u_r = np.maximum(rng.random(lanes), 1e-300)
        v = rng.random(lanes)
        capu = rng.random(lanes)
        pert = sample_l1_ball(rng, 1.0, d, lanes)
        idx = np.minimum(np.searchsorted(cum, capu, side="right"), len(cum) - 1)
        raw = centers[idx] + radii[idx, None] * pert
        core_dirs = raw / np.abs(raw).sum(axis=1, keepdims=True)
        for l in range(L):
            rows = np.flatnonzero(moving[l])
            if rows.size == 0:
                continue
            age[l, rows] += 1
            # analytic channel, evaluated before the move: certificate for
            # a hypothetical exceedance launched from the current state
            tidx = cap_map[idx[rows]]
            tstar = _certified_entry_radius(
                pos[l, rows], core_dirs[rows], tcenters[tidx],
                trho[tidx], u, split)
            add = wg[l, rows] * mass_table(tstar)
            xi[rows] += add
            cert_mass += float(add.sum())
            born = age[l, rows] == nst[l, rows]
            lau = rows[born]
            if lau.size:
                launches += lau.size
                r_star = law.isf(u_r[lau] * q)
                br = v[lau] < weight(r_star)
                go = ~(br & (r_star > tstar[born]))
                g_ = lau[go]
                if g_.size:
                    dirs_c = np.where(br[go, None], core_dirs[g_],
                                      off[None, :])
                    child = pos[l, g_] + r_star[go, None] * dirs_c
                    pos[l + 1, g_] = child
                    entered = cone_contains_rows(target, u, child)
                    ent = g_[entered]
                    if ent.size:
                        xi[ent] += 1.0
                        unit_hits += ent.size
                        _mark(ent, n)
                    rest = g_[~entered]
                    stop = (child[~entered].sum(axis=1) < -barrier) & (n >= gate)
                    trunc[rest[stop]] = True
                    act[l + 1, rest[~stop]] = True
            r_b = law.isf(1.0 - u_r[rows] * fq)
            br_b = v[rows] < weight(r_b)
            dirs_b = np.where(br_b[:, None], core_dirs[rows], off[None, :])
            pos[l, rows] += r_b[:, None] * dirs_b
            entered = cone_contains_rows(target, u, pos[l, rows])
            ent = rows[entered]
            if ent.size:
                xi[ent] += fq * wg[l, ent]
                weighted_hits += ent.size
                _mark(ent, n)
                act[l, ent] = False
            rest = rows[~entered]
            stop = (pos[l, rest].sum(axis=1) < -barrier) & (n >= gate)
            trunc[rest[stop]] = True
            act[l, rest[stop]] = False
            wg[l, rows] *= fq
            dead = rows[wg[l, rows] == 0.0]
            act[l, dead] = False
        rows = np.flatnonzero(moving[L])
        if rows.size:
            r_c = law.isf(1.0 - u_r[rows])
            br_c = v[rows] < weight(r_c)
            dirs_c = np.where(br_c[:, None], core_dirs[rows], off[None, :])
            pos[L, rows] += r_c[:, None] * dirs_c
            entered = cone_contains_rows(target, u, pos[L, rows])
            ent = rows[entered]
            if ent.size:
                xi[ent] += 1.0
                unit_hits += ent.size
                _mark(ent, n)
                act[L, ent] = False
            rest = rows[~entered]
            stop = (pos[L, rest].sum(axis=1) < -barrier) & (n >= gate)
            trunc[rest[stop]] = True
            act[L, rest[stop]] = False
    trunc |= act.any(axis=0)
    return {
        "xi": xi,
        "hit": any_hit,
        "time": hit_time,
        "truncated": int(trunc.sum()),
        "cert_mass": cert_mass,
        "launches": launches,
        "weighted_hits": weighted_hits,
        "unit_hits": unit_hits,
    }


def _twocone_block(model, target_a, target_b, u, n_max, barrier, gate, seed,
                   block_idx, lanes):
    """One block tracking first hits of two disjoint cones per path."""
    rng = derive_rng(seed, PATHS, block_idx)
    law = model.radial
    weight = model.angular.weight
    centers, radii, cum, off = _angular_arrays(model)
    d = model.dim
    pos = np.zeros((lanes, d))
    alive = np.ones(lanes, dtype=bool)
    hit_a = np.zeros(lanes, dtype=bool)
    hit_b = np.zeros(lanes, dtype=bool)
    time_a = np.full(lanes, -1, dtype=np.int64)
    time_b = np.full(lanes, -1, dtype=np.int64)
    trunc = np.zeros(lanes, dtype=bool)
    for n in range(1, n_max + 1):
        if not alive.any():
            break
        u_r = np.maximum(rng.random(lanes), 1e-300)
        v = rng.random(lanes)
        capu = rng.random(lanes)
        pert = sample_l1_ball(rng, 1.0, d, lanes)
        r = law.isf(1.0 - u_r)
        dirs, _, _, _ = _directions_from_uniforms(
            centers, radii, cum, off, weight, r, v, capu, pert)
        pos += (r[:, None] * dirs) * alive[:, None]
        ssum = pos.sum(axis=1)
        cand = alive & ~hit_a
        if cand.any():
            new = np.zeros(lanes, dtype=bool)
            new[cand] = cone_contains_rows(target_a, u, pos[cand])
            time_a[new] = n
            hit_a |= new
        cand = alive & ~hit_b
        if cand.any():
            new = np.zeros(lanes, dtype=bool)
            new[cand] = cone_contains_rows(target_b, u, pos[cand])
            time_b[new] = n
            hit_b |= new
        alive &= ~(hit_a & hit_b)
        stop = alive & (ssum < -barrier) & (n >= gate)
        trunc |= stop
        alive &= ~stop
    trunc |= alive
    return {
        "hit_a": hit_a,
        "hit_b": hit_b,
        "time_a": time_a,
        "time_b": time_b,
        "truncated_unresolved": int(trunc.sum()),
    }


_WORKERS = {
    "crude": _crude_block,
    "bigjump": _bigjump_block,
    "twocone": _twocone_block,
}


def _run_block(task):
    kind, kwargs = task
    return _WORKERS[kind](**kwargs)


def _map_blocks(kind: str, kwargs: dict, n_paths: int, seed: int, threads: int):
    tasks = []
    start = 0
    idx = 0
    while start < n_paths:
        lanes = min(BLOCK_LANES, n_paths - start)
        tasks.append((kind, dict(kwargs, seed=seed, block_idx=idx, lanes=lanes)))
        idx += 1
        start += lanes
    if threads <= 1:
        return [_run_block(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        # map preserves task order, so the reduction is scheduling-independent
        return list(ex.map(_run_block, tasks, chunksize=1))


def _indicator_estimate(mask, times, truncated, n_paths, method, extras) -> RuinEstimate:
    hits = int(mask.sum())
    est = hits / n_paths
    lo, hi = wilson_interval(hits, n_paths)
    mht = float(times[mask].mean()) if hits else float("nan")
    return RuinEstimate(
        estimate=est, ci_low=lo, ci_high=hi, n_paths=n_paths, n_hits=hits,
        truncated_paths=truncated, mean_hit_time=mht, method=method,
        below_resolution=(hits == 0), extras=extras)


def _validate_common(u, n_paths, delta=None):
    if u <= 0:
        raise ValueError("u must be positive")
    if n_paths < 1:
        raise ValueError("need at least one path")
    if delta is not None and delta <= 0:
        raise ValueError("delta must be positive")


def ruin_mc_cone(model: IncrementModel, theta: AngularSet, delta: float,
                 u: float, n_paths: int, rule: StoppingRule | None = None,
                 seed: int = 0, *, threads: int = 1,
                 collect_paths: bool = False) -> RuinEstimate:
    """Crude estimate of the probability the walk ever enters the swollen cone."""
    _validate_common(u, n_paths, delta)
    rule = rule or StoppingRule()
    target = swell(theta, delta)
    adm = admissibility_report(theta, delta)
    n_max, barrier, gate = rule.resolve(u, model.drift)
    results = _map_blocks("crude", dict(
        model=model, target=target, u=float(u), n_max=n_max, barrier=barrier,
        gate=gate, primary="cone"), n_paths, seed, threads)
    cone = np.concatenate([r["cone"] for r in results])
    half = np.concatenate([r["half"] for r in results])
    times = np.concatenate([r["time"] for r in results])
    truncated = sum(r["truncated"] for r in results)
    extras = {
        "admissibility": adm,
        "halfspace_hits": int(half.sum()),
        "inclusion_violations": int((cone & ~half).sum()),
        "stopping": {"n_max": n_max, "barrier": barrier, "gate": gate},
    }
    if collect_paths:
        extras["cone_mask"] = cone
        extras["half_mask"] = half
        extras["hit_times"] = times
    return _indicator_estimate(cone, times, truncated, n_paths, "crude_cone", extras)


def ruin_mc_halfspace(model: IncrementModel, u: float, n_paths: int,
                      rule: StoppingRule | None = None, seed: int = 0, *,
                      threads: int = 1,
                      collect_paths: bool = False) -> RuinEstimate:
    """Crude estimate for the halfspace hitting event (coordinate sum above u)."""
    _validate_common(u, n_paths)
    rule = rule or StoppingRule()
    n_max, barrier, gate = rule.resolve(u, model.drift)
    results = _map_blocks("crude", dict(
        model=model, target=None, u=float(u), n_max=n_max, barrier=barrier,
        gate=gate, primary="half"), n_paths, seed, threads)
    half = np.concatenate([r["half"] for r in results])
    times = np.concatenate([r["time"] for r in results])
    truncated = sum(r["truncated"] for r in results)
    extras = {"stopping": {"n_max": n_max, "barrier": barrier, "gate": gate}}
    if collect_paths:
        extras["half_mask"] = half
        extras["hit_times"] = times
    return _indicator_estimate(half, times, truncated, n_paths,
                               "crude_halfspace", extras)


def ruin_mc_bigjump(model: IncrementModel, theta: AngularSet, delta: float,
                    u: float, n_paths: int, rule: StoppingRule | None = None,
                    seed: int = 0, split_threshold: float | None = None, *,
                    depth: int = 2, threads: int = 1) -> RuinEstimate:
    """Nested conditioned-backbone estimator with analytic jump channels.

    Unbiased for the same stopped functional as ruin_mc_cone.  Radii above
    the split threshold are integrated out up to `depth` exceedances deep:
    each conditioned walker banks, per step, the exact certified hitting
    mass of a jump launched there weighted by the exceedance-time law, and
    spawns one sampled child carrying the outcomes the certificate cannot
    decide; the last child runs unconditioned.  Sampling noise then comes
    only from walker wiggle, conditioned multi-step hits, and hits needing
    more than `depth` exceedances, which is far below the raw indicator's
    variance when the target probability is small.
    """
    _validate_common(u, n_paths, delta)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if split_threshold is None:
        split_threshold = u / 4.0
    if not (0.0 < split_threshold < u):
        raise ValueError("split_threshold must lie strictly between 0 and u")
    q = float(model.radial.survival(split_threshold))
    if q <= 0.0:
        raise ValueError("split_threshold is too deep: exceedance probability "
                         "underflows; lower it")
    rule = rule or StoppingRule()
    target = swell(theta, delta)
    n_max, barrier, gate = rule.resolve(u, model.drift)
    mass_table = WeightedTailMassTable(
        model.radial, model.angular.weight, lo=float(split_threshold),
        hi=float(model.radial.isf(1e-250)), n_knots=512, panel_order=24)
    results = _map_blocks("bigjump", dict(
        model=model, target=target, u=float(u), split=float(split_threshold),
        exceed_prob=q, n_max=n_max, barrier=barrier, gate=gate,
        mass_table=mass_table, depth=depth), n_paths, seed, threads)
    xi = np.concatenate([r["xi"] for r in results])
    hit = np.concatenate([r["hit"] for r in results])
    times = np.concatenate([r["time"] for r in results])
    truncated = sum(r["truncated"] for r in results)
    est = float(xi.mean())
    var = float(xi.var(ddof=1)) if n_paths > 1 else 0.0
    half = _Z95 * math.sqrt(var / n_paths)
    hits = int(hit.sum())
    mht = float(times[hit].mean()) if hits else float("nan")
    extras = {
        "split_threshold": float(split_threshold),
        "exceed_prob": q,
        "depth": depth,
        "sample_variance": var,
        "certified_mass_mean": float(sum(r["cert_mass"] for r in results) / n_paths),
        "launched_walkers": int(sum(r["launches"] for r in results)),
        "weighted_hits": int(sum(r["weighted_hits"] for r in results)),
        "unit_hits": int(sum(r["unit_hits"] for r in results)),
        "stopping": {"n_max": n_max, "barrier": barrier, "gate": gate},
    }
    return RuinEstimate(
        estimate=est, ci_low=max(0.0, est - half), ci_high=min(1.0, est + half),
        n_paths=n_paths, n_hits=hits, truncated_paths=truncated,
        mean_hit_time=mht, method="bigjump",
        below_resolution=(est == 0.0), extras=extras)


def two_cone_mc(model: IncrementModel, theta_a: AngularSet,
                theta_b: AngularSet, delta: float, u: float, n_paths: int,
                rule: StoppingRule | None = None, seed: int = 0, *,
                threads: int = 1) -> TwoConeResult:
    """Joint first-hit probabilities for two disjoint swollen cones.

    One pass records, per path, whether each cone is ever entered before
    stopping; the swollen sets must be at positive distance.
    """
    _validate_common(u, n_paths, delta)
    ta = swell(theta_a, delta)
    tb = swell(theta_b, delta)
    dist = set_distance(ta, tb)
    if not dist > 0.0:
        raise ValueError("swollen angular sets overlap; two-cone decomposition "
                         "needs positive separation")
    rule = rule or StoppingRule()
    n_max, barrier, gate = rule.resolve(u, model.drift)
    results = _map_blocks("twocone", dict(
        model=model, target_a=ta, target_b=tb, u=float(u), n_max=n_max,
        barrier=barrier, gate=gate), n_paths, seed, threads)
    hit_a = np.concatenate([r["hit_a"] for r in results])
    hit_b = np.concatenate([r["hit_b"] for r in results])
    time_a = np.concatenate([r["time_a"] for r in results])
    time_b = np.concatenate([r["time_b"] for r in results])
    unresolved = sum(r["truncated_unresolved"] for r in results)
    both = hit_a & hit_b
    union = hit_a | hit_b
    time_both = np.maximum(time_a, time_b)
    time_union = np.where(hit_a & hit_b, np.minimum(time_a, time_b),
                          np.maximum(time_a, time_b))
    stop_extras = {"stopping": {"n_max": n_max, "barrier": barrier, "gate": gate}}
    res = TwoConeResult(
        p_a=_indicator_estimate(hit_a, time_a, unresolved, n_paths,
                                "twocone_a", dict(stop_extras)),
        p_b=_indicator_estimate(hit_b, time_b, unresolved, n_paths,
                                "twocone_b", dict(stop_extras)),
        p_both=_indicator_estimate(both, time_both, unresolved, n_paths,
                                   "twocone_both", dict(stop_extras)),
        p_union=_indicator_estimate(union, time_union, unresolved, n_paths,
                                    "twocone_union", dict(stop_extras)),
        extras={"set_distance": dist, "n_hit_a": int(hit_a.sum()),
                "n_hit_b": int(hit_b.sum()), "n_both": int(both.sum()),
                "n_union": int(union.sum())},
    )
    return res


def step_schedule(law, u: float, eps: float = 0.1,
                  n_max: int | None = None) -> int:
    """Step-count schedule separating short-horizon from long-horizon regimes.

    Weibull shape beta: floor(exp(u^(beta/2 - eps))), requiring the exponent
    beta/2 - eps to be positive.  Lognormal: floor(u^2).  Clamped to n_max
    when given; always at least 1.
    """
    from .radial import LogNormal, Weibull

    if u <= 0:
        raise ValueError("u must be positive")
    if isinstance(law, Weibull):
        expo = law.shape / 2.0 - eps
        if expo <= 0:
            raise ValueError("shape/2 - eps must be positive for the weibull schedule")
        k = math.floor(math.exp(u ** expo))
    elif isinstance(law, LogNormal):
        k = math.floor(u * u)
    else:
        raise ValueError("step schedule defined for weibull and lognormal laws only")
    if n_max is not None:
        k = min(k, n_max)
    return max(int(k), 1)


def step_schedule_alternative(law, u: float, eps: float = 0.1) -> int | None:
    """Alternative exponent grouping exp(u^beta / 2 - eps) for the weibull
    schedule; recorded alongside the primary reading in run manifests."""
    from .radial import Weibull

    if not isinstance(law, Weibull):
        return None
    return max(int(math.floor(math.exp(u ** law.shape / 2.0 - eps))), 1)
