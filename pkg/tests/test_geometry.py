"""Cone geometry: caps, swelling, distances, and the jump-hit guarantee."""
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ruincone.geometry import (
    AngularSet,
    DiamondCap,
    admissibility_report,
    angular_contains,
    check_jump_batch,
    cone_contains,
    cone_contains_rows,
    jump_hits_cone,
    jump_threshold,
    l1_norm,
    min_component_lower_bound,
    normalize,
    sample_cap_directions,
    sample_jump_batch,
    sample_l1_ball,
    set_distance,
    swell,
)
from ruincone.streams import derive_rng


def cap(center, radius):
    return AngularSet(caps=(DiamondCap(center=center, radius=radius),))


# ---------------------------------------------------------------------------
# basic norms and membership


def test_l1_norm_and_normalize():
    assert l1_norm([0.3, -0.7]) == pytest.approx(1.0)
    y = normalize([2.0, 2.0])
    assert np.allclose(y, [0.5, 0.5])
    assert l1_norm(y) == pytest.approx(1.0)


def test_min_component_lower_bound_examples():
    assert min_component_lower_bound(cap((0.5, 0.5), 0.1)) == pytest.approx(0.4)
    assert min_component_lower_bound(cap((0.7, 0.3), 0.15)) == pytest.approx(0.15)
    assert min_component_lower_bound(cap((0.9, 0.1), 0.2)) == pytest.approx(-0.1)


def test_angular_contains_center_and_far_point():
    a = cap((0.5, 0.5), 0.1)
    assert angular_contains(a, [0.5, 0.5])
    assert angular_contains(a, [0.54, 0.46])
    # membership is strict, so the boundary point is out
    assert not angular_contains(a, [0.55, 0.45])
    assert not angular_contains(a, [0.9, 0.1])


def test_cone_contains_requires_norm_and_direction():
    a = cap((0.5, 0.5), 0.1)
    assert cone_contains(a, 10.0, [6.0, 6.0])
    assert not cone_contains(a, 10.0, [4.0, 4.0])      # norm 8 < 10
    assert not cone_contains(a, 10.0, [11.0, 1.0])     # direction outside cap
    rows = np.array([[6.0, 6.0], [4.0, 4.0], [11.0, 1.0]])
    np.testing.assert_array_equal(cone_contains_rows(a, 10.0, rows),
                                  [True, False, False])


@given(s=st.floats(min_value=0.01, max_value=100.0),
       ux=st.floats(min_value=-3.0, max_value=8.0),
       uy=st.floats(min_value=-3.0, max_value=8.0),
       u=st.floats(min_value=0.1, max_value=50.0))
@settings(max_examples=300, deadline=None)
def test_cone_contains_scale_covariance(s, ux, uy, u):
    # membership is invariant under joint scaling of the point and threshold;
    # skip points within rounding distance of either strict boundary
    a = cap((0.6, 0.4), 0.08)
    x = np.array([ux, uy])
    n = l1_norm(x)
    assume(abs(n - u) > 1e-6 * max(1.0, u))
    if n > 0:
        assume(abs(np.abs(x / n - a.caps[0].center).sum() - 0.08) > 1e-6)
    assert cone_contains(a, u, x) == cone_contains(a, s * u, s * x)


@given(delta=st.floats(min_value=0.01, max_value=0.5),
       extra=st.floats(min_value=0.0, max_value=0.3))
@settings(max_examples=200, deadline=None)
def test_swell_monotone(delta, extra):
    a = cap((0.5, 0.5), 0.05)
    s1 = swell(a, delta)
    s2 = swell(a, delta + extra)
    assert s1.caps[0].radius == pytest.approx(0.05 + delta)
    # larger swelling keeps every member of the smaller set
    assert s2.caps[0].radius >= s1.caps[0].radius
    assert min_component_lower_bound(s2) <= min_component_lower_bound(s1)


def test_swell_keeps_members():
    a = cap((0.55, 0.45), 0.05)
    rng = derive_rng(7, 0)
    pts = sample_cap_directions(rng, a.caps[0], 200)
    swollen = swell(a, 0.2)
    for p in pts:
        assert angular_contains(swollen, p)


# ---------------------------------------------------------------------------
# jump threshold


def test_jump_threshold_worked_examples():
    assert jump_threshold(100.0, 2, [0.5, 0.5], eps=0.1, delta=0.5) == pytest.approx(102.4)
    assert jump_threshold(10.0, 1, [1.0, 1.0], eps=0.05, delta=0.2, K=1.0) == pytest.approx(86.1)
    # step zero with no offset needs only the threshold itself
    assert jump_threshold(7.0, 0, [0.5, 0.5], eps=0.3, delta=0.1) == pytest.approx(7.0)


def test_jump_threshold_domain_errors():
    with pytest.raises(ValueError):
        jump_threshold(-1.0, 0, [0.5, 0.5], eps=0.1, delta=0.1)
    with pytest.raises(ValueError):
        jump_threshold(1.0, 0, [0.5, -0.5], eps=0.1, delta=0.1)
    with pytest.raises(ValueError):
        jump_threshold(1.0, 0, [0.5, 0.5], eps=0.1, delta=0.1, d=3)


@given(n=st.integers(min_value=0, max_value=50),
       u=st.floats(min_value=0.5, max_value=1000.0),
       eps=st.floats(min_value=1e-3, max_value=0.2),
       K=st.floats(min_value=0.0, max_value=5.0))
@settings(max_examples=300, deadline=None)
def test_jump_threshold_monotone_in_step(n, u, eps, K):
    c = np.array([0.7, 0.9])
    t0 = jump_threshold(u, n, c, eps=eps, delta=0.3, K=K)
    t1 = jump_threshold(u, n + 1, c, eps=eps, delta=0.3, K=K)
    assert t1 >= t0 >= u


def test_jump_hits_cone_matches_membership():
    a = swell(cap((0.5, 0.5), 0.05), 0.3)
    x = np.array([-2.0, -1.5])
    y = np.array([0.52, 0.48])
    t = 40.0
    assert jump_hits_cone(x, y, t, 10.0, a) == cone_contains(a, 10.0, x + t * y)


def test_jump_guarantee_randomized_smoke():
    # small randomized pass; the full-scale run lives in the acceptance suite
    for d in (2, 3):
        batch = sample_jump_batch(derive_rng(2024, d), 20_000, d)
        res = check_jump_batch(batch)
        assert res["cone_misses"] == 0
        assert res["norm_chain_violations"] == 0
        assert res["angle_chain_violations"] == 0


def test_admissibility_report_reference_instance():
    rep = admissibility_report(cap((0.5, 0.5), 0.05), 0.3)
    assert rep["admissible_full"] and rep["admissible_half"]
    assert rep["component_threshold"] == pytest.approx(0.3 / 4.3)
    assert rep["min_component_full_swell"] == pytest.approx(0.15)
    bad = admissibility_report(cap((0.9, 0.1), 0.05), 0.3)
    assert not bad["admissible_full"]


# ---------------------------------------------------------------------------
# distance between truncated cones


def _grid_distance_2d(ca, ra, cb, rb, n=48, smax=3.0):
    """Brute-force oracle for d=2: caps parametrized by the first coordinate."""
    ta = np.linspace(ca[0] - ra / 2, ca[0] + ra / 2, n)
    tb = np.linspace(cb[0] - rb / 2, cb[0] + rb / 2, n)
    sa = np.linspace(1.0, smax, n)
    sb = np.linspace(1.0, smax, n)
    best = np.inf
    for a in sa:
        za = np.stack([a * ta, a * (1 - ta)], axis=1)          # (n, 2)
        for b in sb:
            zb = np.stack([b * tb, b * (1 - tb)], axis=1)
            diff = np.abs(za[:, None, :] - zb[None, :, :]).sum(axis=2)
            best = min(best, diff.min())
    return float(best)


def test_set_distance_far_caps_analytic():
    a = cap((0.9, 0.1), 0.05)
    b = cap((0.1, 0.9), 0.05)
    d = set_distance(a, b)
    assert d == pytest.approx(1.5, abs=1e-4)
    oracle = _grid_distance_2d(np.array([0.9, 0.1]), 0.05, np.array([0.1, 0.9]), 0.05)
    assert d == pytest.approx(oracle, abs=2e-3)


def test_set_distance_two_cone_swollen():
    a = swell(cap((0.7, 0.3), 0.05), 0.1)
    b = swell(cap((0.3, 0.7), 0.05), 0.1)
    assert set_distance(a, b) == pytest.approx(0.5, abs=1e-4)


def test_set_distance_symmetry_identity_overlap():
    a = cap((0.8, 0.2), 0.05)
    b = cap((0.25, 0.75), 0.1)
    assert set_distance(a, b) == pytest.approx(set_distance(b, a), abs=1e-6)
    assert set_distance(a, a) == 0.0
    # overlapping caps have distance zero
    c1 = cap((0.5, 0.5), 0.2)
    c2 = cap((0.55, 0.45), 0.2)
    assert set_distance(c1, c2) == 0.0


def test_set_distance_shrinks_under_swelling():
    a = cap((0.8, 0.2), 0.02)
    b = cap((0.2, 0.8), 0.02)
    d0 = set_distance(a, b)
    d1 = set_distance(swell(a, 0.1), swell(b, 0.1))
    assert d1 < d0


# ---------------------------------------------------------------------------
# samplers


def test_sample_l1_ball_inside_and_centered():
    rng = derive_rng(3, 1)
    pts = sample_l1_ball(rng, 0.7, 3, 4000)
    assert (np.abs(pts).sum(axis=1) < 0.7).all()
    assert np.abs(pts.mean(axis=0)).max() < 0.03
    assert (sample_l1_ball(rng, 0.0, 3, 5) == 0.0).all()


def test_sample_cap_directions_on_diamond():
    rng = derive_rng(4, 1)
    c = DiamondCap(center=(0.6, 0.4), radius=0.08)
    pts = sample_cap_directions(rng, c, 2000)
    np.testing.assert_allclose(np.abs(pts).sum(axis=1), 1.0, atol=1e-12)
    assert (pts > 0).all()
    # renormalization may push slightly past the nominal radius, never far
    assert np.abs(pts - c.center).sum(axis=1).max() < 0.08 * 1.5


def test_sample_cap_directions_rejects_boundary_cap():
    rng = derive_rng(4, 2)
    with pytest.raises(ValueError):
        sample_cap_directions(rng, DiamondCap(center=(0.9, 0.1), radius=0.2), 10)


def test_cap_validation():
    with pytest.raises(ValueError):
        DiamondCap(center=(0.0, 0.0), radius=0.1)
    with pytest.raises(ValueError):
        DiamondCap(center=(0.7, 0.7), radius=0.1)
    with pytest.raises(ValueError):
        DiamondCap(center=(0.5, 0.5), radius=-0.1)
    with pytest.raises(ValueError):
        AngularSet(caps=())


def test_positive_part_excludes_negative_directions():
    a = AngularSet(caps=(DiamondCap(center=(0.5, -0.5), radius=0.2),),
                   require_positive=True)
    assert not angular_contains(a, [0.5, -0.5])
    relaxed = AngularSet(caps=a.caps, require_positive=False)
    assert angular_contains(relaxed, [0.5, -0.5])
