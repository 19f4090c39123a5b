"""Reference model builders, canonical constants, experiment config parsing.

The reference geometry is a d=2 single cap at (0.5, 0.5) with radius 0.05,
off direction the negative diagonal, swelling delta 0.3.  The weight scale
kappa is chosen per radial family so the mean increment certifiably points
into the negative orthant: heavy laws put substantial mass on large radii
where w(r) is close to 1, so kappa must sit well above the radial mean for
the off branch to win on average.  kappa = 120 for the Weibull(0.5, 1)
radial (second moment 24) and kappa = 8 for the lognormal, Pareto(3, 1) and
exponential references.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .asymptotics import u_grid_for_asym_span
from .geometry import AngularSet, DiamondCap, admissibility_report, set_distance, swell
from .model import AngularMixture, IncrementModel, WeightFn
from .radial import Exponential, LogNormal, Pareto, RadialLaw, Weibull
from .simulate import StoppingRule

__all__ = [
    "REFERENCE_DELTA",
    "TWO_CONE_DELTA",
    "DEFAULT_ASYM_TARGETS",
    "reference_weibull",
    "reference_lognormal",
    "reference_pareto",
    "reference_exponential",
    "two_cone_reference",
    "degenerate_never_core",
    "degenerate_all_core",
    "reference_u_grid",
    "ConfigError",
    "ExperimentConfig",
    "parse_experiment_config",
    "reference_ratio_config",
    "reference_two_cone_config",
]

REFERENCE_DELTA = 0.3
TWO_CONE_DELTA = 0.1
KAPPA_WEIBULL = 120.0
KAPPA_DEFAULT = 8.0
DEFAULT_ASYM_TARGETS = (1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5, 1e-4)
# wide steps so the decay of the joint-hit ratio beats MC noise between
# consecutive points; the deep tail of the sweep records structural zeros
DEFAULT_TWO_CONE_TARGETS = (1e-1, 1e-2, 1e-3, 1e-4)

_CENTER = (0.5, 0.5)
_OFF = (-0.5, -0.5)
_CAP_RADIUS = 0.05


def _single_cap_mixture(weight: WeightFn) -> AngularMixture:
    core = AngularSet(caps=(DiamondCap(np.array(_CENTER), _CAP_RADIUS),))
    return AngularMixture(core=core, cap_masses=(1.0,),
                          off_direction=np.array(_OFF), weight=weight)


@functools.lru_cache(maxsize=None)
def reference_weibull() -> IncrementModel:
    return IncrementModel.build(
        Weibull(0.5, 1.0), _single_cap_mixture(WeightFn("rational", KAPPA_WEIBULL)))


@functools.lru_cache(maxsize=None)
def reference_lognormal() -> IncrementModel:
    return IncrementModel.build(
        LogNormal(0.0, 1.0), _single_cap_mixture(WeightFn("rational", KAPPA_DEFAULT)))


@functools.lru_cache(maxsize=None)
def reference_pareto() -> IncrementModel:
    return IncrementModel.build(
        Pareto(3.0, 1.0), _single_cap_mixture(WeightFn("rational", KAPPA_DEFAULT)))


@functools.lru_cache(maxsize=None)
def reference_exponential() -> IncrementModel:
    return IncrementModel.build(
        Exponential(1.0), _single_cap_mixture(WeightFn("rational", KAPPA_DEFAULT)))


@functools.lru_cache(maxsize=None)
def two_cone_reference() -> tuple[IncrementModel, AngularSet, AngularSet]:
    """Split-core model plus the two target angular sets (A and B)."""
    cap_a = DiamondCap(np.array((0.7, 0.3)), _CAP_RADIUS)
    cap_b = DiamondCap(np.array((0.3, 0.7)), _CAP_RADIUS)
    core = AngularSet(caps=(cap_a, cap_b))
    mix = AngularMixture(core=core, cap_masses=(0.5, 0.5),
                         off_direction=np.array(_OFF),
                         weight=WeightFn("rational", KAPPA_WEIBULL))
    model = IncrementModel.build(Weibull(0.5, 1.0), mix)
    theta_a = AngularSet(caps=(cap_a,))
    theta_b = AngularSet(caps=(cap_b,))
    return model, theta_a, theta_b


def degenerate_never_core(radial: RadialLaw) -> IncrementModel:
    """w = 0 point-mass core: every increment along the off direction."""
    core = AngularSet(caps=(DiamondCap(np.array(_CENTER), 0.0),))
    mix = AngularMixture(core=core, cap_masses=(1.0,),
                         off_direction=np.array(_OFF),
                         weight=WeightFn("const", value=0.0))
    return IncrementModel.build(radial, mix)


def degenerate_all_core(radial: RadialLaw) -> IncrementModel:
    """w = 1 point-mass core: X = R * center exactly.  Mean drift points into
    the positive orthant, so certification is skipped."""
    core = AngularSet(caps=(DiamondCap(np.array(_CENTER), 0.0),))
    mix = AngularMixture(core=core, cap_masses=(1.0,),
                         off_direction=np.array(_OFF),
                         weight=WeightFn("const", value=1.0))
    return IncrementModel.build(radial, mix, certify=False)


def reference_u_grid(model: IncrementModel, targets=DEFAULT_ASYM_TARGETS) -> np.ndarray:
    """Thresholds where the asymptotic formula equals each target level."""
    return u_grid_for_asym_span(model.radial, model.drift, targets)


# ---------------------------------------------------------------------------
# experiment config parsing


class ConfigError(ValueError):
    """Validation failure with a machine-readable location."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")

    def to_dict(self) -> dict:
        return {"error": "config_validation", "field": self.field,
                "message": self.message}


@dataclass
class ExperimentConfig:
    model: IncrementModel
    theta: AngularSet
    theta_b: AngularSet | None
    delta: float
    u_grid: tuple
    n_paths: int
    seed: int
    estimator: str
    rule: StoppingRule
    resolved: dict  # canonical dict for the run manifest


def _caps_from_list(items, field: str) -> AngularSet:
    caps = []
    for i, item in enumerate(items):
        try:
            center = np.asarray(item["center"], dtype=float)
            radius = float(item["radius"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{field}[{i}]", f"malformed cap entry: {exc}")
        n = float(np.abs(center).sum())
        if n <= 0:
            raise ConfigError(f"{field}[{i}].center", "center must be nonzero")
        if abs(n - 1.0) > 1e-9:
            warnings.warn(f"{field}[{i}].center renormalized to the diamond "
                          f"(L1 norm was {n:.12g})")
        try:
            caps.append(DiamondCap(center / n, radius))
        except ValueError as exc:
            raise ConfigError(f"{field}[{i}]", str(exc))
    if not caps:
        raise ConfigError(field, "need at least one cap")
    return AngularSet(caps=tuple(caps))


def _serialize_caps(aset: AngularSet) -> list:
    return [{"center": [float(v) for v in c.center], "radius": float(c.radius)}
            for c in aset.caps]


def parse_experiment_config(cfg: dict, *, drift_seed: int = 0) -> ExperimentConfig:
    """Validate and resolve a plain-dict experiment config.

    Rejections raise ConfigError: non-positive delta, inadmissible swelling,
    failed drift certification, overlapping two-cone sets, light-tailed
    Weibull without an explicit override, malformed grids.
    """
    from .model import model_from_config
    from .radial import law_from_config

    if "model" not in cfg:
        raise ConfigError("model", "missing model block")
    try:
        law = law_from_config(cfg["model"]["radial"])
    except (KeyError, ValueError) as exc:
        raise ConfigError("model.radial", str(exc))
    if isinstance(law, Weibull) and law.shape >= 1.0:
        if cfg.get("allow_light_tail"):
            warnings.warn("weibull shape >= 1 is light-tailed; asymptotic "
                          "formulas here target heavy tails")
        else:
            raise ConfigError("model.radial",
                              "weibull shape >= 1 is light-tailed; set "
                              "allow_light_tail to proceed anyway")
    try:
        model = model_from_config(cfg["model"], drift_seed=drift_seed)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("model", str(exc))

    delta = cfg.get("delta")
    if delta is None or not (float(delta) > 0):
        raise ConfigError("delta", "delta must be a positive real")
    delta = float(delta)

    if "theta" in cfg:
        theta = _caps_from_list(cfg["theta"], "theta")
    else:
        theta = model.angular.core
    adm = admissibility_report(theta, delta)
    if not adm["admissible_full"]:
        raise ConfigError("delta",
                          "inadmissible swelling: min component bound "
                          f"{adm['min_component_full_swell']:.6g} does not exceed "
                          f"delta/(4+delta) = {adm['component_threshold']:.6g}")

    theta_b = None
    if "theta_b" in cfg:
        theta_b = _caps_from_list(cfg["theta_b"], "theta_b")
        dist = set_distance(swell(theta, delta), swell(theta_b, delta))
        if not dist > 0.0:
            raise ConfigError("theta_b", "swollen sets overlap (distance 0)")

    u_cfg = cfg.get("u")
    if isinstance(u_cfg, dict) and "asym_targets" in u_cfg:
        targets = [float(t) for t in u_cfg["asym_targets"]]
        if any(t <= 0 for t in targets):
            raise ConfigError("u.asym_targets", "targets must be positive")
        u_grid = tuple(float(v) for v in
                       u_grid_for_asym_span(model.radial, model.drift, targets))
    elif isinstance(u_cfg, (list, tuple)) and u_cfg:
        u_grid = tuple(float(v) for v in u_cfg)
        if any(v <= 0 for v in u_grid) or any(
                b <= a for a, b in zip(u_grid, u_grid[1:])):
            raise ConfigError("u", "thresholds must be positive and increasing")
    else:
        raise ConfigError("u", "provide a list of thresholds or asym_targets")

    n_paths = int(cfg.get("paths", 100_000))
    if n_paths < 1:
        raise ConfigError("paths", "need at least one path")
    seed = int(cfg.get("seed", 0))
    estimator = cfg.get("estimator", "crude")
    if estimator not in ("crude", "bigjump"):
        raise ConfigError("estimator", "estimator must be crude or bigjump")
    try:
        rule = StoppingRule(rho=float(cfg.get("rho", 1.5)),
                            n_max=cfg.get("n_max"),
                            barrier=cfg.get("barrier"))
    except ValueError as exc:
        raise ConfigError("stopping", str(exc))

    resolved = {
        "model": model.to_config(),
        "theta": _serialize_caps(theta),
        "delta": delta,
        "u": list(u_grid),
        "paths": n_paths,
        "seed": seed,
        "estimator": estimator,
        "rho": rule.rho,
        "n_max": rule.n_max,
        "barrier": rule.barrier,
        "admissibility": adm,
    }
    if theta_b is not None:
        resolved["theta_b"] = _serialize_caps(theta_b)
    return ExperimentConfig(model=model, theta=theta, theta_b=theta_b,
                            delta=delta, u_grid=u_grid, n_paths=n_paths,
                            seed=seed, estimator=estimator, rule=rule,
                            resolved=resolved)


def reference_ratio_config(paths: int = 200_000, seed: int = 0,
                           estimator: str = "bigjump",
                           targets=DEFAULT_ASYM_TARGETS) -> dict:
    """Plain-dict ratio-experiment config for the Weibull reference model."""
    model = reference_weibull()
    return {
        "model": {"radial": model.radial.to_config(),
                  "angular": model.angular.to_config()},
        "delta": REFERENCE_DELTA,
        "u": {"asym_targets": list(targets)},
        "paths": int(paths),
        "seed": int(seed),
        "estimator": estimator,
    }


def reference_two_cone_config(paths: int = 200_000, seed: int = 0,
                              targets=DEFAULT_TWO_CONE_TARGETS) -> dict:
    """Plain-dict two-cone experiment config for the Weibull reference."""
    model, theta_a, theta_b = two_cone_reference()
    return {
        "model": {"radial": model.radial.to_config(),
                  "angular": model.angular.to_config()},
        "delta": TWO_CONE_DELTA,
        "theta": _serialize_caps(theta_a),
        "theta_b": _serialize_caps(theta_b),
        "u": {"asym_targets": list(targets)},
        "paths": int(paths),
        "seed": int(seed),
    }
