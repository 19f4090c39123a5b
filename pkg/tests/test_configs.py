"""Reference builders and experiment-config validation."""
import json

import numpy as np
import pytest

from ruincone.configs import (
    DEFAULT_ASYM_TARGETS,
    DEFAULT_TWO_CONE_TARGETS,
    REFERENCE_DELTA,
    TWO_CONE_DELTA,
    ConfigError,
    degenerate_all_core,
    degenerate_never_core,
    parse_experiment_config,
    reference_ratio_config,
    reference_two_cone_config,
    reference_u_grid,
    reference_weibull,
)
from ruincone.radial import Weibull

from conftest import ORACLE


def _base_cfg(**over):
    """Cheap valid config: zero-radius cap and const weight resolve the
    drift in closed form, so each parse is instant."""
    cfg = {
        "model": {
            "radial": {"kind": "exponential", "rate": 1.0},
            "core": [{"center": [0.5, 0.5], "radius": 0.0}],
            "cap_masses": [1.0],
            "off_direction": [-0.5, -0.5],
            "weight": {"family": "const", "value": 0.25},
        },
        "delta": 0.3,
        "u": [2.0, 4.0, 8.0],
        "paths": 1000,
        "seed": 3,
    }
    cfg.update(over)
    return cfg


def _field_of(excinfo):
    return excinfo.value.field


# ------------------------------------------------------------- references

def test_reference_constants():
    assert REFERENCE_DELTA == 0.3
    assert TWO_CONE_DELTA == 0.1
    assert DEFAULT_ASYM_TARGETS[0] == 1e-2
    assert DEFAULT_ASYM_TARGETS[-1] == 1e-4
    assert DEFAULT_TWO_CONE_TARGETS == (1e-1, 1e-2, 1e-3, 1e-4)


def test_reference_models_are_cached(weibull_model):
    assert reference_weibull() is reference_weibull()
    assert reference_weibull() is weibull_model


def test_reference_geometry(weibull_model, lognormal_model):
    assert weibull_model.radial == Weibull(0.5, 1.0)
    assert weibull_model.angular.weight.kappa == 120.0
    assert lognormal_model.angular.weight.kappa == 8.0
    cap = weibull_model.angular.core.caps[0]
    assert np.all(cap.center == 0.5)
    assert cap.radius == 0.05
    assert np.all(weibull_model.angular.off_direction == -0.5)


def test_reference_u_grid_matches_frozen_roots(weibull_model):
    grid = reference_u_grid(weibull_model)
    assert np.allclose(grid, ORACLE["u_grid_ratio"], rtol=2e-3)
    assert np.all(np.diff(grid) > 0)


def test_two_cone_u_grid_matches_frozen_roots(two_cone_setup):
    model, _, _ = two_cone_setup
    grid = reference_u_grid(model, DEFAULT_TWO_CONE_TARGETS)
    assert np.allclose(grid, ORACLE["u_grid_two_cone"], rtol=2e-3)


def test_degenerate_models():
    never = degenerate_never_core(Weibull(0.5, 1.0))
    assert np.all(never.drift == 1.0)
    assert never.drift_certified
    allc = degenerate_all_core(Weibull(0.5, 1.0))
    assert np.all(allc.drift == -1.0)
    assert not allc.drift_certified


# ----------------------------------------------------------- config parsing

def test_parse_happy_path():
    ec = parse_experiment_config(_base_cfg())
    assert ec.u_grid == (2.0, 4.0, 8.0)
    assert ec.n_paths == 1000
    assert ec.seed == 3
    assert ec.estimator == "crude"
    assert ec.theta_b is None
    assert np.allclose(ec.model.drift, 0.25)
    json.dumps(ec.resolved)  # manifest must be serializable as-is
    assert ec.resolved["u"] == [2.0, 4.0, 8.0]
    assert ec.resolved["admissibility"]["admissible_full"]


def test_parse_asym_targets_resolve_grid():
    cfg = _base_cfg(u={"asym_targets": [1e-1, 1e-2]})
    ec = parse_experiment_config(cfg)
    assert len(ec.u_grid) == 2
    assert ec.u_grid[0] < ec.u_grid[1]
    # exponential closed form: FI(u)/||c|| = 2 e^{-u}
    assert ec.u_grid[0] == pytest.approx(np.log(2.0 / 1e-1), rel=1e-6)


def test_parse_missing_model():
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config({"delta": 0.3, "u": [1.0]})
    assert _field_of(ei) == "model"


def test_parse_bad_radial():
    cfg = _base_cfg()
    cfg["model"] = dict(cfg["model"], radial={"kind": "cauchy"})
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(cfg)
    assert _field_of(ei) == "model.radial"


def test_parse_light_tail_gate():
    cfg = _base_cfg()
    cfg["model"] = dict(cfg["model"],
                        radial={"kind": "weibull", "beta": 1.5, "lambda": 1.0})
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(cfg)
    assert "light-tailed" in str(ei.value)
    cfg["allow_light_tail"] = True
    with pytest.warns(UserWarning, match="light-tailed"):
        ec = parse_experiment_config(cfg)
    assert isinstance(ec.model.radial, Weibull)


def test_parse_certification_failure_surfaces():
    cfg = _base_cfg()
    cfg["model"] = dict(cfg["model"], weight={"family": "const", "value": 1.0})
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(cfg)
    assert _field_of(ei) == "model"
    assert "certification" in str(ei.value)


def test_parse_delta_validation():
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(delta=0.0))
    assert _field_of(ei) == "delta"
    cfg = _base_cfg()
    del cfg["delta"]
    with pytest.raises(ConfigError):
        parse_experiment_config(cfg)


def test_parse_inadmissible_swelling():
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(delta=1.6))
    assert _field_of(ei) == "delta"
    assert "inadmissible" in str(ei.value)


def test_parse_bad_theta_cap():
    cfg = _base_cfg(theta=[{"center": [0.5, 0.5], "radius": -1.0}])
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(cfg)
    assert _field_of(ei).startswith("theta[0]")


def test_parse_overlapping_two_cone_sets():
    cfg = _base_cfg(delta=0.1,
                    theta=[{"center": [0.55, 0.45], "radius": 0.0}],
                    theta_b=[{"center": [0.45, 0.55], "radius": 0.0}])
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(cfg)
    assert _field_of(ei) == "theta_b"


def test_parse_u_validation():
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(u=[2.0, 2.0]))
    assert _field_of(ei) == "u"
    with pytest.raises(ConfigError):
        parse_experiment_config(_base_cfg(u=[]))
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(u={"asym_targets": [1e-2, 0.0]}))
    assert _field_of(ei) == "u.asym_targets"


def test_parse_paths_estimator_stopping():
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(paths=0))
    assert _field_of(ei) == "paths"
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(estimator="exact"))
    assert _field_of(ei) == "estimator"
    with pytest.raises(ConfigError) as ei:
        parse_experiment_config(_base_cfg(rho=0.5))
    assert _field_of(ei) == "stopping"


def test_config_error_payload():
    err = ConfigError("u", "thresholds must be positive and increasing")
    assert err.to_dict() == {"error": "config_validation", "field": "u",
                             "message": "thresholds must be positive and increasing"}


# ---------------------------------------------------- packaged experiment cfgs

def test_reference_ratio_config_parses():
    cfg = reference_ratio_config(paths=500, seed=2)
    ec = parse_experiment_config(cfg)
    assert ec.estimator == "bigjump"
    assert ec.n_paths == 500
    assert np.allclose(ec.u_grid, ORACLE["u_grid_ratio"], rtol=2e-3)


def test_reference_two_cone_config_parses():
    cfg = reference_two_cone_config(paths=500)
    ec = parse_experiment_config(cfg)
    assert ec.theta_b is not None
    assert ec.delta == TWO_CONE_DELTA
    assert np.allclose(ec.u_grid, ORACLE["u_grid_two_cone"], rtol=2e-3)
    assert ec.resolved["theta_b"][0]["center"] == [0.3, 0.7]
