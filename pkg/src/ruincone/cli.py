"""Command-line orchestration: four subcommands and reproducible artifacts.

Every run writes CSV tables plus a manifest JSON carrying the fully
resolved configuration, tool version, seed, and drift certificate; nothing
in the outputs depends on wall clock or worker count, so rerunning a
manifest's configuration reproduces the files byte for byte.

Exit codes: 0 success, 2 config validation failure (a machine-readable
error report goes to stderr), 3 when diagnostics finished but at least one
verdict is inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .asymptotics import asymptotic_ruin, check_a5, check_a6, equivalence_gap, \
    halfspace_integral
from .configs import ConfigError, parse_experiment_config
from .geometry import admissibility_report
from .model import check_a3, check_a4, drift_certificate, model_from_config
from .radial import LogNormal, Weibull
from .simulate import StoppingRule, ruin_mc_bigjump, ruin_mc_cone, \
    step_schedule, step_schedule_alternative, two_cone_mc
from .taildiag import DiagnosticReport, check_a1, check_a2

__all__ = ["main", "run_ratio_experiment", "run_two_cone_experiment",
           "run_assumption_suite"]


# ---------------------------------------------------------------------------
# serialization helpers (deterministic formatting, no timestamps)


def _plain(obj):
    if isinstance(obj, DiagnosticReport):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: str, header: list, rows: list):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: str, obj):
    with open(path, "w") as f:
        f.write(json.dumps(_plain(obj), sort_keys=True, indent=2))
        f.write("\n")


def _load_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def _resolve_threads(arg) -> int:
    if arg is not None:
        return max(1, int(arg))
    env = os.environ.get("RUINCONE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _schedule_block(law, u_grid) -> dict | None:
    """Step-count schedule annotations for the manifest, where defined."""
    if isinstance(law, Weibull):
        return {
            "family": "weibull",
            "per_u": {_fmt(u): step_schedule(law, u) for u in u_grid},
            "alternative_grouping_per_u": {
                _fmt(u): step_schedule_alternative(law, u) for u in u_grid},
        }
    if isinstance(law, LogNormal):
        return {"family": "lognormal",
                "per_u": {_fmt(u): step_schedule(law, u) for u in u_grid}}
    return None


def _caps_config(aset) -> list:
    return [{"center": [float(v) for v in c.center], "radius": float(c.radius)}
            for c in aset.caps]


def _manifest(command: str, config: dict, model, u_grid) -> dict:
    return {
        "tool": "ruincone",
        "version": __version__,
        "command": command,
        "config": config,
        "drift_certificate": drift_certificate(model),
        "step_schedule": _schedule_block(model.radial, u_grid),
    }


def _theta_from_file(path: str):
    from .configs import _caps_from_list

    data = _load_json(path)
    caps = data["caps"] if isinstance(data, dict) else data
    return _caps_from_list(caps, "theta")


def _build_model(path: str, *, certify: bool = True):
    cfg = _load_json(path)
    try:
        return model_from_config(cfg, certify=certify), cfg
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("model", str(exc))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    model, model_cfg = _build_model(args.model)
    theta = _theta_from_file(args.theta) if args.theta else model.angular.core
    delta = float(args.delta)
    if delta <= 0:
        raise ConfigError("delta", "delta must be positive")
    adm = admissibility_report(theta, delta)
    if not adm["admissible_full"]:
        raise ConfigError("delta", "inadmissible swelling for this angular set")
    u_grid = [float(u) for u in args.u]
    if any(u <= 0 for u in u_grid):
        raise ConfigError("u", "thresholds must be positive")
    try:
        rule = StoppingRule(rho=args.rho, n_max=args.nmax)
    except ValueError as exc:
        raise ConfigError("stopping", str(exc))
    threads = _resolve_threads(args.threads)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for u in u_grid:
        if args.estimator == "bigjump":
            est = ruin_mc_bigjump(model, theta, delta, u, args.paths,
                                  rule, args.seed, threads=threads)
        else:
            est = ruin_mc_cone(model, theta, delta, u, args.paths,
                               rule, args.seed, threads=threads)
        rows.append([u, est.estimate, est.ci_low, est.ci_high,
                     est.truncated_paths, est.mean_hit_time])
    _write_csv(os.path.join(args.out, "simulate.csv"),
               ["u", "estimate", "ci_low", "ci_high", "truncated_paths",
                "mean_hit_time"], rows)
    config = {
        "model": model.to_config(),
        "theta": _caps_config(theta),
        "delta": delta,
        "u": u_grid,
        "paths": args.paths,
        "seed": args.seed,
        "estimator": args.estimator,
        "rho": rule.rho,
        "n_max": rule.n_max,
        "admissibility": adm,
    }
    _write_json(os.path.join(args.out, "manifest.json"),
                _manifest("simulate", config, model, u_grid))
    return 0


def _cmd_asymptotic(args) -> int:
    model, model_cfg = _build_model(args.model)
    u_grid = [float(u) for u in args.u]
    if any(u <= 0 for u in u_grid):
        raise ConfigError("u", "thresholds must be positive")
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for u in u_grid:
        a = asymptotic_ruin(model.radial, model.drift, u).value
        h = halfspace_integral(model, u)
        g = equivalence_gap(model, u)
        rows.append([u, a, h, g])
    _write_csv(os.path.join(args.out, "asymptotic.csv"),
               ["u", "asymptotic_ruin", "halfspace_integral",
                "equivalence_gap"], rows)
    config = {"model": model.to_config(), "u": u_grid}
    _write_json(os.path.join(args.out, "manifest.json"),
                _manifest("asymptotic", config, model, u_grid))
    return 0


def run_assumption_suite(model, out_dir: str | None = None,
                         seed: int = 0) -> dict:
    """All six assumption checks; returns {id: DiagnosticReport}."""
    law = model.radial
    reports = {
        "A1": check_a1(law),
        "A2": check_a2(law),
        "A3": check_a3(model, seed=seed),
        "A4": check_a4(model),
        "A5": check_a5(model),
        "A6": check_a6(model),
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for aid, rep in reports.items():
            _write_csv(os.path.join(out_dir, f"assumption_{aid}.csv"),
                       ["point", "ratio", "tolerance"],
                       _report_rows(rep))
        _write_json(os.path.join(out_dir, "assumptions.json"), {
            "verdicts": {aid: rep.verdict for aid, rep in reports.items()},
            "reports": {aid: rep for aid, rep in reports.items()},
        })
    return reports


def _report_rows(rep: DiagnosticReport) -> list:
    tol = rep.tolerances
    # a single scalar column; pick the binding tolerance for the assumption
    scalar_tol = {
        "A1": tol.get("last_point"),
        "A2": tol.get("limit"),
        "A3": tol.get("final_level"),
        "A4": tol.get("confidence"),
        "A5": tol.get("rel_tol"),
        "A6": tol.get("last_point"),
    }.get(rep.assumption)
    rows = []
    if isinstance(rep.values, dict) and rep.assumption == "A2":
        for gamma, ratios in rep.values.items():
            for u, ratio in zip(rep.points, ratios):
                rows.append([f"gamma={gamma};u={_fmt(u)}",
                             float("nan") if ratio is None else ratio,
                             scalar_tol])
    elif isinstance(rep.values, dict):
        for key, val in rep.values.items():
            for i, v in enumerate(np.atleast_1d(val)):
                rows.append([f"{key}[{i}]", v, scalar_tol])
    else:
        for pt, val in zip(rep.points, rep.values):
            rows.append([pt, float("nan") if val is None else val, scalar_tol])
    return rows


def _cmd_check_assumptions(args) -> int:
    # certification is itself under test here, so the model is built without
    # the rejection gate and A4 carries the verdict
    model, model_cfg = _build_model(args.model, certify=False)
    os.makedirs(args.out, exist_ok=True)
    reports = run_assumption_suite(model, args.out, seed=args.seed)
    config = {"model": model.to_config(), "seed": args.seed}
    _write_json(os.path.join(args.out, "manifest.json"),
                _manifest("check-assumptions", config, model, []))
    if any(rep.verdict == "inconclusive" for rep in reports.values()):
        return 3
    return 0


def _ratio_trend(ratios, halfwidths, feasible) -> str:
    """Nonincreasing distance from 1 over the top half, CI slack allowed."""
    idx = [i for i in range(len(ratios)) if feasible[i]]
    if len(idx) < 2:
        return "inconclusive"
    top = idx[len(idx) // 2:]
    if len(top) < 2:
        top = idx[-2:]
    ok = True
    for a, b in zip(top, top[1:]):
        da = abs(ratios[a] - 1.0)
        db = abs(ratios[b] - 1.0)
        if db > da + halfwidths[a] + halfwidths[b]:
            ok = False
    return "consistent" if ok else "inconsistent"


def run_ratio_experiment(cfg: dict, out_dir: str, threads: int = 1) -> dict:
    """Monte Carlo over asymptotic ratio across the configured u grid.

    Writes ratio.csv, manifest.json and summary.json into out_dir; returns
    the summary dict (rows plus trend verdict).
    """
    ec = parse_experiment_config(cfg)
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    ratios, halfwidths, feasible = [], [], []
    for u in ec.u_grid:
        if ec.estimator == "bigjump":
            est = ruin_mc_bigjump(ec.model, ec.theta, ec.delta, u, ec.n_paths,
                                  ec.rule, ec.seed, threads=threads)
        else:
            est = ruin_mc_cone(ec.model, ec.theta, ec.delta, u, ec.n_paths,
                               ec.rule, ec.seed, threads=threads)
        asym = asymptotic_ruin(ec.model.radial, ec.model.drift, u).value
        ratio = est.estimate / asym
        lo = est.ci_low / asym
        hi = est.ci_high / asym
        ok = not est.below_resolution
        rows.append([u, est.estimate, est.ci_low, est.ci_high, asym, ratio,
                     lo, hi, est.truncated_paths, est.below_resolution])
        ratios.append(ratio)
        halfwidths.append(0.5 * (hi - lo))
        feasible.append(ok)
    trend = _ratio_trend(ratios, halfwidths, feasible)
    _write_csv(os.path.join(out_dir, "ratio.csv"),
               ["u", "mc_estimate", "mc_ci_low", "mc_ci_high", "asymptotic",
                "ratio", "ratio_ci_low", "ratio_ci_high", "truncated_paths",
                "below_resolution"], rows)
    _write_json(os.path.join(out_dir, "manifest.json"),
                _manifest("experiment-ratio", ec.resolved, ec.model, ec.u_grid))
    summary = {
        "trend_verdict": trend,
        "final_ratio": ratios[-1] if ratios else None,
        "rows": [{"u": r[0], "ratio": r[5], "below_resolution": bool(r[9])}
                 for r in rows],
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary


def run_two_cone_experiment(cfg: dict, out_dir: str, threads: int = 1) -> dict:
    """Two-cone sweep: joint hit probabilities normalized by the asymptotic."""
    ec = parse_experiment_config(cfg)
    if ec.theta_b is None:
        raise ConfigError("theta_b", "two-cone experiment needs theta_b")
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    norm_both, norm_hw = [], []
    for u in ec.u_grid:
        res = two_cone_mc(ec.model, ec.theta, ec.theta_b, ec.delta, u,
                          ec.n_paths, ec.rule, ec.seed, threads=threads)
        asym = asymptotic_ruin(ec.model.radial, ec.model.drift, u).value
        rows.append([
            u, asym,
            res.p_a.estimate, res.p_a.ci_low, res.p_a.ci_high,
            res.p_b.estimate, res.p_b.ci_low, res.p_b.ci_high,
            res.p_both.estimate, res.p_both.ci_low, res.p_both.ci_high,
            res.p_a.estimate / asym, res.p_b.estimate / asym,
            res.p_both.estimate / asym,
            res.p_a.truncated_paths,
        ])
        norm_both.append(res.p_both.estimate / asym)
        norm_hw.append(0.5 * (res.p_both.ci_high - res.p_both.ci_low) / asym)
    ok = all(norm_both[i + 1] <= norm_both[i] + norm_hw[i] + norm_hw[i + 1]
             for i in range(len(norm_both) - 1))
    trend = "consistent" if ok else "inconsistent"
    if len(norm_both) < 2:
        trend = "inconclusive"
    _write_csv(os.path.join(out_dir, "two_cone.csv"),
               ["u", "asymptotic", "p_a", "p_a_ci_low", "p_a_ci_high",
                "p_b", "p_b_ci_low", "p_b_ci_high",
                "p_both", "p_both_ci_low", "p_both_ci_high",
                "p_a_over_asym", "p_b_over_asym", "p_both_over_asym",
                "truncated_paths"], rows)
    _write_json(os.path.join(out_dir, "manifest.json"),
                _manifest("experiment-two-cone", ec.resolved, ec.model,
                          ec.u_grid))
    summary = {
        "trend_verdict": trend,
        "final_p_both_over_asym": norm_both[-1] if norm_both else None,
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary


def _cmd_experiment(args) -> int:
    cfg = _load_json(args.config)
    threads = _resolve_threads(args.threads)
    if args.kind == "ratio":
        summary = run_ratio_experiment(cfg, args.out, threads)
    else:
        summary = run_two_cone_experiment(cfg, args.out, threads)
    return 3 if summary["trend_verdict"] == "inconclusive" else 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ruincone",
        description="Ruin probabilities of heavy-tailed multivariate random "
                    "walks: simulation, asymptotics, and model diagnostics.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo cone-hitting estimates")
    sim.add_argument("--model", required=True, help="model config JSON file")
    sim.add_argument("--theta", help="target angular set JSON (default: model core)")
    sim.add_argument("--delta", type=float, required=True, help="cone swelling")
    sim.add_argument("--u", action="append", required=True, type=float,
                     help="threshold; repeat for a sweep")
    sim.add_argument("--paths", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--estimator", choices=["crude", "bigjump"],
                     default="crude")
    sim.add_argument("--rho", type=float, default=1.5)
    sim.add_argument("--nmax", type=int, default=None)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--out", default=".")
    sim.set_defaults(fn=_cmd_simulate)

    asy = sub.add_parser("asymptotic", help="closed asymptotic quantities")
    asy.add_argument("--model", required=True)
    asy.add_argument("--u", action="append", required=True, type=float)
    asy.add_argument("--out", default=".")
    asy.set_defaults(fn=_cmd_asymptotic)

    chk = sub.add_parser("check-assumptions",
                         help="run the six model diagnostics")
    chk.add_argument("--model", required=True)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--out", default=".")
    chk.set_defaults(fn=_cmd_check_assumptions)

    exp = sub.add_parser("experiment", help="preconfigured experiment runners")
    exp.add_argument("kind", choices=["ratio", "two-cone"])
    exp.add_argument("--config", required=True, help="experiment config JSON")
    exp.add_argument("--threads", type=int, default=None)
    exp.add_argument("--out", default=".")
    exp.set_defaults(fn=_cmd_experiment)

    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
