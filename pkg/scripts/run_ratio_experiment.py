#!/usr/bin/env python
"""Run the Monte-Carlo-over-asymptotic ratio experiment from a config file.

With no --config the packaged Weibull reference model is used with a u grid
spanning asymptotic values 1e-2 down to 1e-4.
"""

import argparse
import json
import sys

from ruincone.cli import run_ratio_experiment, _resolve_threads
from ruincone.configs import ConfigError, reference_ratio_config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="experiment config JSON file")
    ap.add_argument("--paths", type=int, default=200_000,
                    help="paths per threshold for the default config")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default="ratio_out")
    args = ap.parse_args()

    if args.config:
        with open(args.config) as f:
            cfg = json.load(f)
    else:
        cfg = reference_ratio_config(paths=args.paths, seed=args.seed)
    try:
        summary = run_ratio_experiment(cfg, args.out,
                                       _resolve_threads(args.threads))
    except ConfigError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return 2
    print(json.dumps(summary, sort_keys=True, indent=2))
    return 3 if summary["trend_verdict"] == "inconclusive" else 0


if __name__ == "__main__":
    sys.exit(main())
