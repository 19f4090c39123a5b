#!/usr/bin/env python
"""Run the six assumption diagnostics on the packaged reference models.

Writes one output directory per model with per-assumption CSV traces plus a
JSON verdict bundle.  Exit code 3 if any verdict is inconclusive.
"""

import argparse
import os
import sys

from ruincone.cli import run_assumption_suite
from ruincone.configs import (
    reference_exponential,
    reference_lognormal,
    reference_pareto,
    reference_weibull,
)

MODELS = {
    "weibull": reference_weibull,
    "lognormal": reference_lognormal,
    "pareto": reference_pareto,
    "exponential": reference_exponential,
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=sorted(MODELS) + ["all"], default="all")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="assumptions_out")
    args = ap.parse_args()

    names = sorted(MODELS) if args.model == "all" else [args.model]
    any_inconclusive = False
    for name in names:
        model = MODELS[name]()
        out_dir = os.path.join(args.out, name)
        reports = run_assumption_suite(model, out_dir, seed=args.seed)
        verdicts = {aid: rep.verdict for aid, rep in sorted(reports.items())}
        print(name, verdicts)
        any_inconclusive |= "inconclusive" in verdicts.values()
    return 3 if any_inconclusive else 0


if __name__ == "__main__":
    sys.exit(main())
