#!/usr/bin/env python3
"""Risk-loading convergence in the simulation budget, per crisis probability.

Reproduces the convergence experiment behind table T5 at arbitrary budgets:

    python scripts/convergence_study.py --N 100 --sims 1000000,10000000
    python scripts/convergence_study.py --N 100 --ptilde-grid 0.001,0.01 --workers 8
"""

import argparse
import sys

from riskdiv.measures import MeasureKind, RiskMeasureSpec, TvarConvention
from riskdiv.models import ModelSpec, PortfolioParams
from riskdiv.montecarlo import convergence_study
from riskdiv.tables import fmt_loading


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=100)
    parser.add_argument("--p", type=float, default=1 / 6)
    parser.add_argument("--q", type=float, default=0.5)
    parser.add_argument(
        "--ptilde-grid",
        type=lambda s: tuple(float(x) for x in s.split(",")),
        default=(0.0, 0.001, 0.01, 0.05, 0.1),
    )
    parser.add_argument(
        "--sims",
        type=lambda s: tuple(int(x) for x in s.split(",")),
        default=(1_000_000, 10_000_000, 20_000_000),
    )
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    params = PortfolioParams()
    print("measure,sims," + ",".join(f"pt={pt:g}" for pt in args.ptilde_grid))
    for kind in (MeasureKind.VAR, MeasureKind.TVAR):
        spec = RiskMeasureSpec(kind, params.alpha, TvarConvention.TAIL_AVERAGE)
        columns = {}
        for pt in args.ptilde_grid:
            model = ModelSpec.per_exposure_shock(args.p, args.q, pt) if pt else ModelSpec.iid(args.p)
            columns[pt] = dict(
                convergence_study(
                    model, args.N, params.exposures, list(args.sims), spec, params,
                    seed=args.seed, workers=args.workers,
                )
            )
        for sims in args.sims:
            row = [kind.name, str(sims)] + [fmt_loading(columns[pt][sims]) for pt in args.ptilde_grid]
            print(",".join(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
