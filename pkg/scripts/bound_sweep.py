#!/usr/bin/env python3
"""Sweep the certified peak ratio over the design gain upsilon.

Produces one CSV with columns (upsilon, beta_star, delta, alpha, peak_ratio)
covering several budget / death-rate variants of the baseline two-strategy
scenario, with the initial population on the safest strategy (B0 = 0.15).
Plot peak_ratio against upsilon, one curve per (beta_star, delta) pair, to
see how aggressive gains trade certified overshoot for faster convergence.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from epgtool import (
    BoundQuery,
    ModelParams,
    PolicyConfig,
    StrategySpec,
    default_grid,
    optimal_allocation,
    peak_bound,
    validate,
)

BASE = {"gamma": 0.1, "zeta": 0.0, "theta": 0.0, "psi": 0.011}
STRATEGIES = StrategySpec(betas=(0.15, 0.19), costs=(0.2, 0.0))
B0 = 0.15

# (budget, delta) variants; the budget fixes beta* = 0.19 - 0.2 * cstar
VARIANTS = [
    (0.10, 0.005),
    (0.10, 0.002),
    (0.10, 0.008),
    (0.05, 0.005),
    (0.15, 0.005),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--grid-size", type=int, default=30)
    ap.add_argument("--upsilon-max", type=float, default=6.0)
    ap.add_argument("--upsilon-steps", type=int, default=24)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    upsilons = np.linspace(0.25, args.upsilon_max, args.upsilon_steps)

    rows = []
    for cstar, delta in VARIANTS:
        params = ModelParams(delta=delta, **BASE)
        for ups in upsilons:
            policy = PolicyConfig(cstar=cstar, upsilon=float(ups))
            validate(params, STRATEGIES, policy)
            alloc = optimal_allocation(STRATEGIES, policy, params)
            alpha = 0.5 * ups ** 2 * (B0 - alloc.betastar) ** 2
            result = peak_bound(
                BoundQuery(
                    alloc=alloc,
                    params=params,
                    upsilon=float(ups),
                    alpha=alpha,
                    grid=default_grid(STRATEGIES, args.grid_size),
                )
            )
            rows.append(
                (float(ups), alloc.betastar, delta, alpha, result.peak_ratio)
            )

    path = out / "bound_sweep.csv"
    with open(path, "w", newline="") as fh:
        fh.write("upsilon,beta_star,delta,alpha,peak_ratio\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
