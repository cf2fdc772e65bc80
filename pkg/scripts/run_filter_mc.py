#!/usr/bin/env python3
"""Filter-accuracy study at full scale (5000 replications, both sigma_L)."""
import argparse

from freqpanel._threads import limit_blas_threads
from freqpanel.montecarlo import McConfig, mc_filter_rmse


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="mc_filters_full.csv")
    args = ap.parse_args()

    limit_blas_threads(1)
    frames = []
    for sigma_L in (0.2, 0.4):
        cfg = McConfig(
            design="filter_rmse", replications=args.reps, sigma_L=sigma_L, seed=args.seed
        )
        rep = mc_filter_rmse(cfg)
        df = rep.to_frame()
        df.insert(0, "sigma_L", sigma_L)
        frames.append(df)
        print(f"sigma_L={sigma_L}:")
        print(df.pivot(index="state", columns="method", values="rmse").round(3))

    import pandas as pd

    pd.concat(frames).to_csv(args.out, index=False)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
