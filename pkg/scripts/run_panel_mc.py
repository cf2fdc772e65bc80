#!/usr/bin/env python3
"""Panel estimation/coverage study at full scale (1000 reps, B=399)."""
import argparse

from freqpanel._threads import limit_blas_threads
from freqpanel.montecarlo import McConfig, mc_panel


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--design", choices=["fe", "ife"], default="ife")
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--boot", type=int, default=399)
    ap.add_argument("--sigma-l", type=float, default=0.2)
    ap.add_argument("--q", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    limit_blas_threads(1)
    cfg = McConfig(
        design=f"panel_{args.design}",
        replications=args.reps,
        bootstrap_B=args.boot,
        sigma_L=args.sigma_l,
        q=args.q,
        seed=args.seed,
        threads=args.threads,
    )
    rep = mc_panel(cfg)
    df = rep.to_frame()
    print(df.round(4).to_string(index=False))
    out = args.out or f"mc_panel_{args.design}.csv"
    df.to_csv(out, index=False)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
