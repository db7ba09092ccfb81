"""MAE/RMSE of the grid detector across grid sizes on a synthetic population."""

import argparse
from dataclasses import replace

from ghosthome.batch import detect_batch
from ghosthome.config import frozen_profile
from ghosthome.metrics import score
from ghosthome.synthetic import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=50)
    ap.add_argument("--days", type=int, default=14)
    ap.add_argument("--sigma", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--grid", type=float, nargs="+", default=[1, 5, 10, 20, 50, 150, 250])
    args = ap.parse_args()

    trajectories, truth = generate(SynthSpec(n_users=args.users, days=args.days,
                                             sigma_m=args.sigma, seed=args.seed))
    base = frozen_profile("ghost")
    print(f"{'grid_m':>8} {'mae_m':>8} {'rmse_m':>8} {'median_m':>9} {'hit@50':>7}")
    maes = []
    for g in args.grid:
        r = score(detect_batch(trajectories, "ghost", replace(base, grid_size=g)), truth)
        maes.append(r.mae_m)
        print(f"{g:8g} {r.mae_m:8.2f} {r.rmse_m:8.2f} {r.median_m:9.2f} {r.hit_rates[50.0]:7.2f}")
    print(f"spread {max(maes) - min(maes):.2f} m")


if __name__ == "__main__":
    main()
