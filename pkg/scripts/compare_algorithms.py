"""All six detectors on a synthetic population.

By default every detector runs with its shipped profile. With --sweep the
parameter grid is searched on a seeded 80% training split and the winning
profile is scored on the held-out users.
"""

import argparse
import time

from ghosthome.batch import detect_batch
from ghosthome.config import frozen_profiles
from ghosthome.metrics import NoEvaluableUsers, score
from ghosthome.model import ALGORITHMS
from ghosthome.sweep import DEFAULT_GRID, evaluate_frozen, run_sweep, split_users
from ghosthome.synthetic import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=50)
    ap.add_argument("--days", type=int, default=14)
    ap.add_argument("--sigma", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--algorithms", default=",".join(ALGORITHMS))
    ap.add_argument("--sweep", action="store_true", help="tune on a training split first")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    algorithms = [a for a in args.algorithms.split(",") if a]
    trajectories, truth = generate(SynthSpec(n_users=args.users, days=args.days,
                                             sigma_m=args.sigma, seed=args.seed))
    if not args.sweep:
        profiles = frozen_profiles()
        for a in algorithms:
            start = time.perf_counter()
            try:
                r = score(detect_batch(trajectories, a, profiles[a], args.workers), truth)
            except NoEvaluableUsers:
                print(f"{a:>10}: no user detected")
                continue
            print(f"{a:>10}: MAE {r.mae_m:8.2f} m  RMSE {r.rmse_m:8.2f} m  "
                  f"missing {r.n_missing:2d}  {time.perf_counter() - start:5.1f} s")
        return

    train_ids, test_ids = split_users(sorted(truth), 0.8, 42)
    train = [t for t in trajectories if t.user_id in set(train_ids)]
    test = [t for t in trajectories if t.user_id in set(test_ids)]
    grid = {a: DEFAULT_GRID[a] for a in algorithms}
    result = run_sweep(train, truth, grid, workers=args.workers)
    for a, row in result.best.items():
        try:
            r = evaluate_frozen(test, truth, {a: row.detection_params()})[a]
            test_mae = f"{r.mae_m:8.2f}"
        except NoEvaluableUsers:
            test_mae = "     n/a"
        print(f"{a:>10}: train MAE {row.train_mae_m:8.2f} m  test MAE {test_mae} m  {dict(row.params)}")


if __name__ == "__main__":
    main()
