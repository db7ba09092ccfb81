"""Accuracy when only weekend daytime pings are available, next to the
same population with night pings."""

import argparse
from collections import Counter

from ghosthome.batch import detect_batch
from ghosthome.config import frozen_profile
from ghosthome.metrics import score
from ghosthome.synthetic import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=50)
    ap.add_argument("--days", type=int, default=14)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    params = frozen_profile("ghost")
    for label, night_rate in (("with night pings", 6), ("weekend only", 0)):
        trajectories, truth = generate(SynthSpec(n_users=args.users, days=args.days,
                                                 seed=args.seed, night_rate=night_rate))
        estimates = detect_batch(trajectories, "ghost", params)
        r = score(estimates, truth)
        sources = Counter(e.inference_source for e in estimates)
        print(f"{label:>17}: MAE {r.mae_m:6.2f} m  RMSE {r.rmse_m:6.2f} m  sources {dict(sources)}")


if __name__ == "__main__":
    main()
