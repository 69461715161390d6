"""Visited-state coverage of ES versus DESSCA training starts.

Runs matching campaigns per seed and compares the per-dimension KS
statistic of all visited (normalized) states against the uniform box.

    python3 scripts/coverage_ab.py --env mountain_car --seeds 20
"""

import argparse

import numpy as np

from dessca.harness import ExperimentConfig, coverage_metrics, run_campaign
from dessca.policies import make_policy
from dessca.reference import uniform_box


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--env", default="mountain_car", choices=("mountain_car", "cartpole"))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--episodes", type=int, default=30)
    ap.add_argument("--episode-steps", type=int, default=200)
    ap.add_argument("--policy", default="random")
    args = ap.parse_args()

    wins = 0
    for seed in range(args.seeds):
        res = {}
        for strategy in ("es", "dessca"):
            cfg = ExperimentConfig.for_env(args.env, strategy=strategy, seed=seed,
                                           total_steps=args.episodes * args.episode_steps,
                                           episode_steps=args.episode_steps,
                                           validation_episodes=1, validation_steps=1,
                                           policy=args.policy)
            env = cfg.make_env()
            record = run_campaign(cfg, make_policy(args.policy, env, seed))
            res[strategy] = coverage_metrics(record.visited(), uniform_box(env.dim))
        win = bool(np.all(res["dessca"].ks < res["es"].ks))
        wins += win
        rms = "" if res["es"].rms is None else \
            f"  rms {res['es'].rms:.3f} -> {res['dessca'].rms:.3f}"
        print(f"seed {seed:3d}  KS es {np.round(res['es'].ks, 3)}  "
              f"dessca {np.round(res['dessca'].ks, 3)}{rms}  {'win' if win else ''}")
    print(f"DESSCA lower in every dimension for {wins}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
