"""Train the teleportation network over several seeds and dump Haar-state costs.

Writes one CSV per seed with the per-state costs (the histogram data) and a
table of mean/std per seed to stdout.

    python scripts/teleport_sweep.py --seeds 0 1 2 3 4 --out runs/teleport_sweep
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from qfnn.tasks import build_teleport_task, haar_costs
from qfnn.training import TrainConfig, train


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    parser.add_argument("--eta", type=float, default=0.01)
    parser.add_argument("--momentum", type=float, default=0.9)
    parser.add_argument("--states", type=int, default=1000)
    parser.add_argument("--max-iterations", type=int, default=20000)
    parser.add_argument("--out", type=Path, default=Path("runs/teleport_sweep"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    task = build_teleport_task()
    print("seed,iterations,converged,haar_mean,haar_std")
    for seed in args.seeds:
        cfg = TrainConfig(eta=args.eta, momentum=args.momentum, seed=seed, max_iterations=args.max_iterations)
        result = train(task.network, task, cfg)
        costs = haar_costs(task, result.network, args.states, seed=1000 + seed)
        with open(args.out / f"haar_costs_seed{seed}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["state", "cost"])
            w.writerows((i, repr(float(c))) for i, c in enumerate(costs))
        print(f"{seed},{len(result.trace)},{result.converged},{np.mean(costs):.4e},{np.std(costs):.4e}")


if __name__ == "__main__":
    main()
