"""Compare autoencoder training across input sets and seeds.

For each input set prints the iterations used, the final running average and
the exact mean cost over the set.  With ``--bound`` it also runs multi-start
L-BFGS to estimate the best cost the network can reach on that set.

    python scripts/autoencoder_sweep.py --sets phi+,phi- 00,01 00,00+01 --bound
"""

import argparse

from qfnn.tasks import best_achievable_cost, build_autoencoder_task, named_state
from qfnn.training import TrainConfig, train


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sets", nargs="+", default=["phi+,phi-", "00,01", "00,00+01"])
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--eta", type=float, default=0.01)
    parser.add_argument("--threshold", type=float, default=1e-3)
    parser.add_argument("--max-iterations", type=int, default=3000)
    parser.add_argument("--outer", choices=("general", "neuron"), default="general")
    parser.add_argument("--penalty", action="store_true", help="add the bottleneck diagonality terms")
    parser.add_argument("--bound", action="store_true", help="also estimate the best achievable cost")
    args = parser.parse_args()

    print("inputs,seed,iterations,running_average,exact_mean")
    for spec in args.sets:
        states = [named_state(s) for s in spec.split(",")]
        task = build_autoencoder_task(states, args.penalty, args.outer)
        for seed in args.seeds:
            cfg = TrainConfig(eta=args.eta, seed=seed, cost_threshold=args.threshold,
                              max_iterations=args.max_iterations)
            result = train(task.network, task, cfg)
            print(f"{spec},{seed},{len(result.trace)},{result.running_average:.3e},"
                  f"{task.mean_cost(result.network):.3e}", flush=True)
        if args.bound:
            print(f"# {spec}: best achievable ~ {best_achievable_cost(task, restarts=5):.4e}", flush=True)


if __name__ == "__main__":
    main()
