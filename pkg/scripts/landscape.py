"""Produce the cost-landscape grid and descent path, optionally plotting them.

Thin wrapper over ``qfnn landscape``; plotting needs matplotlib, which the
package itself does not depend on.

    python scripts/landscape.py --out runs/landscape --plot
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from qfnn import cli


def plot(out: Path):
    import matplotlib.pyplot as plt

    grid = np.loadtxt(out / "landscape_grid.csv", delimiter=",", skiprows=1)
    path = np.loadtxt(out / "landscape_path.csv", delimiter=",", skiprows=1, ndmin=2)
    thetas, phis = np.unique(grid[:, 0]), np.unique(grid[:, 1])
    cost = grid[:, 2].reshape(len(thetas), len(phis))
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(phis, thetas, cost, shading="auto")
    ax.plot(path[:, 2], path[:, 1], color="red", lw=1.5)
    ax.set_xlabel("phi")
    ax.set_ylabel("theta")
    fig.colorbar(mesh, label="cost")
    fig.savefig(out / "landscape.png", dpi=150, bbox_inches="tight")


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", type=Path, default=Path("runs/landscape"))
    parser.add_argument("--grid", default="101x101")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()
    status = cli.main(["landscape", "--grid", args.grid, "--out", str(args.out)])
    if status == 0 and args.plot:
        plot(args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
