"""Command-line runner for the quantum network experiments.

Usage::

    qfnn train-teleport --seed 7 --out runs/tele
    qfnn train-autoencoder --inputs phi+,phi- --diagonality-penalty
    qfnn landscape --grid 101x101
    qfnn classical-check
    qfnn verify-oracle

Settings resolve as command-line flag > ``--config`` JSON file > default.
Exit codes: 0 success, 1 usage or validation failure, 2 training diverged.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from qfnn import network as qnet
from qfnn import tasks
from qfnn.network import assign_params
from qfnn.training import TrainConfig, TrainingDiverged, train

log = logging.getLogger("qfnn")

OUTPUT_ENV = "QFNN_OUTPUT_DIR"
COMMANDS = ("train-autoencoder", "train-teleport", "landscape", "classical-check", "verify-oracle")

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2

# one schema for every command; keys are also the JSON config keys
DEFAULTS: dict = {
    "seed": 0,
    "out": None,
    "eta": 0.01,
    "epsilon": 1e-4,
    "momentum": 0.9,
    "max_iterations": 20000,
    "cost_threshold": 1e-4,
    "average_window": 50,
    "gradient_mode": "forward",
    "init_scale": 1.0,
    "threads": 1,
    "inputs": "phi+,phi-",
    "diagonality_penalty": False,
    "outer": "general",
    "eval_states": 1000,
    "eval_seed": 12345,
    "grid_theta": 101,
    "grid_phi": 101,
    "start_theta": 2.5,
    "start_phi": 2.5,
    "path_eta": 0.1,
    "path_momentum": 0.5,
    "path_steps": 2000,
    "random_sets": 100,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 101x101, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qfnn", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="JSON file of flat key/value settings")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or runs/<command>)")
    common.add_argument("--threads", type=int)

    training = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    training.add_argument("--eta", type=float)
    training.add_argument("--epsilon", type=float)
    training.add_argument("--momentum", type=float)
    training.add_argument("--max-iterations", type=int)
    training.add_argument("--cost-threshold", type=float)
    training.add_argument("--average-window", type=int)
    training.add_argument("--gradient-mode", choices=("forward", "central"))
    training.add_argument("--init-scale", type=float)
    training.add_argument("--eval-states", type=int)
    training.add_argument("--eval-seed", type=int)

    p = sub.add_parser("train-autoencoder", parents=[common, training],
                       argument_default=argparse.SUPPRESS, help="train the 2->1 qubit autoencoder")
    p.add_argument("--inputs", help="comma-separated states: phi+, phi-, psi+, psi-, 00, 00+01, ...")
    p.add_argument("--diagonality-penalty", action="store_true")
    p.add_argument("--outer", choices=("general", "neuron"))

    sub.add_parser("train-teleport", parents=[common, training],
                   argument_default=argparse.SUPPRESS, help="train the teleportation network")

    p = sub.add_parser("landscape", parents=[common], argument_default=argparse.SUPPRESS,
                       help="scan the two-parameter cost surface and a descent path")
    p.add_argument("--grid", type=_grid, help="THETAxPHI grid counts, e.g. 101x101")
    p.add_argument("--start-theta", type=float)
    p.add_argument("--start-phi", type=float)
    p.add_argument("--path-eta", type=float)
    p.add_argument("--path-momentum", type=float)
    p.add_argument("--path-steps", type=int)

    p = sub.add_parser("classical-check", parents=[common], argument_default=argparse.SUPPRESS,
                       help="compare Heaviside neurons with permutation-gate networks")
    p.add_argument("--random-sets", type=int)

    p = sub.add_parser("verify-oracle", parents=[common], argument_default=argparse.SUPPRESS,
                       help="check the hand-built teleportation parameters")
    p.add_argument("--eval-states", type=int)
    p.add_argument("--eval-seed", type=int)
    return parser


def _coerce(key: str, value, source: str):
    default = DEFAULTS[key]
    if default is None:
        return None if value is None else str(value)
    kind = type(default)
    if kind is bool:
        if not isinstance(value, bool):
            raise UsageError(f"{source}: {key} must be true or false, got {value!r}")
        return value
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise UsageError(f"{source}: {key} must be {kind.__name__}, got {value!r}")
    return value


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags."""
    cfg = dict(DEFAULTS)
    flags = vars(args).copy()
    path = flags.pop("config", None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}")
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must hold a JSON object")
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys in {path}: {', '.join(unknown)}")
        for key, value in data.items():
            cfg[key] = _coerce(key, value, str(path))
    grid = flags.pop("grid", None)
    if grid is not None:
        cfg["grid_theta"], cfg["grid_phi"] = grid
    for key in ("command", "verbose"):
        flags.pop(key, None)
    cfg.update(flags)
    if cfg["out"] is None:
        cfg["out"] = os.environ.get(OUTPUT_ENV) or str(Path("runs") / args.command)
    return cfg


def train_config(cfg: dict) -> TrainConfig:
    fields = {f.name for f in dataclasses.fields(TrainConfig)}
    try:
        return TrainConfig(**{k: v for k, v in cfg.items() if k in fields})
    except ValueError as exc:
        raise UsageError(str(exc))


def _validate_common(cfg: dict) -> None:
    if cfg["threads"] < 1:
        raise UsageError("threads must be at least 1")
    if cfg["eval_states"] < 1:
        raise UsageError("eval_states must be positive")


# --- writers ---------------------------------------------------------------------


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_trace(path: Path, trace) -> None:
    _write_csv(path, ("iteration", "cost"), ((i, float(c)) for i, c in enumerate(trace)))


def write_summary(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2) + "\n")


def _stats(values) -> dict:
    values = np.asarray(values, dtype=float)
    return {
        "mean": float(values.mean()),
        "std": float(values.std()),
        "max": float(values.max()),
        "min": float(values.min()),
        "count": int(values.size),
    }


# --- commands -------------------------------------------------------------------


def _train_and_write(task, cfg: dict, out: Path, summary: dict) -> tuple[int, object]:
    tcfg = train_config(cfg)
    try:
        result = train(task.network, task, tcfg)
    except TrainingDiverged as exc:
        write_trace(out / "trace.csv", exc.trace)
        if exc.network is not None:
            (out / "network.json").write_text(qnet.dumps(exc.network))
        summary.update(status="diverged", error=str(exc), iterations=len(exc.trace))
        write_summary(out / "summary.json", summary)
        log.error("training diverged: %s", exc)
        return EXIT_DIVERGED, None
    write_trace(out / "trace.csv", result.trace)
    (out / "network.json").write_text(qnet.dumps(result.network))
    summary.update(
        status="ok",
        converged=result.converged,
        iterations=len(result.trace),
        final_running_average=result.running_average if result.trace else None,
    )
    return EXIT_OK, result


def cmd_train_teleport(cfg: dict, out: Path, summary: dict) -> int:
    task = tasks.build_teleport_task()
    summary["wire_labels"] = task.wire_labels
    status, result = _train_and_write(task, cfg, out, summary)
    if result is not None:
        costs = tasks.haar_costs(task, result.network, cfg["eval_states"], cfg["eval_seed"])
        summary["haar_cost"] = _stats(costs)
        summary["axis_state_cost"] = _stats([task.cost(result.network, s) for s in task.inputs])
    write_summary(out / "summary.json", summary)
    return status


def cmd_train_autoencoder(cfg: dict, out: Path, summary: dict) -> int:
    names = [s.strip() for s in cfg["inputs"].split(",") if s.strip()]
    try:
        states = [tasks.named_state(s) for s in names]
        task = tasks.build_autoencoder_task(states, cfg["diagonality_penalty"], cfg["outer"])
    except ValueError as exc:
        raise UsageError(str(exc))
    summary["wire_labels"] = task.wire_labels
    status, result = _train_and_write(task, cfg, out, summary)
    if result is not None:
        per_input = {name: task.cost(result.network, s) for name, s in zip(names, states)}
        summary["input_cost"] = per_input
        summary["mean_input_cost"] = float(np.mean(list(per_input.values())))
        summary["bottleneck"] = tasks.bottleneck_expectations(result.network, dict(zip(names, states)))
    write_summary(out / "summary.json", summary)
    return status


def cmd_landscape(cfg: dict, out: Path, summary: dict) -> int:
    if cfg["grid_theta"] < 2 or cfg["grid_phi"] < 2:
        raise UsageError("grid needs at least 2 points per axis")
    grid = tasks.landscape_scan(cfg["grid_theta"], cfg["grid_phi"])
    _write_csv(out / "landscape_grid.csv", ("theta", "phi", "cost"), grid)
    path = tasks.landscape_descent(
        (cfg["start_theta"], cfg["start_phi"]),
        eta=cfg["path_eta"],
        momentum=cfg["path_momentum"],
        max_steps=cfg["path_steps"],
    )
    _write_csv(out / "landscape_path.csv", ("step", "theta", "phi", "cost"),
               ((int(r[0]), r[1], r[2], r[3]) for r in path))
    best = grid[np.argmin(grid[:, 2])]
    summary.update(
        status="ok",
        grid_rows=int(len(grid)),
        grid_minimum={"theta": float(best[0]), "phi": float(best[1]), "cost": float(best[2])},
        path_steps=int(len(path) - 1),
        path_final={"theta": float(path[-1, 1]), "phi": float(path[-1, 2]), "cost": float(path[-1, 3])},
        wire_labels=tasks.build_landscape_task().network.labels,
    )
    write_summary(out / "summary.json", summary)
    return EXIT_OK


def cmd_classical_check(cfg: dict, out: Path, summary: dict) -> int:
    rng = np.random.default_rng(cfg["seed"])
    sets = [((1.0, 1.0), 0.5), ((1.0, 1.0), 1.5)]
    sets += [(tuple(rng.uniform(-2, 2, 2)), 0.5) for _ in range(cfg["random_sets"])]
    report = tasks.classical_equivalence_check(sets)
    summary.update(status="ok" if report.ok else "mismatch", rows_checked=report.rows_checked,
                   weight_sets=len(sets), mismatches=report.mismatches)
    write_summary(out / "summary.json", summary)
    for line in report.mismatches:
        log.error("%s", line)
    return EXIT_OK if report.ok else EXIT_USAGE


def cmd_verify_oracle(cfg: dict, out: Path, summary: dict) -> int:
    task = tasks.build_teleport_task()
    net = assign_params(task.network, tasks.teleport_oracle_params())
    haar = tasks.haar_costs(task, net, cfg["eval_states"], cfg["eval_seed"])
    axis = [task.cost(net, s) for s in task.inputs]
    ok = max(haar.max(), max(axis)) <= 1e-9
    (out / "network.json").write_text(qnet.dumps(net))
    summary.update(status="ok" if ok else "failed", haar_cost=_stats(haar), axis_state_cost=_stats(axis),
                   tolerance=1e-9, wire_labels=task.wire_labels)
    write_summary(out / "summary.json", summary)
    return EXIT_OK if ok else EXIT_USAGE


HANDLERS = {
    "train-autoencoder": cmd_train_autoencoder,
    "train-teleport": cmd_train_teleport,
    "landscape": cmd_landscape,
    "classical-check": cmd_classical_check,
    "verify-oracle": cmd_verify_oracle,
}


def run_command(command: str, cfg: dict) -> int:
    """Run one command with a resolved config; writes artifacts under ``cfg['out']``."""
    _validate_common(cfg)
    if command.startswith("train-"):
        train_config(cfg)
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}")
    # the output location is left out so reruns elsewhere give identical summaries
    echo = {k: v for k, v in cfg.items() if k != "out"}
    summary = {"command": command, "task": command, "seed": cfg["seed"], "config": echo}
    return HANDLERS[command](cfg, out, summary)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        cfg = resolve_config(args)
        status = run_command(args.command, cfg)
    except UsageError as exc:
        print(f"qfnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("%s finished with status %d; artifacts in %s", args.command, status, cfg["out"])
    return status


if __name__ == "__main__":
    sys.exit(main())
