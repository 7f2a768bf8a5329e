"""Command-line entry point: ``sconcave <experiment> [options]``.

Exit status is 0 when every verdict passes, 2 when an inequality check
fails beyond tolerance, and 1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import sys
from contextlib import contextmanager

from .config import ConfigError, ExperimentConfig, load_config
from .runners import (
    BBLRow,
    ConvergenceResult,
    Theorem1Result,
    run_bbl,
    run_brunn,
    run_convergence,
    run_shadow_scan,
    run_theorem1,
)
from ..smeans import SConcaveFn

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return v


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_csv(header, rows, path=None):
    with _sink(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(float(v)) if hasattr(v, "dtype") else _fmt(v) for v in row])


def _default_config(kind: str) -> ExperimentConfig:
    if kind == "theorem1":
        return ExperimentConfig(
            "theorem1",
            f=SConcaveFn.cap([5.0], 1.0, 1.0, 1.0),
            g=SConcaveFn.cap([-3.0], 1.0, 1.0, 1.0),
            s=1.0, N=4, M=4, trials=10_000,
        )
    if kind == "converge":
        return ExperimentConfig("converge", f=SConcaveFn.cap([0.0], 1.0, 1.0, 1.0), s=1.0, trials=50)
    return ExperimentConfig(kind)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sconcave", description="Stochastic s-concave geometry experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("theorem1", "stochastic dominance of rearranged sup-convolutions"),
        ("bbl", "integrated power-mean inequality and its rearranged form"),
        ("converge", "integral ratio of [f]_N to f as N grows"),
        ("shadow", "convexity scan of a linear parameter system"),
        ("brunn", "concavity of chord lengths of a polygon"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for trials")
        sp.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    return p


def _resolve(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(f"config is for '{cfg.experiment}', not '{args.command}'")
    else:
        cfg = _default_config(args.command)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg.seed = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        cfg.trials = args.trials
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if args.out is not None:
        cfg.out = args.out
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        cmd = args.command
        if cmd == "theorem1":
            res: Theorem1Result = run_theorem1(cfg, threads=args.threads)
            write_csv(res.header, res.rows(), cfg.out)
            if any(res.flagged):
                print(f"flagged trials (quadrature): original={res.flagged[0]} rearranged={res.flagged[1]}",
                      file=sys.stderr)
            ok = res.passed
        elif cmd == "bbl":
            rows = run_bbl(cfg)
            write_csv(BBLRow.header, [r.row() for r in rows], cfg.out)
            ok = all(r.passed for r in rows)
        elif cmd == "converge":
            conv: ConvergenceResult = run_convergence(cfg)
            write_csv(conv.header, conv.rows(), cfg.out)
            ok = conv.passed
        else:
            report = run_shadow_scan(cfg) if cmd == "shadow" else run_brunn(cfg)
            write_csv(("t", "value", "second_difference"), report.rows(), cfg.out)
            ok = report.ok
    except ConfigError as exc:
        print(f"sconcave: config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"sconcave: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
