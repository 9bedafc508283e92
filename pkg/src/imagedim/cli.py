"""Command-line entry point: ``python -m imagedim <subcommand>``.

Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import BudgetExceeded, ParameterError
from .fields import simulate
from .harness import SUITE, build_set, run_experiment, run_probe, suite_case, verify_theorem
from .profiles import profile_curve
from .sampling import Seed

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--case", help="built-in suite case id")
    p.add_argument("--seed", type=_seed, help="master seed (overrides the config)")
    p.add_argument("--out", help="output directory (default: stdout only)")
    p.add_argument("--budget", type=float, help="wall-clock budget in seconds")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="imagedim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("simulate", "simulate one d-dimensional path"),
                        ("dims", "estimate dimensions of X(E) and its image measure"),
                        ("profile", "packing dimension profile of E"),
                        ("probe", "Monte Carlo probe of (C1) / (C2)"),
                        ("verify", "run one suite case against its prediction"),
                        ("suite", "run every suite case")]:
        _common(sub.add_parser(name, help=help_))
    return parser


def _resolve(args) -> ExperimentConfig:
    if args.config and args.case:
        raise ParameterError("give either --config or --case, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.case:
        cfg = suite_case(args.case)
    else:
        raise ParameterError("need --config or --case")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _rows_out(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    buf = io.StringIO()
    keys = sorted({k for r in rows for k in r})
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def _cmd_simulate(args) -> int:
    cfg = _resolve(args)
    path = simulate(cfg.field, Seed(cfg.seed))
    if args.format == "csv":
        text = path.to_csv()
    else:
        text = json.dumps({"header": path.header(), "times": path.times.tolist(),
                           "values": path.values.tolist()}, sort_keys=True) + "\n"
    _emit(text, args.out, cfg.case_id, "path." + args.format)
    return EXIT_OK


def _emit(text: str, out: str | None, case_id: str, name: str) -> None:
    if out:
        d = os.path.join(out, case_id)
        os.makedirs(d, exist_ok=True)
        with open(os.path.join(d, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_dims(args) -> int:
    cfg = _resolve(args)
    report = run_experiment(cfg, out=args.out, budget=args.budget, write=bool(args.out))
    rows = []
    depth = report["set_meta"].get("depth")
    for i, r in enumerate(report["replicas"]):
        for key in ("box", "lower_box", "upper_box", "hausdorff", "measure_lower", "measure_upper"):
            if key in r:
                rows.append({"estimator": key, "replica": i, "value": r[key],
                             "std_error": r["box_se"] if key == "box" else None,
                             "window": r["box_window"], "depth": depth, "seed": r["seed"]})
    sys.stdout.write(_rows_out(rows, args.format))
    return EXIT_OK if report["complete"] else EXIT_FAIL


def _cmd_profile(args) -> int:
    cfg = _resolve(args)
    E, mu = build_set(cfg.set, cfg.field.grid_n)
    est = cfg.estimators
    s_grid = np.geomspace(0.05, E.ambient_dim + 1, est.s_points)
    curve = profile_curve((E, mu), s_grid, None, est.n_probe, Seed(cfg.seed))
    if args.format == "csv":
        text = curve.to_csv()
    else:
        text = json.dumps({"s": curve.s_grid.tolist(), "value": curve.values.tolist(),
                           "std_error": curve.std_errors.tolist(), "kind": curve.kind,
                           "diagnostics": curve.diagnostics}, sort_keys=True) + "\n"
    _emit(text, args.out, cfg.case_id, "profile." + args.format)
    return EXIT_OK


def _cmd_probe(args) -> int:
    cfg = _resolve(args)
    rep = run_probe(cfg, out=args.out, write=bool(args.out))
    sys.stdout.write(rep.tail_csv() if args.format == "csv" else rep.to_json() + "\n")
    return EXIT_OK if rep.verdict == "consistent" else EXIT_FAIL


def _print_case(v, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(v.as_dict(), sort_keys=True) + "\n")
    else:
        sys.stdout.write(v.line() + "\n")


def _cmd_verify(args) -> int:
    cfg = _resolve(args)
    v = verify_theorem(cfg, budget=args.budget, out=args.out, write=bool(args.out))
    _print_case(v, args.format)
    return EXIT_OK if v.passed and v.complete else EXIT_FAIL


def _cmd_suite(args) -> int:
    start = time.monotonic()
    ok = True
    for cid in SUITE:
        left = None if args.budget is None else max(0.0, args.budget - (time.monotonic() - start))
        v = verify_theorem(cid, budget=left, seed=args.seed, out=args.out, write=bool(args.out))
        _print_case(v, args.format)
        ok &= v.passed and v.complete
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"simulate": _cmd_simulate, "dims": _cmd_dims, "profile": _cmd_profile, "probe": _cmd_probe,
            "verify": _cmd_verify, "suite": _cmd_suite}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParameterError, BudgetExceeded) as exc:
        sys.stderr.write(f"imagedim: error: {exc}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); not an error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
