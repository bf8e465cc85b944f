"""Command line: estimate, coding, verify, report.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 resource cap.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InputError, ResourceError
from .experiment import (
    MODES,
    emit_csv,
    format_table,
    make_config,
    parse_config_text,
    read_csv,
    run,
    _number,
)
from .verify import SUITE_NAMES, Session, verify

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep the message short
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _eps(text: str) -> tuple[float, ...]:
    return tuple(_number(t) for t in text.split(",") if t.strip())


def _experiment_flags(p: argparse.ArgumentParser, coding: bool) -> None:
    p.add_argument("--config", type=Path, help="flat key = value file; flags override it")
    p.add_argument("--system", help="map name, e.g. square, north-south:0.5, rotation:1/3, square*square")
    if not coding:
        p.add_argument("--mode", choices=[m for m in MODES if m != "coding"])
    p.add_argument("--nfold", type=int, dest="n_fold", help="n for lifted modes, k for power")
    p.add_argument("--m", type=int, help="collapsed level for susp")
    p.add_argument("--mesh", type=_number)
    p.add_argument("--base-points", type=int, dest="base_points")
    p.add_argument("--eps", type=_eps, help="comma list, strictly decreasing")
    p.add_argument("--nmax", type=int)
    p.add_argument("--window", type=float)
    p.add_argument("--second", help="second factor for product mode")
    if coding:
        p.add_argument("--letters", help='boxes, e.g. "K=0.2:0.3" or "A=0.2:0.3,0:1;B=0:1,0.2:0.3"')
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polyent", description="Polynomial entropy estimates for maps and their induced maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _experiment_flags(sub.add_parser("estimate", help="run one experiment"), coding=False)
    _experiment_flags(sub.add_parser("coding", help="word census of orbit codings"), coding=True)
    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--seed", type=int, default=0)
    r = sub.add_parser("report", help="print a results CSV as a table")
    r.add_argument("csv", type=Path)
    return p


_FLAG_KEYS = ("system", "mode", "n_fold", "m", "mesh", "base_points", "eps", "nmax", "window",
              "second", "letters", "seed", "out", "jobs")


def _config(args):
    values = parse_config_text(args.config.read_text(encoding="utf-8")) if args.config else {}
    for key in _FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.command == "coding":
        values["mode"] = "coding"
    return make_config(values)


def _experiment(args) -> int:
    result = run(_config(args))
    if not result.config.out:
        sys.stdout.write(emit_csv(result.rows))
    else:
        sys.stdout.write(format_table(result.rows))
    return EXIT_OK


def _verify(args) -> int:
    results = verify(args.suite, Session(seed=args.seed), emit=lambda line: print(line, flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


def _report(args) -> int:
    sys.stdout.write(format_table(read_csv(args.csv)))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"estimate": _experiment, "coding": _experiment, "verify": _verify, "report": _report}
    try:
        return handler[args.command](args)
    except ResourceError as exc:
        print(f"polyent: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InputError as exc:
        print(f"polyent: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"polyent: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
