"""``semiquant`` command line: run the pipeline on one metric or a batch."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Optional, Sequence

from .oracle import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL
from .report import (
    DEFAULT_STAGES,
    EXIT_DISCREPANCY,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    FORMATS,
    InputError,
    RunConfig,
    config_from_mapping,
    dumps,
    parse_param,
    render_text,
    run,
)

SEED_ENV = "SEMIQUANT_SEED"


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; here 2 means discrepancies."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="semiquant",
        description="Classical geometry and first-order quantization of E(y)dx⊗dx + G(y)dy⊗dy.",
    )
    p.add_argument("--metric-E", dest="metric_E", metavar="EXPR", help="coefficient of dx⊗dx")
    p.add_argument("--metric-G", dest="metric_G", metavar="EXPR", help="coefficient of dy⊗dy")
    p.add_argument(
        "--param", action="append", default=[], metavar="NAME[=VALUE]",
        help="declare a parameter symbol, optionally pinning it to a rational value (repeatable)",
    )
    p.add_argument(
        "--stages", default=",".join(DEFAULT_STAGES),
        help="comma-separated subset of classical,quantum,conditions,qlc-family,t-deform",
    )
    p.add_argument("--seed", type=_u64, default=None, help=f"oracle seed (default {DEFAULT_SEED:#x}, or ${SEED_ENV})")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="oracle sample points")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="oracle relative tolerance")
    p.add_argument("--omega-scale", dest="omega_scale", default="1", metavar="EXPR",
                   help="integration constant k in ω¹² = k/√(EG)")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--batch", metavar="PATH", help="JSON list of run configurations")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for --batch")
    return p


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return DEFAULT_SEED
    try:
        return _u64(env.strip())
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"${SEED_ENV}: {exc}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        E=args.metric_E,
        G=args.metric_G,
        params=tuple(parse_param(p) for p in args.param),
        stages=tuple(s.strip() for s in args.stages.split(",") if s.strip()),
        seed=_seed(args),
        samples=args.samples,
        tol=args.tol,
        omega_scale=args.omega_scale,
    )


def _run_entry(config: RunConfig) -> tuple[dict, int]:
    try:
        report = run(config)
    except (InputError, ValueError) as exc:
        return {"error": str(exc), "input": config.echo()}, EXIT_INPUT_ERROR
    return report.data, report.exit_code


def _load_batch(path: str, base: RunConfig) -> list[RunConfig]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read batch file {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise InputError("batch file must hold a JSON list")
    return [config_from_mapping(entry, base) for entry in raw]


def _emit(data, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(dumps(data) + "\n")
    else:
        sys.stdout.write("\n".join(render_text(data)) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.batch:
            base = replace(
                RunConfig(),
                seed=_seed(args), samples=args.samples, tol=args.tol, omega_scale=args.omega_scale,
            )
            configs = _load_batch(args.batch, base)
        else:
            configs = [config_from_args(args)]
    except InputError as exc:
        print(f"semiquant: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    if len(configs) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_entry, configs))
    else:
        results = [_run_entry(c) for c in configs]

    for data, code in results:
        if code == EXIT_INPUT_ERROR:
            print(f"semiquant: {data['error']}", file=sys.stderr)
        elif code == EXIT_DISCREPANCY:
            print(f"semiquant: {len(data['discrepancies'])} discrepancy(ies) recorded", file=sys.stderr)

    if args.batch:
        if args.format == "json":
            _emit([data for data, _ in results], "json")
        else:
            for i, (data, _) in enumerate(results):
                sys.stdout.write(f"# entry {i}\n")
                _emit(data, "text")
    else:
        data, code = results[0]
        if code != EXIT_INPUT_ERROR:
            _emit(data, args.format)

    codes = {code for _, code in results}
    if EXIT_INPUT_ERROR in codes:
        return EXIT_INPUT_ERROR
    return EXIT_DISCREPANCY if EXIT_DISCREPANCY in codes else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
