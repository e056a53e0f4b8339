"""Command-line interface: ``asmcmc run|verify|sweep``.

Exit codes: 0 success, 1 failed check or runtime error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import warnings

from . import runner, verify
from .errors import ASMError, ConfigError, SinkError
from .config import load_config

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _err(msg: str):
    print(f"asmcmc: {msg}", file=sys.stderr)


def _jobs(value):
    return runner.default_jobs() if value is None else max(1, value)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        cfg = dataclasses.replace(cfg, seed=args.seed)
    results = runner.run_config(cfg, _jobs(args.jobs))
    for r in results:
        print(f"replica {r['replica']}: acceptance(last half) = "
              f"{r['acceptance_rate_last_half']:.4f}, final theta = {r['final_theta']:.6g}, "
              f"{r['trace_rows']} trace rows")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    path, failed = runner.run_sweep(cfg, _jobs(args.jobs))
    if path is None:
        print("sweep grid is empty; nothing to run")
        return EXIT_OK
    print(f"wrote {path}")
    if failed:
        _err(f"{failed} sweep cell(s) failed; see the status column")
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        verify.select(args.suite)
    except KeyError as exc:
        _err(exc.args[0])
        return EXIT_USAGE
    ctx = verify.fast_context() if args.suite == "fast" else verify.Context()
    if args.config is not None:
        ctx.target = load_config(args.config).build_target()
    try:
        out = open(args.report, "w", encoding="utf-8") if args.report else sys.stdout
    except OSError as exc:
        _err(f"cannot open report {args.report}: {exc}")
        return EXIT_USAGE
    failing = []

    def emit(name, rep):
        out.write(rep.to_json() + "\n")
        out.flush()
        status = "PASS" if rep.passed else ("FAIL" if rep.gated else "INFO")
        note = f" ({rep.notes[0]})" if rep.notes else ""
        print(f"{status} {name}{note}", file=sys.stderr)
        if rep.gated and not rep.passed and name not in failing:
            failing.append(name)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, errors = verify.run_suite(args.suite, ctx, emit)
    finally:
        if out is not sys.stdout:
            out.close()
    for e in errors:
        _err(f"check raised: {e}")
    failing += [e.split(":", 1)[0] for e in errors]
    if failing:
        _err("failed checks: " + ", ".join(failing))
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asmcmc", description="Adaptive scaling Metropolis sampler")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the configured chain(s)")
    p.add_argument("config", help="INI configuration file")
    p.add_argument("--seed", type=int, default=None, help="override [run] seed")
    p.add_argument("--jobs", type=int, default=None,
                   help=f"parallel replicas (default ${runner.JOBS_ENV} or 1)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run numerical checks")
    p.add_argument("suite", help="fast, full or proposition:<name>")
    p.add_argument("--report", default=None, help="write JSONL here instead of stdout")
    p.add_argument("--config", default=None, help="check the target of this configuration")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run the [sweep] grid of a configuration")
    p.add_argument("config", help="INI configuration file")
    p.add_argument("--jobs", type=int, default=None,
                   help=f"parallel cells (default ${runner.JOBS_ENV} or 1)")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except SinkError as exc:
        _err(f"output error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_USAGE
    except ASMError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
