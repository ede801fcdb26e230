"""Command-line entry point: ``tdb-spde {run,validate,list-cases}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import run_case
from .config import CASES, read_config
from .errors import CaseRunError, ConfigError

log = logging.getLogger("tdb_spde")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tdb-spde", description="Low-rank stochastic boundary benchmarks")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark config")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (default: $TDB_SPDE_OUT/<case> or runs/<case>)")
    run.add_argument("--threads", type=int, default=None, help="BLAS/LAPACK thread count")
    run.add_argument("--preset", choices=("desk", "paper"), default="desk")
    run.add_argument("--no-timing", action="store_true", help="skip the stochastic vs homogeneous step timing")

    val = sub.add_parser("validate", help="parse and validate a config without running it")
    val.add_argument("config")
    val.add_argument("--preset", choices=("desk", "paper"), default="desk")

    sub.add_parser("list-cases", help="list the available benchmark cases")
    return p


def _limit_threads(k: int | None):
    if k is None:
        return None
    if k < 1:
        raise ConfigError(f"--threads must be positive, got {k}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=k)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "list-cases":
            for name, desc in CASES.items():
                print(f"{name:<18} {desc}")
            return 0
        cfg = read_config(args.config, preset=args.preset)
        if args.command == "validate":
            size = f"{cfg.n1}x{cfg.n2}" if cfg.is_2d else f"{cfg.n}"
            print(f"ok: {cfg.case} grid={size} d={cfg.d} s={cfg.sample_count} r={cfg.r} "
                  f"methods={','.join(cfg.methods)} dt={cfg.dt} t_final={cfg.t_final}")
            return 0
        limiter = _limit_threads(args.threads)
        try:
            report = run_case(cfg, args.out, timing=not args.no_timing)
        finally:
            if limiter is not None:
                limiter.restore_original_limits()
        sys.stdout.write(report.text())
        print(f"outputs written to {report.out_dir}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CaseRunError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
