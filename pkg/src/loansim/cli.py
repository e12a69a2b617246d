"""Command-line entry point.

Subcommands:
    generate   write a synthetic population CSV
    run        run one method (or all five) for a single configuration
    sweep      execute a grid of configurations, resumably
    summarize  aggregate a results CSV into ranks / traces / dist tables

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
Every config key can be overridden via an environment variable with the
SIM_ prefix, e.g. SIM_DIM=2000.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError
from .params import load_run_params, load_config_values, parse_method
from .records import run_record_rows, write_results_csv
from .simulator import run_all_methods, run_method
from .policies import Method
from .sweep import (execute_sweep, grid_from_values, load_records, summarize,
                    write_summary_csv)
from .synthgen import generate_population, write_population_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loansim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a population CSV")
    gen.add_argument("--config", default=None, help="key = value config file")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=None, help="override random_seed")

    run = sub.add_parser("run", help="run one configuration")
    run.add_argument("--config", default=None)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--method", default="all",
                     help="one of %s, or all" % ", ".join(m.value for m in Method))

    swp = sub.add_parser("sweep", help="run a configuration grid")
    swp.add_argument("--config", required=True, help="grid file; comma lists are swept")
    swp.add_argument("--out", required=True)
    swp.add_argument("--workers", type=int, default=1)

    summ = sub.add_parser("summarize", help="aggregate a results CSV")
    summ.add_argument("--input", required=True, help="results CSV from run/sweep")
    summ.add_argument("--out", required=True)
    summ.add_argument("--which", required=True, choices=["ranks", "traces", "dist"])
    return parser


def cmd_generate(args) -> int:
    params = load_run_params(args.config, args.seed)
    pop = generate_population(params.bias_config(), params.dim, params.random_seed)
    write_population_csv(pop, args.out)
    print(f"wrote {len(pop)} applicants to {args.out}")
    return 0


def cmd_run(args) -> int:
    params = load_run_params(args.config, args.seed)
    cfg = params.sim_config()
    rows = []
    if args.method == "all":
        results = run_all_methods(cfg)
        for method in Method:
            rows.extend(run_record_rows(params, method, results[method]))
    else:
        method = parse_method(args.method)
        rows.extend(run_record_rows(params, method, run_method(cfg, method)))
    write_results_csv(args.out, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    grid = grid_from_values(load_config_values(args.config))
    summary = execute_sweep(grid, args.workers, args.out)
    print(f"{summary.configs_run} configs run, {summary.configs_skipped} configs "
          f"skipped, {summary.rows_written} rows written")
    return 0


def cmd_summarize(args) -> int:
    frame = summarize(load_records(args.input), args.which)
    write_summary_csv(frame, args.out)
    print(f"wrote {len(frame)} {args.which} rows to {args.out}")
    return 0


_COMMANDS = {"generate": cmd_generate, "run": cmd_run,
             "sweep": cmd_sweep, "summarize": cmd_summarize}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"loansim: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"loansim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
