"""Command-line front end.

    powersim tables|compare|scaling|simulate --config <path>
             [--out <dir>] [--seed <u64>] [--deterministic-arrivals]
    powersim serve [--host H] [--port P]

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal
contract violation.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config, with_overrides
from .errors import ContractViolationError, ValidationError
from .runner import run_mode

_RUN_COMMANDS = (
    ("tables", "emit the T_setup x P_sleep sweep tables as CSV"),
    ("compare", "run every configured policy on one trace and compare"),
    ("scaling", "sweep fleet sizes and emit normalized PPW per policy"),
    ("simulate", "run the configured policies and dump raw timelines"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powersim",
        description="trace-driven data-center power management simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in _RUN_COMMANDS:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="run config file (key = value)")
        cmd.add_argument("--out", default=None, help="output directory (overrides config)")
        cmd.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config)")
        cmd.add_argument(
            "--deterministic-arrivals",
            action="store_true",
            dest="deterministic",
            help="evenly spaced arrivals and constant service times",
        )
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            import uvicorn

            from .service import app

            uvicorn.run(app, host=args.host, port=args.port)
            return 0
        cfg = load_config(args.config)
        cfg = with_overrides(
            cfg,
            mode=args.command,
            out_dir=args.out,
            seed=args.seed,
            deterministic=True if args.deterministic else None,
        )
        paths = run_mode(cfg)
        for name in sorted(paths):
            print(f"wrote {paths[name]}")
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except ContractViolationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
