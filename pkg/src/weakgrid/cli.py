"""
Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Sequence

from .commands import COMMANDS, CommandOutput, emit
from .config import get_settings
from .errors import ConfigError, WeakGridError
from .handler import RunConfig, run_config_from_args
from .kernels import KERNELS
from .loader import load_run_ledger
from .logging_config import setup_logging
from .models import list_models
from .trees import PruningMode

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakgrid", description="Arbitrary-order weak approximation by random-grid corrections.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, sampling: bool = True) -> None:
        p.add_argument("--format", choices=["json", "csv", "text"], default="json")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--alpha", help="kernel order parameter, e.g. 1 or 3/2 (default: the kernel's)")
        if sampling:
            p.add_argument("--model", default="ode-logistic", choices=list_models())
            p.add_argument("--kernel", choices=sorted(KERNELS), help="default: the model's")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--workers", type=int)
            p.add_argument("--pilot", type=int, help="pilot samples per term")

    p = sub.add_parser("trees", help="scheme tree, forest, coefficients and costs")
    common(p, sampling=False)
    p.add_argument("--nu", type=int, default=4)
    p.add_argument("--n", type=int)
    p.add_argument("--beta", default="0")

    p = sub.add_parser("estimate", help="order-nu estimate of E[f(X_T)]")
    common(p)
    p.add_argument("--nu", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--eps", type=float, help="target CI half-width per term")
    mode.add_argument("--samples", type=int, help="fixed samples per term")
    mode.add_argument("--exact", action="store_true", help="enumerate every labeling (noise-free kernels)")
    p.add_argument("--prune", choices=[m.value for m in PruningMode], default="none")

    p = sub.add_parser("convergence", help="error against the reference over n, one slope per nu")
    common(p)
    p.add_argument("--nus", type=_int_list, default=[2])
    p.add_argument("--ns", type=_int_list, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--eps", type=float)
    mode.add_argument("--samples", type=int)
    mode.add_argument("--exact", action="store_true")
    p.add_argument("--prune", choices=[m.value for m in PruningMode], default="none")

    p = sub.add_parser("variance", help="per-term standard deviations")
    common(p)
    p.add_argument("--nu", type=int, default=4)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("grid", help="pruned grid of a labeled tree, exact fractions")
    p.add_argument("--format", choices=["json", "csv", "text"], default="json")
    p.add_argument("--out")
    p.add_argument("--tree", required=True, help='e.g. "{∅,1,2,21}"')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--labels", default="", help='e.g. "∅=0,2;2=1"')
    p.add_argument("--pruned", default="", help='leaves to prune, e.g. "1,21"')

    p = sub.add_parser("runs", help="recent entries of the run ledger")
    p.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p.add_argument("--out")
    p.add_argument("--limit", type=int, default=20)

    return parser


def _record(config: RunConfig | None, status: str, output: CommandOutput | None, elapsed: float) -> None:
    if config is None or config.command == "runs":
        return
    ledger = load_run_ledger()
    ledger.log_run(
        config.command,
        config.to_dict(),
        status,
        value=output.value if output else None,
        ci=output.ci if output else None,
        elapsed=elapsed,
    )


def main(argv: Sequence[str] | None = None) -> int:
    settings = get_settings()
    setup_logging(level=settings.log_level, name=__package__ or "weakgrid", log_file=settings.log_file)

    config = None
    output = None
    status = "ok"
    code = EXIT_OK
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        config = run_config_from_args(args, settings)
        output = COMMANDS[config.command](config)
        emit(output, config.fmt, config.out)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        status, code = "usage", EXIT_USAGE
    except WeakGridError as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        status, code = "error", EXIT_RUNTIME
    elapsed = time.perf_counter() - start
    if config is not None:
        logger.info("%s finished in %.2fs (%s)", config.command, elapsed, status)
    _record(config, status, output, elapsed)
    return code
