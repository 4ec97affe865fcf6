from __future__ import annotations

import argparse
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

from .config import Settings
from .errors import ConfigError, TreeError
from .estimator import EstimateMode
from .trees import PruningMode, as_fraction

COMMANDS = frozenset({"trees", "estimate", "convergence", "variance", "grid", "runs"})
FORMATS = frozenset({"json", "csv", "text"})
# commands that run the estimator and need a sampling mode
SAMPLING_COMMANDS = frozenset({"estimate", "convergence"})


@dataclass
class RunConfig:
    command: str
    model: str = "ode-logistic"
    kernel: str | None = None
    nu: int = 2
    n: int | None = None
    nus: list[int] = field(default_factory=list)
    ns: list[int] = field(default_factory=list)
    alpha: str | None = None
    beta: str = "0"
    epsilon: float | None = None
    samples: int | None = None
    exact: bool = False
    seed: int = 0
    prune: str = "none"
    fmt: str = "json"
    out: str | None = None
    pilot: int = 1000
    workers: int = 1
    chunk_size: int = 256
    tree: str | None = None
    labels: str = ""
    pruned: str = ""
    limit: int = 20

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format {self.fmt!r} (choose from {', '.join(sorted(FORMATS))})")
        if self.nu < 1:
            raise ConfigError(f"--nu must be >= 1, got {self.nu}")
        if self.n is not None and self.n < 2:
            raise ConfigError(f"--n must be >= 2, got {self.n}")
        if any(v < 2 for v in self.ns):
            raise ConfigError(f"every value of --ns must be >= 2, got {self.ns}")
        if any(v < 1 for v in self.nus):
            raise ConfigError(f"every value of --nus must be >= 1, got {self.nus}")
        if self.pilot < 2:
            raise ConfigError(f"--pilot must be >= 2, got {self.pilot}")
        if self.workers < 1 or self.chunk_size < 1:
            raise ConfigError("--workers and the chunk size must be >= 1")
        try:
            PruningMode.parse(self.prune)
            if self.alpha is not None and as_fraction(self.alpha) <= 0:
                raise ConfigError(f"--alpha must be positive, got {self.alpha}")
            if as_fraction(self.beta) < 0:
                raise ConfigError(f"--beta must be >= 0, got {self.beta}")
        except TreeError as e:
            raise ConfigError(str(e)) from e

        if self.command in SAMPLING_COMMANDS:
            _ = self.mode
        if self.command in ("estimate", "variance", "grid") and self.n is None:
            raise ConfigError(f"{self.command} needs --n")
        if self.command == "convergence":
            if len(set(self.ns)) < 2:
                raise ConfigError("convergence needs at least two values in --ns")
            if not self.nus:
                self.nus = [self.nu]
        if self.command == "variance" and self.samples is None:
            self.samples = self.pilot
        if self.command == "grid" and not self.tree:
            raise ConfigError("grid needs --tree")

    @property
    def mode(self) -> EstimateMode:
        if self.epsilon is None and self.samples is None and not self.exact:
            raise ConfigError("choose one of --eps, --samples or --exact")
        return EstimateMode(epsilon=self.epsilon, samples=self.samples, exact=self.exact)

    @property
    def alpha_value(self) -> Fraction | None:
        return None if self.alpha is None else as_fraction(self.alpha)

    def to_dict(self) -> dict[str, Any]:
        """Echo of the configuration embedded in reports."""
        data = asdict(self)
        data.pop("out")
        return data


def run_config_from_args(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Build a RunConfig from parsed CLI arguments, falling back to ``settings``."""

    def arg(name: str, default: Any = None) -> Any:
        value = getattr(args, name, None)
        return default if value is None else value

    return RunConfig(
        command=args.command,
        model=arg("model", "ode-logistic"),
        kernel=arg("kernel"),
        nu=arg("nu", 2),
        n=arg("n"),
        nus=list(arg("nus", [])),
        ns=list(arg("ns", [])),
        alpha=arg("alpha"),
        beta=arg("beta", "0"),
        epsilon=arg("eps"),
        samples=arg("samples"),
        exact=bool(arg("exact", False)),
        seed=arg("seed", 0),
        prune=arg("prune", "none"),
        fmt=arg("format", "json"),
        out=arg("out"),
        pilot=arg("pilot", settings.pilot_size),
        workers=arg("workers", settings.workers),
        chunk_size=settings.chunk_size,
        tree=arg("tree"),
        labels=arg("labels", ""),
        pruned=arg("pruned", ""),
        limit=arg("limit", 20),
    )
