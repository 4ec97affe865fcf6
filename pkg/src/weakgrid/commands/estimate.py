# -*- coding: utf-8 -*-
import logging

from ..estimator import convergence_sweep, estimate, variance_table
from ..handler import RunConfig
from ..kernels import build_kernel
from ..loader import known_reference, load_reference
from ..models import get_model
from .output import CommandOutput, to_csv

logger = logging.getLogger(__name__)


def _kernel_for(config: RunConfig):
    model = get_model(config.model)
    return model, build_kernel(config.kernel, model.spec)


def cmd_estimate(config: RunConfig) -> CommandOutput:
    model, kernel = _kernel_for(config)
    report = estimate(
        kernel,
        config.nu,
        config.n,
        config.mode,
        seed=config.seed,
        pruning=config.prune,
        alpha=config.alpha_value,
        pilot_size=config.pilot,
        workers=config.workers,
        chunk_size=config.chunk_size,
    )
    reference = known_reference(model)
    data = report.to_dict()
    if reference is not None:
        data["reference"] = reference.to_dict()
    data["config"] = config.to_dict()

    lines = [
        f"{model.id} ({kernel.name}) nu={report.nu} n={report.n}: {report.value:.10g} ± {report.ci_half_width:.3g}",
    ]
    for term in report.terms:
        lines.append(f"  {term.name:<28} {term.mean:+.6e} ± {term.ci_half_width:.2e}  N={term.samples}")
    if report.dropped:
        lines.append(f"  pruned: {', '.join(report.dropped)}")
    if reference is not None:
        lines.append(f"  reference {reference.value:.10g} ({reference.provenance})")

    return CommandOutput(data=data, text="\n".join(lines), value=report.value, ci=report.ci_half_width)


def cmd_convergence(config: RunConfig) -> CommandOutput:
    model, kernel = _kernel_for(config)
    reference = load_reference(model)
    sweep = convergence_sweep(
        kernel,
        config.nus,
        config.ns,
        config.mode,
        reference.value,
        seed=config.seed,
        pruning=config.prune,
        alpha=config.alpha_value,
        pilot_size=config.pilot,
        workers=config.workers,
        chunk_size=config.chunk_size,
    )
    data = sweep.to_dict()
    data["reference"] = reference.to_dict()
    data["config"] = config.to_dict()

    slopes = [f"nu={nu}: slope {'n/a' if s is None else f'{s:.3f}'}" for nu, s in sweep.slopes.items()]
    text = sweep.to_csv() + "\n" + "\n".join(slopes)
    return CommandOutput(data=data, text=text, csv=sweep.to_csv())


def cmd_variance(config: RunConfig) -> CommandOutput:
    """Per-term standard deviations of c(A)·Gamma^A f."""
    model, kernel = _kernel_for(config)
    rows = variance_table(
        kernel,
        config.nu,
        config.n,
        config.samples,
        seed=config.seed,
        alpha=config.alpha_value,
        workers=config.workers,
        chunk_size=config.chunk_size,
    )
    header = ["tree", "std", "min_order", "samples"]
    data = {"model": model.id, "kernel": kernel.name, "rows": rows, "config": config.to_dict()}
    text = "\n".join(f"{r['tree']:<28} {r['std']:.2e}  order {r['min_order']}" for r in rows)
    return CommandOutput(data=data, text=text, csv=to_csv(header, ([r[k] for k in header] for r in rows)))
