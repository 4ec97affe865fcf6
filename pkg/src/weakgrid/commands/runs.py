# -*- coding: utf-8 -*-
from ..handler import RunConfig
from ..loader import load_run_ledger
from .output import CommandOutput, to_csv

COLUMNS = ["timestamp", "command", "status", "value", "ci", "elapsed", "run_count"]


def cmd_runs(config: RunConfig) -> CommandOutput:
    rows = load_run_ledger().recent(limit=config.limit)
    text = "\n".join(
        f"{r['timestamp']}  {r['command']:<12} {r['status']:<8} x{r['run_count']}  {r['value'] if r['value'] is not None else ''}"
        for r in rows
    )
    return CommandOutput(data=rows, text=text or "no runs recorded", csv=to_csv(COLUMNS, ([r[c] for c in COLUMNS] for r in rows)))
