# -*- coding: utf-8 -*-
import csv
import io
import json
import sys
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import ConfigError


@dataclass
class CommandOutput:
    data: Any
    text: str
    csv: str | None = None
    # headline figures recorded in the run ledger
    value: float | None = None
    ci: float | None = None


def to_json(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=4)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render(output: CommandOutput, fmt: str) -> str:
    if fmt == "json":
        return to_json(output.data) + "\n"
    if fmt == "csv":
        if output.csv is None:
            raise ConfigError("this command has no csv output")
        return output.csv
    return output.text.rstrip("\n") + "\n"


def emit(output: CommandOutput, fmt: str, out: str | None = None) -> None:
    """Write the rendered output to ``out`` or stdout."""
    rendered = render(output, fmt)
    if out:
        path = Path(out).expanduser()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
