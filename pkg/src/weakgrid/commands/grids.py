# -*- coding: utf-8 -*-
from ..errors import ConfigError, WeakGridError
from ..handler import RunConfig
from ..random_grids import LabeledTree, birth_time, grid_to_json, pruned_grid
from ..trees import Tree, Word, format_word, parse_word, render_ascii
from .output import CommandOutput, to_csv


def parse_labels(text: str) -> dict[Word, tuple[int, ...]]:
    """Parse "∅=0,2;2=1" into {(): (0, 2), (2,): (1,)}."""
    labels = {}
    for item in filter(None, (part.strip() for part in text.split(";"))):
        word, sep, values = item.partition("=")
        if not sep:
            raise ConfigError(f"label {item!r} must look like word=k1,k2")
        try:
            labels[parse_word(word)] = tuple(int(v) for v in values.split(",") if v.strip())
        except ValueError as e:
            raise ConfigError(f"invalid label {item!r}: {e}") from e
    return labels


def cmd_grid(config: RunConfig) -> CommandOutput:
    """The grid of A minus --pruned for explicit labels."""
    try:
        tree = Tree.parse(config.tree)
        lt = LabeledTree(tree, config.n, parse_labels(config.labels))
        pruned = {parse_word(w) for w in config.pruned.split(",") if w.strip()}
        g = pruned_grid(lt, pruned)
    except WeakGridError as e:
        raise ConfigError(str(e)) from e

    data = grid_to_json(g)
    data.update(lt.to_dict())
    data["pruned"] = sorted(format_word(u) for u in pruned)
    data["birth_times"] = {format_word(u): str(birth_time(lt, u)) for u in tree.words}

    labels = {u: str(list(ks)) for u, ks in lt.kappa.items()}
    lines = [render_ascii(tree, labels), "", " < ".join(data["times"])]
    csv_text = to_csv(["time", "step_level"], zip(data["times"], [""] + data["step_levels"], strict=True))
    return CommandOutput(data=data, text="\n".join(lines), csv=csv_text)
