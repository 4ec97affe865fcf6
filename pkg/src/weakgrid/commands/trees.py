# -*- coding: utf-8 -*-
from ..errors import ConfigError, TreeError
from ..handler import RunConfig
from ..trees import as_fraction, forest_terms, render_ascii, scheme_tree, smoothness_requirement
from .output import CommandOutput, to_csv


def cmd_trees(config: RunConfig) -> CommandOutput:
    """T^nu_0 and its forest, with coefficients and flat costs when --n is given."""
    alpha = config.alpha_value or as_fraction(1)
    tree = scheme_tree(config.nu, 0, alpha)
    terms = forest_terms(tree)
    n = config.n
    if n is not None and tree.max_branching > n:
        raise ConfigError(f"order {config.nu} needs n >= {tree.max_branching}, got n={n}")

    forest = []
    for term in terms:
        row = term.to_dict()
        if n is not None:
            row["coefficient"] = term.coefficient(n)
            row["flat_cost"] = term.flat_cost(n)
        forest.append(row)

    try:
        smoothness = smoothness_requirement(config.nu, alpha, config.beta)
    except TreeError as e:
        raise ConfigError(str(e)) from e

    data = {
        "nu": config.nu,
        "alpha": str(alpha),
        "n": n,
        "tree": str(tree),
        "nodes": len(tree),
        "smoothness": str(smoothness),
        "forest": forest,
    }

    lines = [f"T^{config.nu}_0 ({len(tree)} nodes, alpha={alpha})", render_ascii(tree), ""]
    lines.append(f"forest: {len(terms)} trees")
    for row in forest:
        extra = f"  c={row['coefficient']}  cost={row['flat_cost']}" if n is not None else ""
        lines.append(f"  {row['tree']:<28} leaf depths={row['leaf_depth_sum']:<3} ~{row['flat_cost_units']}n{extra}")

    header = ["tree", "leaf_depth_sum", "flat_cost_units"] + (["coefficient", "flat_cost"] if n is not None else [])
    csv_text = to_csv(header, ([row[k] for k in header] for row in forest))
    return CommandOutput(data=data, text="\n".join(lines), csv=csv_text)
