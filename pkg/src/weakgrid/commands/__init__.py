# commands package
from .estimate import cmd_convergence, cmd_estimate, cmd_variance
from .grids import cmd_grid
from .output import CommandOutput, emit, render
from .runs import cmd_runs
from .trees import cmd_trees

COMMANDS = {
    "trees": cmd_trees,
    "estimate": cmd_estimate,
    "convergence": cmd_convergence,
    "variance": cmd_variance,
    "grid": cmd_grid,
    "runs": cmd_runs,
}

__all__ = [
    "COMMANDS",
    "CommandOutput",
    "cmd_convergence",
    "cmd_estimate",
    "cmd_grid",
    "cmd_runs",
    "cmd_trees",
    "cmd_variance",
    "emit",
    "render",
]
