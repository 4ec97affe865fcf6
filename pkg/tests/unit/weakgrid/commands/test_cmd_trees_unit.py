"""Unit tests for src/weakgrid/commands/trees.py"""

import pytest

from src.weakgrid.commands.trees import cmd_trees
from src.weakgrid.errors import ConfigError
from src.weakgrid.handler import RunConfig


class TestCmdTrees:
    """Tests for cmd_trees."""

    def test_order_four(self):
        data = cmd_trees(RunConfig(command="trees", nu=4)).data
        assert data["tree"] == "{∅,1,11,111,2,21,3}"
        assert data["nodes"] == 7
        assert len(data["forest"]) == 9
        assert "coefficient" not in data["forest"][0]

    def test_with_n(self):
        data = cmd_trees(RunConfig(command="trees", nu=4, n=5)).data
        row = next(r for r in data["forest"] if r["tree"] == "{∅,1,2,21}")
        assert row["coefficient"] == 50
        assert row["flat_cost"] == 52

    def test_smoothness(self):
        assert cmd_trees(RunConfig(command="trees", nu=4, beta="4")).data["smoothness"] == "16"

    def test_alpha(self):
        data = cmd_trees(RunConfig(command="trees", nu=4, alpha="2")).data
        assert data["alpha"] == "2"
        assert data["tree"] == "{∅,1}"

    def test_n_below_branching(self):
        with pytest.raises(ConfigError):
            cmd_trees(RunConfig(command="trees", nu=4, n=2))

    def test_csv_header(self):
        csv_text = cmd_trees(RunConfig(command="trees", nu=2, n=3)).csv
        assert csv_text.splitlines()[0] == "tree,leaf_depth_sum,flat_cost_units,coefficient,flat_cost"
