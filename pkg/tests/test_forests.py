"""Forest counts, scheme-tree shapes and the cost model."""

import pytest

from src.weakgrid.random_grids import enumerate_labelings, pruned_grid
from src.weakgrid.trees import Tree, flat_cost, forest_of, scheme_tree

# T^6_0 node for node
ORDER_SIX = (
    "{∅,1,11,111,1111,11111,12,2,21,211,2111,3,31,311,4,41,5}"
)


class TestForestCounts:
    """card F(T^nu_0) at alpha = 1."""

    @pytest.mark.parametrize("nu,count", [(1, 1), (2, 2), (4, 9), (6, 67)])
    def test_small_orders(self, nu, count):
        assert len(forest_of(scheme_tree(nu, 0, 1))) == count

    @pytest.mark.slow
    def test_order_ten(self):
        assert len(forest_of(scheme_tree(10, 0, 1))) == 29135


class TestSchemeTreeShapes:
    """Golden scheme trees."""

    def test_order_four(self):
        assert scheme_tree(4, 0, 1) == Tree.parse("{∅,1,11,111,2,21,3}")

    def test_order_six(self):
        assert scheme_tree(6, 0, 1) == Tree.parse(ORDER_SIX)

    def test_every_forest_member_is_a_subtree(self):
        tree = scheme_tree(6, 0, 1)
        for member in forest_of(tree):
            assert member.nodes <= tree.nodes


class TestCostModel:
    """Flat cost against the leading figures and against direct enumeration."""

    @pytest.mark.parametrize(
        "text,slope",
        [
            ("{∅,1}", 3),
            ("{∅,1,11}", 5),
            ("{∅,1,2}", 8),
            ("{∅,1,11,111}", 7),
            ("{∅,1,11,2}", 12),
            ("{∅,1,2,21}", 12),
            ("{∅,1,11,2,21}", 16),
            ("{∅,1,2,3}", 20),
        ],
    )
    def test_leading_coefficient(self, text, slope):
        tree = Tree.parse(text)
        assert flat_cost(tree, 1001) - flat_cost(tree, 1000) == slope

    def test_direct_enumeration(self):
        for tree in forest_of(scheme_tree(4, 0, 1)):
            leaves = tree.leaves
            for n in range(max(2, tree.max_branching), 7):
                for lt in list(enumerate_labelings(tree, n))[:3]:
                    total = sum(
                        pruned_grid(lt, {leaves[k] for k in range(len(leaves)) if mask >> k & 1}).n_steps
                        for mask in range(2 ** len(leaves))
                    )
                    assert total == flat_cost(tree, n)
