"""The branching evaluator against explicit grids, and label invariance on a linear ODE."""

import numpy as np
import pytest

from src.weakgrid.estimator import RecordingFeed, gamma_branch, gamma_oracle, gamma_sample
from src.weakgrid.random_grids import label_tree
from src.weakgrid.trees import forest_of, scheme_tree

FOREST = forest_of(scheme_tree(4, 0, 1))


def check_equivalence(kernel, x0, ns, seeds):
    for tree in FOREST:
        for n in ns:
            if tree.max_branching > n:
                continue
            for seed in seeds:
                rng = np.random.default_rng(seed)
                lt = label_tree(tree, n, rng)
                feed = RecordingFeed(kernel, rng)
                fast = gamma_branch(kernel, lt, x0, feed)
                slow = gamma_oracle(kernel, lt, x0, feed.recorded)
                np.testing.assert_array_equal(fast.signs, slow.signs)
                np.testing.assert_allclose(fast.states, slow.states, rtol=1e-12, atol=1e-300)


class TestOracleEquivalence:
    """gamma_branch and gamma_oracle agree entry by entry on shared noise."""

    def test_ode(self, logistic):
        check_equivalence(logistic, 0.4, (2, 3, 5), range(20))

    def test_sde(self, quadratic_sde):
        check_equivalence(quadratic_sde, 1.0, (2, 3, 5), range(20))

    def test_pdmp(self, tcp):
        check_equivalence(tcp, 1.0, (3,), range(5))


@pytest.mark.parametrize("tree", FOREST, ids=str)
def test_linear_ode_corrections_ignore_labels(linear, tree):
    rng = np.random.default_rng(7)
    values = [gamma_sample(linear, tree, 5, 1.0, rng).signed_payoff(linear.spec.payoff) for _ in range(100)]
    # payoff scale is O(1)
    assert max(values) - min(values) <= 1e-12
