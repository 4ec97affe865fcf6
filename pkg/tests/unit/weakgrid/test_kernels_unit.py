"""Unit tests for src/weakgrid/kernels.py"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from src.weakgrid.errors import ConfigError, GridError, KernelError, RateBoundError
from src.weakgrid.kernels import (
    EulerKernel,
    JumpNoise,
    ModelSpec,
    NinomiyaVictoirKernel,
    NVNoise,
    PDMPKernel,
    as_states,
    build_kernel,
    rk4_flow,
    run_on_grid,
    step_size,
)
from src.weakgrid.models import ode_logistic, pdmp_tcp, sde_quadratic
from src.weakgrid.random_grids import LabeledTree, grid, pruned_grid
from src.weakgrid.trees import Tree


def noisy_constant_spec():
    """dX = dW with no drift."""
    return ModelSpec(
        name="brownian",
        dimension=1,
        x0=(0.0,),
        horizon=1.0,
        payoff=lambda x: x[:, 0],
        drift=lambda x: np.zeros_like(x),
        diffusion=lambda x: np.ones(x.shape + (1,)),
        noise_dim=1,
    )


class TestHelpers:
    """Tests for as_states and step_size."""

    def test_scalar_becomes_one_row(self):
        assert as_states(0.4).shape == (1, 1)

    def test_dimension_mismatch(self):
        with pytest.raises(KernelError):
            as_states([[1.0, 2.0]], dimension=1)

    def test_step_size(self):
        assert step_size(1.0, 3, 2) == 1.0 / 9


class TestModelSpec:
    """Tests for ModelSpec validation."""

    def test_x0_dimension(self):
        with pytest.raises(ConfigError):
            ModelSpec("bad", 2, (1.0,), 1.0, payoff=lambda x: x, drift=lambda x: x)

    def test_horizon_positive(self):
        with pytest.raises(ConfigError):
            ModelSpec("bad", 1, (1.0,), 0.0, payoff=lambda x: x, drift=lambda x: x)

    def test_diffusion_needs_noise_dim(self):
        with pytest.raises(ConfigError):
            ModelSpec("bad", 1, (1.0,), 1.0, payoff=lambda x: x, drift=lambda x: x, diffusion=lambda x: x)

    def test_diffusion_column_of_an_ode(self):
        with pytest.raises(KernelError, match="no diffusion"):
            ode_logistic().spec.diffusion_column(0)

    def test_diffusion_column_range(self):
        spec = noisy_constant_spec()
        assert spec.diffusion_column(0)(as_states(2.0))[0, 0] == 1.0
        with pytest.raises(KernelError, match="out of range"):
            spec.diffusion_column(1)


class TestEulerKernel:
    """Tests for the Euler kernel."""

    def test_ode_step(self, logistic):
        x = logistic.apply(1.0, logistic.aggregate([np.empty(0)]), as_states(0.4))
        assert x[0, 0] == pytest.approx(0.484, abs=1e-15)

    def test_ode_is_deterministic(self, logistic, quadratic_sde):
        assert logistic.is_deterministic
        assert not quadratic_sde.is_deterministic
        assert len(logistic.sample_fine(1.0, 5, np.random.default_rng(0))) == 5

    def test_zero_increment_without_drift(self):
        kernel = EulerKernel(noisy_constant_spec())
        x = as_states([[0.3], [-1.0]])
        np.testing.assert_array_equal(kernel.apply(0.5, np.zeros(1), x), x)

    def test_single_noise_aggregate_is_identity(self, quadratic_sde):
        fines = quadratic_sde.sample_fine(1.0, 1, np.random.default_rng(0))
        assert quadratic_sde.aggregate(fines) is fines[0]

    def test_aggregate_empty(self, quadratic_sde):
        with pytest.raises(KernelError):
            quadratic_sde.aggregate([])

    def test_fine_increment_variance(self, quadratic_sde):
        increments = np.concatenate(quadratic_sde.sample_fine(1.0, 200_000, np.random.default_rng(3)))
        assert increments.var() == pytest.approx(1.0 / 200_000, rel=0.02)

    def test_aggregated_increment_is_gaussian(self, quadratic_sde):
        rng = np.random.default_rng(4)
        sums = [quadratic_sde.aggregate(quadratic_sde.sample_fine(0.5, 4, rng))[0] for _ in range(20_000)]
        assert stats.kstest(sums, "norm", args=(0.0, math.sqrt(0.5))).pvalue > 0.001

    def test_invalid_sampling_request(self, quadratic_sde):
        with pytest.raises(KernelError):
            quadratic_sde.sample_fine(0.0, 3, np.random.default_rng(0))


class TestNinomiyaVictoirKernel:
    """Tests for the Ninomiya-Victoir kernel."""

    def setup_method(self):
        self.spec = sde_quadratic().spec

    def test_aggregate_keeps_first_flip(self):
        kernel = NinomiyaVictoirKernel(self.spec)
        z = kernel.aggregate([NVNoise(np.array([0.1]), True), NVNoise(np.array([0.2]), False)])
        assert z.flip is True
        assert z.increment[0] == pytest.approx(0.3)

    def test_zero_noise_is_drift_flow(self):
        spec = sde_quadratic(sigma=0.0).spec
        kernel = NinomiyaVictoirKernel(spec)
        x = as_states(1.0)
        out = kernel.apply(0.5, NVNoise(np.zeros(1), False), x)
        assert out[0, 0] == pytest.approx(spec.drift_flow(0.5, x)[0, 0], rel=1e-12)
        assert out[0, 0] == pytest.approx(1.0 / 1.5, rel=1e-12)

    def test_exact_flows_match_rk4_fallback(self):
        exact = NinomiyaVictoirKernel(self.spec)
        fallback_spec = replace(self.spec, drift_flow=None, diffusion_flows={})
        fallback = NinomiyaVictoirKernel(fallback_spec, substeps=64)
        z = NVNoise(np.array([0.3]), False)
        x = as_states([[0.5], [1.0], [1.5]])
        np.testing.assert_allclose(exact.apply(0.25, z, x), fallback.apply(0.25, z, x), rtol=1e-8)

    def test_rk4_flow_of_linear_field(self):
        out = rk4_flow(lambda x: -x, 1.0, as_states(1.0), 32)
        assert out[0, 0] == pytest.approx(math.exp(-1.0), rel=1e-7)

    def test_needs_stratonovich_drift(self):
        with pytest.raises(ConfigError):
            NinomiyaVictoirKernel(noisy_constant_spec())

    def test_fine_noises_carry_flips(self):
        noises = NinomiyaVictoirKernel(self.spec).sample_fine(1.0, 50, np.random.default_rng(0))
        assert {z.flip for z in noises} == {True, False}


class TestPDMPKernel:
    """Tests for the thinned PDMP kernel."""

    def setup_method(self):
        self.kernel = PDMPKernel(replace(pdmp_tcp().spec, rate_bound=math.e))

    def noise(self, u):
        return JumpNoise(1.0, np.array([0.5]), np.array([0.0]), np.array([u]))

    def test_rejected_candidate(self):
        assert self.kernel.apply(1.0, self.noise(0.9), as_states(1.0))[0, 0] == pytest.approx(2.0)

    def test_accepted_candidate(self):
        assert self.kernel.apply(1.0, self.noise(0.5), as_states(1.0))[0, 0] == pytest.approx(1.0)

    def test_no_events_is_pure_drift(self):
        empty = JumpNoise(0.3, np.empty(0), np.empty(0), np.empty(0))
        assert self.kernel.apply(0.3, empty, as_states(1.0))[0, 0] == pytest.approx(1.3)

    def test_rate_above_bound(self):
        spec = replace(pdmp_tcp().spec, rate_bound=1.0)
        with pytest.raises(RateBoundError) as excinfo:
            PDMPKernel(spec).apply(1.0, self.noise(0.5), as_states(1.0))
        assert excinfo.value.rate == pytest.approx(2.0)

    def test_fine_noises_split_the_step(self):
        fines = self.kernel.sample_fine(2.0, 4, np.random.default_rng(7))
        assert [z.duration for z in fines] == [0.5] * 4
        for z in fines:
            assert np.all((z.times >= 0) & (z.times < 0.5))
        coarse = self.kernel.aggregate(fines)
        assert coarse.duration == pytest.approx(2.0)
        assert np.all(np.diff(coarse.times) >= 0)

    def test_candidate_count_is_poisson(self):
        rng = np.random.default_rng(11)
        counts = np.array([sum(len(z) for z in self.kernel.sample_fine(1.0, 3, rng)) for _ in range(20_000)])
        cutoff = 7
        observed = np.bincount(np.minimum(counts, cutoff), minlength=cutoff + 1)
        pmf = stats.poisson.pmf(np.arange(cutoff), math.e)
        expected = np.append(pmf, 1.0 - pmf.sum()) * len(counts)
        assert stats.chisquare(observed, expected).pvalue > 0.001

    def test_needs_pdmp_data(self):
        with pytest.raises(ConfigError):
            PDMPKernel(noisy_constant_spec())


class TestBuildKernel:
    """Tests for build_kernel."""

    def test_default_kernel(self):
        assert isinstance(build_kernel(None, pdmp_tcp().spec), PDMPKernel)
        assert isinstance(build_kernel(None, sde_quadratic().spec), EulerKernel)

    def test_unknown(self):
        with pytest.raises(ConfigError, match="unknown kernel"):
            build_kernel("milstein", sde_quadratic().spec)

    @pytest.mark.parametrize("name", ["euler", "nv"])
    def test_diffusion_kernel_rejects_pdmp(self, name):
        with pytest.raises(ConfigError, match="does not fit"):
            build_kernel(name, pdmp_tcp().spec)

    def test_pdmp_kernel_rejects_diffusion(self):
        with pytest.raises(ConfigError, match="does not fit"):
            build_kernel("pdmp", sde_quadratic().spec)
        with pytest.raises(ConfigError, match="does not fit"):
            build_kernel("pdmp", ode_logistic().spec)


class TestRunOnGrid:
    """Tests for run_on_grid."""

    def test_uniform_grid_matches_direct_loop(self, logistic):
        g = grid(LabeledTree(Tree.root(), 10))
        noises = logistic.sample_fine(1.0, 10, np.random.default_rng(0))
        x = 0.4
        for _ in range(10):
            x = x + 0.1 * (1.0 - x**2) * 0.1
        assert run_on_grid(logistic, g, noises, 0.4)[0, 0] == pytest.approx(x, rel=1e-14)

    def test_single_step(self, logistic):
        lt = LabeledTree(Tree.root(), 4)
        full = grid(lt)
        noises = logistic.sample_fine(1.0, 4, np.random.default_rng(0))
        out = run_on_grid(logistic, pruned_grid(lt, {()}), noises, 0.4, reference=full)
        assert out[0, 0] == pytest.approx(0.484)

    def test_noise_count_mismatch(self, logistic):
        g = grid(LabeledTree(Tree.root(), 4))
        with pytest.raises(GridError):
            run_on_grid(logistic, g, [np.empty(0)] * 3, 0.4)

    def test_not_a_subgrid(self, logistic):
        lt = LabeledTree(Tree.root(), 4)
        with pytest.raises(GridError):
            run_on_grid(logistic, grid(lt), [np.empty(0)], 0.4, reference=pruned_grid(lt, {()}))

    def test_pruned_difference_shrinks_with_n(self, quadratic_sde):
        """Fine and pruned runs on the same noise get closer as the grid refines."""
        tree = Tree.parse("{∅,1}")

        def mean_gap(n):
            gaps = []
            for seed in range(300):
                rng = np.random.default_rng(seed)
                lt = LabeledTree(tree, n, {(): (int(rng.integers(n)),)})
                full = grid(lt)
                noises = [
                    quadratic_sde.sample_fine(step_size(1.0, n, p), 1, rng)[0] for p in full.step_levels
                ]
                a = run_on_grid(quadratic_sde, full, noises, 1.0)
                b = run_on_grid(quadratic_sde, pruned_grid(lt, {(1,)}), noises, 1.0, reference=full)
                gaps.append(abs(a[0, 0] - b[0, 0]))
            return np.mean(gaps)

        assert mean_gap(32) < mean_gap(4) / 2
