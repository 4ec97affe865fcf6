"""Unit tests for src/weakgrid/handler.py"""

import argparse
from fractions import Fraction

import pytest

from src.weakgrid.config import Settings
from src.weakgrid.errors import ConfigError
from src.weakgrid.estimator import EstimateMode
from src.weakgrid.handler import RunConfig, run_config_from_args


class TestRunConfig:
    """Tests for RunConfig validation."""

    def test_estimate_defaults(self):
        config = RunConfig(command="estimate", n=4, exact=True)
        assert config.mode == EstimateMode(exact=True)
        assert config.alpha_value is None

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            RunConfig(command="plot")

    def test_unknown_format(self):
        with pytest.raises(ConfigError, match="format"):
            RunConfig(command="trees", fmt="xml")

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"nu": 0},
            {"n": 1},
            {"pilot": 1},
            {"workers": 0},
            {"prune": "sometimes"},
            {"alpha": "-1"},
            {"alpha": "abc"},
            {"beta": "-2"},
        ],
    )
    def test_invalid_values(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(command="trees", **kwargs)

    def test_estimate_needs_mode(self):
        with pytest.raises(ConfigError, match="--eps"):
            RunConfig(command="estimate", n=4)

    def test_estimate_needs_n(self):
        with pytest.raises(ConfigError, match="--n"):
            RunConfig(command="estimate", exact=True)

    def test_two_modes_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(command="estimate", n=4, epsilon=1e-3, samples=10)

    def test_convergence_needs_two_ns(self):
        with pytest.raises(ConfigError):
            RunConfig(command="convergence", ns=[4], exact=True)

    def test_convergence_defaults_nus_to_nu(self):
        config = RunConfig(command="convergence", ns=[2, 4], nu=3, exact=True)
        assert config.nus == [3]

    def test_variance_defaults_samples_to_pilot(self):
        assert RunConfig(command="variance", n=5, pilot=40).samples == 40

    def test_grid_needs_tree(self):
        with pytest.raises(ConfigError):
            RunConfig(command="grid", n=3)

    def test_alpha_value(self):
        assert RunConfig(command="trees", alpha="3/2").alpha_value == Fraction(3, 2)

    def test_to_dict_drops_output_path(self):
        data = RunConfig(command="trees", out="/tmp/x.json").to_dict()
        assert "out" not in data
        assert data["command"] == "trees"


class TestRunConfigFromArgs:
    """Tests for run_config_from_args."""

    def test_settings_fill_gaps(self):
        settings = Settings(db_path="x.db", pilot_size=77, workers=3, chunk_size=8)
        args = argparse.Namespace(command="estimate", n=4, samples=10, format="text")
        config = run_config_from_args(args, settings)
        assert (config.pilot, config.workers, config.chunk_size) == (77, 3, 8)
        assert config.fmt == "text"
        assert config.samples == 10

    def test_arguments_win(self):
        settings = Settings(db_path="x.db", pilot_size=77, workers=3)
        args = argparse.Namespace(command="estimate", n=4, eps=1e-3, pilot=20, workers=1, model="sde-quadratic")
        config = run_config_from_args(args, settings)
        assert (config.pilot, config.workers) == (20, 1)
        assert config.model == "sde-quadratic"
        assert config.epsilon == 1e-3
