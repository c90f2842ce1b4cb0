"""Experiment harness: configuration, runners, figure recipes and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import run_single, run_sweep, sweep_table
from .figures import RECIPES, run_figure

__all__ = ["ConfigError", "ExperimentConfig", "RECIPES", "load_config", "parse_config",
           "run_figure", "run_single", "run_sweep", "sweep_table"]
