"""Monte Carlo verification harness."""

from .config import ConfigError, ExperimentConfig, load_config_file, parse_config_text, parse_overrides
from .experiments import EXPERIMENTS, make_config, run_experiment
from .report import ExperimentReport

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "EXPERIMENTS",
    "load_config_file",
    "make_config",
    "parse_config_text",
    "parse_overrides",
    "run_experiment",
]
