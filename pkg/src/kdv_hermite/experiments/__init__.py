from .config import ExperimentConfig, ConfigError, default_config, load_config, parse_config_text
from .runners import (
    RunArtifacts,
    RunResult,
    run_experiment,
    run_one_soliton,
    run_rough_l2,
    run_two_soliton,
    self_convergence_oracle,
)
from .output import emit_outputs, read_table, read_config

__all__ = [
    "ExperimentConfig", "ConfigError", "default_config", "load_config", "parse_config_text",
    "RunArtifacts", "RunResult", "run_experiment", "run_one_soliton", "run_rough_l2",
    "run_two_soliton", "self_convergence_oracle", "emit_outputs", "read_table", "read_config",
]
