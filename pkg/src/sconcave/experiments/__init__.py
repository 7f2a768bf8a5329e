"""Experiment harness: configs, Monte Carlo runners and the CLI."""
from .config import ConfigError, ExperimentConfig, function_from_spec, load_config, parse_config
from .runners import (
    SurvivalCurve,
    Theorem1Result,
    bbl_check,
    bbl_fixtures,
    run_bbl,
    run_brunn,
    run_convergence,
    run_shadow_scan,
    run_theorem1,
)
