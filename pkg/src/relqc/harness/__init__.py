"""Experiment runner, acceptance criteria and command-line interface."""
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .report import ExperimentReport, Row
