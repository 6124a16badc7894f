"""
Services module - experiment harness, metrics, CSV tools.
"""
from .csv_tools import ResultCsvWriter, results_frame, link_budget_frame, node_positions_frame
from .metrics import MetricsSummary, AlgorithmSummary, rate_at_probability, empirical_cdf, summarize, sweep_frame
from .experiments import (
    ExperimentRunner, ExperimentOutcome, SweepOutcome, run_trial, run_experiment, run_sweep, build_instance
)

__all__ = [
    'ResultCsvWriter', 'results_frame', 'link_budget_frame', 'node_positions_frame',
    'MetricsSummary', 'AlgorithmSummary', 'rate_at_probability', 'empirical_cdf', 'summarize', 'sweep_frame',
    'ExperimentRunner', 'ExperimentOutcome', 'SweepOutcome', 'run_trial', 'run_experiment', 'run_sweep',
    'build_instance',
]
