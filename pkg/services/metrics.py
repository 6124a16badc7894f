"""
Evaluation metrics: Rₚ coverage rates, empirical CDFs and per-algorithm summaries.
"""
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from core.config import REPORTED_PROBABILITIES, get_error_message
from core.models import TrialResult

# Slack on the exceedance fraction when matching p
PROBABILITY_TOL = 1e-9


def rate_at_probability(rates, p: float) -> float:
    """Rₚ: the largest sample value exceeded by at least a fraction p of the samples.

    Returns the minimum when no sample qualifies (always the case for p = 1).
    """
    rates = np.sort(np.asarray(rates, dtype=float).reshape(-1))
    if rates.size == 0:
        raise ValueError(get_error_message('empty_rates'))
    if not 0.0 < p <= 1.0:
        raise ValueError(get_error_message('invalid_probability', p=p))
    exceeding = rates.size - np.searchsorted(rates, rates, side='right')
    qualifies = exceeding / rates.size >= p - PROBABILITY_TOL
    if not qualifies.any():
        return float(rates[0])
    return float(rates[qualifies][-1])


def empirical_cdf(rates) -> pd.DataFrame:
    """Sorted rates with their cumulative fraction i/n."""
    rates = np.sort(np.asarray(rates, dtype=float).reshape(-1))
    if rates.size == 0:
        raise ValueError(get_error_message('empty_rates'))
    return pd.DataFrame({
        'rate': rates,
        'cumulative_fraction': np.arange(1, rates.size + 1) / rates.size,
    })


def rate_label(p: float) -> str:
    return f"R_{p:g}"


@dataclass
class AlgorithmSummary:
    algorithm: str
    n_trials: int
    n_samples: int
    mean_utility: float
    utility_std_error: float
    rate_at: Dict[str, float]
    mean_rate: float
    mean_beta: float            # unified β, or N_b under per-cell WBBA
    mean_macro_load: float
    converged_fraction: float
    feasible_fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricsSummary:
    scenario_kind: str
    rate_unit: str
    algorithms: Dict[str, AlgorithmSummary] = field(default_factory=dict)
    cdfs: Dict[str, pd.DataFrame] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            'scenario_kind': self.scenario_kind,
            'rate_unit': self.rate_unit,
            'algorithms': {name: s.to_dict() for name, s in self.algorithms.items()},
        }

    def ratio(self, label: str, algorithm: str, baseline: str) -> float:
        return self.algorithms[algorithm].rate_at[label] / self.algorithms[baseline].rate_at[label]


def trials_frame(results: List[TrialResult]) -> pd.DataFrame:
    """One row per (trial, algorithm) with the scalar outcome of the run."""
    return pd.DataFrame([{
        'trial_id': r.trial_id,
        'algorithm': r.algorithm,
        'utility': r.utility,
        'beta': r.wbba.beta if r.wbba.is_unified else r.wbba.n_b,
        'macro_load': int(r.loads[0]),
        'converged': r.converged,
        'feasible': r.feasible,
    } for r in results])


def summarize(results: List[TrialResult], algorithms: Sequence[str], scenario_kind: str,
              rate_scale: float = 1.0, rate_unit: str = 'bit/s/Hz',
              probabilities: Sequence[float] = REPORTED_PROBABILITIES) -> MetricsSummary:
    """Pool per-MT rates per algorithm and aggregate utilities across trials."""
    summary = MetricsSummary(scenario_kind=scenario_kind, rate_unit=rate_unit)
    if not results:
        return summary
    frame = trials_frame(results)

    for name in algorithms:
        runs = frame[frame['algorithm'] == name]
        if runs.empty:
            continue
        pooled = np.concatenate([r.per_mt_rates for r in results if r.algorithm == name]) * rate_scale
        n = len(runs)
        std_error = float(runs['utility'].std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        summary.algorithms[name] = AlgorithmSummary(
            algorithm=name,
            n_trials=n,
            n_samples=int(pooled.size),
            mean_utility=float(runs['utility'].mean()),
            utility_std_error=std_error,
            rate_at={rate_label(p): rate_at_probability(pooled, p) for p in probabilities} if pooled.size else {},
            mean_rate=float(pooled.mean()) if pooled.size else 0.0,
            mean_beta=float(runs['beta'].mean()),
            mean_macro_load=float(runs['macro_load'].mean()),
            converged_fraction=float(runs['converged'].mean()),
            feasible_fraction=float(runs['feasible'].mean()),
        )
        if pooled.size:
            summary.cdfs[name] = empirical_cdf(pooled)
    return summary


SWEEP_KEYS = ['n_small_cells', 'n_mts', 'algorithm', 'n_trials', 'mean_utility', 'utility_std_error']


def sweep_frame(points: Sequence[Tuple[int, int, MetricsSummary]]) -> pd.DataFrame:
    """One row per (sweep point, algorithm) with utility and coverage-rate columns."""
    rows = []
    for n_small_cells, n_mts, summary in points:
        for s in summary.algorithms.values():
            rows.append({
                'n_small_cells': n_small_cells,
                'n_mts': n_mts,
                'algorithm': s.algorithm,
                'n_trials': s.n_trials,
                'mean_utility': s.mean_utility,
                'utility_std_error': s.utility_std_error,
                **s.rate_at,
            })
    labels = [rate_label(p) for p in REPORTED_PROBABILITIES]
    return pd.DataFrame(rows, columns=SWEEP_KEYS + labels)
