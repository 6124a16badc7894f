"""
Monte-Carlo harness: seeded trial instances, algorithm dispatch, aggregation and output.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from core import rate_model
from core.config import (
    ALGORITHMS, LINK_BUDGET_FILE, PER_CELL_ONLY_ALGORITHMS, POSITIONS_FILE, SWEEP_POINT_TEMPLATE, UTILITY_CHECK_TOL,
    get_error_message
)
from core.heuristics import cre_association, offload_balanced, offload_macro, sinr_association, sinr_start
from core.models import (
    Association, ChannelRealization, ExperimentSpec, SolverDiagnostics, SolverResult, Topology,
    TrialResult, WbbaAllocation
)
from core.network import generate_topology
from core.oracle import brute_force_pwbba, brute_force_uwbba
from core.percell_solver import PerCellWbbaSolver
from core.propagation import realize_channels
from core.repositories import ResultRepository
from core.unified_solver import UnifiedWbbaSolver, evaluate
from .csv_tools import ResultCsvWriter
from .metrics import MetricsSummary, summarize, sweep_frame

logger = logging.getLogger(__name__)

# Relative oracle gap above which a solver instance is flagged in the log
GAP_WARNING = 0.05


@dataclass(frozen=True, eq=False)
class TrialInstance:
    trial_id: int
    topology: Topology
    chan: ChannelRealization


def trial_seeds(master_seed: int, trial_id: int):
    """Topology seed and shadowing generator of one trial, independent of execution order."""
    topology_seq, channel_seq = np.random.SeedSequence(master_seed, spawn_key=(trial_id,)).spawn(2)
    return int(topology_seq.generate_state(1, np.uint64)[0]), np.random.default_rng(channel_seq)


def build_instance(spec: ExperimentSpec, trial_id: int) -> TrialInstance:
    topology_seed, rng = trial_seeds(spec.master_seed, trial_id)
    topology = generate_topology(spec.scenario, topology_seed)
    return TrialInstance(trial_id, topology, realize_channels(topology, spec.scenario, rng))


def _fixed_policy(assoc: Association, chan: ChannelRealization, kind: str) -> SolverResult:
    result = evaluate(assoc, rate_model.allocate(assoc, chan, kind), chan)
    result.diagnostics = SolverDiagnostics(outer_iterations=1, converged=True)
    return result


def _run_sinr(chan, spec):
    return _fixed_policy(sinr_association(chan), chan, spec.scenario_kind)


def _run_cre(chan, spec):
    return _fixed_policy(cre_association(chan, spec.cre_bias_db), chan, spec.scenario_kind)


def _run_cawbba(chan, spec):
    solver = UnifiedWbbaSolver(spec.solver) if spec.scenario_kind == 'unified' else PerCellWbbaSolver(spec.solver)
    return solver.solve(chan)


def _greedy(step: Callable):
    def run(chan, spec):
        assoc, beta_vec = step(*sinr_start(chan), chan)
        result = evaluate(assoc, WbbaAllocation.per_cell(beta_vec), chan)
        result.diagnostics = SolverDiagnostics(outer_iterations=1, converged=True)
        return result
    return run


def _run_oracle(chan, spec):
    search = brute_force_uwbba if spec.scenario_kind == 'unified' else brute_force_pwbba
    return search(chan, spec.oracle_limits)


RUNNERS: Dict[str, Callable[[ChannelRealization, ExperimentSpec], SolverResult]] = {
    'sinr': _run_sinr,
    'cre': _run_cre,
    'cawbba': _run_cawbba,
    'offload': _greedy(offload_macro),
    'offload_balanced': _greedy(offload_balanced),
    'oracle': _run_oracle,
}


def run_trial(spec: ExperimentSpec, algorithm: str, trial_id: int, instance: TrialInstance = None) -> TrialResult:
    """Run one algorithm on one seeded trial and check the reported utility."""
    if algorithm not in RUNNERS:
        raise ValueError(get_error_message('unknown_algorithm', name=algorithm, choices=ALGORITHMS))
    if algorithm in PER_CELL_ONLY_ALGORITHMS and spec.scenario_kind == 'unified':
        raise ValueError(get_error_message('unified_heuristic', name=algorithm))
    instance = instance or build_instance(spec, trial_id)
    chan = instance.chan

    result = RUNNERS[algorithm](chan, spec)
    rate_model.validate_allocation(result.assoc, result.wbba, chan)
    recomputed = rate_model.sum_log_rate(result.assoc, result.wbba, chan)
    if not np.isclose(result.utility, recomputed, rtol=0.0, atol=UTILITY_CHECK_TOL * max(1.0, abs(recomputed))):
        raise RuntimeError(get_error_message(
            'utility_mismatch', trial_id=trial_id, algorithm=algorithm,
            reported=result.utility, recomputed=recomputed))

    diag = result.diagnostics
    if not diag.converged:
        logger.warning("Trial %d: %s did not converge", trial_id, algorithm)
    return TrialResult(
        trial_id=trial_id,
        algorithm=algorithm,
        per_mt_rates=rate_model.per_mt_rates(result.assoc, result.wbba, chan),
        serving=result.assoc.serving.copy(),
        loads=result.assoc.load.copy(),
        wbba=result.wbba,
        utility=recomputed,
        converged=diag.converged,
        feasible=rate_model.is_backhaul_feasible(result.assoc, result.wbba, chan),
        iterations={'outer': diag.outer_iterations, 'inner': diag.total_inner_iterations},
        diagnostics=diag.to_dict() if algorithm == 'cawbba' else None,
    )


def run_trials(spec: ExperimentSpec, trial_id: int) -> List[TrialResult]:
    """Every algorithm of the experiment on the same trial instance."""
    instance = build_instance(spec, trial_id)
    logger.debug("Trial %d", trial_id)
    return [run_trial(spec, name, trial_id, instance) for name in spec.algorithms]


def sort_results(spec: ExperimentSpec, results: List[TrialResult]) -> List[TrialResult]:
    order = {name: i for i, name in enumerate(spec.algorithms)}
    return sorted(results, key=lambda r: (r.trial_id, order[r.algorithm]))


@dataclass
class ExperimentOutcome:
    spec: ExperimentSpec
    results: List[TrialResult]
    summary: MetricsSummary
    files: List[Path] = field(default_factory=list)

    def for_algorithm(self, name: str) -> List[TrialResult]:
        return [r for r in self.results if r.algorithm == name]

    def utilities(self, name: str) -> np.ndarray:
        return np.array([r.utility for r in self.for_algorithm(name)])


def dump_trial_links(spec: ExperimentSpec, writer: ResultCsvWriter, point_files: bool = False) -> List[Path]:
    """Link budget and node positions of trial 0."""
    instance = build_instance(spec, 0)
    budget, positions = LINK_BUDGET_FILE, POSITIONS_FILE
    if point_files:
        budget, positions = (
            SWEEP_POINT_TEMPLATE.format(stem=Path(name).stem, suffix=Path(name).suffix,
                                        n_small_cells=spec.scenario.n_small_cells, n_mts=spec.scenario.n_mts)
            for name in (LINK_BUDGET_FILE, POSITIONS_FILE)
        )
    return [writer.write_link_budget(instance.topology, instance.chan, budget),
            writer.write_positions(instance.topology, positions)]


class ExperimentRunner:
    """Runs n_trials × algorithms, aggregates the pooled metrics and writes the artifacts."""

    def __init__(self, spec: ExperimentSpec, bits_per_second: bool = False):
        self.spec = spec
        self.rate_scale = spec.scenario.bandwidth if bits_per_second else 1.0
        self.rate_unit = 'bit/s' if bits_per_second else 'bit/s/Hz'

    def run_all(self) -> List[TrialResult]:
        spec = self.spec
        trial_ids = range(spec.n_trials)
        logger.info("Running %d trials of %s (%s WBBA, N_S=%d, N_U=%d) on %d worker(s)",
                    spec.n_trials, ', '.join(spec.algorithms), spec.scenario_kind,
                    spec.scenario.n_small_cells, spec.scenario.n_mts, spec.n_workers)
        if spec.n_workers == 1:
            batches = [run_trials(spec, t) for t in trial_ids]
        else:
            with ProcessPoolExecutor(max_workers=spec.n_workers) as pool:
                batches = list(pool.map(partial(run_trials, spec), trial_ids))
        return sort_results(spec, [r for batch in batches for r in batch])

    def run(self) -> ExperimentOutcome:
        results = self.run_all()
        summary = summarize(results, self.spec.algorithms, self.spec.scenario_kind,
                            self.rate_scale, self.rate_unit)
        outcome = ExperimentOutcome(self.spec, results, summary)
        self._log_comparisons(outcome)
        return outcome

    def _log_comparisons(self, outcome: ExperimentOutcome):
        names = self.spec.algorithms
        if 'oracle' in names:
            best = outcome.utilities('oracle')
            for name in names:
                if name == 'oracle':
                    continue
                gaps = (best - outcome.utilities(name)) / np.maximum(np.abs(best), 1e-12)
                logger.info("%s: mean oracle gap %.4f%%, max %.4f%%", name, 100 * gaps.mean(), 100 * gaps.max())
                flagged = np.flatnonzero(gaps > GAP_WARNING)
                if flagged.size:
                    logger.warning("%s: %d trial(s) more than %.0f%% below the oracle: %s",
                                   name, flagged.size, 100 * GAP_WARNING, flagged.tolist())
        if 'offload' in names and 'offload_balanced' in names:
            gain = outcome.utilities('offload_balanced') - outcome.utilities('offload')
            logger.info("Small-cell balancing adds %.6f nats on average over macro offloading", gain.mean())

    def write(self, outcome: ExperimentOutcome, dump_links: bool = False, diagnostics: bool = False) -> List[Path]:
        spec = self.spec
        writer = ResultCsvWriter(spec.output_dir)
        repo = ResultRepository(Path(spec.output_dir))
        files = [writer.write_raw(outcome.results, self.rate_scale)]
        files += writer.write_cdfs(outcome.summary.cdfs)
        files.append(repo.save_summary({'experiment': spec.to_dict(), **outcome.summary.to_dict()}))
        if dump_links:
            files += dump_trial_links(spec, writer)
        if diagnostics:
            files.append(repo.save_diagnostics([
                {'trial_id': r.trial_id, **r.diagnostics} for r in outcome.results if r.diagnostics is not None
            ]))
        outcome.files = files
        return files


def run_experiment(spec: ExperimentSpec, write: bool = True, bits_per_second: bool = False,
                   dump_links: bool = False, diagnostics: bool = False) -> ExperimentOutcome:
    runner = ExperimentRunner(spec, bits_per_second)
    outcome = runner.run()
    if write:
        runner.write(outcome, dump_links, diagnostics)
    return outcome


@dataclass
class SweepOutcome:
    spec: ExperimentSpec
    points: List[Tuple[int, int, ExperimentOutcome]]
    frame: pd.DataFrame
    files: List[Path] = field(default_factory=list)

    def at(self, n_small_cells: int, n_mts: int) -> ExperimentOutcome:
        for ns, nu, outcome in self.points:
            if (ns, nu) == (n_small_cells, n_mts):
                return outcome
        raise KeyError((n_small_cells, n_mts))

    def mean_utilities(self, algorithm: str, by: str = 'n_mts') -> pd.Series:
        """Mean utility of one algorithm indexed by one sweep axis."""
        rows = self.frame[self.frame['algorithm'] == algorithm]
        return rows.set_index(by)['mean_utility']


def run_sweep(spec: ExperimentSpec, write: bool = True, bits_per_second: bool = False,
              dump_links: bool = False) -> SweepOutcome:
    """Run the experiment at every (N_S, N_U) point with the same master seed."""
    grid = spec.sweep_points()
    logger.info("Sweeping %d point(s): N_S in %s, N_U in %s", len(grid),
                sorted({ns for ns, _ in grid}), sorted({nu for _, nu in grid}))
    points = []
    for n_small_cells, n_mts in grid:
        outcome = ExperimentRunner(spec.at_point(n_small_cells, n_mts), bits_per_second).run()
        points.append((n_small_cells, n_mts, outcome))
    frame = sweep_frame([(ns, nu, outcome.summary) for ns, nu, outcome in points])
    sweep = SweepOutcome(spec, points, frame)

    if write:
        writer = ResultCsvWriter(spec.output_dir)
        files = [writer.write_sweep(frame)]
        files.append(ResultRepository(Path(spec.output_dir)).save_summary({
            'experiment': spec.to_dict(),
            'points': [{'n_small_cells': ns, 'n_mts': nu, **outcome.summary.to_dict()} for ns, nu, outcome in points],
        }))
        if dump_links:
            for _, _, outcome in points:
                files += dump_trial_links(outcome.spec, writer, point_files=True)
        sweep.files = files
    return sweep
