"""
CSV export of raw per-MT results, pooled CDFs, sweep tables, link budgets and node positions.
"""
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from core.config import (
    CSV_ENCODING, RAW_RESULTS_FILE, CDF_FILE_TEMPLATE, LINK_BUDGET_FILE, POSITIONS_FILE, SWEEP_FILE,
    get_error_message
)
from core.models import ChannelRealization, Topology, TrialResult
from core.propagation import path_loss_macro_mt_db, path_loss_backhaul_db, path_loss_sc_mt_db

RAW_COLUMNS = ['trial_id', 'algorithm', 'mt_id', 'cell_id', 'rate']


def results_frame(results: List[TrialResult], rate_scale: float = 1.0) -> pd.DataFrame:
    """One row per (trial, algorithm, MT)."""
    if not results:
        return pd.DataFrame(columns=RAW_COLUMNS)
    return pd.DataFrame({
        'trial_id': np.concatenate([np.full(r.n_mts, r.trial_id) for r in results]).astype(np.int64),
        'algorithm': np.concatenate([np.full(r.n_mts, r.algorithm, dtype=object) for r in results]),
        'mt_id': np.concatenate([np.arange(r.n_mts) for r in results]).astype(np.int64),
        'cell_id': np.concatenate([r.serving for r in results]).astype(np.int64),
        'rate': np.concatenate([r.per_mt_rates for r in results]) * rate_scale,
    }, columns=RAW_COLUMNS)


def link_budget_frame(topology: Topology, chan: ChannelRealization) -> pd.DataFrame:
    """Distance, path loss, shadowing, gain and SINR of every link of one trial."""
    n_small, n_mts = topology.n_small_cells, topology.n_mts
    sc, mt = np.meshgrid(np.arange(1, n_small + 1), np.arange(n_mts), indexing='ij')

    def shadows(values, shape):
        return np.zeros(shape) if values is None else np.asarray(values).reshape(shape)

    frames = [
        pd.DataFrame({
            'link_id': [f"bs0-mt{k}" for k in range(n_mts)],
            'link_type': 'macro_mt',
            'distance': topology.d_macro_mt,
            'path_loss_db': path_loss_macro_mt_db(topology.d_macro_mt),
            'shadowing_db': shadows(chan.shadow_macro_mt, n_mts),
            'gain': chan.gain_macro_mt,
            'sinr': chan.sinr_macro,
        }),
        pd.DataFrame({
            'link_id': [f"bs0-sc{j}" for j in range(1, n_small + 1)],
            'link_type': 'backhaul',
            'distance': topology.d_macro_sc,
            'path_loss_db': path_loss_backhaul_db(topology.d_macro_sc),
            'shadowing_db': shadows(chan.shadow_macro_sc, n_small),
            'gain': chan.gain_macro_sc,
            'sinr': chan.sinr_backhaul,
        }),
        pd.DataFrame({
            'link_id': [f"sc{j}-mt{k}" for j, k in zip(sc.ravel(), mt.ravel())],
            'link_type': 'sc_mt',
            'distance': topology.d_sc_mt.ravel(),
            'path_loss_db': np.asarray(path_loss_sc_mt_db(topology.d_sc_mt)).ravel(),
            'shadowing_db': shadows(chan.shadow_sc_mt, (n_small, n_mts)).ravel(),
            'gain': chan.gain_sc_mt.ravel(),
            'sinr': chan.sinr_sc.ravel(),
        }),
    ]
    return pd.concat([f for f in frames if not f.empty] or frames[:1], ignore_index=True)


def node_positions_frame(topology: Topology) -> pd.DataFrame:
    """Sampled (x, y) of the macro BS, every small cell and every MT, in metres."""
    n_small, n_mts = topology.n_small_cells, topology.n_mts
    xy = np.vstack([np.zeros((1, 2)), topology.sc_positions, topology.mt_positions])
    return pd.DataFrame({
        'node_id': ['bs0'] + [f"sc{j}" for j in range(1, n_small + 1)] + [f"mt{k}" for k in range(n_mts)],
        'node_type': ['macro'] + ['small_cell'] * n_small + ['mt'] * n_mts,
        'x': xy[:, 0],
        'y': xy[:, 1],
    })


class ResultCsvWriter:
    """Writes the CSV artifacts of one experiment into its output directory."""

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)

    def _write(self, frame: pd.DataFrame, filename: str) -> Path:
        path = self.output_dir / filename
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path, index=False, encoding=CSV_ENCODING)
        except OSError as e:
            raise OSError(get_error_message('write_failed', filename=path, reason=e)) from e
        return path

    def write_raw(self, results: List[TrialResult], rate_scale: float = 1.0) -> Path:
        return self._write(results_frame(results, rate_scale), RAW_RESULTS_FILE)

    def write_cdfs(self, cdfs: Dict[str, pd.DataFrame]) -> List[Path]:
        return [self._write(cdf, CDF_FILE_TEMPLATE.format(algorithm=name)) for name, cdf in cdfs.items()]

    def write_link_budget(self, topology: Topology, chan: ChannelRealization, filename: str = LINK_BUDGET_FILE) -> Path:
        return self._write(link_budget_frame(topology, chan), filename)

    def write_positions(self, topology: Topology, filename: str = POSITIONS_FILE) -> Path:
        return self._write(node_positions_frame(topology), filename)

    def write_sweep(self, frame: pd.DataFrame) -> Path:
        return self._write(frame, SWEEP_FILE)

