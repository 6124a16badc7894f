"""
Data models for the HetNet backhaul optimizer.
"""
from dataclasses import dataclass, field, asdict, fields, replace
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import (
    DEFAULT_MACRO_RADIUS, DEFAULT_N_SMALL_CELLS, DEFAULT_N_MTS, DEFAULT_N_ANTENNAS,
    DEFAULT_BEAM_GROUP, DEFAULT_P_MACRO, DEFAULT_P_SMALL, DEFAULT_SC_ANTENNA_GAIN,
    DEFAULT_NOISE_PSD, DEFAULT_BANDWIDTH, DEFAULT_SIGMA_BS, DEFAULT_SIGMA_SC,
    DEFAULT_MIN_LINK_DISTANCE, DEFAULT_STEP_MU, DEFAULT_STEP_NU, DEFAULT_STEP_DECAY,
    DEFAULT_INNER_TOL, DEFAULT_INNER_MAX_ITER, DEFAULT_OUTER_TOL, DEFAULT_OUTER_MAX_ITER,
    DEFAULT_BETA_INIT, DEFAULT_STABILITY_WINDOW, DEFAULT_PERCELL_OUTER_TOL,
    DEFAULT_MAX_ENUMERATION, DEFAULT_CRE_BIAS_DB, DEFAULT_ALGORITHMS, DEFAULT_N_TRIALS,
    DEFAULT_MASTER_SEED, DEFAULT_OUTPUT_DIR, DEFAULT_N_WORKERS, ALGORITHMS,
    SCENARIO_KINDS, PER_CELL_ONLY_ALGORITHMS, get_error_message
)


def _check_keys(cls, data: dict):
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ValueError(get_error_message('unknown_keys', keys=sorted(unknown)))


def _frozen_array(values, dtype=float, ndim: int = 1) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"Expected a {ndim}-D array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NetworkScenario:
    """Immutable parameter set of one two-tier HetNet macro cell."""
    macro_radius: float = DEFAULT_MACRO_RADIUS
    n_small_cells: int = DEFAULT_N_SMALL_CELLS
    n_mts: int = DEFAULT_N_MTS
    n_antennas: int = DEFAULT_N_ANTENNAS
    beam_group: int = DEFAULT_BEAM_GROUP
    p_macro: float = DEFAULT_P_MACRO
    p_small: float = DEFAULT_P_SMALL
    sc_antenna_gain: float = DEFAULT_SC_ANTENNA_GAIN
    noise_psd: float = DEFAULT_NOISE_PSD
    bandwidth: float = DEFAULT_BANDWIDTH
    sigma_bs: float = DEFAULT_SIGMA_BS
    sigma_sc: float = DEFAULT_SIGMA_SC
    min_link_distance: float = DEFAULT_MIN_LINK_DISTANCE

    def __post_init__(self):
        def fail(detail):
            raise ValueError(get_error_message('invalid_scenario', detail=detail))

        if self.n_small_cells < 0 or self.n_mts < 0:
            fail(f"counts must be non-negative, got N_S={self.n_small_cells}, N_U={self.n_mts}")
        if not 0 < self.beam_group <= self.n_antennas:
            fail(f"need 0 < N_g <= N_T, got N_g={self.beam_group}, N_T={self.n_antennas}")
        if self.n_small_cells >= self.beam_group:
            fail(f"need N_S < N_g, got N_S={self.n_small_cells}, N_g={self.beam_group}")
        for name in ('macro_radius', 'p_macro', 'p_small', 'bandwidth', 'min_link_distance'):
            if getattr(self, name) <= 0:
                fail(f"{name} must be positive, got {getattr(self, name)}")
        if self.sigma_bs < 0 or self.sigma_sc < 0:
            fail("shadowing spreads must be non-negative")

    @property
    def n_cells(self) -> int:
        return self.n_small_cells + 1

    @property
    def noise_power(self) -> float:
        """Noise power in watts over the full band."""
        return 10 ** ((self.noise_psd - 30) / 10) * self.bandwidth

    def with_counts(self, n_small_cells: int = None, n_mts: int = None) -> 'NetworkScenario':
        changes = {}
        if n_small_cells is not None:
            changes['n_small_cells'] = n_small_cells
        if n_mts is not None:
            changes['n_mts'] = n_mts
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'NetworkScenario':
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Topology:
    """Sampled positions (macro BS at the origin) and clamped link distances."""
    sc_positions: np.ndarray
    mt_positions: np.ndarray
    d_macro_mt: np.ndarray
    d_macro_sc: np.ndarray
    d_sc_mt: np.ndarray

    @property
    def n_small_cells(self) -> int:
        return self.sc_positions.shape[0]

    @property
    def n_mts(self) -> int:
        return self.mt_positions.shape[0]

    @classmethod
    def from_positions(cls, sc_positions, mt_positions, min_link_distance: float) -> 'Topology':
        sc = np.asarray(sc_positions, dtype=float).reshape(-1, 2)
        mt = np.asarray(mt_positions, dtype=float).reshape(-1, 2)
        d_macro_mt = np.maximum(np.hypot(mt[:, 0], mt[:, 1]), min_link_distance)
        d_macro_sc = np.maximum(np.hypot(sc[:, 0], sc[:, 1]), min_link_distance)
        d_sc_mt = np.maximum(
            np.hypot(sc[:, None, 0] - mt[None, :, 0], sc[:, None, 1] - mt[None, :, 1]),
            min_link_distance
        ).reshape(sc.shape[0], mt.shape[0])
        return cls(
            sc_positions=_frozen_array(sc, ndim=2),
            mt_positions=_frozen_array(mt, ndim=2),
            d_macro_mt=_frozen_array(d_macro_mt),
            d_macro_sc=_frozen_array(d_macro_sc),
            d_sc_mt=_frozen_array(d_sc_mt, ndim=2),
        )


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Linear gains, SINRs and baseline rates of one trial.

    Rates are spectral efficiencies (bit/s/Hz). Cell index 0 is the macro BS,
    small cell j sits at row j - 1 of the small-cell arrays.
    """
    gain_macro_mt: np.ndarray
    gain_macro_sc: np.ndarray
    gain_sc_mt: np.ndarray
    noise_power: float
    sinr_macro: np.ndarray
    sinr_backhaul: np.ndarray
    sinr_sc: np.ndarray
    r_macro: np.ndarray
    r_sc: np.ndarray
    c_backhaul: np.ndarray
    beam_group: int
    shadow_macro_mt: Optional[np.ndarray] = None
    shadow_macro_sc: Optional[np.ndarray] = None
    shadow_sc_mt: Optional[np.ndarray] = None

    @property
    def n_small_cells(self) -> int:
        return self.r_sc.shape[0]

    @property
    def n_cells(self) -> int:
        return self.r_sc.shape[0] + 1

    @property
    def n_mts(self) -> int:
        return self.r_macro.shape[0]

    @cached_property
    def rates(self) -> np.ndarray:
        """Baseline rate matrix, shape (N_S + 1, N_U), row 0 = macro."""
        return np.vstack([self.r_macro[None, :], self.r_sc])

    @cached_property
    def log_rates(self) -> np.ndarray:
        return np.log(self.rates)

    @cached_property
    def c_cells(self) -> np.ndarray:
        """Backhaul baseline rates padded with c_0 = 0 for the macro BS."""
        return np.concatenate([[0.0], self.c_backhaul])

    @cached_property
    def sinr_cells(self) -> np.ndarray:
        return np.vstack([self.sinr_macro[None, :], self.sinr_sc])

    @classmethod
    def from_rates(cls, r_macro, r_sc, c_backhaul, n_antennas: int = DEFAULT_N_ANTENNAS,
                   beam_group: int = DEFAULT_BEAM_GROUP) -> 'ChannelRealization':
        """Build a realization from baseline rates by inverting the rate formulas.

        Gains equal SINRs (unit powers, unit noise power).
        """
        r_macro = np.asarray(r_macro, dtype=float).reshape(-1)
        c_backhaul = np.asarray(c_backhaul, dtype=float).reshape(-1)
        r_sc = np.asarray(r_sc, dtype=float).reshape(c_backhaul.shape[0], r_macro.shape[0])
        factor = (n_antennas - beam_group + 1) / beam_group
        sinr_macro = (2.0 ** (r_macro / beam_group) - 1.0) / factor
        sinr_backhaul = (2.0 ** c_backhaul - 1.0) / factor
        sinr_sc = 2.0 ** r_sc - 1.0
        return cls(
            gain_macro_mt=_frozen_array(sinr_macro),
            gain_macro_sc=_frozen_array(sinr_backhaul),
            gain_sc_mt=_frozen_array(sinr_sc, ndim=2),
            noise_power=1.0,
            sinr_macro=_frozen_array(sinr_macro),
            sinr_backhaul=_frozen_array(sinr_backhaul),
            sinr_sc=_frozen_array(sinr_sc, ndim=2),
            r_macro=_frozen_array(r_macro),
            r_sc=_frozen_array(r_sc, ndim=2),
            c_backhaul=_frozen_array(c_backhaul),
            beam_group=beam_group,
        )


@dataclass(frozen=True, eq=False)
class Association:
    """Binary cell association stored as the serving cell of each MT (0 = macro)."""
    serving: np.ndarray
    n_cells: int

    def __post_init__(self):
        serving = np.array(self.serving, dtype=np.int64, copy=True).reshape(-1)
        if self.n_cells < 1:
            raise ValueError(get_error_message('invalid_association', detail="need at least the macro cell"))
        if serving.size and (serving.min() < 0 or serving.max() >= self.n_cells):
            raise ValueError(get_error_message(
                'invalid_association', detail=f"cell index outside [0, {self.n_cells - 1}]"))
        serving.setflags(write=False)
        object.__setattr__(self, 'serving', serving)

    @property
    def n_mts(self) -> int:
        return self.serving.shape[0]

    @property
    def n_small_cells(self) -> int:
        return self.n_cells - 1

    @cached_property
    def load(self) -> np.ndarray:
        """K_j for every cell, macro first."""
        return np.bincount(self.serving, minlength=self.n_cells)

    @cached_property
    def x(self) -> np.ndarray:
        """Indicator matrix x[j, k], shape (N_S + 1, N_U)."""
        x = np.zeros((self.n_cells, self.n_mts), dtype=np.int8)
        x[self.serving, np.arange(self.n_mts)] = 1
        return x

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.serving == j)

    def same_as(self, other: 'Association') -> bool:
        return self.n_cells == other.n_cells and np.array_equal(self.serving, other.serving)

    @classmethod
    def all_macro(cls, n_cells: int, n_mts: int) -> 'Association':
        return cls(np.zeros(n_mts, dtype=np.int64), n_cells)

    @classmethod
    def from_matrix(cls, x) -> 'Association':
        x = np.asarray(x)
        if x.ndim != 2:
            raise ValueError(get_error_message('invalid_association', detail="x must be 2-D"))
        if not np.isin(x, (0, 1)).all():
            raise ValueError(get_error_message('invalid_association', detail="x must be binary"))
        if x.shape[1] and not (x.sum(axis=0) == 1).all():
            raise ValueError(get_error_message('invalid_association', detail="every MT needs exactly one cell"))
        return cls(np.argmax(x, axis=0), x.shape[0])

    def to_dict(self) -> dict:
        return {'serving': self.serving.tolist(), 'load': self.load.tolist()}


@dataclass(frozen=True, eq=False)
class WbbaAllocation:
    """Backhaul bandwidth allocation: one unified beta or one beta_j per small cell."""
    kind: str
    beta: float = 0.0
    beta_j: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == 'unified':
            if not 0.0 <= self.beta <= 1.0:
                raise ValueError(get_error_message('invalid_beta', detail=f"beta={self.beta}"))
            object.__setattr__(self, 'beta', float(self.beta))
        elif self.kind == 'per_cell':
            beta_j = _frozen_array(self.beta_j if self.beta_j is not None else [])
            if beta_j.size and (beta_j.min() < 0.0 or beta_j.max() > 1.0):
                raise ValueError(get_error_message('invalid_beta', detail=f"beta_j={beta_j.tolist()}"))
            object.__setattr__(self, 'beta_j', beta_j)
        else:
            raise ValueError(get_error_message('unknown_kind', name=self.kind, choices=SCENARIO_KINDS))

    @classmethod
    def unified(cls, beta: float) -> 'WbbaAllocation':
        return cls('unified', beta=beta)

    @classmethod
    def per_cell(cls, beta_j) -> 'WbbaAllocation':
        return cls('per_cell', beta_j=beta_j)

    @property
    def is_unified(self) -> bool:
        return self.kind == 'unified'

    @property
    def n_b(self) -> float:
        """Average number of small cells backhauled per sub-band (per-cell only)."""
        return float(np.sum(self.beta_j)) if not self.is_unified else 0.0

    def backhaul_fractions(self, n_small_cells: int) -> np.ndarray:
        if self.is_unified:
            return np.full(n_small_cells, self.beta)
        return np.asarray(self.beta_j, dtype=float)

    def macro_factor(self, beam_group: int) -> float:
        if self.is_unified:
            return 1.0 - self.beta
        return 1.0 - self.n_b / beam_group

    def cell_factors(self, n_small_cells: int, beam_group: int) -> np.ndarray:
        """Bandwidth factor multiplying the shared rate of each cell, macro first."""
        return np.concatenate([[self.macro_factor(beam_group)],
                               1.0 - self.backhaul_fractions(n_small_cells)])

    def to_dict(self) -> dict:
        if self.is_unified:
            return {'kind': self.kind, 'beta': self.beta}
        return {'kind': self.kind, 'beta_j': self.beta_j.tolist(), 'n_b': self.n_b}


@dataclass
class DualState:
    """Lagrange multipliers and auxiliary loads of the dual decomposition."""
    mu: np.ndarray
    nu: np.ndarray
    k_aux: np.ndarray
    inner_iter: int = 0
    outer_iter: int = 0

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float)
        self.k_aux = np.asarray(self.k_aux, dtype=float)
        if self.nu.size and self.nu[0] != 0.0:
            raise ValueError("nu[0] is pinned to 0 for the macro cell")
        if (self.mu < 0).any() or (self.nu < 0).any():
            raise ValueError("Lagrange multipliers must be non-negative")

    @classmethod
    def initial(cls, n_cells: int, n_mts: int) -> 'DualState':
        return cls(
            mu=np.zeros(n_cells),
            nu=np.zeros(n_cells),
            k_aux=np.full(n_cells, n_mts / n_cells),
        )

    def to_dict(self) -> dict:
        return {
            'mu': self.mu.tolist(), 'nu': self.nu.tolist(), 'k_aux': self.k_aux.tolist(),
            'inner_iter': self.inner_iter, 'outer_iter': self.outer_iter,
        }


@dataclass(frozen=True)
class SolverConfig:
    """Step sizes and stopping rules of the dual-decomposition solvers."""
    step_mu_0: float = DEFAULT_STEP_MU
    step_nu_0: float = DEFAULT_STEP_NU
    step_decay: float = DEFAULT_STEP_DECAY
    inner_tol: float = DEFAULT_INNER_TOL
    inner_max_iter: int = DEFAULT_INNER_MAX_ITER
    outer_tol: float = DEFAULT_OUTER_TOL
    outer_max_iter: int = DEFAULT_OUTER_MAX_ITER
    beta_init: float = DEFAULT_BETA_INIT
    stability_window: int = DEFAULT_STABILITY_WINDOW
    percell_outer_tol: float = DEFAULT_PERCELL_OUTER_TOL

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(get_error_message(
                    'invalid_solver_config', detail=f"{f.name} must be positive"))
        if not 0 < self.beta_init < 1:
            raise ValueError(get_error_message(
                'invalid_solver_config', detail=f"beta_init must lie in (0, 1), got {self.beta_init}"))

    def step_mu(self, t: int) -> float:
        return self.step_mu_0 / t ** self.step_decay

    def step_nu(self, t: int) -> float:
        return self.step_nu_0 / t ** self.step_decay

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'SolverConfig':
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True)
class OracleLimits:
    max_enumeration: int = DEFAULT_MAX_ENUMERATION

    def allows(self, n_cells: int, n_mts: int) -> bool:
        return n_cells ** n_mts <= self.max_enumeration


@dataclass
class SolverDiagnostics:
    """Iteration counts, convergence flags and traces of one solver run."""
    outer_iterations: int = 0
    inner_iterations: List[int] = field(default_factory=list)
    inner_converged: List[bool] = field(default_factory=list)
    converged: bool = False
    backhaul_violation: bool = False
    utility_trace: List[float] = field(default_factory=list)
    beta_trace: List = field(default_factory=list)
    final_mu: List[float] = field(default_factory=list)
    final_nu: List[float] = field(default_factory=list)
    final_k_aux: List[float] = field(default_factory=list)

    @property
    def total_inner_iterations(self) -> int:
        return int(sum(self.inner_iterations))

    def record_duals(self, duals: DualState):
        self.final_mu = duals.mu.tolist()
        self.final_nu = duals.nu.tolist()
        self.final_k_aux = duals.k_aux.tolist()

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolverResult:
    assoc: Association
    wbba: WbbaAllocation
    utility: float
    diagnostics: SolverDiagnostics = field(default_factory=SolverDiagnostics)


@dataclass(frozen=True)
class ExperimentSpec:
    """One Monte-Carlo experiment: scenario, policies, trial count and seeding."""
    scenario: NetworkScenario = field(default_factory=NetworkScenario)
    scenario_kind: str = 'unified'
    algorithms: Tuple[str, ...] = tuple(DEFAULT_ALGORITHMS)
    n_trials: int = DEFAULT_N_TRIALS
    master_seed: int = DEFAULT_MASTER_SEED
    cre_bias_db: float = DEFAULT_CRE_BIAS_DB
    output_dir: str = str(DEFAULT_OUTPUT_DIR)
    n_workers: int = DEFAULT_N_WORKERS
    solver: SolverConfig = field(default_factory=SolverConfig)
    oracle_limits: OracleLimits = field(default_factory=OracleLimits)
    nu_sweep: Tuple[int, ...] = ()
    ns_sweep: Tuple[int, ...] = ()

    def __post_init__(self):
        def fail(detail):
            raise ValueError(get_error_message('invalid_experiment', detail=detail))

        object.__setattr__(self, 'algorithms', tuple(self.algorithms))
        object.__setattr__(self, 'nu_sweep', tuple(int(n) for n in self.nu_sweep))
        object.__setattr__(self, 'ns_sweep', tuple(int(n) for n in self.ns_sweep))
        if self.scenario_kind not in SCENARIO_KINDS:
            raise ValueError(get_error_message('unknown_kind', name=self.scenario_kind, choices=SCENARIO_KINDS))
        if not self.algorithms:
            fail("at least one algorithm is required")
        if len(set(self.algorithms)) != len(self.algorithms):
            fail(f"duplicate algorithms in {list(self.algorithms)}")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ValueError(get_error_message('unknown_algorithm', name=name, choices=ALGORITHMS))
            if name in PER_CELL_ONLY_ALGORITHMS and self.scenario_kind == 'unified':
                raise ValueError(get_error_message('unified_heuristic', name=name))
        if self.n_trials < 1:
            fail(f"n_trials must be >= 1, got {self.n_trials}")
        if not 0 <= self.master_seed < 2**64:
            fail(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.n_workers < 1:
            fail(f"n_workers must be >= 1, got {self.n_workers}")
        if 'oracle' in self.algorithms and not self.is_sweep and not self.oracle_limits.allows(
                self.scenario.n_cells, self.scenario.n_mts):
            raise ValueError(get_error_message(
                'oracle_too_large', count=self.scenario.n_cells ** self.scenario.n_mts,
                limit=self.oracle_limits.max_enumeration))
        for axis, values in (('nu_sweep', self.nu_sweep), ('ns_sweep', self.ns_sweep)):
            if len(set(values)) != len(values):
                fail(f"duplicate values in {axis} {list(values)}")
        if self.is_sweep:
            for n_small_cells, n_mts in self.sweep_points():
                self.at_point(n_small_cells, n_mts)

    @property
    def is_sweep(self) -> bool:
        return bool(self.nu_sweep or self.ns_sweep)

    def sweep_points(self) -> List[Tuple[int, int]]:
        """(N_S, N_U) grid of the sweep; an empty axis keeps the scenario value."""
        ns_values = self.ns_sweep or (self.scenario.n_small_cells,)
        nu_values = self.nu_sweep or (self.scenario.n_mts,)
        return [(ns, nu) for ns in ns_values for nu in nu_values]

    def at_point(self, n_small_cells: int, n_mts: int) -> 'ExperimentSpec':
        """The single experiment of one sweep point."""
        return replace(self, scenario=self.scenario.with_counts(n_small_cells, n_mts), nu_sweep=(), ns_sweep=())

    def to_dict(self) -> dict:
        return {
            'scenario': self.scenario.to_dict(),
            'scenario_kind': self.scenario_kind,
            'algorithms': list(self.algorithms),
            'n_trials': self.n_trials,
            'master_seed': self.master_seed,
            'cre_bias_db': self.cre_bias_db,
            'output_dir': self.output_dir,
            'n_workers': self.n_workers,
            'solver': self.solver.to_dict(),
            'oracle_limits': asdict(self.oracle_limits),
            'nu_sweep': list(self.nu_sweep),
            'ns_sweep': list(self.ns_sweep),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentSpec':
        _check_keys(cls, data)
        data = dict(data)
        if 'scenario' in data:
            data['scenario'] = NetworkScenario.from_dict(data['scenario'])
        if 'solver' in data:
            data['solver'] = SolverConfig.from_dict(data['solver'])
        if 'oracle_limits' in data:
            data['oracle_limits'] = OracleLimits(**data['oracle_limits'])
        return cls(**data)


@dataclass(eq=False)
class TrialResult:
    """Outcome of one algorithm on one trial instance."""
    trial_id: int
    algorithm: str
    per_mt_rates: np.ndarray
    serving: np.ndarray
    loads: np.ndarray
    wbba: WbbaAllocation
    utility: float
    converged: bool = True
    feasible: bool = True
    iterations: Dict[str, int] = field(default_factory=dict)
    diagnostics: Optional[dict] = None

    @property
    def n_mts(self) -> int:
        return self.per_mt_rates.shape[0]

    def to_dict(self) -> dict:
        return {
            'trial_id': self.trial_id,
            'algorithm': self.algorithm,
            'utility': self.utility,
            'loads': self.loads.tolist(),
            'wbba': self.wbba.to_dict(),
            'converged': self.converged,
            'feasible': self.feasible,
            'iterations': dict(self.iterations),
        }
