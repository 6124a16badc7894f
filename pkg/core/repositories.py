"""
Data persistence layer: JSON scenarios, experiment specs, summaries and diagnostics.
"""
import json
from pathlib import Path
from typing import List

from .config import DATA_DIR, DEFAULT_EXPERIMENT_FILE, SUMMARY_FILE, DIAGNOSTICS_FILE, get_error_message
from .models import ExperimentSpec, NetworkScenario


class BaseRepository:
    """Base repository for JSON file operations."""

    def __init__(self, data_dir: Path = None):
        self.data_dir = Path(data_dir) if data_dir else DATA_DIR

    def _path(self, filename) -> Path:
        path = Path(filename)
        return path if path.is_absolute() or path.parent != Path('.') else self.data_dir / path

    def _load_json(self, filename) -> dict:
        path = self._path(filename)
        if not path.exists():
            raise FileNotFoundError(get_error_message('file_not_found', filename=path))
        with open(path, 'r') as f:
            return json.load(f)

    def _save_json(self, data: dict, filename) -> Path:
        path = self._path(filename)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w') as f:
                json.dump(data, f, indent=2)
        except OSError as e:
            raise OSError(get_error_message('write_failed', filename=path, reason=e)) from e
        return path


class ScenarioRepository(BaseRepository):
    """Flat scenario documents keyed by NetworkScenario field names."""

    def load(self, filename) -> NetworkScenario:
        return NetworkScenario.from_dict(self._load_json(filename))

    def save(self, scenario: NetworkScenario, filename) -> Path:
        return self._save_json(scenario.to_dict(), filename)


class ExperimentRepository(BaseRepository):
    """Experiment specs; missing keys take their defaults."""

    def load(self, filename=DEFAULT_EXPERIMENT_FILE) -> ExperimentSpec:
        return ExperimentSpec.from_dict(self._load_json(filename))

    def save(self, spec: ExperimentSpec, filename) -> Path:
        return self._save_json(spec.to_dict(), filename)


class ResultRepository(BaseRepository):
    """JSON artifacts of one experiment run, written into its output directory."""

    def save_summary(self, summary: dict) -> Path:
        return self._save_json(summary, self.data_dir / SUMMARY_FILE)

    def save_diagnostics(self, diagnostics: List[dict]) -> Path:
        return self._save_json({'trials': diagnostics}, self.data_dir / DIAGNOSTICS_FILE)
