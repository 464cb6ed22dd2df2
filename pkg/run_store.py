"""
Run Store
One output directory per CLI run: config echo, metrics, datasets and state dumps
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from circuit_engine import StateVector
from run_config import DEFAULT_OUTPUT_DIR
from trotter_evolution import TrajectoryDataset


def _write_json(path: Path, data: Dict):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False)


class RunStore:
    """Manages run directories under a common output root."""

    def __init__(self, storage_dir: str = DEFAULT_OUTPUT_DIR):
        self.storage_dir = Path(storage_dir)
        self.run_dir: Optional[Path] = None

    def start_run(self, command: str, run_dir: Optional[str] = None) -> Path:
        """Create the directory for a run; defaults to <root>/<command>_<timestamp>"""
        if run_dir is not None:
            self.run_dir = Path(run_dir)
        else:
            run_id = datetime.now().strftime('%Y%m%d_%H%M%S')
            self.run_dir = self.storage_dir / f"{command}_{run_id}"
        self.run_dir.mkdir(parents=True, exist_ok=True)
        return self.run_dir

    def _target(self, name: str) -> Path:
        if self.run_dir is None:
            raise ValueError("No active run")
        return self.run_dir / name

    def save_json(self, name: str, data: Dict) -> Path:
        path = self._target(name)
        _write_json(path, data)
        print(f"✓ Saved {path}")
        return path

    def save_text(self, name: str, text: str) -> Path:
        path = self._target(name)
        path.write_text(text, encoding='utf-8')
        print(f"✓ Saved {path}")
        return path

    def save_config_echo(self, config_echo: Dict) -> Path:
        # no timestamps here, reruns must reproduce this file byte for byte
        return self.save_json("config_echo.json", config_echo)

    def save_metrics(self, metrics: Dict) -> Path:
        return self.save_json("metrics.json", {**metrics, 'generated_at': datetime.now().isoformat()})

    def save_dataset(self, dataset: TrajectoryDataset, formats: Iterable[str]) -> List[Path]:
        paths = []
        for fmt in formats:
            if fmt == "csv":
                paths.append(self.save_text("trajectory.csv", dataset.to_csv()))
            elif fmt == "json":
                paths.append(self.save_text("trajectory.json", dataset.to_json() + "\n"))
            else:
                raise ValueError(f"Unknown dataset format: {fmt}")
        return paths

    def save_state(self, state: StateVector, header: Dict) -> Tuple[Path, Path]:
        """Write amplitudes to state.npy and a JSON header next to them"""
        npy_path = self._target("state.npy")
        np.save(npy_path, state.amplitudes)
        header = {
            'n_qubits': state.n_qubits,
            'norm': state.norm(),
            **header,
        }
        json_path = self.save_json("state.json", header)
        print(f"✓ Saved {npy_path}")
        return npy_path, json_path

    def list_runs(self) -> List[Dict]:
        """Summaries of every run directory under the output root"""
        if not self.storage_dir.exists():
            return []

        runs = []
        for run_dir in sorted(p for p in self.storage_dir.iterdir() if p.is_dir()):
            metrics_file = run_dir / "metrics.json"
            metrics = {}
            if metrics_file.exists():
                try:
                    with open(metrics_file, 'r', encoding='utf-8') as f:
                        metrics = json.load(f)
                except Exception as e:
                    print(f"⚠ Error loading {metrics_file}: {e}")
            runs.append({
                'run_dir': str(run_dir),
                'generated_at': metrics.get('generated_at'),
                'files': sorted(p.name for p in run_dir.iterdir()),
            })
        return runs


def load_state(run_dir: str) -> Tuple[StateVector, Dict]:
    run_dir = Path(run_dir)
    amplitudes = np.load(run_dir / "state.npy")
    with open(run_dir / "state.json", 'r', encoding='utf-8') as f:
        header = json.load(f)
    return StateVector(amplitudes), header


def load_dataset(run_dir: str) -> TrajectoryDataset:
    with open(Path(run_dir) / "trajectory.json", 'r', encoding='utf-8') as f:
        return TrajectoryDataset.from_dict(json.load(f))
