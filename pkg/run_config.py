"""
Run Configuration
Loads and validates the JSON run configs consumed by scattering_cli.py
"""

import json
import os
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import sympy
from dotenv import load_dotenv

from ising_model import Boundary, ModelParams
from scattering_experiments import AGGREGATIONS, REFERENCE_VACUA, VacuumConfig, VacuumSource, VqeConfig
from trotter_evolution import TrotterConfig
from wave_packets import DISTANCES, PrepVariant, WavePacketSpec

# Load environment variables
load_dotenv()


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, default))
    except ValueError:
        return default


# Configuration
DEFAULT_OUTPUT_DIR = os.getenv("SCATTERING_OUTPUT_DIR", "./results")
DEFAULT_JOBS = _env_int("SCATTERING_JOBS", 1)
OUTPUT_FORMATS = ("csv", "json")
SECTIONS = ("model", "packets", "variant", "trotter", "vacuum", "vqe", "output", "grid")


def evaluate_angle(expression: str) -> float:
    """Evaluate a real angle expression such as '-pi/2' or '7*pi/16'."""
    try:
        value = sympy.sympify(expression)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise ValueError(f"Cannot parse angle expression {expression!r}") from e
    if not value.is_number or not value.is_real:
        raise ValueError(f"Angle expression {expression!r} is not a real number")
    return float(value)


class ConfigError(ValueError):
    """Invalid run configuration; `messages` lists every problem found"""

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@dataclass(frozen=True)
class OutputOptions:
    formats: Tuple[str, ...] = OUTPUT_FORMATS
    expand_toffoli: bool = False
    aggregation: str = "l2"
    exclude_initial: bool = True

    def to_dict(self) -> Dict:
        return {
            "formats": list(self.formats),
            "expand_toffoli": self.expand_toffoli,
            "aggregation": self.aggregation,
            "exclude_initial": self.exclude_initial,
        }


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI command needs, fully resolved"""

    model: ModelParams
    packets: Tuple[WavePacketSpec, ...] = ()
    variant: PrepVariant = PrepVariant.TRUNCATED_UNITARY
    trotter: TrotterConfig = field(default_factory=TrotterConfig)
    vacuum: VacuumConfig = field(default_factory=VacuumConfig)
    vqe: VqeConfig = field(default_factory=VqeConfig)
    output: OutputOptions = field(default_factory=OutputOptions)
    grid: Tuple[Tuple[float, float], ...] = ()

    def to_dict(self) -> Dict:
        return {
            "model": self.model.to_dict(),
            "packets": [spec.to_dict() for spec in self.packets],
            "variant": self.variant.value,
            "trotter": self.trotter.to_dict(),
            "vacuum": self.vacuum.to_dict(),
            "vqe": self.vqe.to_dict(),
            "output": self.output.to_dict(),
            "grid": [list(cell) for cell in self.grid],
        }


class _Checker:
    """Collects field problems with their dotted paths"""

    def __init__(self):
        self.errors: List[str] = []

    def fail(self, path: str, message: str):
        self.errors.append(f"{path}: {message}")

    def section(self, data: Dict, key: str) -> Dict:
        value = data.get(key, {})
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(key, f"expected an object, got {type(value).__name__}")
            return {}
        return value

    def number(self, path: str, value, positive: bool = False) -> Optional[float]:
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            self.fail(path, f"expected a number, got {value!r}")
            return None
        if positive and not value > 0:
            self.fail(path, f"must be positive, got {value}")
            return None
        return float(value)

    def angle(self, path: str, value) -> Optional[float]:
        if isinstance(value, str):
            try:
                return evaluate_angle(value)
            except ValueError:
                self.fail(path, f"cannot evaluate angle expression {value!r}")
                return None
        return self.number(path, value)

    def integer(self, path: str, value, minimum: int) -> Optional[int]:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
            return None
        if value < minimum:
            self.fail(path, f"must be at least {minimum}, got {value}")
            return None
        return value

    def choice(self, path: str, value, options) -> Optional[str]:
        if value not in options:
            self.fail(path, f"must be one of {list(options)}, got {value!r}")
            return None
        return value

    def flag(self, path: str, value) -> Optional[bool]:
        if not isinstance(value, bool):
            self.fail(path, f"expected true or false, got {value!r}")
            return None
        return value

    def unknown(self, path: str, data: Dict, allowed):
        for key in data:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else key, "unknown field")


def _default_window(index: int, count: int, n_sites: int) -> Optional[Tuple[int, int]]:
    if count == 1:
        return (1, n_sites)
    if count == 2:
        half = n_sites // 2
        return (1, half) if index == 0 else (half + 1, n_sites)
    return None


def _parse_model(check: _Checker, data: Dict) -> Optional[ModelParams]:
    if "model" not in data:
        check.fail("model", "required section is missing")
        return None
    model = check.section(data, "model")
    check.unknown("model", model, ("n_sites", "j_coupling", "h_field", "g_coupling", "boundary"))
    n_sites = check.integer("model.n_sites", model.get("n_sites"), 2)
    values = {}
    for name, default in (("j_coupling", 0.0), ("h_field", 1.0), ("g_coupling", 0.0)):
        values[name] = check.number(f"model.{name}", model.get(name, default))
    boundary = check.choice("model.boundary", model.get("boundary", "periodic"), [b.value for b in Boundary])
    if n_sites is None or boundary is None or None in values.values():
        return None
    return ModelParams(n_sites, boundary=Boundary(boundary), **values)


def _parse_packets(check: _Checker, data: Dict, n_sites: Optional[int]) -> List[WavePacketSpec]:
    raw = data.get("packets", [])
    if not isinstance(raw, list):
        check.fail("packets", f"expected a list, got {type(raw).__name__}")
        return []

    specs = []
    for index, packet in enumerate(raw):
        path = f"packets[{index}]"
        if not isinstance(packet, dict):
            check.fail(path, "expected an object")
            continue
        check.unknown(path, packet, ("center", "momentum", "width", "window", "distance"))
        center = check.number(f"{path}.center", packet.get("center"))
        momentum = check.angle(f"{path}.momentum", packet.get("momentum"))
        width = check.number(f"{path}.width", packet.get("width"), positive=True)
        distance = check.choice(f"{path}.distance", packet.get("distance", "open"), DISTANCES)

        window = packet.get("window")
        if window is None and n_sites is not None:
            window = _default_window(index, len(raw), n_sites)
            if window is None:
                check.fail(f"{path}.window", "required when more than two packets are given")
        elif window is not None:
            if (
                not isinstance(window, list) or len(window) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in window)
            ):
                check.fail(f"{path}.window", f"expected [lo, hi] integers, got {window!r}")
                window = None
            elif n_sites is not None and not 1 <= window[0] <= window[1] <= n_sites:
                check.fail(f"{path}.window", f"must satisfy 1 <= lo <= hi <= {n_sites}, got {window}")
                window = None

        if None in (center, momentum, width, distance, window):
            continue
        try:
            specs.append(WavePacketSpec(center, momentum, width, tuple(window), distance))
        except ValueError as e:
            check.fail(path, str(e))

    for i, first in enumerate(specs):
        for second in specs[i + 1:]:
            if set(first.sites) & set(second.sites):
                check.fail("packets", f"windows {first.window} and {second.window} overlap")
    return specs


def _build(check: _Checker, path: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as e:
        check.fail(path, str(e))
        return None


def parse_run_config(data: Dict, seed: Optional[int] = None) -> RunConfig:
    """Validate a decoded config document; raise ConfigError listing every problem."""
    check = _Checker()
    if not isinstance(data, dict):
        raise ConfigError(["<root>: expected a JSON object"])
    check.unknown("", data, SECTIONS)

    model = _parse_model(check, data)
    packets = _parse_packets(check, data, model.n_sites if model else None)
    variant = check.choice("variant", data.get("variant", PrepVariant.TRUNCATED_UNITARY.value), [v.value for v in PrepVariant])

    trotter_data = check.section(data, "trotter")
    check.unknown("trotter", trotter_data, ("dt", "n_steps", "boundary"))
    trotter = None
    dt = check.number("trotter.dt", trotter_data.get("dt", 0.1), positive=True)
    n_steps = check.integer("trotter.n_steps", trotter_data.get("n_steps", 120), 0)
    boundary = trotter_data.get("boundary")
    if boundary is not None:
        boundary = check.choice("trotter.boundary", boundary, [b.value for b in Boundary])
    if dt is not None and n_steps is not None:
        trotter = _build(check, "trotter", TrotterConfig, dt=dt, n_steps=n_steps, boundary=boundary)

    vacuum_data = check.section(data, "vacuum")
    check.unknown("vacuum", vacuum_data, ("source", "dtau", "n_steps", "reference"))
    source = check.choice("vacuum.source", vacuum_data.get("source", VacuumSource.EXACT_GROUND.value), [s.value for s in VacuumSource])
    dtau = check.number("vacuum.dtau", vacuum_data.get("dtau", 0.05), positive=True)
    imaginary_steps = check.integer("vacuum.n_steps", vacuum_data.get("n_steps", 400), 1)
    reference = check.choice("vacuum.reference", vacuum_data.get("reference", REFERENCE_VACUA[0]), list(REFERENCE_VACUA))
    vacuum = None
    if None not in (source, dtau, imaginary_steps, reference):
        vacuum = VacuumConfig(VacuumSource(source), dtau, imaginary_steps, reference)

    vqe_data = dict(check.section(data, "vqe"))
    check.unknown("vqe", vqe_data, VqeConfig.__dataclass_fields__)
    if seed is not None:
        vqe_data["seed"] = seed
    vqe = _build(check, "vqe", VqeConfig, **{k: v for k, v in vqe_data.items() if k in VqeConfig.__dataclass_fields__})

    output_data = check.section(data, "output")
    check.unknown("output", output_data, ("formats", "expand_toffoli", "aggregation", "exclude_initial"))
    formats = output_data.get("formats", list(OUTPUT_FORMATS))
    if not isinstance(formats, list) or not formats or any(f not in OUTPUT_FORMATS for f in formats):
        check.fail("output.formats", f"expected a non-empty subset of {list(OUTPUT_FORMATS)}, got {formats!r}")
        formats = list(OUTPUT_FORMATS)
    output = OutputOptions(
        formats=tuple(formats),
        expand_toffoli=bool(check.flag("output.expand_toffoli", output_data.get("expand_toffoli", False))),
        aggregation=check.choice("output.aggregation", output_data.get("aggregation", "l2"), AGGREGATIONS) or "l2",
        exclude_initial=bool(check.flag("output.exclude_initial", output_data.get("exclude_initial", True))),
    )

    grid = []
    raw_grid = data.get("grid", [])
    if not isinstance(raw_grid, list):
        check.fail("grid", "expected a list of [J, g] pairs")
        raw_grid = []
    for index, cell in enumerate(raw_grid):
        if not isinstance(cell, list) or len(cell) != 2:
            check.fail(f"grid[{index}]", f"expected [J, g], got {cell!r}")
            continue
        j = check.number(f"grid[{index}][0]", cell[0])
        g = check.number(f"grid[{index}][1]", cell[1])
        if j is not None and g is not None:
            grid.append((j, g))

    if check.errors:
        raise ConfigError(check.errors)
    return RunConfig(
        model=model,
        packets=tuple(packets),
        variant=PrepVariant(variant),
        trotter=trotter,
        vacuum=vacuum,
        vqe=vqe,
        output=output,
        grid=tuple(grid),
    )


def load_run_config(path, seed: Optional[int] = None) -> RunConfig:
    """Read and validate a JSON config file; syntax errors report line and column."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"{path}: file not found"])
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError([f"{path}: line {e.lineno}, column {e.colno}: {e.msg}"])
    return parse_run_config(data, seed=seed)
