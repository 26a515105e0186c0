import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from .errors import UsageError
from .volume import MIN_BUDGET

logger = logging.getLogger("SYMKERNEL")

COMMANDS = ("spaces", "envelope", "volume", "validate", "lattice")
KERNELS = ("green", "heat")
GRIDS = ("r", "t", "s", "epsilon")

# Grids used when neither the config file nor the flags provide one
DEFAULT_GRIDS: Dict[str, Dict[str, List[float]]] = {
    "envelope": {
        "r": [2.0, 3.0, 5.0, 10.0, 20.0],
        "t": [0.25, 0.5, 1.0, 2.0, 5.0],
        "s": [0.25, 0.5, 1.0, 2.0],
    },
    "volume": {
        "r": [0.0, 1.0, 3.0, 6.0],
        "epsilon": [0.1, 0.3, 0.5, 0.7, 0.9],
    },
}


@dataclass
class ExperimentConfig:
    """One reproducible experiment: command, space, grids and seed"""

    command: str
    space: str = "H3R"
    kernel: str = "green"
    r: List[float] = field(default_factory=list)
    t: List[float] = field(default_factory=list)
    s: List[float] = field(default_factory=list)
    epsilon: List[float] = field(default_factory=list)
    seed: int = 0
    threads: int = 1
    budget: int = 100_000
    quad_budget: int = 200
    depth: int = 8
    lattice: Optional[str] = None
    alpha0: Optional[float] = None
    out: str = "results"
    allow_outside: bool = False
    baseline_db: Optional[str] = None

    def __post_init__(self) -> None:
        for name, grid in DEFAULT_GRIDS.get(self.command, {}).items():
            if not getattr(self, name):
                setattr(self, name, list(grid))
        for name in GRIDS:
            setattr(self, name, [float(v) for v in getattr(self, name)])

    def required_grids(self) -> List[str]:
        if self.command == "envelope":
            return ["r", "s"] if self.kernel == "green" else ["r", "t"]
        if self.command == "volume":
            return ["r", "epsilon"]
        return []

    def validate(self) -> None:
        """Raise UsageError on anything the chosen command cannot run with"""
        if self.command not in COMMANDS:
            raise UsageError(f"Unknown command: {self.command}")
        if self.command == "envelope" and self.kernel not in KERNELS:
            raise UsageError(f"Unknown kernel: {self.kernel} (expected green or heat)")

        for name in self.required_grids():
            if not getattr(self, name):
                raise UsageError(f"Grid '{name}' is empty for command {self.command}")
        if any(v < 0.0 for v in self.r):
            raise UsageError("Distances in the r grid must be nonnegative")
        if any(v <= 0.0 for v in self.t):
            raise UsageError("Times in the t grid must be positive")
        if any(v <= 0.0 for v in self.s):
            raise UsageError("Spectral parameters in the s grid must be positive")
        if any(not 0.0 <= v < 1.0 for v in self.epsilon):
            raise UsageError("epsilon values must lie in [0, 1)")
        if self.command == "volume" and 0.0 in self.epsilon:
            raise UsageError("Monte Carlo volumes need epsilon > 0")

        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.threads < 1:
            raise UsageError("threads must be at least 1")
        if self.command in ("volume", "validate") and self.budget < MIN_BUDGET:
            raise UsageError(f"budget must be at least {MIN_BUDGET} samples")
        if self.command == "lattice":
            if not self.lattice:
                raise UsageError("The lattice command needs a lattice spec (--lattice)")
            if self.depth < 1:
                raise UsageError("depth must be at least 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def read_config_file(path: Path) -> Dict[str, Any]:
    """Load the JSON config file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error loading config {path}: {str(e)}")
        raise UsageError(f"Cannot read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"Config file {path} must hold a JSON object")
    return data


def build_config(
    command: str,
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Config file values, then flag overrides (flags win), then validation"""
    values: Dict[str, Any] = read_config_file(config_path) if config_path else {}
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise UsageError(f"Unknown config keys: {', '.join(unknown)}")

    file_command = values.pop("command", command)
    if file_command != command:
        logger.warning(f"Config file is for '{file_command}', running '{command}'")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        config = ExperimentConfig(command=command, **values)
    except (TypeError, ValueError) as e:
        raise UsageError(f"Invalid configuration: {e}") from e
    config.validate()
    return config
