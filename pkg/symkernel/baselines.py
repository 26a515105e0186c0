"""Frozen acceptance intervals for the ratio checks run by ``validate``."""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional


@dataclass(frozen=True)
class RatioBaseline:
    case: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    max_spread: Optional[float] = None

    def check(self, summary: Mapping[str, float]) -> bool:
        if self.lower is not None and summary["min_ratio"] < self.lower:
            return False
        if self.upper is not None and summary["max_ratio"] > self.upper:
            return False
        if self.max_spread is not None and summary["spread"] > self.max_spread:
            return False
        return True


BASELINES: Dict[str, RatioBaseline] = {
    # exact ratio 1 / (2 pi (1 - e^{-2r}))
    "H3R-green": RatioBaseline("H3R-green", lower=0.159, upper=0.163),
    "H3R-green-laplace": RatioBaseline("H3R-green-laplace", lower=1.0 - 1e-6, upper=1.0 + 1e-6),
    "R3-green-laplace": RatioBaseline("R3-green-laplace", lower=1.0 - 1e-8, upper=1.0 + 1e-8),
    # exact kernel over envelope: bounded below, so the envelope is sharp
    "H3R-heat": RatioBaseline("H3R-heat", lower=0.03, upper=0.05, max_spread=5.0),
    "H2R-heat": RatioBaseline("H2R-heat", lower=0.08, upper=0.12, max_spread=10.0),
    # lhs / rhs: the bound holds and is off by at most a factor 4
    "gaussian-tail": RatioBaseline("gaussian-tail", lower=0.25, upper=1.0),
    "H3R-volume": RatioBaseline("H3R-volume", lower=0.25, upper=1.6, max_spread=1e3),
    "SL3R-volume": RatioBaseline("SL3R-volume", lower=0.06, upper=2.0, max_spread=1e3),
}

# Suites run by `validate --space <label>`
SUITES: Dict[str, tuple] = {
    "H3R": (
        "H3R-green",
        "H3R-green-laplace",
        "R3-green-laplace",
        "H3R-heat",
        "gaussian-tail",
        "H3R-volume",
    ),
    "H2R": ("H2R-heat",),
    "SL3R": ("SL3R-volume",),
}
