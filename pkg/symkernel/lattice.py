"""
Orbits of discrete subgroups acting on the catalog spaces.

A group is given by generators; words in the generators and their inverses
are enumerated breadth first, one sample per distinct group element, and the
orbit of the basepoint o = eK is summarized by (d(gamma o, o), rho(gamma+)).
The critical exponents are read off those samples by orbital counting.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .envelopes import OperatorSpec
from .errors import DomainError, EstimationError, ModelError, TruncationError
from .models import (
    HYPERBOLOID,
    MODEL_TOL,
    MODELS,
    is_unimodular,
    log_singular_values,
    rootsystem_for,
)
from .rootdata import RestrictedRootSystem, rho_min, rho_norm

logger = logging.getLogger("SYMKERNEL")

DEFAULT_DEDUP_TOL = 1e-7
COLLISION_TOL = 1e-6
TORSION_TOL = 1e-6
SAMPLE_CAP = 200_000
MARGIN_TOL = 1e-9
SHELL_DECIMALS = 9
MIN_SHELLS = 3


@dataclass(frozen=True)
class OrbitSample:
    word_length: int
    dist: float
    rho_radial: float


@dataclass(frozen=True)
class LatticeSpec:
    """Generators of a discrete group acting on one of the matrix models

    ``dimension`` is the n of H^n or SLnR; it is only needed when the
    generator list is empty.
    """

    model: str
    generators: Tuple[Tuple[Tuple[float, ...], ...], ...]
    name: str = "lattice"
    dimension: Optional[int] = None

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ModelError(f"Unknown model: {self.model}")
        if not self.generators and self.dimension is None:
            raise ModelError(f"{self.name}: a group without generators needs a dimension")
        for i, g in enumerate(self.matrices()):
            _check_generator(self.model, self.size, g, f"{self.name} generator {i}")

    @property
    def size(self) -> int:
        """Side of the matrices: n + 1 on the hyperboloid, n for cosets"""
        if self.generators:
            return len(self.generators[0])
        assert self.dimension is not None
        return self.dimension + 1 if self.model == HYPERBOLOID else self.dimension

    @property
    def n(self) -> int:
        return self.size - 1 if self.model == HYPERBOLOID else self.size

    def matrices(self) -> List[np.ndarray]:
        return [np.array(g, dtype=float) for g in self.generators]

    def augmented(self) -> List[np.ndarray]:
        """Generators interleaved with their inverses: letter 2k is g_k, 2k+1 is g_k^-1"""
        letters = []
        for g in self.matrices():
            letters.append(g)
            letters.append(_inverse(self.model, g))
        return letters

    def rootsystem(self) -> RestrictedRootSystem:
        return rootsystem_for(self.model, self.n)

    @classmethod
    def from_matrices(
        cls, model: str, generators: Sequence[np.ndarray], name: str = "lattice"
    ) -> "LatticeSpec":
        data = tuple(
            tuple(tuple(float(c) for c in row) for row in np.asarray(g, dtype=float))
            for g in generators
        )
        return cls(model, data, name)


def _lorentz_form(size: int) -> np.ndarray:
    form = -np.eye(size)
    form[0, 0] = 1.0
    return form


def _check_generator(model: str, size: int, g: np.ndarray, label: str) -> None:
    if g.shape != (size, size):
        raise ModelError(f"{label}: expected a {size}x{size} matrix, got {g.shape}")
    if model == HYPERBOLOID:
        form = _lorentz_form(size)
        scale = max(1.0, float(np.max(np.abs(g))) ** 2)
        if np.max(np.abs(g.T @ form @ g - form)) > MODEL_TOL * scale:
            raise ModelError(f"{label}: not a Lorentz transformation")
        if g[0, 0] < 1.0 - MODEL_TOL:
            raise ModelError(f"{label}: does not preserve the upper sheet")
    elif not is_unimodular(g):
        raise ModelError(f"{label}: not unimodular")


def _inverse(model: str, g: np.ndarray) -> np.ndarray:
    if model == HYPERBOLOID:
        form = _lorentz_form(g.shape[0])
        return form @ g.T @ form
    return np.linalg.inv(g)


def load_lattice_spec(path: Path) -> LatticeSpec:
    """Read {model, generators: [[...]], name} from a JSON file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error loading lattice spec {path}: {str(e)}")
        raise ModelError(f"Cannot read lattice spec {path}: {e}") from e

    if "model" not in raw or "generators" not in raw:
        raise ModelError(f"{path}: lattice spec needs 'model' and 'generators'")
    generators = tuple(
        tuple(tuple(float(c) for c in row) for row in g) for g in raw["generators"]
    )
    return LatticeSpec(
        model=raw["model"],
        generators=generators,
        name=raw.get("name", Path(path).stem),
        dimension=raw.get("dimension"),
    )


# Enumeration


def _canonical_key(g: np.ndarray, dedup_tol: float) -> Tuple[int, bytes]:
    scale = float(np.max(np.abs(g)))
    grid = np.rint(g / (scale * dedup_tol)).astype(np.int64)
    return int(round(math.log(scale) / dedup_tol)), grid.tobytes()


def _same_element(model: str, g: np.ndarray, h: np.ndarray) -> bool:
    """h^-1 g is the identity; nearby entries alone do not make two elements equal"""
    if model == HYPERBOLOID:
        relative = _inverse(model, h) @ g
    else:
        relative = np.linalg.solve(h, g)
    return float(np.max(np.abs(relative - np.eye(g.shape[0])))) < COLLISION_TOL


def orbit_sample(
    model: str, rs: RestrictedRootSystem, g: np.ndarray, word_length: int
) -> OrbitSample:
    """(d(g o, o), rho(g+)) read directly from the matrix"""
    if model == HYPERBOLOID:
        d = float(np.arcsinh(np.linalg.norm(g[1:, 0])))
        return OrbitSample(word_length, d, float(rs.rho_vector[0]) * d)
    logs = log_singular_values(g)
    return OrbitSample(
        word_length,
        float(np.linalg.norm(logs)),
        float(rs.rho_vector @ logs),
    )


Frontier = List[Tuple[np.ndarray, int]]


def _expand(chunk: Frontier, letters: List[np.ndarray]) -> Frontier:
    products = []
    for g, last in chunk:
        for letter, h in enumerate(letters):
            # skip g * x * x^-1
            if last >= 0 and letter == last ^ 1:
                continue
            products.append((g @ h, letter))
    return products


def _split(frontier: Frontier, parts: int) -> List[Frontier]:
    size = max(1, math.ceil(len(frontier) / parts))
    return [frontier[i : i + size] for i in range(0, len(frontier), size)]


def enumerate_orbit(
    spec: LatticeSpec,
    max_word_length: int,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    cap: int = SAMPLE_CAP,
    threads: int = 1,
) -> List[OrbitSample]:
    """Breadth-first word enumeration, one sample per distinct group element

    The identity comes first. Each level is expanded in chunks (concurrently
    when threads > 1) and merged in chunk order, so the output does not depend
    on the thread count.
    """
    if max_word_length < 1:
        raise DomainError(f"max_word_length must be >= 1, got {max_word_length}")
    if not 0.0 < dedup_tol < 1e-3:
        raise DomainError(f"dedup_tol must lie in (0, 1e-3), got {dedup_tol}")

    rs = spec.rootsystem()
    letters = spec.augmented()
    identity = np.eye(spec.size)
    seen: Dict[Tuple[int, bytes], List[np.ndarray]] = {
        _canonical_key(identity, dedup_tol): [identity]
    }
    samples = [OrbitSample(0, 0.0, 0.0)]
    frontier: Frontier = [(identity, -1)]

    for depth in range(1, max_word_length + 1):
        if not frontier:
            break
        chunks = _split(frontier, threads)
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                expanded = list(pool.map(lambda c: _expand(c, letters), chunks))
        else:
            expanded = [_expand(c, letters) for c in chunks]

        next_frontier: Frontier = []
        for products in expanded:
            for g, letter in products:
                key = _canonical_key(g, dedup_tol)
                bucket = seen.setdefault(key, [])
                if any(_same_element(spec.model, g, other) for other in bucket):
                    continue
                bucket.append(g)
                sample = orbit_sample(spec.model, rs, g, depth)
                if sample.dist < TORSION_TOL:
                    logger.warning(
                        f"{spec.name}: element at word length {depth} fixes the basepoint "
                        "(torsion or compact factor)"
                    )
                samples.append(sample)
                next_frontier.append((g, letter))
                if len(samples) > cap:
                    logger.warning(f"{spec.name}: sample cap {cap} reached at depth {depth}")
                    raise TruncationError(
                        f"Orbit enumeration exceeded {cap} samples at word length {depth}",
                        partial=samples,
                    )
        frontier = next_frontier
        logger.info(f"{spec.name}: word length {depth}, {len(frontier)} new elements")

    return samples


# Series and exponents


def _exponents(samples: Sequence[OrbitSample], s: float, weighted: bool) -> np.ndarray:
    if not samples:
        raise DomainError("Series needs at least one sample")
    dist = np.array([p.dist for p in samples])
    tilt = np.array([p.rho_radial for p in samples]) if weighted else 0.0
    return -tilt - s * dist


def _partial_sum(exponents: np.ndarray) -> float:
    log_total = float(logsumexp(exponents))
    if log_total > math.log(np.finfo(float).max):
        return math.inf
    return math.exp(log_total)


def poincare_series(samples: Sequence[OrbitSample], s: float) -> float:
    """Partial sum of sum e^{-s d(gamma o, o)}"""
    return _partial_sum(_exponents(samples, s, weighted=False))


def modified_series(samples: Sequence[OrbitSample], s: float) -> float:
    """Partial sum of sum e^{-rho(gamma+) - s d(gamma o, o)}; +inf on overflow"""
    return _partial_sum(_exponents(samples, s, weighted=True))


def series_abscissa(
    samples: Sequence[OrbitSample],
    weighted: bool,
    lower: float = -50.0,
    upper: float = 50.0,
    iterations: int = 200,
) -> float:
    """Bisection diagnostic: the s at which the outer half of the orbit ball
    contributes as much to the partial sum as the inner half.

    Returns nan when there is no outer half to compare with.
    """
    dist = np.array([p.dist for p in samples])
    radius = float(dist.max()) if len(dist) else 0.0
    outer = dist > radius / 2.0
    if radius <= 0.0 or not np.any(outer) or np.all(outer):
        return math.nan

    def balance(s: float) -> float:
        exponents = _exponents(samples, s, weighted)
        return float(logsumexp(exponents[outer]) - logsumexp(exponents[~outer]))

    if balance(lower) < 0.0 or balance(upper) > 0.0:
        logger.warning(f"Series abscissa outside [{lower}, {upper}]")
        return lower if balance(lower) < 0.0 else upper
    for _ in range(iterations):
        middle = 0.5 * (lower + upper)
        if balance(middle) > 0.0:
            lower = middle
        else:
            upper = middle
    return 0.5 * (lower + upper)


class CriticalExponents(NamedTuple):
    delta: float
    delta_tilde: float
    diagnostics: Dict[str, Any]


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    model: str  # exponential | polynomial
    exponential_residual: float
    polynomial_residual: float
    shells: int


def _fit_growth(radii: np.ndarray, log_counts: np.ndarray) -> GrowthFit:
    """Exponential (log N = aR + c) against polynomial (log N = k log(1+R) + c)"""
    exp_coeffs, exp_res, *_ = np.polyfit(radii, log_counts, 1, full=True)
    poly_coeffs, poly_res, *_ = np.polyfit(np.log1p(radii), log_counts, 1, full=True)
    exp_rms = math.sqrt(float(exp_res[0]) / len(radii)) if len(exp_res) else 0.0
    poly_rms = math.sqrt(float(poly_res[0]) / len(radii)) if len(poly_res) else 0.0
    if poly_rms < exp_rms:
        return GrowthFit(0.0, "polynomial", exp_rms, poly_rms, len(radii))
    return GrowthFit(max(float(exp_coeffs[0]), 0.0), "exponential", exp_rms, poly_rms, len(radii))


def _shell_log_counts(
    dist: np.ndarray, log_weights: np.ndarray, window: Tuple[float, float]
) -> Tuple[np.ndarray, np.ndarray]:
    """log of sum_{d <= R} weight at each distinct distance R inside the window"""
    order = np.argsort(dist, kind="stable")
    dist, log_weights = dist[order], log_weights[order]
    cumulative = np.logaddexp.accumulate(log_weights)
    shells = np.round(dist, SHELL_DECIMALS)
    # last index of each distinct shell
    last = np.flatnonzero(np.append(shells[1:] != shells[:-1], True))
    radii, log_counts = dist[last], cumulative[last]
    slack = 1e-9 * max(1.0, window[1])
    inside = (radii >= window[0] - slack) & (radii <= window[1] + slack)
    return radii[inside], log_counts[inside]


def critical_exponents(
    samples: Sequence[OrbitSample], rs: RestrictedRootSystem
) -> CriticalExponents:
    """Growth rates of the orbit count and of the rho-tilted orbit count

    N(R) = #{d <= R} gives delta. The tilted count sum_{d <= R} e^{|rho| d - rho(gamma+)}
    grows at rate delta_tilde + |rho|. Both are fitted on the window
    [R/3, R] where R is the smallest distance reached at the largest word
    length, below which the enumeration is taken as complete.
    """
    if not samples:
        raise EstimationError("No orbit samples")
    max_length = max(p.word_length for p in samples)
    if max_length == 0:
        raise EstimationError("Only the identity was enumerated")
    r_complete = min(p.dist for p in samples if p.word_length == max_length)
    window = (r_complete / 3.0, r_complete)

    dist = np.array([p.dist for p in samples])
    radial = np.array([p.rho_radial for p in samples])
    norm = rho_norm(rs)

    radii, log_counts = _shell_log_counts(dist, np.zeros_like(dist), window)
    if len(radii) < MIN_SHELLS:
        raise EstimationError(
            f"Only {len(radii)} distance shells in the window [{window[0]:.4g}, {window[1]:.4g}]"
        )
    plain = _fit_growth(radii, log_counts)
    radii_t, log_counts_t = _shell_log_counts(dist, norm * dist - radial, window)
    tilted = _fit_growth(radii_t, log_counts_t)

    diagnostics = {
        "window": list(window),
        "shells": plain.shells,
        "samples": len(samples),
        "max_word_length": max_length,
        "delta_model": plain.model,
        "delta_residuals": [plain.exponential_residual, plain.polynomial_residual],
        "delta_tilde_model": tilted.model,
        "delta_tilde_residuals": [tilted.exponential_residual, tilted.polynomial_residual],
        "abscissa_delta": series_abscissa(samples, weighted=False),
        "abscissa_delta_tilde": series_abscissa(samples, weighted=True),
    }
    logger.debug(f"Critical exponent fit: {diagnostics}")
    return CriticalExponents(plain.rate, tilted.rate - norm, diagnostics)


# Spectral consequences


def lambda0_lower_bound(op: OperatorSpec, delta_tilde: float) -> float:
    """alpha0 - delta_tilde^2 when delta_tilde > 0, alpha0 otherwise"""
    return op.alpha0 - max(delta_tilde, 0.0) ** 2


def l2_kernel_trivial(op: OperatorSpec, delta_tilde: float) -> bool:
    return op.alpha0 >= 0.0 and delta_tilde < math.sqrt(op.alpha0)


@dataclass(frozen=True)
class InequalityCheck:
    holds: bool
    lower_margin: float
    upper_margin: float
    rho_min: float
    rho_norm: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "rho_min": self.rho_min,
            "rho_norm": self.rho_norm,
        }


def exponent_inequality_check(
    rs: RestrictedRootSystem, delta: float, delta_tilde: float
) -> InequalityCheck:
    """rho_min + delta_tilde <= delta <= |rho| + delta_tilde, with both margins"""
    if not (math.isfinite(delta) and math.isfinite(delta_tilde)):
        raise DomainError("Critical exponents must be finite")
    low, high = rho_min(rs), rho_norm(rs)
    lower_margin = delta - low - delta_tilde
    upper_margin = high + delta_tilde - delta
    return InequalityCheck(
        holds=lower_margin >= -MARGIN_TOL and upper_margin >= -MARGIN_TOL,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
        rho_min=low,
        rho_norm=high,
    )


def spectral_report(op: OperatorSpec, delta_tilde: float) -> List[str]:
    """Which lower bound on the bottom of the spectrum of L on the quotient applies"""
    bound = lambda0_lower_bound(op, delta_tilde)
    lines = []
    if delta_tilde > 0.0:
        lines.append(
            f"modified exponent {delta_tilde:.6g} > 0: "
            f"bottom of spectrum >= alpha0 - delta_tilde^2 = {bound:.6g}"
        )
    else:
        lines.append(
            f"modified exponent {delta_tilde:.6g} <= 0: bottom of spectrum >= alpha0 = {bound:.6g}"
        )
        lines.append(
            "if the injectivity radius of the quotient is unbounded, the bottom of "
            f"the spectrum equals alpha0 = {op.alpha0:.6g} (hypothesis not checked)"
        )
    if l2_kernel_trivial(op, delta_tilde):
        lines.append("delta_tilde < sqrt(alpha0): the L2 kernel of L is trivial")
    return lines


@dataclass
class LatticeReport:
    name: str
    samples: List[OrbitSample]
    exponents: CriticalExponents
    lambda0_lower: float
    check: InequalityCheck
    notes: List[str] = field(default_factory=list)

    def to_dict(self, samples_csv_path: Optional[str] = None) -> Dict[str, Any]:
        return {
            "name": self.name,
            "delta": self.exponents.delta,
            "delta_tilde": self.exponents.delta_tilde,
            "lambda0_lower": self.lambda0_lower,
            "inequality_margins": self.check.to_dict(),
            "spectral_report": self.notes,
            "diagnostics": self.exponents.diagnostics,
            "samples_csv_path": samples_csv_path,
        }


def analyze_lattice(
    spec: LatticeSpec,
    max_word_length: int,
    op: Optional[OperatorSpec] = None,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    cap: int = SAMPLE_CAP,
    threads: int = 1,
) -> LatticeReport:
    """Enumerate, estimate both exponents and derive the spectral bounds"""
    rs = spec.rootsystem()
    op = op if op is not None else OperatorSpec.scalar_laplacian(rs)
    samples = enumerate_orbit(spec, max_word_length, dedup_tol, cap, threads)
    exponents = critical_exponents(samples, rs)
    return LatticeReport(
        name=spec.name,
        samples=samples,
        exponents=exponents,
        lambda0_lower=lambda0_lower_bound(op, exponents.delta_tilde),
        check=exponent_inequality_check(rs, exponents.delta, exponents.delta_tilde),
        notes=spectral_report(op, exponents.delta_tilde),
    )
