"""
Volume of K-orbits of balls: the density J, the two-sided envelope, and a
seeded Monte Carlo ground truth.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import DomainError
from .rootdata import (
    CHAMBER_TOL,
    ChamberVector,
    RestrictedRootSystem,
    alpha_values,
    chamber_extreme_rays,
    eval_rho,
    interior_direction,
)

logger = logging.getLogger("SYMKERNEL")

MIN_BUDGET = 10_000
SHARD_SIZE = 1 << 14


@dataclass(frozen=True)
class VolumeEnvelope:
    value: float
    x_plus: ChamberVector
    epsilon: float


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    samples: int
    hits: int


def density_J(rs: RestrictedRootSystem, h: ChamberVector) -> float:
    """prod over positive roots of sinh(alpha(h))^m_alpha, normalized with C = 1"""
    alphas = alpha_values(rs, h)
    if np.any(alphas < -CHAMBER_TOL):
        raise DomainError(f"{rs.name}: {h.coords} lies outside the closed chamber")
    return float(np.prod(np.sinh(np.maximum(alphas, 0.0)) ** rs.multiplicities))


def _density_batch(rs: RestrictedRootSystem, points: np.ndarray) -> np.ndarray:
    """J on rows of ``points``, zero outside the open chamber"""
    alphas = points @ rs.covectors.T
    inside = np.all(alphas > 0.0, axis=1)
    values = np.prod(np.sinh(np.maximum(alphas, 0.0)) ** rs.multiplicities, axis=1)
    return np.where(inside, values, 0.0)


def density_comparison(rs: RestrictedRootSystem, h: ChamberVector) -> float:
    """J(h) / (e^{2 rho(h)} prod (alpha/(1+alpha))^m); bounded in the deep chamber"""
    alphas = alpha_values(rs, h)
    if np.any(alphas <= 0.0):
        raise DomainError(f"{rs.name}: comparison needs an interior point")
    # sinh(a) e^{-a} = (1 - e^{-2a}) / 2 keeps large arguments finite
    per_root = -np.expm1(-2.0 * alphas) / 2.0 * (1.0 + alphas) / alphas
    return float(np.prod(per_root**rs.multiplicities))


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"epsilon must lie in [0, 1), got {epsilon}")


def log_volume_envelope(
    rs: RestrictedRootSystem, x_plus: ChamberVector, epsilon: float
) -> float:
    _check_epsilon(epsilon)
    if epsilon == 0.0:
        return -math.inf
    alphas = np.maximum(alpha_values(rs, x_plus), 0.0)
    return float(
        2.0 * eval_rho(rs, x_plus)
        + rs.rank * math.log(epsilon)
        + rs.multiplicities @ (np.log(epsilon + alphas) - np.log1p(alphas))
    )


def volume_envelope(
    rs: RestrictedRootSystem, x_plus: ChamberVector, epsilon: float
) -> VolumeEnvelope:
    """e^{2 rho(x+)} eps^l prod ((eps + alpha(x+)) / (1 + alpha(x+)))^m"""
    value = math.exp(log_volume_envelope(rs, x_plus, epsilon))
    return VolumeEnvelope(value, x_plus, float(epsilon))


def inner_ball(
    rs: RestrictedRootSystem, x_plus: ChamberVector, epsilon: float
) -> Tuple[ChamberVector, float]:
    """A ball inside both B(x+, eps) and the closed chamber

    Center x+ + eps/(10+10|v|) v, radius eps/(20+20|v|), with v the interior
    direction; its J-integral drives the lower half of the two-sided bound.
    """
    _check_epsilon(epsilon)
    v = interior_direction(rs)
    scale = 1.0 + v.norm
    center = x_plus.array + epsilon / (10.0 * scale) * v.array
    return ChamberVector(tuple(float(c) for c in center)), epsilon / (20.0 * scale)


def chamber_grid(rs: RestrictedRootSystem, radii: Sequence[float]) -> List[ChamberVector]:
    """The origin, points on each wall ray and deep points along the interior direction"""
    directions = [ray.array for ray in chamber_extreme_rays(rs)]
    if rs.rank > 1:
        v = interior_direction(rs)
        directions.append(v.array / v.norm)
    grid = [ChamberVector(tuple(0.0 for _ in range(rs.ambient_dim)))]
    for r in radii:
        if r < 0.0:
            raise DomainError(f"Grid radius must be nonnegative, got {r}")
        if r == 0.0:
            continue
        grid.extend(ChamberVector(tuple(float(c) for c in r * u)) for u in directions)
    return grid


def rank_one_volume(rs: RestrictedRootSystem, x: float, epsilon: float) -> float:
    """int of sinh^m over [max(0, x - eps), x + eps] for a rank-one space with one root"""
    if rs.rank != 1 or len(rs.positive_roots) != 1:
        raise DomainError(f"{rs.name}: closed form needs a single rank-one root")
    m = int(rs.multiplicities[0])
    lower = max(0.0, x - epsilon)
    result = integrate.quad(lambda h: math.sinh(h) ** m, lower, x + epsilon, epsrel=1e-12)
    return float(result[0])


def _shard(
    rs: RestrictedRootSystem,
    x_plus: np.ndarray,
    epsilon: float,
    count: int,
    seed_seq: np.random.SeedSequence,
) -> Tuple[float, float, int]:
    rng = np.random.default_rng(seed_seq)
    cube = rng.uniform(-epsilon, epsilon, size=(count, rs.rank))
    in_ball = np.sum(cube**2, axis=1) < epsilon**2
    points = x_plus + cube[in_ball] @ rs.basis_matrix
    values = _density_batch(rs, points)
    hits = int(np.count_nonzero(values))
    return float(values.sum()), float((values**2).sum()), hits


def volume_quadrature(
    rs: RestrictedRootSystem,
    x_plus: ChamberVector,
    epsilon: float,
    budget: int = 100_000,
    seed: int = 0,
    threads: int = 1,
) -> VolumeEstimate:
    """Monte Carlo estimate of the J-integral over B(x+, eps) in the chamber

    Uniform samples in the bounding cube of the ball; the ball and chamber
    indicators multiply J. The shard layout depends only on the budget, so the
    estimate is identical for any thread count.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if budget < MIN_BUDGET:
        raise DomainError(f"budget must be at least {MIN_BUDGET} samples")

    sizes: List[int] = [SHARD_SIZE] * (budget // SHARD_SIZE)
    if budget % SHARD_SIZE:
        sizes.append(budget % SHARD_SIZE)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    center = x_plus.array

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda job: _shard(rs, center, epsilon, job[0], job[1]),
                    zip(sizes, streams),
                )
            )
    else:
        parts = [_shard(rs, center, epsilon, n, s) for n, s in zip(sizes, streams)]

    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    hits = sum(p[2] for p in parts)

    cube_volume = (2.0 * epsilon) ** rs.rank
    mean = total / budget
    variance = max(total_sq / budget - mean**2, 0.0)
    if hits == 0:
        logger.warning(
            f"{rs.name}: no sample of B({x_plus.coords}, {epsilon}) hit the chamber"
        )
    logger.debug(f"{rs.name}: {len(sizes)} shards, {hits} chamber hits")
    return VolumeEstimate(
        value=cube_volume * mean,
        std_error=cube_volume * math.sqrt(variance / budget),
        samples=budget,
        hits=hits,
    )

