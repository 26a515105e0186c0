"""
Matrix models of the catalog spaces.

Hyperboloid model of HnR: vectors x in R^{n+1} with x0^2 - |x'|^2 = 1 and
x0 >= 1, acted on by SO+(n,1). Unimodular-coset model of SLnR/SO(n): a point
gK is stored as any representative g with det g = 1.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ModelError
from .rootdata import (
    ChamberVector,
    RestrictedRootSystem,
    catalog_space,
    chamber_vector,
    interior_direction,
)

logger = logging.getLogger("SYMKERNEL")

HYPERBOLOID = "hyperboloid"
COSET = "unimodular-coset"
MODELS = (HYPERBOLOID, COSET)

MODEL_TOL = 1e-9
MACHINE_EPS = float(np.finfo(float).eps)
DET_ROUNDING_CAP = 0.1
DISTANCE_FLOOR = 1e-12
EIGEN_FLOOR = 1e-300

Seed = Union[int, np.random.Generator]


@dataclass(frozen=True)
class SpacePoint:
    model: str
    data: Tuple

    @property
    def array(self) -> np.ndarray:
        return np.array(self.data, dtype=float)

    @property
    def n(self) -> int:
        """Dimension parameter: n for H^n or SLnR"""
        if self.model == HYPERBOLOID:
            return len(self.data) - 1
        return len(self.data)


@dataclass(frozen=True)
class CartanCoordinate:
    x_plus: ChamberVector
    distance: float

    def __post_init__(self) -> None:
        if abs(self.x_plus.norm - self.distance) > MODEL_TOL * max(1.0, self.distance):
            raise ModelError(
                f"distance {self.distance} does not match |x+| = {self.x_plus.norm}"
            )


def _floor(d: float) -> float:
    return 0.0 if d < DISTANCE_FLOOR else d


def minkowski(x: np.ndarray, y: np.ndarray) -> float:
    return float(x[0] * y[0] - x[1:] @ y[1:])


def make_point(model: str, data) -> SpacePoint:
    """Wrap raw data as a point of the model, checking the model invariant"""
    array = np.asarray(data, dtype=float)
    if model == HYPERBOLOID:
        if array.ndim != 1 or array.size < 3:
            raise ModelError("Hyperboloid point must be a vector of length >= 3")
        scale = max(1.0, array[0] ** 2)
        if abs(minkowski(array, array) - 1.0) > MODEL_TOL * scale:
            raise ModelError("Point is not on the unit hyperboloid")
        if array[0] < 1.0 - MODEL_TOL:
            raise ModelError("Point is on the lower sheet of the hyperboloid")
        return SpacePoint(model, tuple(float(c) for c in array))
    if model == COSET:
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ModelError("Coset representative must be a square matrix")
        if not is_unimodular(array):
            raise ModelError("Coset representative is not unimodular")
        return SpacePoint(model, tuple(tuple(float(c) for c in row) for row in array))
    raise ModelError(f"Unknown model: {model}")


def basepoint(model: str, n: int) -> SpacePoint:
    """o = eK for SLnR, (1, 0, ..., 0) for H^n"""
    if model == HYPERBOLOID:
        data = np.zeros(n + 1)
        data[0] = 1.0
        return make_point(model, data)
    return make_point(model, np.eye(n))


def apply(g: np.ndarray, x: SpacePoint) -> SpacePoint:
    return make_point(x.model, np.asarray(g) @ x.array)


def rootsystem_for(model: str, n: int) -> RestrictedRootSystem:
    return catalog_space(f"H{n}R" if model == HYPERBOLOID else f"SL{n}R")


def is_unimodular(g: np.ndarray) -> bool:
    """det g = 1 up to the rounding a matrix of this conditioning allows

    Entry rounding of size eps |g| moves log|det g| by up to about n eps cond(g),
    so the tolerance grows with the condition number.
    """
    sign, log_det = np.linalg.slogdet(g)
    if sign <= 0:
        return False
    n = g.shape[0]
    rounding = 4.0 * n * n * MACHINE_EPS * float(np.linalg.cond(g))
    return abs(float(log_det)) <= MODEL_TOL + min(rounding, DET_ROUNDING_CAP)


def log_singular_values(g: np.ndarray) -> np.ndarray:
    """Logarithms of the singular values of a unimodular g, sorted descending

    Each singular value carries an absolute error of about eps * sigma_1, so
    the smallest one is replaced by minus the sum of the others (log det = 0).
    """
    sigma = np.linalg.svd(g, compute_uv=False)
    logs = np.log(np.maximum(sigma, EIGEN_FLOOR))
    logs[-1] = -float(np.sum(logs[:-1]))
    return np.sort(logs)[::-1]


def cartan_plus_sl(g: SpacePoint) -> CartanCoordinate:
    if g.model != COSET:
        raise ModelError(f"Expected a {COSET} point, got {g.model}")
    matrix = g.array
    if not is_unimodular(matrix):
        raise ModelError("Coset representative is not unimodular")
    logs = log_singular_values(matrix)
    rs = rootsystem_for(COSET, matrix.shape[0])
    x_plus = chamber_vector(rs, logs)
    return CartanCoordinate(x_plus, _floor(x_plus.norm))


def cartan_plus_hyperbolic(x: SpacePoint) -> CartanCoordinate:
    if x.model != HYPERBOLOID:
        raise ModelError(f"Expected a {HYPERBOLOID} point, got {x.model}")
    array = x.array
    if array[0] < 1.0 - MODEL_TOL:
        raise ModelError("Point is on the lower sheet of the hyperboloid")
    # sinh d = |x'| is stable both near the basepoint and far away
    d = _floor(float(np.arcsinh(np.linalg.norm(array[1:]))))
    rs = rootsystem_for(HYPERBOLOID, x.n)
    return CartanCoordinate(chamber_vector(rs, (d,)), d)


def cartan_plus(x: SpacePoint) -> CartanCoordinate:
    if x.model == HYPERBOLOID:
        return cartan_plus_hyperbolic(x)
    return cartan_plus_sl(x)


def distance(x: SpacePoint, y: SpacePoint) -> float:
    if x.model != y.model:
        raise ModelError(f"Cannot measure distance between {x.model} and {y.model}")
    if x.model == HYPERBOLOID:
        a, b = x.array, y.array
        pairing = minkowski(a, b)
        if pairing < 2.0:
            diff = a - b
            chord = max(0.0, -minkowski(diff, diff))
            return _floor(float(2.0 * np.arcsinh(np.sqrt(chord) / 2.0)))
        return _floor(float(np.arccosh(pairing)))
    relative = np.linalg.solve(x.array, y.array)
    return _floor(float(np.linalg.norm(log_singular_values(relative))))


def coordinate_along(
    rs: RestrictedRootSystem, r: float, direction: Optional[ChamberVector] = None
) -> CartanCoordinate:
    """Cartan coordinate at distance r along a chamber direction

    The default direction is the normalized interior direction.
    """
    if direction is None:
        direction = interior_direction(rs)
    unit = direction.array / direction.norm
    return CartanCoordinate(chamber_vector(rs, r * unit), float(r))


# Group elements


def boost(n: int, axis: int, r: float) -> np.ndarray:
    """Lorentz boost of length r along spatial axis (1..n) of H^n"""
    g = np.eye(n + 1)
    g[0, 0] = g[axis, axis] = np.cosh(r)
    g[0, axis] = g[axis, 0] = np.sinh(r)
    return g


def rotation(n: int, i: int, j: int, theta: float) -> np.ndarray:
    """Rotation by theta in the spatial plane (i, j) of H^n, fixing the basepoint"""
    g = np.eye(n + 1)
    c, s = np.cos(theta), np.sin(theta)
    g[i, i] = g[j, j] = c
    g[i, j], g[j, i] = -s, s
    return g


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed))


def _special_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_stabilizer(model: str, n: int, seed: Seed) -> np.ndarray:
    """A pseudo-random element of K, the stabilizer of the basepoint"""
    rng = _rng(seed)
    if model == HYPERBOLOID:
        g = np.eye(n + 1)
        g[1:, 1:] = _special_orthogonal(n, rng)
        return g
    return _special_orthogonal(n, rng)


def random_isometry(model: str, n: int, seed: Seed, max_length: float = 2.0) -> np.ndarray:
    """Deterministic pseudo-random group element

    Hyperboloid: rotations interleaved with boosts of length <= max_length.
    Unimodular: special orthogonal times a traceless diagonal of bounded size.
    """
    if model not in MODELS:
        raise ModelError(f"Unknown model: {model}")
    rng = _rng(seed)
    if model == HYPERBOLOID:
        g = random_stabilizer(model, n, rng)
        for _ in range(2):
            axis = int(rng.integers(1, n + 1))
            g = g @ boost(n, axis, float(rng.uniform(-max_length, max_length)))
            g = g @ random_stabilizer(model, n, rng)
        return g
    exponents = rng.uniform(-max_length / 2.0, max_length / 2.0, size=n)
    exponents -= exponents.mean()
    return _special_orthogonal(n, rng) @ np.diag(np.exp(exponents))
