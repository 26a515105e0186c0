"""
Restricted root systems of the catalog spaces and their scalar invariants.

Covectors and chamber vectors are stored in ambient coordinates: R^1 for the
rank-one hyperbolic spaces, R^n for SLnR where the flat is the hyperplane of
traceless diagonal matrices. ``basis`` holds an orthonormal basis of the flat
in those coordinates.
"""

import json
import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import CatalogError, DomainError, StructuralError

logger = logging.getLogger("SYMKERNEL")

CHAMBER_TOL = 1e-12
FLAT_TOL = 1e-9
INTEGRALITY_TOL = 1e-9

_HYPERBOLIC_LABEL = re.compile(r"^H(\d+)([RC])$")
_SPECIAL_LINEAR_LABEL = re.compile(r"^SL(\d+)R$")


@dataclass(frozen=True)
class RestrictedRootSystem:
    """Positive restricted roots with multiplicities, plus a base and rho"""

    name: str
    rank: int
    dim: int
    positive_roots: Tuple[Tuple[Tuple[float, ...], int], ...]
    base_roots: Tuple[int, ...]
    rho: Tuple[float, ...]
    basis: Tuple[Tuple[float, ...], ...]

    @cached_property
    def covectors(self) -> np.ndarray:
        return np.array([root for root, _ in self.positive_roots], dtype=float)

    @cached_property
    def multiplicities(self) -> np.ndarray:
        return np.array([mult for _, mult in self.positive_roots], dtype=float)

    @cached_property
    def rho_vector(self) -> np.ndarray:
        return np.array(self.rho, dtype=float)

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        return np.array(self.basis, dtype=float)

    @property
    def ambient_dim(self) -> int:
        return len(self.rho)

    @cached_property
    def base_matrix(self) -> np.ndarray:
        """Base roots restricted to the flat, one row per root (l x l)"""
        return self.covectors[list(self.base_roots)] @ self.basis_matrix.T

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "rank": self.rank,
            "dim": self.dim,
            "positive_roots": [
                {"covector": list(root), "multiplicity": mult}
                for root, mult in self.positive_roots
            ],
            "base_roots": list(self.base_roots),
            "rho": list(self.rho),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def validate(self) -> None:
        """Check every structural invariant; raises StructuralError"""
        half_sum = 0.5 * (self.multiplicities @ self.covectors)
        if not np.allclose(half_sum, self.rho_vector, rtol=0.0, atol=1e-12):
            raise StructuralError(f"{self.name}: rho is not half the weighted root sum")

        if self.dim != self.rank + int(self.multiplicities.sum()):
            raise StructuralError(f"{self.name}: dim != rank + sum of multiplicities")

        if self.basis_matrix.shape != (self.rank, self.ambient_dim):
            raise StructuralError(f"{self.name}: flat basis does not match the rank")

        if len(self.base_roots) != self.rank:
            raise StructuralError(f"{self.name}: expected {self.rank} base roots")

        if abs(np.linalg.det(self.base_matrix)) < 1e-12:
            raise StructuralError(f"{self.name}: base roots are linearly dependent")

        restricted = self.covectors @ self.basis_matrix.T
        coefficients = np.linalg.solve(self.base_matrix.T, restricted.T).T
        if np.any(coefficients < -INTEGRALITY_TOL) or np.any(
            np.abs(coefficients - np.round(coefficients)) > INTEGRALITY_TOL
        ):
            raise StructuralError(
                f"{self.name}: a positive root is not a nonnegative integer "
                "combination of the base roots"
            )


@dataclass(frozen=True)
class ChamberVector:
    """An element of the closed Weyl chamber, in ambient coordinates"""

    coords: Tuple[float, ...]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))


def _hyperbolic_real(n: int) -> RestrictedRootSystem:
    return RestrictedRootSystem(
        name=f"H{n}R",
        rank=1,
        dim=n,
        positive_roots=(((1.0,), n - 1),),
        base_roots=(0,),
        rho=((n - 1) / 2.0,),
        basis=((1.0,),),
    )


def _hyperbolic_complex(n: int) -> RestrictedRootSystem:
    # alpha has multiplicity 2(n-1), 2*alpha has multiplicity 1
    return RestrictedRootSystem(
        name=f"H{n}C",
        rank=1,
        dim=2 * n,
        positive_roots=(((1.0,), 2 * (n - 1)), ((2.0,), 1)),
        base_roots=(0,),
        rho=(float(n),),
        basis=((1.0,),),
    )


def _traceless_basis(n: int) -> Tuple[Tuple[float, ...], ...]:
    rows = []
    for k in range(1, n):
        row = np.zeros(n)
        row[:k] = 1.0
        row[k] = -float(k)
        rows.append(tuple(row / math.sqrt(k * (k + 1))))
    return tuple(rows)


def _special_linear(n: int) -> RestrictedRootSystem:
    roots: List[Tuple[Tuple[float, ...], int]] = []
    base: List[int] = []
    for i in range(n):
        for j in range(i + 1, n):
            covector = np.zeros(n)
            covector[i], covector[j] = 1.0, -1.0
            if j == i + 1:
                base.append(len(roots))
            roots.append((tuple(covector), 1))
    rho = tuple((n + 1 - 2 * (i + 1)) / 2.0 for i in range(n))
    return RestrictedRootSystem(
        name=f"SL{n}R",
        rank=n - 1,
        dim=(n - 1) + n * (n - 1) // 2,
        positive_roots=tuple(roots),
        base_roots=tuple(base),
        rho=rho,
        basis=_traceless_basis(n),
    )


@lru_cache(maxsize=None)
def catalog_space(name: str) -> RestrictedRootSystem:
    """Build the root system for a catalog label (HnR, HnC, SLnR with n >= 2)"""
    match = _HYPERBOLIC_LABEL.match(name)
    if match:
        n = int(match.group(1))
        if n < 2:
            raise CatalogError(f"Unsupported catalog label: {name}")
        rs = _hyperbolic_real(n) if match.group(2) == "R" else _hyperbolic_complex(n)
    else:
        match = _SPECIAL_LINEAR_LABEL.match(name)
        if not match or int(match.group(1)) < 2:
            raise CatalogError(f"Unsupported catalog label: {name}")
        rs = _special_linear(int(match.group(1)))

    rs.validate()
    logger.debug(f"Built root system {rs.name}: rank {rs.rank}, dim {rs.dim}")
    return rs


def rho_norm(rs: RestrictedRootSystem) -> float:
    """|rho| in the metric of the flat"""
    return float(np.linalg.norm(rs.basis_matrix @ rs.rho_vector))


def alpha_values(rs: RestrictedRootSystem, h: ChamberVector) -> np.ndarray:
    return rs.covectors @ h.array


def chamber_vector(rs: RestrictedRootSystem, coords: Sequence[float]) -> ChamberVector:
    """Validated constructor: coords must lie in the flat and the closed chamber"""
    array = np.asarray(coords, dtype=float)
    if array.shape != (rs.ambient_dim,):
        raise DomainError(
            f"{rs.name}: expected {rs.ambient_dim} coordinates, got {array.shape}"
        )
    projected = rs.basis_matrix.T @ (rs.basis_matrix @ array)
    if np.linalg.norm(array - projected) > FLAT_TOL * max(1.0, np.linalg.norm(array)):
        raise DomainError(f"{rs.name}: {tuple(array)} is not in the flat")
    h = ChamberVector(tuple(float(c) for c in array))
    if np.any(alpha_values(rs, h) < -CHAMBER_TOL):
        raise DomainError(f"{rs.name}: {h.coords} lies outside the closed chamber")
    return h


def eval_rho(rs: RestrictedRootSystem, h: ChamberVector) -> float:
    if np.any(alpha_values(rs, h) < -CHAMBER_TOL):
        raise DomainError(f"{rs.name}: {h.coords} lies outside the closed chamber")
    return float(rs.rho_vector @ h.array)


def _dual_basis(rs: RestrictedRootSystem) -> np.ndarray:
    """Columns E_i of the flat dual to the base roots, in ambient coordinates"""
    try:
        inverse = np.linalg.inv(rs.base_matrix)
    except np.linalg.LinAlgError as e:
        raise StructuralError(f"{rs.name}: singular base-root matrix") from e
    if not np.all(np.isfinite(inverse)):
        raise StructuralError(f"{rs.name}: singular base-root matrix")
    return rs.basis_matrix.T @ inverse


def chamber_extreme_rays(rs: RestrictedRootSystem) -> List[ChamberVector]:
    """Unit vectors spanning the extreme rays of the closed chamber"""
    dual = _dual_basis(rs)
    norms = np.linalg.norm(dual, axis=0)
    if np.any(norms < 1e-12):
        raise StructuralError(f"{rs.name}: degenerate chamber")
    return [ChamberVector(tuple(dual[:, i] / norms[i])) for i in range(rs.rank)]


def rho_min(rs: RestrictedRootSystem) -> float:
    """Minimum of rho(h)/|h| over the closed chamber, taken on extreme rays"""
    return min(eval_rho(rs, ray) for ray in chamber_extreme_rays(rs))


def beta_exponent(rs: RestrictedRootSystem) -> float:
    """|indivisible positive roots| + (rank - 1)/2"""
    covectors = rs.covectors
    indivisible = 0
    for root in covectors:
        halves = np.all(np.abs(covectors - root / 2.0) <= 1e-12, axis=1)
        if not np.any(halves):
            indivisible += 1
    return indivisible + (rs.rank - 1) / 2.0


def interior_direction(rs: RestrictedRootSystem) -> ChamberVector:
    """The sum of the dual basis vectors; every positive root is >= 1 on it"""
    v = _dual_basis(rs).sum(axis=1)
    if np.min(rs.covectors @ v) < 1.0 - 1e-12:
        raise StructuralError(f"{rs.name}: interior direction fails alpha(v) >= 1")
    return ChamberVector(tuple(float(c) for c in v))
