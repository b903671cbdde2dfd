"""Hermite chaos basis over a finite set of test-function directions.

A state is a linear combination of products He_{n_1}(x_1) ... He_{n_K}(x_K)
of probabilists' Hermite polynomials, one variable per chosen real spherical
harmonic direction, truncated at total degree N.  Multi-indices are stored
in graded lexicographic order so that coefficient vectors of different caps
embed by prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..config import Config, T4_DIRECTIONS
from ..errors import DomainError, ShapeError
from ..sphere import SphereFunction, sh_index


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@dataclass(frozen=True, eq=False)
class ChaosBasis:
    """Enumerated multi-indices for K directions at total-degree cap N."""

    n_directions: int
    cap: int
    exponents: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __len__(self):
        return self.exponents.shape[0]

    def index_of(self, multi):
        key = tuple(int(v) for v in multi)
        try:
            return _index_table(self.n_directions, self.cap)[key]
        except KeyError:
            raise ShapeError(f"multi-index {key} outside cap {self.cap}") from None


@lru_cache(maxsize=64)
def chaos_basis(n_directions, cap):
    if n_directions < 1:
        raise DomainError("need at least one direction")
    if cap < 0:
        raise DomainError("degree cap must be nonnegative")
    rows = []
    for degree in range(cap + 1):
        rows.extend(_compositions(degree, n_directions))
    exponents = np.array(rows, dtype=np.int64)
    degrees = exponents.sum(axis=1)
    weights = np.array(
        [math.prod(math.factorial(int(v)) for v in row) for row in rows], dtype=float
    )
    return ChaosBasis(n_directions, cap, exponents, degrees, weights)


@lru_cache(maxsize=64)
def _index_table(n_directions, cap):
    basis = chaos_basis(n_directions, cap)
    return {tuple(int(v) for v in row): i for i, row in enumerate(basis.exponents)}


class DirectionSet:
    """Ordered real spherical-harmonic directions with their operator eigenvalues.

    The first four entries are always the constant and the three l=1 harmonics;
    any further entries are the supertranslation directions proper.  Eigenvalues
    are l(l+1)+k for the shifted Laplacian used to grade the chaos norms.
    """

    __slots__ = ("directions", "k", "L_max")

    def __init__(self, directions, k, L_max):
        directions = tuple((int(l), int(m)) for l, m in directions)
        if directions[:4] != T4_DIRECTIONS:
            raise DomainError(
                "first four directions must be the constant and l=1 harmonics"
            )
        if len(set(directions)) != len(directions):
            raise DomainError("duplicate direction")
        for l, m in directions:
            if l > L_max or abs(m) > l:
                raise DomainError(f"direction ({l},{m}) outside L_max={L_max}")
        if k <= 1:
            raise DomainError("k must exceed 1")
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "k", float(k))
        object.__setattr__(self, "L_max", int(L_max))

    def __setattr__(self, name, value):
        raise AttributeError("DirectionSet is immutable")

    def __len__(self):
        return len(self.directions)

    def __eq__(self, other):
        if not isinstance(other, DirectionSet):
            return NotImplemented
        return (
            self.directions == other.directions
            and self.k == other.k
            and self.L_max == other.L_max
        )

    def __hash__(self):
        return hash((self.directions, self.k, self.L_max))

    @classmethod
    def from_config(cls, config: Config):
        return cls(config.directions, config.k, config.L_max)

    @property
    def eigenvalues(self):
        return np.array([l * (l + 1) + self.k for l, m in self.directions])

    @property
    def t4_indices(self):
        return (0, 1, 2, 3)

    @property
    def st_indices(self):
        return tuple(range(4, len(self.directions)))

    def direction_function(self, i) -> SphereFunction:
        l, m = self.directions[i]
        coeffs = np.zeros((self.L_max + 1) ** 2)
        coeffs[sh_index(l, m)] = 1.0
        return SphereFunction(self.L_max, coeffs)

    def decompose(self, alpha: SphereFunction, tol=1e-12):
        """Coefficients of alpha along the direction set.

        The remainder of alpha orthogonal to the span must vanish to tol,
        measured in the sphere L2 norm.
        """
        from ..errors import UnsupportedDirectionError

        if alpha.L_max != self.L_max:
            raise ShapeError(
                f"direction set at L_max={self.L_max}, test function at {alpha.L_max}"
            )
        gamma = np.array(
            [alpha.coeff(l, m) for l, m in self.directions]
        )
        residual_sq = float(np.sum(np.abs(alpha.coeffs) ** 2)) - float(
            np.sum(np.abs(gamma) ** 2)
        )
        residual = math.sqrt(max(residual_sq, 0.0))
        if residual > tol:
            raise UnsupportedDirectionError(
                f"test function has weight {residual:.3e} outside the "
                f"{len(self)} chosen directions"
            )
        return gamma


class HermiteSeries:
    """Coefficient vector over a chaos basis, tied to a direction set."""

    __slots__ = ("dirs", "cap", "coeffs")

    def __init__(self, dirs: DirectionSet, cap, coeffs):
        basis = chaos_basis(len(dirs), cap)
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (len(basis),):
            raise ShapeError(
                f"expected {len(basis)} coefficients for K={len(dirs)}, N={cap}, "
                f"got shape {coeffs.shape}"
            )
        if not np.iscomplexobj(coeffs):
            coeffs = coeffs.astype(float)
        object.__setattr__(self, "dirs", dirs)
        object.__setattr__(self, "cap", int(cap))
        object.__setattr__(self, "coeffs", coeffs.copy())
        self.coeffs.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("HermiteSeries is immutable")

    @property
    def basis(self) -> ChaosBasis:
        return chaos_basis(len(self.dirs), self.cap)

    @classmethod
    def zero(cls, dirs, cap, complex_dtype=False):
        n = len(chaos_basis(len(dirs), cap))
        dtype = complex if complex_dtype else float
        return cls(dirs, cap, np.zeros(n, dtype=dtype))

    @classmethod
    def unit(cls, dirs, cap, multi):
        basis = chaos_basis(len(dirs), cap)
        coeffs = np.zeros(len(basis))
        coeffs[basis.index_of(multi)] = 1.0
        return cls(dirs, cap, coeffs)

    def coeff(self, multi):
        return self.coeffs[self.basis.index_of(multi)]

    def with_coeffs(self, coeffs):
        return HermiteSeries(self.dirs, self.cap, coeffs)

    def degree(self, tol=0.0):
        basis = self.basis
        live = np.abs(self.coeffs) > tol
        if not live.any():
            return 0
        return int(basis.degrees[live].max())

    def embed(self, cap):
        """Same series at a larger cap (prefix embedding)."""
        if cap < self.cap:
            raise ShapeError("embed target cap smaller than current cap")
        if cap == self.cap:
            return self
        target = chaos_basis(len(self.dirs), cap)
        coeffs = np.zeros(len(target), dtype=self.coeffs.dtype)
        coeffs[: len(self.coeffs)] = self.coeffs
        return HermiteSeries(self.dirs, cap, coeffs)

    def truncate(self, cap):
        """Drop coefficients above the new cap (prefix restriction)."""
        if cap > self.cap:
            return self.embed(cap)
        target = chaos_basis(len(self.dirs), cap)
        return HermiteSeries(self.dirs, cap, self.coeffs[: len(target)])

    def tail_above(self, cap):
        """Coefficients of degree exceeding cap, as a flat array."""
        target = chaos_basis(len(self.dirs), min(cap, self.cap))
        return self.coeffs[len(target):]

    def _check_compatible(self, other):
        if self.dirs != other.dirs:
            raise ShapeError("series over different direction sets")
        if self.cap != other.cap:
            raise ShapeError(
                f"series at different caps {self.cap} and {other.cap}; "
                "embed or truncate first"
            )

    def __add__(self, other):
        self._check_compatible(other)
        return HermiteSeries(self.dirs, self.cap, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return HermiteSeries(self.dirs, self.cap, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return HermiteSeries(self.dirs, self.cap, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return HermiteSeries(self.dirs, self.cap, -self.coeffs)

    def __repr__(self):
        live = int(np.count_nonzero(self.coeffs))
        return (
            f"HermiteSeries(K={len(self.dirs)}, cap={self.cap}, "
            f"{live} nonzero of {len(self.coeffs)})"
        )
