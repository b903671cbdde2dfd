"""The asymptotic symmetry group in truncation.

SL(2,C) acts on the Riemann sphere by Moebius maps; together with a conformal
weight this induces an action on supertranslations (band-limited real functions
on S^2). Group elements are pairs (lambda, f). Extended-plane arithmetic runs in
homogeneous coordinates so the pole and the point at infinity need no special
cases.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ShapeError
from .sphere import (
    SphereFunction,
    analyze,
    grid_for_bandwidth,
    real_ylm,
    sh_pairs,
    synthesize,
)

__all__ = [
    "SL2C",
    "BMSElement",
    "INFINITY",
    "is_infinity",
    "mobius",
    "conformal_factor",
    "lorentz_act_function",
    "lorentz_act_matrix",
    "compose",
    "identity_element",
    "inverse",
    "act_on_scri",
    "covering_map",
    "random_sl2c",
    "random_rotation",
    "random_calibrated",
]

INFINITY = complex(math.inf, 0.0)


def is_infinity(z: complex) -> bool:
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


@dataclass(frozen=True)
class SL2C:
    """A determinant-one 2x2 complex matrix, renormalized on construction."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det) < 1e-12:
            raise DomainError("matrix is numerically singular, cannot normalize to det 1")
        if abs(det - 1.0) <= 1e-14:
            # already normalized; dividing by sqrt(1 + eps) would wobble the
            # last bit and break exact reparse of serialized elements
            return
        root = cmath.sqrt(det)
        object.__setattr__(self, "a", self.a / root)
        object.__setattr__(self, "b", self.b / root)
        object.__setattr__(self, "c", self.c / root)
        object.__setattr__(self, "d", self.d / root)
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise DomainError(f"determinant normalization failed, |det-1| = {abs(det - 1.0):.3e}")

    @classmethod
    def from_matrix(cls, mat) -> "SL2C":
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (2, 2):
            raise ShapeError(f"expected a 2x2 matrix, got shape {mat.shape}")
        return cls(complex(mat[0, 0]), complex(mat[0, 1]), complex(mat[1, 0]), complex(mat[1, 1]))

    @classmethod
    def identity(cls) -> "SL2C":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation_z(cls, angle: float) -> "SL2C":
        h = cmath.exp(-0.5j * angle)
        return cls(h, 0.0, 0.0, 1 / h)

    @classmethod
    def boost_z(cls, rapidity: float) -> "SL2C":
        h = math.exp(0.5 * rapidity)
        return cls(h, 0.0, 0.0, 1.0 / h)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, other: "SL2C") -> "SL2C":
        return SL2C.from_matrix(self.matrix @ other.matrix)

    def inv(self) -> "SL2C":
        return SL2C(self.d, -self.b, -self.c, self.a)


@dataclass(frozen=True)
class BMSElement:
    """Group element (lambda, f): a Lorentz part and a supertranslation."""

    lam: SL2C
    f: SphereFunction


# ------------------------------------------------------------ homogeneous coordinates
#
# A point is a complex pair xi = (xi1, xi2) with zeta = xi1/xi2; grid nodes map to
# the unit representative (cos(theta/2) e^{i phi}, sin(theta/2)).


def _xi_from_zeta(zeta: complex) -> tuple[complex, complex]:
    if is_infinity(zeta):
        return 1.0 + 0.0j, 0.0 + 0.0j
    scale = math.sqrt(1.0 + abs(zeta) ** 2)
    return zeta / scale, 1.0 / scale


def _apply_xi(lam: SL2C, xi1, xi2):
    return lam.a * xi1 + lam.b * xi2, lam.c * xi1 + lam.d * xi2


def _zeta_from_xi(xi1: complex, xi2: complex) -> complex:
    # a relative threshold sends the pole to infinity despite roundoff
    if abs(xi2) <= 1e-14 * abs(xi1):
        return INFINITY
    return xi1 / xi2


def _xi_from_angles(theta, phi):
    half = 0.5 * np.asarray(theta, dtype=float)
    return np.cos(half) * np.exp(1j * np.asarray(phi, dtype=float)), np.sin(half) + 0j


def _angles_from_xi(xi1, xi2):
    theta = 2.0 * np.arctan2(np.abs(xi2), np.abs(xi1))
    phi = np.angle(xi1 * np.conj(xi2))
    # phase is undefined at the poles; any value integrates correctly
    phi = np.where(np.isfinite(phi), phi, 0.0)
    return theta, phi


def zeta_from_angles(theta: float, phi: float) -> complex:
    x1, x2 = _xi_from_angles(theta, phi)
    return _zeta_from_xi(complex(x1), complex(x2))


def angles_from_zeta(zeta: complex) -> tuple[float, float]:
    if is_infinity(zeta):
        return 0.0, 0.0
    x1, x2 = _xi_from_zeta(zeta)
    theta = 2.0 * math.atan2(abs(x2), abs(x1))
    phi = cmath.phase(x1 * x2.conjugate()) if abs(x1 * x2) > 0 else 0.0
    return theta, phi


# ------------------------------------------------------------ pointwise action


def mobius(lam: SL2C, zeta: complex) -> complex:
    """Moebius image (a zeta + b)/(c zeta + d) on the extended plane."""
    x1, x2 = _xi_from_zeta(complex(zeta) if not is_infinity(zeta) else zeta)
    y1, y2 = _apply_xi(lam, x1, x2)
    return _zeta_from_xi(y1, y2)


def conformal_factor(lam: SL2C, zeta: complex) -> float:
    """Positive weight (1+|zeta|^2)/(|a zeta + b|^2 + |c zeta + d|^2); at infinity by limit."""
    x1, x2 = _xi_from_zeta(zeta)
    y1, y2 = _apply_xi(lam, x1, x2)
    return float(1.0 / (abs(y1) ** 2 + abs(y2) ** 2))


def act_on_scri(g: BMSElement, point: tuple[float, complex]) -> tuple[float, complex]:
    """Move a cut point: (u, zeta) -> (K(zeta) (u + f(zeta)), lam zeta)."""
    u, zeta = point
    theta, phi = angles_from_zeta(zeta)
    f_val = float(synthesize(g.f, [(theta, phi)])[0])
    return conformal_factor(g.lam, zeta) * (u + f_val), mobius(g.lam, zeta)


# ------------------------------------------------------------ action on supertranslations
#
# The lambda-part of the composition law sends f to (K_{lam^{-1}} o lam)(zeta) f(lam zeta),
# computed pointwise on a grid oversampled at twice the truncation bandwidth and
# projected back; aliasing beyond L_max is accepted and measured by the tests.


def _acted_values(lam: SL2C, f: SphereFunction, bandwidth: int):
    grid = grid_for_bandwidth(bandwidth)
    tt, pp = grid.nodes()
    x1, x2 = _xi_from_angles(tt, pp)
    y1, y2 = _apply_xi(lam, x1, x2)
    norm_sq = np.abs(y1) ** 2 + np.abs(y2) ** 2  # = 1/K_lam(zeta) on unit representatives
    t2, p2 = _angles_from_xi(y1, y2)
    return grid, synthesize(f, (t2, p2)) * norm_sq


def lorentz_act_function(lam: SL2C, f: SphereFunction) -> SphereFunction:
    grid, values = _acted_values(lam, f, 2 * f.L_max)
    return analyze(values, grid, f.L_max)


@lru_cache(maxsize=256)
def _act_matrix_cached(key, L_max: int) -> np.ndarray:
    lam = SL2C(*key)
    grid = grid_for_bandwidth(2 * L_max)
    tt, pp = grid.nodes()
    x1, x2 = _xi_from_angles(tt, pp)
    y1, y2 = _apply_xi(lam, x1, x2)
    norm_sq = np.abs(y1) ** 2 + np.abs(y2) ** 2
    t2, p2 = _angles_from_xi(y1, y2)
    mapped = np.column_stack([real_ylm(l, m, t2, p2) for (l, m) in sh_pairs(L_max)])
    source = np.column_stack([real_ylm(l, m, tt, pp) for (l, m) in sh_pairs(L_max)])
    weighted = (grid.weights * norm_sq)[:, None] * mapped
    return source.T @ weighted


def lorentz_act_matrix(lam: SL2C, L_max: int) -> np.ndarray:
    """Matrix of f -> lorentz_act_function(lam, f) on the coefficient basis."""
    return _act_matrix_cached((lam.a, lam.b, lam.c, lam.d), L_max)


# ------------------------------------------------------------ group law


def identity_element(L_max: int) -> BMSElement:
    return BMSElement(SL2C.identity(), SphereFunction(L_max))


def compose(g1: BMSElement, g2: BMSElement) -> BMSElement:
    """Product (lam1, f1) (lam2, f2) = (lam1 lam2, f2 + act(lam2, f1))."""
    g1.f._check_same(g2.f)
    return BMSElement(g1.lam @ g2.lam, g2.f + lorentz_act_function(g2.lam, g1.f))


def inverse(g: BMSElement) -> BMSElement:
    lam_inv = g.lam.inv()
    return BMSElement(lam_inv, -lorentz_act_function(lam_inv, g.f))


# ------------------------------------------------------------ covering map

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def covering_map(lam: SL2C) -> np.ndarray:
    """The 4x4 Lorentz matrix L_{mu nu} = tr(sigma_mu lam sigma_nu lam^dagger)/2, basis (t,x,y,z)."""
    m = lam.matrix
    md = m.conj().T
    out = np.empty((4, 4))
    for mu in range(4):
        left = _SIGMA[mu] @ m
        for nu in range(4):
            out[mu, nu] = 0.5 * np.trace(left @ _SIGMA[nu] @ md).real
    return out


# ------------------------------------------------------------ random ensembles


def random_sl2c(rng: np.random.Generator) -> SL2C:
    """Gaussian complex entries projected to determinant one."""
    while True:
        entries = rng.standard_normal(8)
        mat = entries[:4].reshape(2, 2) + 1j * entries[4:].reshape(2, 2)
        if abs(np.linalg.det(mat)) > 0.1:
            return SL2C.from_matrix(mat)


def random_rotation(rng: np.random.Generator) -> SL2C:
    """Haar-uniform SU(2) element."""
    q = rng.standard_normal(4)
    q = q / np.linalg.norm(q)
    alpha = complex(q[0], q[1])
    beta = complex(q[2], q[3])
    return SL2C(alpha, beta, -beta.conjugate(), alpha.conjugate())


def calibrated_band(L_max: int) -> int:
    """Supertranslation bandwidth for the aliasing-controlled ensemble."""
    return max(2, L_max // 2 - 1)


def calibrated_rapidity(L_max: int, target: float = 1e-11) -> float:
    """Boost rapidity keeping the truncated tail of acted band-limited functions
    near `target`: the tail of a band-b function under rapidity t scales like
    t^(L_max + 1 - b), measured empirically."""
    exponent = L_max + 1 - calibrated_band(L_max)
    return target ** (1.0 / exponent)


def random_calibrated(rng: np.random.Generator, max_rapidity: float | None = None, L_max: int = 8) -> SL2C:
    """Rotation x small boost x rotation: the aliasing-controlled ensemble."""
    if max_rapidity is None:
        max_rapidity = calibrated_rapidity(L_max)
    t = float(rng.uniform(0.0, max_rapidity))
    return (random_rotation(rng) @ SL2C.boost_z(t)) @ random_rotation(rng)
