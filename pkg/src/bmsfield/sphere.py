"""Truncated real spherical-harmonic calculus on the 2-sphere.

Functions are stored as coefficient vectors over the real orthonormal basis
Y_lm, 0 <= l <= L_max, -l <= m <= l; pointwise data only transits through
analyze/synthesize on a Gauss-Legendre x uniform-longitude grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import lpmv

from .errors import DomainError, ShapeError

__all__ = [
    "SphereFunction",
    "SphereGrid",
    "real_ylm",
    "sh_index",
    "sh_pairs",
    "analyze",
    "synthesize",
    "apply_A",
    "nuclear_norm",
    "hs_norm_partial",
    "split_T4_ST",
    "pair",
]


def sh_index(l: int, m: int) -> int:
    """Position of (l, m) in the flat coefficient layout."""
    if abs(m) > l:
        raise ShapeError(f"|m| <= l required, got (l,m)=({l},{m})")
    return l * l + l + m


@lru_cache(maxsize=None)
def sh_pairs(L_max: int) -> tuple[tuple[int, int], ...]:
    """All (l, m) labels up to L_max in flat order."""
    return tuple((l, m) for l in range(L_max + 1) for m in range(-l, l + 1))


def _norm_lm(l: int, m: int) -> float:
    # exact integer factorial ratio keeps orthonormality at the last ulp
    ratio = math.factorial(l - m) / math.factorial(l + m)
    return math.sqrt((2 * l + 1) / (4.0 * math.pi) * ratio)


def real_ylm(l: int, m: int, theta, phi):
    """Real orthonormal spherical harmonic at colatitude theta, longitude phi.

    Built from the associated Legendre function; the (-1)^m factor cancels the
    Condon-Shortley phase that scipy's lpmv carries, so Y_11 ~ +sin(theta)cos(phi).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x = np.cos(theta)
    am = abs(m)
    base = lpmv(am, l, x)
    norm = _norm_lm(l, am)
    if m == 0:
        return norm * base * np.ones_like(phi)
    sign = (-1.0) ** am
    if m > 0:
        return math.sqrt(2.0) * norm * sign * base * np.cos(am * phi)
    return math.sqrt(2.0) * norm * sign * base * np.sin(am * phi)


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature grid: Gauss-Legendre in cos(theta) x uniform longitude.

    Integrates products Y_lm Y_l'm' exactly for l + l' <= 2 * bandwidth.
    """

    bandwidth: int
    theta: np.ndarray  # (n_theta,)
    phi: np.ndarray  # (n_phi,)
    weights: np.ndarray  # (n_theta * n_phi,) flattened, theta-major

    @property
    def n_nodes(self) -> int:
        return self.theta.size * self.phi.size

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (theta, phi) node arrays, theta-major."""
        tt, pp = np.meshgrid(self.theta, self.phi, indexing="ij")
        return tt.ravel(), pp.ravel()


@lru_cache(maxsize=32)
def grid_for_bandwidth(bandwidth: int) -> SphereGrid:
    if bandwidth < 0:
        raise DomainError("bandwidth must be nonnegative")
    n_theta = bandwidth + 1
    n_phi = 2 * bandwidth + 1
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x[::-1].copy())
    w_theta = w[::-1].copy()
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    w_phi = 2.0 * math.pi / n_phi
    weights = np.repeat(w_theta * w_phi, n_phi)
    return SphereGrid(bandwidth=bandwidth, theta=theta, phi=phi, weights=weights)


@lru_cache(maxsize=64)
def _ylm_table(bandwidth: int, L_max: int) -> np.ndarray:
    """Matrix of Y_lm values on the grid, shape (n_nodes, (L_max+1)^2)."""
    grid = grid_for_bandwidth(bandwidth)
    tt, pp = grid.nodes()
    cols = [real_ylm(l, m, tt, pp) for (l, m) in sh_pairs(L_max)]
    return np.column_stack(cols)


class SphereFunction:
    """A real band-limited function on S^2, held as orthonormal-basis coefficients."""

    __slots__ = ("L_max", "coeffs")

    def __init__(self, L_max: int, coeffs=None):
        n = (L_max + 1) ** 2
        if coeffs is None:
            coeffs = np.zeros(n)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (n,):
            raise ShapeError(f"expected {n} coefficients for L_max={L_max}, got shape {coeffs.shape}")
        object.__setattr__(self, "L_max", L_max)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("SphereFunction is immutable")

    @classmethod
    def basis(cls, L_max: int, l: int, m: int) -> "SphereFunction":
        c = np.zeros((L_max + 1) ** 2)
        c[sh_index(l, m)] = 1.0
        return cls(L_max, c)

    def coeff(self, l: int, m: int) -> float:
        return float(self.coeffs[sh_index(l, m)])

    def __add__(self, other: "SphereFunction") -> "SphereFunction":
        self._check_same(other)
        return type(self)(self.L_max, self.coeffs + other.coeffs)

    def __sub__(self, other: "SphereFunction") -> "SphereFunction":
        self._check_same(other)
        return type(self)(self.L_max, self.coeffs - other.coeffs)

    def __rmul__(self, scalar: float) -> "SphereFunction":
        return type(self)(self.L_max, float(scalar) * self.coeffs)

    def __neg__(self) -> "SphereFunction":
        return type(self)(self.L_max, -self.coeffs)

    def _check_same(self, other) -> None:
        if self.L_max != other.L_max:
            raise ShapeError(f"truncation mismatch: L_max {self.L_max} vs {other.L_max}")

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __repr__(self):
        nz = int(np.count_nonzero(self.coeffs))
        return f"SphereFunction(L_max={self.L_max}, nonzero={nz})"


def analyze(values, grid: SphereGrid, L_max: int) -> SphereFunction:
    """Project grid samples onto the orthonormal basis by quadrature."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ShapeError(f"expected {grid.n_nodes} samples, got shape {values.shape}")
    table = _ylm_table(grid.bandwidth, L_max)
    coeffs = table.T @ (grid.weights * values)
    return SphereFunction(L_max, coeffs)


def synthesize(f: SphereFunction, points) -> np.ndarray:
    """Evaluate f at (theta, phi) points; accepts a list of pairs or two arrays."""
    if isinstance(points, tuple) and len(points) == 2:
        theta, phi = np.asarray(points[0], float), np.asarray(points[1], float)
    else:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        theta, phi = pts[:, 0], pts[:, 1]
    out = np.zeros_like(theta, dtype=float)
    for idx, (l, m) in enumerate(sh_pairs(f.L_max)):
        c = f.coeffs[idx]
        if c != 0.0:
            out = out + c * real_ylm(l, m, theta, phi)
    return out


def synthesize_on_grid(f: SphereFunction, grid: SphereGrid) -> np.ndarray:
    """Fast evaluation on a quadrature grid through the cached basis table."""
    table = _ylm_table(grid.bandwidth, f.L_max)
    return table @ f.coeffs


def _eigenvalues(L_max: int, k: float) -> np.ndarray:
    ls = np.array([l for (l, _m) in sh_pairs(L_max)], dtype=float)
    return ls * (ls + 1.0) + k


def apply_A(f: SphereFunction, k: float, power: int) -> SphereFunction:
    """Apply (L^2 + k I)^power coefficientwise; negative powers invert."""
    if k <= 1:
        raise DomainError(f"k must exceed 1 so all eigenvalues exceed 1, got k={k}")
    lam = _eigenvalues(f.L_max, k)
    return SphereFunction(f.L_max, f.coeffs * lam ** power)


def nuclear_norm(f: SphereFunction, p: int, k: float) -> float:
    """The scale-p norm ||A^p f||_{L^2} of the nuclear chain."""
    if k <= 1:
        raise DomainError(f"k must exceed 1, got k={k}")
    lam = _eigenvalues(f.L_max, k)
    return float(np.sqrt(np.sum((lam ** (2 * p)) * f.coeffs ** 2)))


def hs_norm_partial(k: float, alpha: float, L_cut: int) -> float:
    """Partial sum over l <= L_cut of (2l+1) (l(l+1)+k)^(-alpha).

    L_cut = -1 is the empty sum. Convergence of the full series requires
    alpha > 1 (terms behave like 2 l^(1-2 alpha)); the routine itself is
    neutral and just reports partial sums.
    """
    if k <= 1:
        raise DomainError(f"k must exceed 1, got k={k}")
    if L_cut < 0:
        return 0.0
    ls = np.arange(L_cut + 1, dtype=float)
    return float(np.sum((2 * ls + 1) * (ls * (ls + 1) + k) ** (-alpha)))


def split_T4_ST(f: SphereFunction) -> tuple[SphereFunction, SphereFunction]:
    """Split into the l <= 1 part (translations) and the l > 1 remainder."""
    low = np.zeros_like(f.coeffs)
    low[:4] = f.coeffs[:4]
    high = f.coeffs - low
    return SphereFunction(f.L_max, low), SphereFunction(f.L_max, high)


def pair(beta, alpha) -> float:
    """Dual pairing: plain coefficient dot product (orthonormal basis)."""
    if beta.L_max != alpha.L_max:
        raise ShapeError(f"truncation mismatch: {beta.L_max} vs {alpha.L_max}")
    return float(np.dot(beta.coeffs, alpha.coeffs))
