"""Supermomenta: dual vectors on the supertranslation space in truncation.

A supermomentum is a coefficient vector over the dual basis; its l <= 1 block
carries an ordinary four-momentum through a fixed componentwise dictionary, and
the Lorentz-invariant quadratic form on that block gives the orbit mass.
"""

from __future__ import annotations

import math

import numpy as np

from .bmsgroup import SL2C, covering_map, lorentz_act_matrix
from .errors import DomainError, ShapeError
from .sphere import SphereFunction, sh_index, sh_pairs

__all__ = [
    "Supermomentum",
    "FourMomentum",
    "pair",
    "project_T4",
    "supermomentum_from_four_momentum",
    "casimir_B",
    "mass_squared",
    "dual_act",
    "dual_act_matrix",
    "momentum_act_matrix",
    "orbit_fixed_point",
    "annihilator_check",
    "slot_dictionary",
]

# componentwise extraction scales: time slot, then the three l=1 slots.
# The time scale follows the displayed -sqrt(3/4pi) convention; the spatial
# slots carry -sqrt(1/4pi) so the extracted vector transforms under the exact
# (signed-permutation conjugated) Lorentz matrix and the mass form is invariant.
_SCALE_TIME = -math.sqrt(3.0 / (4.0 * math.pi))
_SCALE_SPACE = -math.sqrt(1.0 / (4.0 * math.pi))
_EXTRACT = np.diag([_SCALE_TIME, _SCALE_SPACE, _SCALE_SPACE, _SCALE_SPACE])
_EXTRACT_INV = np.linalg.inv(_EXTRACT)


class Supermomentum(SphereFunction):
    """Dual coefficient vector; pairing with functions is the coefficient dot."""

    @classmethod
    def from_function(cls, f: SphereFunction) -> "Supermomentum":
        return cls(f.L_max, f.coeffs.copy())

    @classmethod
    def dual_basis(cls, L_max: int, l: int, m: int) -> "Supermomentum":
        c = np.zeros((L_max + 1) ** 2)
        c[sh_index(l, m)] = 1.0
        return cls(L_max, c)

    def __repr__(self):
        nz = int(np.count_nonzero(self.coeffs))
        return f"Supermomentum(L_max={self.L_max}, nonzero={nz})"


class FourMomentum:
    """Extracted four-vector (p0, p1, p2, p3) in the configured signature."""

    __slots__ = ("p",)

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (4,):
            raise ShapeError(f"four-momentum needs 4 components, got shape {p.shape}")
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("FourMomentum is immutable")

    def __iter__(self):
        return iter(self.p)

    def __repr__(self):
        return f"FourMomentum({np.array2string(self.p, precision=6)})"


def pair(beta: Supermomentum, alpha: SphereFunction) -> float:
    """Dual pairing, the coefficient dot product."""
    if beta.L_max != alpha.L_max:
        raise ShapeError(f"truncation mismatch: {beta.L_max} vs {alpha.L_max}")
    return float(np.dot(beta.coeffs, alpha.coeffs))


def project_T4(beta: Supermomentum) -> FourMomentum:
    """Extract the four-momentum from the l <= 1 dual coefficients, componentwise."""
    return FourMomentum(_EXTRACT @ beta.coeffs[:4])


def supermomentum_from_four_momentum(p, L_max: int) -> Supermomentum:
    """Inverse of project_T4 on the l <= 1 block; everything else zero."""
    p = np.asarray(p, dtype=float).reshape(4)
    c = np.zeros((L_max + 1) ** 2)
    c[:4] = _EXTRACT_INV @ p
    return Supermomentum(L_max, c)


def casimir_B(beta1: Supermomentum, beta2: Supermomentum, signature=(1, -1, -1, -1)) -> float:
    """Invariant bilinear form eta^{mu nu} p_mu q_nu of the extracted momenta."""
    p = project_T4(beta1).p
    q = project_T4(beta2).p
    eta = np.asarray(signature, dtype=float)
    return float(np.sum(eta * p * q))


def mass_squared(beta: Supermomentum, signature=(1, -1, -1, -1)) -> float:
    return casimir_B(beta, beta, signature)


def dual_act_matrix(lam: SL2C, L_max: int) -> np.ndarray:
    """Matrix of the dual action: transpose of the function action of lam^{-1}."""
    return lorentz_act_matrix(lam.inv(), L_max).T


def dual_act(lam: SL2C, beta: Supermomentum) -> Supermomentum:
    """Dual action pinned by pair(dual_act(lam, beta), alpha) = pair(beta, act(lam^{-1}, alpha))."""
    return Supermomentum(beta.L_max, dual_act_matrix(lam, beta.L_max) @ beta.coeffs)


# signed permutation relating extracted slot components to the (t, x, y, z)
# axes of the covering map; rows follow the slot order of slot_dictionary:
# slot (1,-1) reads -y, slot (1,0) reads z, slot (1,1) reads x.
_SLOT_PERM = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


def momentum_act_matrix(lam: SL2C) -> np.ndarray:
    """Exact 4x4 matrix moving extracted four-momenta under dual_act(lam).

    Conjugates the covering map of lam^{-1} by the slot permutation, so no
    sphere quadrature enters; project_T4(dual_act(lam, beta)) agrees with this
    matrix applied to project_T4(beta) up to the quadrature error of dual_act.
    """
    return _SLOT_PERM @ covering_map(lam.inv()) @ _SLOT_PERM.T


def orbit_fixed_point(kind: str, value: float, L_max: int = 8) -> Supermomentum:
    """Reference point of the massive hyperboloid or the massless forward cone.

    massive: coefficient sqrt(4 pi / 3) * m at (0,0).
    massless: the dual vector whose extracted momentum is the forward null (E, 0, 0, E).
    """
    if kind == "massive":
        if value < 0:
            raise DomainError(f"massive fixed point needs m >= 0, got {value}")
        c = np.zeros((L_max + 1) ** 2)
        c[0] = math.sqrt(4.0 * math.pi / 3.0) * value
        return Supermomentum(L_max, c)
    if kind == "massless":
        if value <= 0:
            raise DomainError(f"massless fixed point needs E > 0, got {value}")
        return supermomentum_from_four_momentum([value, 0.0, 0.0, value], L_max)
    raise DomainError(f"kind must be 'massive' or 'massless', got {kind!r}")


def annihilator_check(beta: Supermomentum, tol: float = 1e-12) -> bool:
    """True iff beta pairs to zero with every l > 1 basis function within tol."""
    return bool(np.max(np.abs(beta.coeffs[4:]), initial=0.0) <= tol)


def slot_dictionary(L_max: int = 1) -> np.ndarray:
    """Matrix T with coefficients(f_v) = T v for f_v(n) = v . (1, nhat), v in (t,x,y,z).

    Rows follow the slot order (0,0), (1,-1), (1,0), (1,1); the sphere embedding
    is the one induced by the homogeneous-coordinate dictionary, whose y axis is
    reflected relative to the usual (theta, phi) embedding.
    """
    s = math.sqrt(4.0 * math.pi / 3.0)
    T = np.zeros((4, 4))
    T[0, 0] = math.sqrt(4.0 * math.pi)
    T[1, 2] = -s  # slot (1,-1) reads -y
    T[2, 3] = s  # slot (1,0) reads z
    T[3, 1] = s  # slot (1,1) reads x
    return T
