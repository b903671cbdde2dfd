"""Field equations, constrained Lagrangian, Legendre map and Hamiltonian.

States are chaos series over a direction set whose first four slots carry
the flat four-momentum coordinates and whose remaining slots carry the
supertranslation constraints.  The velocity is an independent slot that
stands in for the annihilation derivative along the time direction, so the
fiber derivative is a genuine map between tangent and cotangent bundles.

All scalar functionals here are evaluated exactly: intermediate series are
grown enough degrees for products and ladder applications to be complete
before pairing, so the only approximation anywhere is the state truncation
itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapOverflowError, DomainError, ShapeError
from .whitenoise.basis import HermiteSeries, chaos_basis
from .whitenoise.operators import (
    OperatorMatrix,
    gaussian_inner,
    ladder_matrix,
    multiplication_matrix,
    project_Pi_V,
)

DEFAULT_SIGNATURE = (1.0, -1.0, -1.0, -1.0)


def _qd_matrix(k, cap, i):
    return (
        ladder_matrix(k, cap, i, "Q") - 2.0 * ladder_matrix(k, cap, i, "D")
    ).tocsr()


def _policy_return(result, original_cap, mode):
    tail = result.tail_above(original_cap)
    if np.count_nonzero(tail) == 0:
        return result.truncate(original_cap)
    if mode == "strict":
        raise CapOverflowError(
            f"result carries degree above cap {original_cap}; "
            "pass mode='grow' to keep it"
        )
    return result


def qd_apply(direction, psi, mode="strict"):
    """Coordinate-minus-twice-derivative operator along one direction index."""
    if not 0 <= direction < len(psi.dirs):
        raise DomainError(f"direction index {direction} out of range")
    if mode not in ("strict", "grow"):
        raise DomainError(f"unknown cap mode {mode!r}")
    grown = psi.embed(psi.cap + 1)
    out = _qd_matrix(len(psi.dirs), grown.cap, direction) @ grown.coeffs
    return _policy_return(HermiteSeries(psi.dirs, grown.cap, out), psi.cap, mode)


def kg_apply(psi, m2, signature=DEFAULT_SIGNATURE, mode="strict"):
    """Flat wave operator minus mass term on the coordinate slots."""
    if mode not in ("strict", "grow"):
        raise DomainError(f"unknown cap mode {mode!r}")
    k = len(psi.dirs)
    grown = psi.embed(psi.cap + 2)
    total = -m2 * grown.coeffs.astype(np.result_type(grown.coeffs.dtype, float))
    for mu in range(4):
        q = ladder_matrix(k, grown.cap, mu, "Q")
        total = total + signature[mu] * (q @ (q @ grown.coeffs))
    return _policy_return(HermiteSeries(psi.dirs, grown.cap, total), psi.cap, mode)


def eom_dyn2(psi, m2, signature=DEFAULT_SIGNATURE, mode="strict"):
    """Transformed wave operator built from the qd blocks, minus mass term."""
    if mode not in ("strict", "grow"):
        raise DomainError(f"unknown cap mode {mode!r}")
    k = len(psi.dirs)
    grown = psi.embed(psi.cap + 2)
    total = -m2 * grown.coeffs.astype(np.result_type(grown.coeffs.dtype, float))
    for mu in range(4):
        qd = _qd_matrix(k, grown.cap, mu)
        total = total + signature[mu] * (qd @ (qd @ grown.coeffs))
    return _policy_return(HermiteSeries(psi.dirs, grown.cap, total), psi.cap, mode)


def constraint_residuals(psi, tol=0.0):
    """Coordinate-multiplication residuals along every supertranslation slot.

    Returns (direction_index, Q_i psi) pairs computed at a grown cap so no
    residual content is lost.  With tol > 0 the pairs whose residual norm
    is at or below tol are still returned; callers decide what passes.
    """
    st = psi.dirs.st_indices
    if not st:
        raise DomainError("direction set has no supertranslation slots")
    k = len(psi.dirs)
    grown = psi.embed(psi.cap + 1)
    out = []
    for i in st:
        res = ladder_matrix(k, grown.cap, i, "Q") @ grown.coeffs
        out.append((i, HermiteSeries(psi.dirs, grown.cap, res)))
    return out


def is_t4_supported(psi, tol=0.0):
    kept = project_Pi_V(psi, psi.dirs.t4_indices)
    return float(np.max(np.abs(psi.coeffs - kept.coeffs), initial=0.0)) <= tol


# ------------------------------------------------------------------ states


@dataclass(frozen=True)
class FieldState:
    psi: HermiteSeries
    v: HermiteSeries
    lambdas: tuple = ()
    lambda_vs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        object.__setattr__(self, "lambda_vs", tuple(self.lambda_vs))
        parts = (self.psi, self.v) + self.lambdas + self.lambda_vs
        dirs = self.psi.dirs
        cap = self.psi.cap
        for part in parts:
            if part.dirs != dirs or part.cap != cap:
                raise ShapeError("state components must share basis and cap")
        n_st = len(dirs.st_indices)
        if len(self.lambdas) != n_st:
            raise ShapeError(
                f"need {n_st} multipliers (one per supertranslation slot), "
                f"got {len(self.lambdas)}"
            )
        if self.lambda_vs and len(self.lambda_vs) != n_st:
            raise ShapeError("multiplier velocities must match multiplier count")

    @property
    def dirs(self):
        return self.psi.dirs

    @property
    def cap(self):
        return self.psi.cap


@dataclass(frozen=True)
class CotangentPoint:
    psi: HermiteSeries
    pi: HermiteSeries
    lambdas: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        dirs = self.psi.dirs
        cap = self.psi.cap
        for part in (self.pi,) + self.lambdas:
            if part.dirs != dirs or part.cap != cap:
                raise ShapeError("phase-space components must share basis and cap")

    @property
    def dirs(self):
        return self.psi.dirs

    @property
    def cap(self):
        return self.psi.cap


def random_state(dirs, cap, rng, lambda_terms=2, lambda_degree=2, scale=1.0):
    """Random tangent state with sparse low-degree multipliers.

    Multiplier sparsity keeps the cubic multiplier integrals cheap; their
    monomial pool is small so product structures stay cached across states.
    """
    n = len(chaos_basis(len(dirs), cap))
    psi = HermiteSeries(dirs, cap, scale * rng.standard_normal(n))
    v = HermiteSeries(dirs, cap, scale * rng.standard_normal(n))
    pool_basis = chaos_basis(len(dirs), min(lambda_degree, cap))
    lambdas = []
    lambda_vs = []
    for _ in dirs.st_indices:
        coeffs = np.zeros(n)
        picks = rng.choice(len(pool_basis), size=min(lambda_terms, len(pool_basis)),
                           replace=False)
        for p in picks:
            coeffs[p] = scale * rng.standard_normal()
        lambdas.append(HermiteSeries(dirs, cap, coeffs))
        lambda_vs.append(HermiteSeries(dirs, cap, scale * rng.standard_normal(n)))
    return FieldState(psi, v, tuple(lambdas), tuple(lambda_vs))


# -------------------------------------------------------------- lagrangian


def lagrangian_KG(psi, m2, signature=DEFAULT_SIGNATURE, t4_indices=(0, 1, 2, 3)):
    """Quadratic wave-operator action via the Gaussian pairing.

    t4_indices restricts the coordinate sum; the default is all four slots.
    """
    k = len(psi.dirs)
    grown = psi.embed(psi.cap + 2)
    acc = m2 * grown.coeffs
    for mu in t4_indices:
        qd = _qd_matrix(k, grown.cap, mu)
        acc = acc + signature[mu] * (qd @ (qd @ grown.coeffs))
    return 0.5 * gaussian_inner(HermiteSeries(psi.dirs, grown.cap, acc), grown)


def _multiplier_pairing(lam, u):
    """Exact Gaussian integral of lam times u squared.

    The truncated product matrix at u's cap is complete on every row that
    the pairing against u can see, so this is the exact cubic integral.
    """
    if np.count_nonzero(lam.coeffs) == 0:
        return 0.0
    mat = multiplication_matrix(lam.embed(u.cap) if lam.cap < u.cap else lam)
    w = chaos_basis(len(u.dirs), u.cap).weights
    return float(np.real(np.sum(np.conjugate(u.coeffs) * (mat @ u.coeffs) * w)))


def lagrangian_full(state: FieldState, m2, signature=DEFAULT_SIGNATURE,
                    t4_indices=(0, 1, 2, 3)):
    """Constrained first-order Lagrangian with the velocity slot substituted.

    Wherever the quadratic action reads the time-derivative of the field it
    uses the independent velocity component instead, making this a genuine
    function on the tangent bundle.  With the velocity tied to the actual
    derivative and zero multipliers it reproduces lagrangian_KG.
    """
    dirs = state.dirs
    k = len(dirs)
    cap1 = state.cap + 1
    psi = state.psi.embed(cap1)
    v = state.v.embed(cap1)
    total = 0.0
    if 0 in t4_indices:
        w = HermiteSeries(
            dirs, cap1, ladder_matrix(k, cap1, 0, "Q") @ psi.coeffs - 2.0 * v.coeffs
        )
        total -= 0.5 * signature[0] * gaussian_inner(w, w)
    for mu in t4_indices:
        if mu == 0:
            continue
        qd = HermiteSeries(dirs, cap1, _qd_matrix(k, cap1, mu) @ psi.coeffs)
        total -= 0.5 * signature[mu] * gaussian_inner(qd, qd)
    total += 0.5 * m2 * gaussian_inner(state.psi, state.psi)
    for lam, i in zip(state.lambdas, dirs.st_indices):
        u = HermiteSeries(dirs, cap1, _qd_matrix(k, cap1, i) @ psi.coeffs)
        total += 0.5 * _multiplier_pairing(lam, u)
    return float(total)


def euler_lagrange_gradient(state: FieldState, m2, signature=DEFAULT_SIGNATURE):
    """Gradient of the constrained Lagrangian under the Gaussian pairing.

    The velocity slot is treated as tied to the time derivative of the
    field, so the returned series is the full Euler-Lagrange combination:
    the field gradient plus the creation-side correction of the velocity
    gradient.  Exact through the state's cap.
    """
    dirs = state.dirs
    k = len(dirs)
    cap = state.cap
    cap1 = cap + 1
    psi1 = state.psi.embed(cap1)
    v1 = state.v.embed(cap1)
    w = ladder_matrix(k, cap1, 0, "Q") @ psi1.coeffs - 2.0 * v1.coeffs
    out = _qd_matrix(k, cap1, 0) @ w * signature[0]
    for mu in (1, 2, 3):
        qd = _qd_matrix(k, cap1, mu)
        out = out + signature[mu] * (qd @ (qd @ psi1.coeffs))
    out = out + m2 * psi1.coeffs
    for lam, i in zip(state.lambdas, dirs.st_indices):
        u = _qd_matrix(k, cap1, i) @ psi1.coeffs
        lam_mat = multiplication_matrix(lam.embed(cap1) if lam.cap < cap1 else lam)
        out = out - _qd_matrix(k, cap1, i) @ (lam_mat @ u)
    return HermiteSeries(dirs, cap1, out).truncate(cap)


# ---------------------------------------------------------------- symmetry


def wave_operator_matrix(dirs, cap, kind="qd", signature=DEFAULT_SIGNATURE):
    """Dense matrix of the signature-weighted squared blocks at one cap."""
    k = len(dirs)
    size = len(chaos_basis(k, cap))
    total = np.zeros((size, size))
    for mu in range(4):
        if kind == "qd":
            block = _qd_matrix(k, cap, mu)
        elif kind == "D":
            block = ladder_matrix(k, cap, mu, "D")
        elif kind == "Q":
            block = ladder_matrix(k, cap, mu, "Q")
        else:
            raise DomainError(f"unknown block kind {kind!r}")
        total = total + signature[mu] * (block @ block).toarray()
    return OperatorMatrix(k, cap, total)


def vainberg_symmetry_defect(op: OperatorMatrix):
    """Max deviation from symmetry in the Gaussian-weighted pairing.

    Zero means the operator is a gradient of some functional on the
    truncation; a positive defect is the obstruction to a potential.
    """
    w = op.gram_weights
    weighted = w[:, None] * op.matrix
    return float(np.max(np.abs(weighted - weighted.T)))


# ------------------------------------------------------- legendre and energy


def fiber_derivative(state: FieldState) -> CotangentPoint:
    """Velocity-to-momentum map; multiplier velocities are sent to zero."""
    dirs = state.dirs
    k = len(dirs)
    cap1 = state.cap + 1
    psi1 = state.psi.embed(cap1)
    v1 = state.v.embed(cap1)
    pi = HermiteSeries(
        dirs, cap1, 4.0 * v1.coeffs - 2.0 * (ladder_matrix(k, cap1, 0, "Q") @ psi1.coeffs)
    )
    if np.count_nonzero(pi.tail_above(state.cap)) == 0:
        return CotangentPoint(state.psi, pi.truncate(state.cap), state.lambdas)
    lambdas = tuple(lam.embed(cap1) for lam in state.lambdas)
    return CotangentPoint(psi1, pi, lambdas)


def energy(state: FieldState, m2, signature=DEFAULT_SIGNATURE):
    """Pairing of velocity with conjugate momentum, minus the Lagrangian."""
    pt = fiber_derivative(state)
    v = state.v.embed(pt.cap)
    return float(gaussian_inner(v, pt.pi)) - lagrangian_full(state, m2, signature)


def hamiltonian(pt: CotangentPoint, m2, signature=DEFAULT_SIGNATURE):
    """Displayed phase-space energy with the multiplier term subtracted."""
    dirs = pt.dirs
    k = len(dirs)
    cap1 = pt.cap + 1
    psi1 = pt.psi.embed(cap1)
    total = 0.5 * gaussian_inner(pt.pi, pt.pi)
    for mu in (1, 2, 3):
        qd = HermiteSeries(dirs, cap1, _qd_matrix(k, cap1, mu) @ psi1.coeffs)
        total -= 0.5 * gaussian_inner(qd, qd)
    total -= 0.5 * m2 * gaussian_inner(pt.psi, pt.psi)
    for lam, i in zip(pt.lambdas, dirs.st_indices):
        u = HermiteSeries(dirs, cap1, _qd_matrix(k, cap1, i) @ psi1.coeffs)
        total -= 0.5 * _multiplier_pairing(lam, u)
    return float(total)


def symplectic_form(nu1, nu2):
    """Canonical two-form on (field, momentum) pairs."""
    psi1, pi1 = _as_pair(nu1)
    psi2, pi2 = _as_pair(nu2)
    return float(gaussian_inner(pi2, psi1) - gaussian_inner(pi1, psi2))


def _as_pair(nu):
    if isinstance(nu, CotangentPoint):
        return nu.psi, nu.pi
    psi, pi = nu
    return psi, pi


def symplectic_gram(dirs, cap):
    """Gram matrix of the two-form over the doubled chaos basis."""
    w = chaos_basis(len(dirs), cap).weights
    n = len(w)
    gram = np.zeros((2 * n, 2 * n))
    gram[:n, n:] = np.diag(w)
    gram[n:, :n] = -np.diag(w)
    return gram
