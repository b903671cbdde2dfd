"""Ladder operators, pairings and norms on truncated Hermite chaos.

Per direction i the annihilation operator D_i sends He_n to n_i He_{n-e_i},
the creation operator D*_i sends He_n to He_{n+e_i}, and the coordinate
operator Q_i is their sum.  All three are exact on the enumerated basis;
only creation can push a state past the degree cap, which is where the
strict/grow policy below applies.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..errors import CapOverflowError, DomainError, ShapeError
from .basis import HermiteSeries, chaos_basis

_LADDER_KINDS = ("D", "Dstar", "Q")


class OperatorMatrix:
    """Dense operator over the chaos basis at one cap, with its Gram weights."""

    __slots__ = ("n_directions", "cap", "matrix")

    def __init__(self, n_directions, cap, matrix):
        matrix = np.asarray(matrix)
        size = len(chaos_basis(n_directions, cap))
        if matrix.shape != (size, size):
            raise ShapeError(
                f"operator for K={n_directions}, N={cap} must be {size}x{size}, "
                f"got {matrix.shape}"
            )
        self.n_directions = int(n_directions)
        self.cap = int(cap)
        self.matrix = matrix

    @property
    def gram_weights(self):
        return chaos_basis(self.n_directions, self.cap).weights


@lru_cache(maxsize=4096)
def ladder_matrix(n_directions, cap, direction, kind):
    """Sparse matrix of D, D* or Q along one direction, cap to same cap.

    Creation entries whose target exceeds the cap are dropped; use a grown
    cap when exactness above the cap matters.
    """
    if kind not in _LADDER_KINDS:
        raise DomainError(f"unknown ladder kind {kind!r}")
    if not 0 <= direction < n_directions:
        raise DomainError(f"direction {direction} out of range")
    if kind == "Q":
        return (
            ladder_matrix(n_directions, cap, direction, "D")
            + ladder_matrix(n_directions, cap, direction, "Dstar")
        ).tocsr()
    basis = chaos_basis(n_directions, cap)
    rows, cols, vals = [], [], []
    for col, n in enumerate(basis.exponents):
        ni = int(n[direction])
        if kind == "D":
            if ni == 0:
                continue
            target = n.copy()
            target[direction] -= 1
            rows.append(basis.index_of(target))
            cols.append(col)
            vals.append(float(ni))
        else:
            if int(basis.degrees[col]) >= cap:
                continue
            target = n.copy()
            target[direction] += 1
            rows.append(basis.index_of(target))
            cols.append(col)
            vals.append(1.0)
    size = len(basis)
    return sp.csr_matrix(
        (np.array(vals), (np.array(rows, dtype=int), np.array(cols, dtype=int))),
        shape=(size, size),
    )


def _resolve_gamma(psi, alpha, tol):
    """Test-function coefficients along psi's direction set."""
    return psi.dirs.decompose(alpha, tol=tol)


def _apply_raising(psi, gamma, raising_kind, mode):
    """Apply sum_i gamma_i op_i where op can create, honoring the cap policy."""
    if mode not in ("strict", "grow"):
        raise DomainError(f"unknown cap mode {mode!r}")
    grown = psi.embed(psi.cap + 1)
    k = len(psi.dirs)
    dtype = np.result_type(psi.coeffs.dtype, np.asarray(gamma).dtype)
    out = np.zeros(len(grown.coeffs), dtype=dtype)
    for i, g in enumerate(gamma):
        if g == 0:
            continue
        out += g * (ladder_matrix(k, grown.cap, i, raising_kind) @ grown.coeffs)
    result = HermiteSeries(psi.dirs, grown.cap, out)
    tail = result.tail_above(psi.cap)
    if np.count_nonzero(tail) == 0:
        return result.truncate(psi.cap)
    if mode == "strict":
        raise CapOverflowError(
            f"result has degree {result.degree()} coefficients above cap "
            f"{psi.cap}; pass mode='grow' to keep them"
        )
    return result


def multiply_Q(alpha, psi, mode="strict", tol=1e-12):
    """Multiplication by the coordinate field paired with alpha.

    alpha must lie in the span of psi's directions (checked to tol).  If the
    product stays below the cap it is returned at the original cap; otherwise
    strict mode raises and grow mode returns the series at cap+1, where the
    result is exact.
    """
    gamma = _resolve_gamma(psi, alpha, tol)
    return _apply_raising(psi, gamma, "Q", mode)


def gateaux_D(alpha, psi, tol=1e-12):
    """Directional (annihilation) derivative along alpha.  Never overflows."""
    gamma = _resolve_gamma(psi, alpha, tol)
    k = len(psi.dirs)
    dtype = np.result_type(psi.coeffs.dtype, np.asarray(gamma).dtype)
    out = np.zeros(len(psi.coeffs), dtype=dtype)
    for i, g in enumerate(gamma):
        if g == 0:
            continue
        out += g * (ladder_matrix(k, psi.cap, i, "D") @ psi.coeffs)
    return HermiteSeries(psi.dirs, psi.cap, out)


def adjoint_Dstar(alpha, psi, mode="strict", tol=1e-12):
    """Creation operator paired with alpha, honoring the cap policy."""
    gamma = _resolve_gamma(psi, alpha, tol)
    return _apply_raising(psi, gamma, "Dstar", mode)


def gaussian_inner(psi, phi):
    """Gaussian L2 pairing: sum of conj(c_n) d_n prod_i n_i!.

    Both series must share the direction set and the cap.
    """
    if psi.dirs != phi.dirs:
        raise ShapeError("series over different direction sets")
    if psi.cap != phi.cap:
        raise ShapeError(
            f"series at different caps {psi.cap} and {phi.cap}; align first"
        )
    w = psi.basis.weights
    total = np.sum(np.conjugate(psi.coeffs) * phi.coeffs * w)
    if np.iscomplexobj(psi.coeffs) or np.iscomplexobj(phi.coeffs):
        return complex(total)
    return float(total)


def gaussian_norm(psi):
    return math.sqrt(max(gaussian_inner(psi, psi).real, 0.0))


def gamma_A_norm(psi, p):
    """Graded chaos norm with weight prod_i lambda_i^(2 p n_i).

    p may be any real; negative p gives the dual-side norms.
    """
    lam = psi.dirs.eigenvalues
    log_factor = psi.basis.exponents @ np.log(lam)
    factor = np.exp(2.0 * p * log_factor)
    total = np.sum(np.abs(psi.coeffs) ** 2 * psi.basis.weights * factor)
    return math.sqrt(float(total))


def project_Pi_V(psi, keep_indices):
    """Keep only chaos modes whose exponents are supported on keep_indices."""
    keep = sorted(set(int(i) for i in keep_indices))
    for i in keep:
        if not 0 <= i < len(psi.dirs):
            raise DomainError(f"direction index {i} out of range")
    drop_mask = np.ones(len(psi.dirs), dtype=bool)
    drop_mask[keep] = False
    exps = psi.basis.exponents
    alive = (exps[:, drop_mask] == 0).all(axis=1)
    coeffs = np.where(alive, psi.coeffs, 0.0)
    return psi.with_coeffs(coeffs)


@lru_cache(maxsize=64)
def _basis_row_lookup(n_directions, cap):
    """Mixed-radix keys of the basis exponents, sorted, for vector lookup."""
    exps = chaos_basis(n_directions, cap).exponents.astype(np.int64)
    radix = (cap + 1) ** np.arange(n_directions, dtype=np.int64)
    keys = exps @ radix
    order = np.argsort(keys)
    return radix, keys[order], order


@lru_cache(maxsize=512)
def _product_columns(n_directions, cap, multi):
    """Column structure of multiplication by He_multi, rows kept within cap.

    Returns (rows, cols, vals) arrays for a csr matrix.  Uses the product
    linearization He_a He_b = sum_s C(a,s) C(b,s) s! He_{a+b-2s} per slot,
    vectorized over columns: only the slots where multi is nonzero can carry
    a contraction, so the s loop runs over those few slots alone.
    """
    basis = chaos_basis(n_directions, cap)
    exps = basis.exponents.astype(np.int64)
    a = np.array(multi, dtype=np.int64)
    active = [i for i in range(n_directions) if a[i] > 0]
    radix, sorted_keys, order = _basis_row_lookup(n_directions, cap)
    degrees = exps.sum(axis=1)
    rows, cols, vals = [], [], []
    for s_active in _cartesian([range(int(a[i]) + 1) for i in active]):
        s = np.zeros(n_directions, dtype=np.int64)
        coef = np.ones(len(exps))
        ok = np.ones(len(exps), dtype=bool)
        for i, si in zip(active, s_active):
            s[i] = si
            ni = exps[:, i]
            ok &= ni >= si
            # C(n_i, s_i) s_i! is the falling factorial n_i (n_i-1) ... (n_i-s_i+1)
            c_col = np.ones(len(exps))
            for j in range(si):
                c_col = c_col * (ni - j)
            coef = coef * (math.comb(int(a[i]), si) * c_col)
        shift = a - 2 * s
        ok &= degrees + shift.sum() <= cap
        idxs = np.nonzero(ok)[0]
        if idxs.size == 0:
            continue
        target_keys = (exps[idxs] + shift) @ radix
        found = order[np.searchsorted(sorted_keys, target_keys)]
        rows.extend(found.tolist())
        cols.extend(idxs.tolist())
        vals.extend(coef[idxs].tolist())
    return (
        np.array(rows, dtype=int),
        np.array(cols, dtype=int),
        np.array(vals, dtype=float),
    )


def _cartesian(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for rest in _cartesian(ranges[1:]):
            yield (head,) + rest


def multiplication_matrix(lam_series):
    """Matrix of pointwise multiplication by lam_series at its own cap.

    Rows above the cap are dropped, so the matrix is the truncated product;
    embed to a larger cap first when the full product is needed.
    """
    k = len(lam_series.dirs)
    cap = lam_series.cap
    basis = lam_series.basis
    size = len(basis)
    dtype = complex if np.iscomplexobj(lam_series.coeffs) else float
    total = sp.csr_matrix((size, size), dtype=dtype)
    for idx in np.nonzero(lam_series.coeffs)[0]:
        multi = tuple(int(v) for v in basis.exponents[idx])
        rows, cols, vals = _product_columns(k, cap, multi)
        block = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
        total = total + lam_series.coeffs[idx] * block
    return total.tocsr()
