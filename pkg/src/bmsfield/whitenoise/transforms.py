"""S-transform, Fourier operator and Fourier-Gauss family on chaos series.

The S-transform sends He_n(x) to the monomial xi^n with the same
coefficient, so a chaos series becomes an ordinary polynomial in the dual
variables.  The Fourier operator acts on that polynomial side as
P(xi) -> P(-i xi) exp(-|xi|^2 / 2) and is read back through the inverse
S-transform; since the Gaussian factor has unbounded degree the caller
states the output cap explicitly.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from ..errors import DomainError, ShapeError
from .basis import HermiteSeries, chaos_basis
from .operators import gamma_A_norm
from .basis import _compositions


class SPolynomial:
    """Polynomial in the dual variables, coefficients over the chaos index set."""

    __slots__ = ("dirs", "cap", "coeffs")

    def __init__(self, dirs, cap, coeffs):
        basis = chaos_basis(len(dirs), cap)
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (len(basis),):
            raise ShapeError(
                f"expected {len(basis)} coefficients, got shape {coeffs.shape}"
            )
        object.__setattr__(self, "dirs", dirs)
        object.__setattr__(self, "cap", int(cap))
        object.__setattr__(self, "coeffs", coeffs.copy())
        self.coeffs.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("SPolynomial is immutable")

    @property
    def basis(self):
        return chaos_basis(len(self.dirs), self.cap)

    def __call__(self, xi):
        """Evaluate at one dual point, a length-K vector of coordinates."""
        xi = np.asarray(xi)
        if xi.shape != (len(self.dirs),):
            raise ShapeError(f"expected {len(self.dirs)} coordinates")
        exps = self.basis.exponents
        with np.errstate(invalid="ignore"):
            monomials = np.prod(
                np.power(xi[np.newaxis, :], exps), axis=1
            )
        return np.sum(self.coeffs * monomials)


def s_transform(psi: HermiteSeries) -> SPolynomial:
    """He_n -> xi^n with unchanged coefficients."""
    return SPolynomial(psi.dirs, psi.cap, psi.coeffs)


def s_inverse(poly: SPolynomial) -> HermiteSeries:
    """xi^n -> He_n with unchanged coefficients."""
    return HermiteSeries(poly.dirs, poly.cap, poly.coeffs)


def fourier_F(psi: HermiteSeries, out_cap, tail_window=0):
    """Fourier operator via the S-transform side, truncated at out_cap.

    Every kept coefficient is exact: the coefficient of xi^m in
    P(-i xi) exp(-|xi|^2/2) only involves input monomials of degree at most
    the degree of m, which the input series carries in full.  If tail_window
    is positive, also returns the graded norm (weight exponent -1) of the
    dropped coefficients with degrees in (out_cap, out_cap + tail_window],
    as a cheap view of what the truncation discarded.
    """
    if out_cap < 0:
        raise DomainError("output cap must be nonnegative")
    k = len(psi.dirs)
    ext_cap = out_cap + tail_window
    out_basis = chaos_basis(k, ext_cap)
    out = np.zeros(len(out_basis), dtype=complex)
    in_basis = psi.basis
    table = _index_lookup(k, ext_cap)
    nz = np.nonzero(psi.coeffs)[0]
    base_all = psi.coeffs[nz] * (-1j) ** in_basis.degrees[nz]
    degs = in_basis.degrees[nz]
    for total in range(ext_cap // 2 + 1):
        live = degs <= ext_cap - 2 * total
        if not live.any():
            break
        idxs = nz[live]
        weights = base_all[live] * (-0.5) ** total
        exps = in_basis.exponents[idxs]
        for jvec in _compositions(total, k):
            coef = 1.0
            for ji in jvec:
                coef /= math.factorial(ji)
            shifted = exps + 2 * np.array(jvec, dtype=np.int64)
            rows = np.fromiter(
                (table[tuple(int(v) for v in row)] for row in shifted),
                dtype=np.int64,
                count=len(shifted),
            )
            np.add.at(out, rows, weights * coef)
    result = HermiteSeries(psi.dirs, ext_cap, out)
    kept = result.truncate(out_cap)
    if tail_window <= 0:
        return kept
    tail_coeffs = out.copy()
    tail_coeffs[: len(chaos_basis(k, out_cap))] = 0.0
    tail = HermiteSeries(psi.dirs, ext_cap, tail_coeffs)
    return kept, gamma_A_norm(tail, -1.0)


def _index_lookup(k, cap):
    basis = chaos_basis(k, cap)
    return {tuple(int(v) for v in row): i for i, row in enumerate(basis.exponents)}


def _fg_single_direction(n_directions, cap, direction, a, b):
    """Sparse block of the Fourier-Gauss operator acting on one slot.

    Column He_n maps to sum over m with m + 2j = n_i of
    n_i! / (m! j!) theta^j b^m He_m in that slot, theta = (a^2+b^2-1)/2.
    Degree never increases, so the block is exact at the shared cap.
    """
    theta = (a * a + b * b - 1.0) / 2.0
    basis = chaos_basis(n_directions, cap)
    table = _index_lookup(n_directions, cap)
    rows, cols, vals = [], [], []
    for col, n in enumerate(basis.exponents):
        ni = int(n[direction])
        for jj in range(ni // 2 + 1):
            m = ni - 2 * jj
            coef = (
                math.factorial(ni)
                / (math.factorial(m) * math.factorial(jj))
                * theta**jj
                * b**m
            )
            target = list(int(v) for v in n)
            target[direction] = m
            rows.append(table[tuple(target)])
            cols.append(col)
            vals.append(coef)
    size = len(basis)
    return sp.csr_matrix(
        (np.array(vals, dtype=complex), (rows, cols)), shape=(size, size)
    )


def fourier_gauss_matrix(dirs, cap, a, b):
    """Matrix of the two-parameter Fourier-Gauss operator at the given cap."""
    a = complex(a)
    b = complex(b)
    if a == 0 or b == 0:
        raise DomainError("parameters a and b must be nonzero")
    k = len(dirs)
    size = len(chaos_basis(k, cap))
    total = sp.identity(size, dtype=complex, format="csr")
    for i in range(k):
        total = _fg_single_direction(k, cap, i, a, b) @ total
    return total.tocsr()


def fourier_gauss(a, b, psi: HermiteSeries) -> HermiteSeries:
    """Apply the Fourier-Gauss operator; degree-preserving, exact at the cap."""
    mat = fourier_gauss_matrix(psi.dirs, psi.cap, a, b)
    return HermiteSeries(psi.dirs, psi.cap, mat @ psi.coeffs.astype(complex))
