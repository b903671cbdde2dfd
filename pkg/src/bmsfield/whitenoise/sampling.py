"""Pointwise evaluation of chaos series and the Gaussian characteristic check."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from .basis import HermiteSeries


def hermite_values(max_degree, x):
    """Table of probabilists' Hermite values He_0..He_max_degree at points x.

    Returns an array of shape (max_degree+1,) + x.shape, by the recurrence
    He_{k+1}(x) = x He_k(x) - k He_{k-1}(x).
    """
    x = np.asarray(x)
    if x.dtype.kind not in "fc":
        x = x.astype(float)
    table = np.empty((max_degree + 1,) + x.shape, dtype=x.dtype)
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for k in range(1, max_degree):
        table[k + 1] = x * table[k] - k * table[k - 1]
    return table


def eval_at_sample(psi: HermiteSeries, beta):
    """Evaluate the cylinder function at one dual sample.

    The sample enters only through its pairings with the direction
    functions, which for basis harmonics are plain coefficient reads.
    """
    from ..sphere import sh_index

    coords = np.array(
        [beta.coeffs[sh_index(l, m)] for l, m in psi.dirs.directions]
    )
    table = hermite_values(psi.cap, coords)
    exps = psi.basis.exponents
    factors = table[exps, np.arange(len(psi.dirs))[np.newaxis, :]]
    monomials = np.prod(factors, axis=1)
    value = np.sum(psi.coeffs * monomials)
    if np.iscomplexobj(psi.coeffs):
        return complex(value)
    return float(value)


def characteristic_functional(alpha, n_samples, seed, batch=200_000):
    """Gaussian characteristic functional and its Monte-Carlo estimate.

    exact = exp(-norm(alpha)^2 / 2).  The estimate draws i.i.d. standard
    Gaussians for every harmonic coefficient up to alpha's bandwidth and
    averages exp(i (beta, alpha)); dual samples outside alpha's support
    integrate to independent phases that are part of the estimate, not
    a bias.  Chunked to keep memory flat; the chunk reduction is ordered,
    so a (n_samples, seed) pair is reproducible.
    """
    if n_samples < 1:
        raise DomainError("need at least one sample")
    exact = math.exp(-0.5 * float(np.sum(alpha.coeffs**2)))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    dim = alpha.coeffs.shape[0]
    total = 0.0 + 0.0j
    done = 0
    while done < n_samples:
        chunk = min(batch, n_samples - done)
        draws = rng.standard_normal((chunk, dim))
        phases = np.exp(1j * (draws @ alpha.coeffs))
        total += phases.sum()
        done += chunk
    return exact, total / n_samples
