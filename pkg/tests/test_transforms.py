import math

import numpy as np
import pytest
from numpy.polynomial import hermite_e

from bmsfield.errors import DomainError
from bmsfield.sphere import SphereFunction, sh_index
from bmsfield.whitenoise import (
    DirectionSet,
    HermiteSeries,
    chaos_basis,
    characteristic_functional,
    fourier_F,
    fourier_gauss,
    fourier_gauss_matrix,
    gamma_A_norm,
    gaussian_norm,
    hermite_values,
    ladder_matrix,
    s_inverse,
    s_transform,
)

T4 = ((0, 0), (1, -1), (1, 0), (1, 1))
L_MAX = 4


def t4_dirs():
    return DirectionSet(T4, 2.0, L_MAX)


def harmonic(l, m):
    coeffs = np.zeros((L_MAX + 1) ** 2)
    coeffs[sh_index(l, m)] = 1.0
    return SphereFunction(L_MAX, coeffs)


def unit(dirs, cap, multi):
    return HermiteSeries.unit(dirs, cap, multi)


# ------------------------------------------------------------ s-transform


def test_s_transform_monomial_examples():
    dirs = t4_dirs()
    he2 = unit(dirs, 3, (2, 0, 0, 0))
    poly = s_transform(he2)
    for xi0 in (0.0, 0.5, -1.3):
        xi = np.array([xi0, 0.2, -0.1, 0.4])
        assert poly(xi) == pytest.approx(xi0**2, abs=1e-13)
    one = unit(dirs, 2, (0, 0, 0, 0))
    assert s_transform(one)(np.ones(4)) == pytest.approx(1.0)


def test_s_transform_roundtrip_and_linearity():
    dirs = t4_dirs()
    rng = np.random.default_rng(7)
    n = len(chaos_basis(4, 3))
    psi = HermiteSeries(dirs, 3, rng.standard_normal(n))
    phi = HermiteSeries(dirs, 3, rng.standard_normal(n))
    back = s_inverse(s_transform(psi))
    assert np.array_equal(back.coeffs, psi.coeffs)
    combo = s_transform(psi + 2.0 * phi)
    assert np.allclose(
        combo.coeffs, s_transform(psi).coeffs + 2.0 * s_transform(phi).coeffs
    )


def test_s_transform_vs_wick_exponential_quadrature():
    # S psi at xi equals the Gaussian pairing with exp(sum xi p - |xi|^2/2),
    # evaluated here by dense Gauss-Hermite quadrature in each slot.
    dirs = t4_dirs()
    rng = np.random.default_rng(13)
    psi = HermiteSeries(dirs, 3, rng.standard_normal(len(chaos_basis(4, 3))))
    poly = s_transform(psi)
    nodes, weights = hermite_e.hermegauss(40)
    weights = weights / math.sqrt(2.0 * math.pi)
    table = hermite_values(3, nodes)
    for trial in range(3):
        xi = rng.uniform(-0.5, 0.5, size=4)
        moments = np.empty((4, 4))
        for i in range(4):
            kernel = weights * np.exp(xi[i] * nodes - 0.5 * xi[i] ** 2)
            moments[i] = table @ kernel
        total = 0.0
        basis = psi.basis
        for idx in range(len(basis)):
            n = basis.exponents[idx]
            total += psi.coeffs[idx] * np.prod(moments[np.arange(4), n])
        assert total == pytest.approx(poly(xi), abs=1e-9)


# ---------------------------------------------------------------- fourier


def test_fourier_of_constant_pinned_coefficients():
    dirs = t4_dirs()
    one = unit(dirs, 0, (0, 0, 0, 0)).embed(2)
    out = fourier_F(one, 6)
    assert out.coeff((0, 0, 0, 0)) == pytest.approx(1.0)
    assert out.coeff((2, 0, 0, 0)) == pytest.approx(-0.5)
    assert out.coeff((2, 2, 0, 0)) == pytest.approx(0.25)
    assert out.coeff((4, 0, 0, 0)) == pytest.approx(0.125)
    assert out.coeff((2, 2, 2, 0)) == pytest.approx(-0.125)
    assert out.coeff((6, 0, 0, 0)) == pytest.approx(-1.0 / 48.0)
    assert out.coeff((1, 0, 0, 0)) == 0.0
    assert out.coeff((3, 1, 0, 0)) == 0.0


def test_fourier_functional_characterization():
    # S(F psi)(xi) should match psi^s(-i xi) exp(-|xi|^2/2) up to the
    # dropped tail, which is tiny for small xi at out_cap 10.
    dirs = t4_dirs()
    rng = np.random.default_rng(19)
    psi = HermiteSeries(dirs, 2, rng.standard_normal(len(chaos_basis(4, 2))))
    out = fourier_F(psi, 10)
    spoly = s_transform(psi)
    for trial in range(4):
        xi = rng.uniform(-0.2, 0.2, size=4)
        lhs = s_transform(out)(xi)
        rhs = spoly((-1j) * xi) * np.exp(-0.5 * np.sum(xi**2))
        # dropped Gaussian tail above degree 10 is below 2e-9 on this box
        assert abs(lhs - rhs) < 1e-8


def test_fourier_tail_report():
    dirs = t4_dirs()
    rng = np.random.default_rng(23)
    psi = HermiteSeries(dirs, 2, rng.standard_normal(len(chaos_basis(4, 2))))
    kept, tail = fourier_F(psi, 6, tail_window=4)
    assert kept.cap == 6
    assert tail > 0.0
    kept_higher, tail_higher = fourier_F(psi, 10, tail_window=4)
    assert tail_higher < tail


def _alpha_gammas(dirs, alpha):
    return dirs.decompose(alpha)


def _ladder_sum(k, cap, gamma, kind):
    total = None
    for i, g in enumerate(gamma):
        if g == 0:
            continue
        block = g * ladder_matrix(k, cap, i, kind)
        total = block if total is None else total + block
    return total.toarray()


@pytest.mark.parametrize(
    "alpha_spec",
    [
        [(0, 0, 1.0)],
        [(1, -1, 0.8), (1, 0, -0.35), (0, 0, 0.5)],
    ],
)
def test_fourier_intertwines_ladders(alpha_spec):
    # F D = i Q F and F Q = i D F, compared as matrices on inputs of
    # degree <= out_cap - 2 and output rows of degree <= out_cap.
    dirs = t4_dirs()
    out_cap = 6
    in_cap = out_cap - 2
    work_cap = in_cap + 1
    ext_cap = out_cap + 1
    alpha = sum(
        (w * harmonic(l, m) for l, m, w in alpha_spec),
        SphereFunction(L_MAX, np.zeros((L_MAX + 1) ** 2)),
    )
    gamma = _alpha_gammas(dirs, alpha)

    work_basis = chaos_basis(4, work_cap)
    n_work = len(work_basis)
    n_in = len(chaos_basis(4, in_cap))
    f_cols = np.zeros((len(chaos_basis(4, ext_cap)), n_work), dtype=complex)
    for j in range(n_work):
        f_cols[:, j] = fourier_F(
            unit(dirs, work_cap, tuple(work_basis.exponents[j])), ext_cap
        ).coeffs

    d_work = _ladder_sum(4, work_cap, gamma, "D")
    q_work = _ladder_sum(4, work_cap, gamma, "Q")
    d_ext = _ladder_sum(4, ext_cap, gamma, "D")
    q_ext = _ladder_sum(4, ext_cap, gamma, "Q")

    rows = len(chaos_basis(4, out_cap))
    lhs_d = (f_cols @ d_work[:, :n_in])[:rows]
    rhs_d = (1j * q_ext @ f_cols[:, :n_in])[:rows]
    assert np.max(np.abs(lhs_d - rhs_d)) < 1e-10

    lhs_q = (f_cols @ q_work[:, :n_in])[:rows]
    rhs_q = (1j * d_ext @ f_cols[:, :n_in])[:rows]
    assert np.max(np.abs(lhs_q - rhs_q)) < 1e-10


# ----------------------------------------------------------- fourier-gauss


def test_fg_preserves_constants():
    dirs = t4_dirs()
    one = unit(dirs, 3, (0, 0, 0, 0))
    out = fourier_gauss(1.7, 0.4 - 0.2j, one)
    assert abs(out.coeff((0, 0, 0, 0)) - 1.0) < 1e-14
    assert np.max(np.abs(out.coeffs[1:])) == 0.0


def test_fg_eigenrelation_sqrt2_i():
    dirs = t4_dirs()
    a = math.sqrt(2.0)
    he3 = unit(dirs, 4, (3, 0, 0, 0))
    out = fourier_gauss(a, 1j, he3)
    assert np.allclose(out.coeffs, (-1j) * he3.coeffs, atol=1e-12)
    mixed = unit(dirs, 4, (1, 1, 0, 0))
    out2 = fourier_gauss(a, 1j, mixed)
    assert np.allclose(out2.coeffs, -1.0 * mixed.coeffs, atol=1e-12)


def test_fg_inverse_pair():
    dirs = t4_dirs()
    a = math.sqrt(2.0)
    cap = 4
    forward = fourier_gauss_matrix(dirs, cap, a, 1j).toarray()
    backward = fourier_gauss_matrix(dirs, cap, a, -1j).toarray()
    product = forward @ backward
    eye = np.eye(product.shape[0])
    assert np.max(np.abs(product - eye)) < 1e-12


def test_fg_norm_preservation():
    dirs = t4_dirs()
    a = math.sqrt(2.0)
    rng = np.random.default_rng(29)
    psi = HermiteSeries(dirs, 4, rng.standard_normal(len(chaos_basis(4, 4))))
    out = fourier_gauss(a, 1j, psi)
    assert gaussian_norm(out) == pytest.approx(gaussian_norm(psi), rel=1e-12)
    assert gamma_A_norm(out, 1) == pytest.approx(gamma_A_norm(psi, 1), rel=1e-12)


def test_fg_monte_carlo_oracle():
    # G_{a,b} psi (beta) = E[psi(a x + b p)] with x standard normal,
    # checked at complex b on low-degree states.
    dirs = t4_dirs()
    a = math.sqrt(2.0)
    b = 1j
    p0 = 0.83
    rng = np.random.default_rng(31)
    draws = rng.standard_normal(200_000)
    args = a * draws + b * p0
    table = hermite_values(4, args)
    for n in range(5):
        samples = table[n]
        est = samples.mean()
        se = math.sqrt(
            (samples.real.var() + samples.imag.var()) / samples.size
        )
        psi = unit(dirs, 4, (n, 0, 0, 0))
        out = fourier_gauss(a, b, psi)
        he_at_p = hermite_values(4, np.array([p0]))[:, 0]
        predicted = 0.0 + 0.0j
        for idx in np.nonzero(out.coeffs)[0]:
            m = out.basis.exponents[idx]
            predicted += out.coeffs[idx] * he_at_p[int(m[0])]
        assert abs(est - predicted) < 4.0 * se + 1e-12


@pytest.mark.parametrize("a,b", [(1.1, 0.8), (math.sqrt(2.0), 1j), (0.7, -0.4 + 0.5j)])
def test_fg_ladder_intertwining(a, b):
    # (uno) G D = b^-1 D G and (due) G Q = a^2 b^-1 D G + b Q G on inputs
    # of degree <= cap - 1.
    dirs = t4_dirs()
    cap = 5
    n_low = len(chaos_basis(4, cap - 1))
    g = fourier_gauss_matrix(dirs, cap, a, b).toarray()
    for i in range(4):
        d = ladder_matrix(4, cap, i, "D").toarray()
        q = ladder_matrix(4, cap, i, "Q").toarray()
        uno_l = (g @ d)[:, :n_low]
        uno_r = ((1.0 / b) * d @ g)[:, :n_low]
        assert np.max(np.abs(uno_l - uno_r)) < 1e-10
        due_l = (g @ q)[:, :n_low]
        due_r = ((a * a / b) * d @ g + b * q @ g)[:, :n_low]
        assert np.max(np.abs(due_l - due_r)) < 1e-10


def test_fg_rejects_zero_parameters():
    dirs = t4_dirs()
    one = unit(dirs, 2, (0, 0, 0, 0))
    with pytest.raises(DomainError):
        fourier_gauss(0.0, 1.0, one)
    with pytest.raises(DomainError):
        fourier_gauss(1.0, 0.0, one)


# ------------------------------------------------------ characteristic fn


def test_characteristic_zero_test_function():
    alpha = SphereFunction(L_MAX, np.zeros((L_MAX + 1) ** 2))
    exact, est = characteristic_functional(alpha, 500, seed=1)
    assert exact == 1.0
    assert est == pytest.approx(1.0, abs=1e-15)


def test_characteristic_pinned_norms():
    alpha = harmonic(0, 0)
    exact, est = characteristic_functional(alpha, 20_000, seed=5)
    assert exact == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert abs(est - exact) <= 3.0 / math.sqrt(20_000)
    exact2, _ = characteristic_functional(2.0 * harmonic(0, 0), 10, seed=5)
    assert exact2 == pytest.approx(math.exp(-2.0), rel=1e-15)


def test_characteristic_reproducible_and_chunk_invariant():
    alpha = harmonic(1, 0) + 0.3 * harmonic(2, 2)
    _, est_a = characteristic_functional(alpha, 30_000, seed=9)
    _, est_b = characteristic_functional(alpha, 30_000, seed=9)
    assert est_a == est_b
    _, est_c = characteristic_functional(alpha, 30_000, seed=9, batch=7_001)
    assert est_c == pytest.approx(est_a, abs=1e-12)


def test_characteristic_rejects_empty():
    with pytest.raises(DomainError):
        characteristic_functional(harmonic(0, 0), 0, seed=1)
