import cmath
import math

import numpy as np
import pytest

from bmsfield.bmsgroup import (
    INFINITY,
    BMSElement,
    SL2C,
    act_on_scri,
    angles_from_zeta,
    compose,
    conformal_factor,
    covering_map,
    identity_element,
    inverse,
    is_infinity,
    lorentz_act_function,
    lorentz_act_matrix,
    mobius,
    random_calibrated,
    random_rotation,
    random_sl2c,
)
from bmsfield.errors import DomainError
from bmsfield.sphere import SphereFunction, analyze, grid_for_bandwidth, sh_index

L = 8
ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def rng_(seed=0):
    return np.random.default_rng(seed)


def random_band_limited(rng, L_max=L, band=None):
    from bmsfield.bmsgroup import calibrated_band

    band = calibrated_band(L_max) if band is None else band
    c = np.zeros((L_max + 1) ** 2)
    n = (band + 1) ** 2
    c[:n] = rng.standard_normal(n)
    return SphereFunction(L_max, c)


# ------------------------------------------------------------ SL2C and mobius


def test_sl2c_normalizes_determinant():
    lam = SL2C(2.0, 0.0, 0.0, 2.0)
    det = lam.a * lam.d - lam.b * lam.c
    assert abs(det - 1.0) < 1e-12


def test_sl2c_singular_rejected():
    with pytest.raises(DomainError):
        SL2C(1.0, 1.0, 1.0, 1.0)


def test_mobius_examples():
    assert mobius(SL2C.identity(), 1 + 2j) == pytest.approx(1 + 2j)
    lam = SL2C(0.0, 1.0, -1.0, 0.0)
    assert mobius(lam, 1.0 + 0j) == pytest.approx(-1.0 + 0j)
    # applying twice gives -1/(-1/zeta) = zeta back
    z = 0.7 - 0.3j
    assert mobius(lam, mobius(lam, z)) == pytest.approx(z)
    boost = SL2C(math.sqrt(2), 0.0, 0.0, 1 / math.sqrt(2))
    assert mobius(boost, 1.0 + 0j) == pytest.approx(2.0 + 0j)


def test_mobius_extended_plane():
    lam = SL2C(1.0, 2.0, 3.0, 1.0)
    assert mobius(lam, INFINITY) == pytest.approx(lam.a / lam.c)
    pole = -lam.d / lam.c
    assert is_infinity(mobius(lam, pole))


# ------------------------------------------------------------ conformal factor


def test_conformal_factor_identity():
    for z in (0.0 + 0j, 2.3 - 1.1j, INFINITY):
        assert conformal_factor(SL2C.identity(), z) == pytest.approx(1.0)


def test_conformal_factor_boost_closed_form():
    t = math.log(2.0)
    lam = SL2C.boost_z(t)
    # displayed formula evaluated directly at zeta = 0
    direct = (1 + 0.0) / (abs(lam.b) ** 2 + abs(lam.d) ** 2)
    assert conformal_factor(lam, 0.0 + 0j) == pytest.approx(direct)
    assert conformal_factor(lam, 0.0 + 0j) == pytest.approx(2.0)


def test_conformal_factor_matches_displayed_formula():
    rng = rng_(5)
    for _ in range(25):
        lam = random_sl2c(rng)
        z = complex(*rng.standard_normal(2))
        displayed = (1 + abs(z) ** 2) / (abs(lam.a * z + lam.b) ** 2 + abs(lam.c * z + lam.d) ** 2)
        assert conformal_factor(lam, z) == pytest.approx(displayed, rel=1e-13)


def test_cocycle_identity_random():
    rng = rng_(11)
    worst = 0.0
    for _ in range(200):
        lam1 = random_sl2c(rng)
        lam2 = random_sl2c(rng)
        z = complex(*rng.standard_normal(2))
        lhs = conformal_factor(lam2, mobius(lam1, z)) * conformal_factor(lam1, z)
        rhs = conformal_factor(lam2 @ lam1, z)
        worst = max(worst, abs(lhs - rhs) / rhs)
    assert worst <= 1e-12


def test_sign_independence():
    rng = rng_(3)
    lam = random_sl2c(rng)
    neg = SL2C(-lam.a, -lam.b, -lam.c, -lam.d)
    z = 0.4 + 1.2j
    assert mobius(lam, z) == pytest.approx(mobius(neg, z))
    assert conformal_factor(lam, z) == pytest.approx(conformal_factor(neg, z))
    assert np.allclose(covering_map(lam), covering_map(neg), atol=1e-13)
    f = random_band_limited(rng)
    assert np.allclose(
        lorentz_act_function(lam, f).coeffs, lorentz_act_function(neg, f).coeffs, atol=1e-12
    )


# ------------------------------------------------------------ covering map


def test_covering_map_identity_and_kernel():
    assert np.allclose(covering_map(SL2C.identity()), np.eye(4), atol=1e-14)


def test_covering_map_z_boost():
    t = 0.8
    mat = covering_map(SL2C.boost_z(t))
    expected = np.eye(4)
    expected[0, 0] = expected[3, 3] = math.cosh(t)
    expected[0, 3] = expected[3, 0] = math.sinh(t)
    assert np.allclose(mat, expected, atol=1e-13)


def test_covering_map_homomorphism_and_metric():
    rng = rng_(21)
    for _ in range(30):
        l1, l2 = random_sl2c(rng), random_sl2c(rng)
        p1, p2 = covering_map(l1), covering_map(l2)
        assert np.max(np.abs(covering_map(l1 @ l2) - p1 @ p2)) < 1e-12
        assert np.max(np.abs(p1.T @ ETA @ p1 - ETA)) < 1e-12
        assert p1[0, 0] > 0


def test_covering_map_rotation_block():
    rot = covering_map(random_rotation(rng_(8)))
    assert rot[0, 0] == pytest.approx(1.0)
    assert np.allclose(rot[0, 1:], 0.0, atol=1e-13)
    assert np.allclose(rot[1:, 0], 0.0, atol=1e-13)
    r = rot[1:, 1:]
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)


# ------------------------------------------------------------ action on functions


def nhat(theta, phi):
    # the sphere embedding matching the homogeneous-coordinate dictionary
    return np.stack(
        [np.sin(theta) * np.cos(phi), -np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


def linear_function(v, L_max=L):
    """f_v(zeta) = v . (1, nhat), band-limited to l <= 1."""
    grid = grid_for_bandwidth(L_max)
    tt, pp = grid.nodes()
    vals = v[0] + nhat(tt, pp) @ np.asarray(v[1:])
    return analyze(vals, grid, L_max)


def test_act_identity_and_linearity():
    rng = rng_(31)
    f = random_band_limited(rng)
    assert np.max(np.abs(lorentz_act_function(SL2C.identity(), f).coeffs - f.coeffs)) < 1e-12
    lam = random_calibrated(rng)
    g = random_band_limited(rng)
    lhs = lorentz_act_function(lam, SphereFunction(L, f.coeffs + g.coeffs))
    rhs = lorentz_act_function(lam, f).coeffs + lorentz_act_function(lam, g).coeffs
    assert np.max(np.abs(lhs.coeffs - rhs)) < 1e-12


def test_act_rotation_preserves_constant():
    lam = random_rotation(rng_(4))
    f = SphereFunction.basis(L, 0, 0)
    out = lorentz_act_function(lam, f)
    assert np.max(np.abs(out.coeffs - f.coeffs)) < 1e-12


def test_act_t4_transforms_by_covering_map():
    # the l <= 1 sector carries exactly the four-vector rep: f_v -> f_{Pi(lam)^T v},
    # exact even for wild boosts because the acted function stays band-limited
    rng = rng_(41)
    for _ in range(10):
        lam = random_sl2c(rng)
        v = rng.standard_normal(4)
        acted = lorentz_act_function(lam, linear_function(v))
        expected = linear_function(covering_map(lam).T @ v)
        assert np.max(np.abs(acted.coeffs - expected.coeffs)) < 1e-10


def test_act_t4_invariance():
    rng = rng_(43)
    for _ in range(5):
        lam = random_sl2c(rng)
        f = SphereFunction(L, np.concatenate([rng.standard_normal(4), np.zeros((L + 1) ** 2 - 4)]))
        out = lorentz_act_function(lam, f)
        assert np.max(np.abs(out.coeffs[4:])) < 1e-9


def test_act_matrix_matches_function_action():
    rng = rng_(47)
    lam = random_calibrated(rng)
    mat = lorentz_act_matrix(lam, L)
    f = random_band_limited(rng)
    assert np.allclose(mat @ f.coeffs, lorentz_act_function(lam, f).coeffs, atol=1e-11)


def test_act_is_right_action():
    # act(lam1, act(lam2, f)) = act(lam2 lam1, f) up to quadrature error
    rng = rng_(53)
    lam1, lam2 = random_calibrated(rng), random_calibrated(rng)
    f = random_band_limited(rng)
    lhs = lorentz_act_function(lam1, lorentz_act_function(lam2, f))
    rhs = lorentz_act_function(lam2 @ lam1, f)
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-9


# ------------------------------------------------------------ group law


def random_element(rng, band=None):
    return BMSElement(random_calibrated(rng), random_band_limited(rng, band=band))


def test_compose_identity():
    rng = rng_(61)
    g = random_element(rng)
    e = identity_element(L)
    for h in (compose(e, g), compose(g, e)):
        assert np.max(np.abs(h.lam.matrix - g.lam.matrix)) < 1e-14 or np.max(
            np.abs(h.lam.matrix + g.lam.matrix)
        ) < 1e-14
        assert np.max(np.abs(h.f.coeffs - g.f.coeffs)) < 1e-12


def test_compose_inverse():
    rng = rng_(67)
    g = random_element(rng)
    h = compose(g, inverse(g))
    assert np.max(np.abs(np.abs(h.lam.matrix) - np.eye(2))) < 1e-12
    assert np.max(np.abs(h.f.coeffs)) < 1e-9
    h2 = compose(inverse(g), g)
    assert np.max(np.abs(h2.f.coeffs)) < 1e-9


def test_compose_associative():
    rng = rng_(71)
    worst = 0.0
    for _ in range(10):
        g1, g2, g3 = (random_element(rng) for _ in range(3))
        left = compose(compose(g1, g2), g3)
        right = compose(g1, compose(g2, g3))
        worst = max(worst, float(np.max(np.abs(left.f.coeffs - right.f.coeffs))))
        assert np.max(np.abs(left.lam.matrix - right.lam.matrix)) < 1e-12
    assert worst < 1e-9


# ------------------------------------------------------------ action on cut space


def test_act_on_scri_identity():
    e = identity_element(L)
    u, z = 1.7, 0.3 + 0.4j
    u2, z2 = act_on_scri(e, (u, z))
    assert u2 == pytest.approx(u) and z2 == pytest.approx(z)


def test_act_on_scri_pure_supertranslation():
    g = BMSElement(SL2C.identity(), SphereFunction.basis(L, 0, 0))
    for z in (0.2 + 0.1j, 3.0 - 2.0j):
        u2, z2 = act_on_scri(g, (1.0, z))
        assert u2 == pytest.approx(1.0 + 1 / math.sqrt(4 * math.pi))
        assert z2 == pytest.approx(z)


def test_act_on_scri_composition_consistency():
    rng = rng_(73)
    for _ in range(5):
        g1, g2 = random_element(rng), random_element(rng)
        u, z = float(rng.uniform(-1, 1)), complex(*rng.standard_normal(2))
        u_a, z_a = act_on_scri(compose(g1, g2), (u, z))
        u_mid, z_mid = act_on_scri(g2, (u, z))
        u_b, z_b = act_on_scri(g1, (u_mid, z_mid))
        assert u_a == pytest.approx(u_b, abs=1e-9)
        assert z_a == pytest.approx(z_b, abs=1e-9)


def test_angles_zeta_roundtrip():
    for z in (0.5 + 0.2j, -2.0 + 1.0j, 0.0 + 0j):
        theta, phi = angles_from_zeta(z)
        x1 = math.cos(theta / 2) * cmath.exp(1j * phi)
        x2 = math.sin(theta / 2)
        if x2 > 0:
            assert x1 / x2 == pytest.approx(z, abs=1e-12)
