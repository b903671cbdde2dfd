import math

import numpy as np
import pytest

from bmsfield.bmsgroup import SL2C, BMSElement
from bmsfield.errors import ConstraintError, CoverageError, DomainError, ShapeError
from bmsfield.induced import (
    InducedField,
    boost_norm_drift,
    build_orbit,
    field_from_function,
    induced_act,
    orbit_norm,
    reduce_covariant,
    smooth_bump_field,
)
from bmsfield.sphere import SphereFunction
from bmsfield.supermomenta import mass_squared, supermomentum_from_four_momentum
from bmsfield.whitenoise import DirectionSet, HermiteSeries

T4 = ((0, 0), (1, -1), (1, 0), (1, 1))
DIRS4 = DirectionSet(T4, k=2.0, L_max=4)
DIRS5 = DirectionSet(T4 + ((2, 0),), k=2.0, L_max=4)


def rng_(seed=0):
    return np.random.default_rng(seed)


def identity_g(L_max=4):
    return BMSElement(SL2C.identity(), SphereFunction(L_max))


def rotation_about_chart_pole(angle):
    # rotation fixing the third node component: exp(-i angle sigma_x / 2)
    half = 0.5 * angle
    s = -1j * math.sin(half)
    return SL2C(math.cos(half), s, s, math.cos(half))


# ------------------------------------------------------------ orbit construction


def test_degenerate_orbit_single_rest_node():
    orbit = build_orbit("massive", 1.0, 0.0, 8, 6)
    assert orbit.n_nodes == 1
    assert np.array_equal(orbit.nodes, [[1.0, 0.0, 0.0, 0.0]])
    assert np.array_equal(orbit.weights, [1.0])


def test_massive_nodes_on_shell_via_supermomenta():
    m = 1.7
    orbit = build_orbit("massive", m, 2.0, 6, 5)
    for node in orbit.nodes:
        beta = supermomentum_from_four_momentum(node, 4)
        assert abs(mass_squared(beta) - m**2) <= 1e-10
    assert orbit.mass_defect() <= 1e-12


def test_massless_nodes_null_and_log_spaced():
    scale = 1.3
    orbit = build_orbit("massless", scale, 2.0, 9, 5)
    for node in orbit.nodes[:: orbit.n_nodes // 37]:
        assert abs(mass_squared(supermomentum_from_four_momentum(node, 4))) <= 1e-12
    assert orbit.mass_defect() <= 1e-12
    energies = scale * np.exp(orbit.radial_values)
    ratios = energies[1:] / energies[:-1]
    assert np.allclose(ratios, ratios[0], rtol=1e-12)
    assert energies[0] == pytest.approx(scale * math.exp(-2.0))
    assert energies[-1] == pytest.approx(scale * math.exp(2.0))


def test_weight_totals_converge_to_invariant_volume():
    X = 1.5
    exact = 4.0 * math.pi * (math.sinh(2 * X) / 2.0 - X) / 2.0
    errs = []
    for n_chi, n_sphere in [(100, 20), (200, 40)]:
        orbit = build_orbit("massive", 1.0, X, n_chi, n_sphere)
        errs.append(abs(np.sum(orbit.weights) - exact) / exact)
    assert errs[0] <= 5e-3
    assert errs[1] <= 0.5 * errs[0]

    c = 0.8
    exact_null = 4.0 * math.pi * 2.0**2 * math.sinh(2 * c)
    orbit = build_orbit("massless", 2.0, c, 200, 40)
    assert abs(np.sum(orbit.weights) - exact_null) / exact_null <= 2e-3


def test_orbit_validation_errors():
    with pytest.raises(DomainError):
        build_orbit("tachyonic", 1.0, 1.0, 4, 4)
    with pytest.raises(DomainError):
        build_orbit("massive", 0.0, 1.0, 4, 4)
    with pytest.raises(DomainError):
        build_orbit("massive", 1.0, -0.5, 4, 4)
    with pytest.raises(DomainError):
        build_orbit("massless", 1.0, 0.0, 4, 4)
    with pytest.raises(DomainError):
        build_orbit("massive", 1.0, 1.0, 1, 4)
    with pytest.raises(DomainError):
        build_orbit("massive", 1.0, 1.0, 4, 2)


# ------------------------------------------------------------ norm


def test_orbit_norm_zero_field():
    orbit = build_orbit("massive", 1.0, 1.0, 4, 4)
    assert orbit_norm(InducedField(np.zeros(orbit.n_nodes)), orbit) == 0.0


def test_orbit_norm_indicator_sums_weights():
    orbit = build_orbit("massive", 1.0, 1.0, 5, 4)
    mask = np.arange(orbit.n_nodes) % 2 == 0
    phi = InducedField(mask.astype(float))
    assert orbit_norm(phi, orbit) == np.sum(np.where(mask, orbit.weights, 0.0))


# ------------------------------------------------------------ induced action


def test_identity_leaves_field_fixed():
    orbit = build_orbit("massive", 1.0, 1.5, 5, 5)
    phi = InducedField(rng_(1).standard_normal(orbit.n_nodes))
    out = induced_act(identity_g(), phi, orbit)
    assert np.array_equal(out.values, phi.values)


def test_proper_supertranslation_acts_trivially():
    # translation phase reads only the l <= 1 coefficients, which vanish here
    orbit = build_orbit("massive", 1.0, 1.5, 5, 5)
    phi = InducedField(rng_(2).standard_normal(orbit.n_nodes))
    coeffs = rng_(3).standard_normal(25)
    coeffs[:4] = 0.0
    g = BMSElement(SL2C.identity(), SphereFunction(4, coeffs))
    out = induced_act(g, phi, orbit)
    assert np.array_equal(out.values, phi.values)


def test_translation_phase_preserves_modulus_and_norm():
    orbit = build_orbit("massive", 1.0, 1.5, 5, 5)
    phi = InducedField(rng_(4).standard_normal(orbit.n_nodes))
    coeffs = np.zeros(25)
    coeffs[:4] = rng_(5).standard_normal(4)
    g = BMSElement(SL2C.identity(), SphereFunction(4, coeffs))
    out = induced_act(g, phi, orbit)
    assert np.iscomplexobj(out.values)
    assert np.max(np.abs(np.abs(out.values) - np.abs(phi.values))) <= 1e-14
    assert orbit_norm(out, orbit) == pytest.approx(orbit_norm(phi, orbit), rel=1e-13)
    assert np.max(np.abs(out.values.imag)) > 0.0


def test_rotation_about_chart_pole_rolls_phi_grid():
    # two azimuthal grid steps: an exact node permutation, no interpolation error
    orbit = build_orbit("massive", 1.0, 1.5, 5, 6)
    n_phi = len(orbit.phi_values)
    g = BMSElement(rotation_about_chart_pole(2 * (2 * math.pi / n_phi)), SphereFunction(2))

    def fn(p):
        return np.sin(p[:, 0]) + p[:, 1] * p[:, 2] + 0.3 * p[:, 3] ** 2

    phi = field_from_function(orbit, fn)
    out = induced_act(g, phi, orbit)
    v3 = np.asarray(phi.values).reshape(orbit.grid_shape)
    o3 = np.asarray(out.values).reshape(orbit.grid_shape)
    assert np.max(np.abs(o3 - np.roll(v3, 2, axis=2))) <= 1e-12
    assert orbit_norm(out, orbit) == pytest.approx(orbit_norm(phi, orbit), rel=1e-13)


def test_boost_escape_raises_and_lists_nodes():
    orbit = build_orbit("massive", 1.0, 1.0, 8, 5)
    phi = InducedField(np.ones(orbit.n_nodes))
    g = BMSElement(SL2C.boost_z(0.3), SphereFunction(2))
    with pytest.raises(CoverageError) as err:
        induced_act(g, phi, orbit)
    escaped = np.asarray(err.value.escaped)
    assert len(escaped) > 0
    # only nodes already near the rapidity rim can be pushed out by a 0.3 boost
    radial_index = escaped // (orbit.grid_shape[1] * orbit.grid_shape[2])
    assert np.all(radial_index >= orbit.grid_shape[0] // 2)
    # zero fill is refused for a field that is loud at the boundary
    with pytest.raises(CoverageError):
        induced_act(g, phi, orbit, escape="zero")


def test_boost_zero_fill_for_quiet_boundary():
    orbit = build_orbit("massive", 1.0, 2.8, 48, 9)
    phi = smooth_bump_field(orbit, 1.2, 0.28)
    g = BMSElement(SL2C.boost_z(0.2), SphereFunction(2))
    out = induced_act(g, phi, orbit, escape="zero")
    assert np.all(np.isfinite(out.values))
    assert orbit_norm(out, orbit) > 0.0


def test_boost_norm_drift_halves_under_refinement():
    drifts = boost_norm_drift(rapidity=0.2, n_chi=192, n_sphere=26, refine=1)
    assert drifts[0] <= 1e-3
    assert drifts[1] <= 0.5 * drifts[0]


# ------------------------------------------------------------ covariant reduction


def test_reduce_constant_is_gaussian():
    psi = HermiteSeries.unit(DIRS4, 3, (0, 0, 0, 0))
    rw = reduce_covariant(psi)
    pts = rng_(6).standard_normal((20, 4))
    assert np.allclose(rw.polynomial(pts), 1.0, atol=1e-14)
    expected = np.exp(-0.25 * np.sum(pts**2, axis=1))
    assert np.allclose(rw(pts), expected, atol=1e-14)


def test_reduce_he2_time_slot():
    psi = HermiteSeries.unit(DIRS4, 3, (2, 0, 0, 0))
    rw = reduce_covariant(psi)
    pts = rng_(7).standard_normal((30, 4))
    assert np.max(np.abs(rw.polynomial(pts) - (pts[:, 0] ** 2 - 1.0))) <= 1e-12
    single = rw.polynomial(np.array([2.0, 0.5, -0.3, 1.0]))
    assert single == pytest.approx(3.0, abs=1e-13)


def test_reduce_rejects_supertranslation_weight():
    psi = 0.5 * HermiteSeries.unit(DIRS5, 3, (1, 0, 0, 0, 0)) + 0.7 * HermiteSeries.unit(
        DIRS5, 3, (0, 0, 0, 0, 1)
    )
    with pytest.raises(ConstraintError) as err:
        reduce_covariant(psi)
    assert err.value.residual_norms[(2, 0)] == pytest.approx(0.7, abs=1e-13)


def test_reduce_weight_exponent_flag():
    psi = HermiteSeries.unit(DIRS4, 2, (1, 1, 0, 0))
    quarter = reduce_covariant(psi)
    full = reduce_covariant(psi, weight_exponent=1.0)
    pts = rng_(8).standard_normal((10, 4))
    ratio = full(pts) / quarter(pts)
    assert np.allclose(ratio, np.exp(-0.75 * np.sum(pts**2, axis=1)), rtol=1e-12)


def test_reduced_decay_bound():
    rng = rng_(9)
    psi = HermiteSeries(DIRS4, 4, rng.standard_normal(len(HermiteSeries.zero(DIRS4, 4).coeffs)))
    rw = reduce_covariant(psi)
    directions = rng.standard_normal((25, 4))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = np.linspace(0.0, 10.0, 120)
    pts = radii[:, None, None] * directions[None, :, :]
    values = np.abs(rw(pts))
    ratio = values * np.exp(0.125 * radii[:, None] ** 2)
    peak = np.unravel_index(np.argmax(ratio), ratio.shape)
    assert radii[peak[0]] < 8.0
    assert np.max(values[radii >= 10.0 - 1e-9]) <= 1e-6 * np.max(values)


def test_reduce_on_orbit_gives_field():
    psi = HermiteSeries.unit(DIRS4, 2, (0, 1, 0, 0))
    orbit = build_orbit("massive", 1.0, 1.0, 5, 4)
    field = reduce_covariant(psi).on_orbit(orbit)
    assert isinstance(field, InducedField)
    assert len(field) == orbit.n_nodes
    assert 0.0 < orbit_norm(field, orbit) < math.inf


def test_mass_shell_kg_symbol_vanishes_on_nodes():
    m = 2.0
    orbit = build_orbit("massive", m, 2.5, 7, 6)
    eta = np.array([1.0, -1.0, -1.0, -1.0])
    symbol = np.einsum("ij,j,ij->i", orbit.nodes, eta, orbit.nodes) - m**2
    assert np.max(np.abs(symbol)) <= 1e-10


# ------------------------------------------------------------ validation


def test_field_validation():
    with pytest.raises(ShapeError):
        InducedField(np.zeros((3, 2)))
    with pytest.raises(DomainError):
        InducedField(np.array([1.0, math.inf]))
    orbit = build_orbit("massive", 1.0, 1.0, 4, 4)
    with pytest.raises(ShapeError):
        field_from_function(orbit, lambda nodes: nodes[:, 0][:-1])
    with pytest.raises(ShapeError):
        orbit_norm(InducedField(np.zeros(3)), orbit)
    with pytest.raises(ShapeError):
        induced_act(identity_g(), InducedField(np.zeros(3)), orbit)
    with pytest.raises(DomainError):
        induced_act(identity_g(), InducedField(np.zeros(orbit.n_nodes)), orbit, escape="clamp")
