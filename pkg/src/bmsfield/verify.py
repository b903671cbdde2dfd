"""Deterministic check batteries behind the `verify` command.

Each suite exercises one module's invariants and returns measured defects
against named tolerances from the active Config.  Reports are reproducible:
the same (config, seed) pair gives byte-identical JSON, so runtimes live in
the table rendering only and defects are rounded to 12 significant digits
before serialization.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .bmsgroup import (
    BMSElement,
    calibrated_band,
    compose,
    conformal_factor,
    identity_element,
    inverse,
    mobius,
    random_calibrated,
    random_rotation,
    random_sl2c,
)
from .config import Config
from .dynamics import (
    FieldState,
    energy,
    euler_lagrange_gradient,
    fiber_derivative,
    hamiltonian,
    lagrangian_full,
    random_state,
    symplectic_gram,
    vainberg_symmetry_defect,
    wave_operator_matrix,
)
from .errors import ConfigError
from .induced import (
    boost_norm_drift,
    build_orbit,
    induced_act,
    orbit_norm,
    reduce_covariant,
    smooth_bump_field,
)
from .sphere import (
    SphereFunction,
    hs_norm_partial,
    nuclear_norm,
    sh_index,
    sh_pairs,
    split_T4_ST,
)
from .supermomenta import (
    Supermomentum,
    dual_act,
    mass_squared,
    momentum_act_matrix,
    orbit_fixed_point,
    project_T4,
    supermomentum_from_four_momentum,
)
from .whitenoise import (
    DirectionSet,
    HermiteSeries,
    adjoint_Dstar,
    chaos_basis,
    characteristic_functional,
    fourier_F,
    fourier_gauss,
    fourier_gauss_matrix,
    gamma_A_norm,
    gaussian_inner,
    gaussian_norm,
    gateaux_D,
    ladder_matrix,
    multiplication_matrix,
)

__all__ = [
    "CheckResult",
    "VerificationReport",
    "SUITE_ORDER",
    "run_suite",
]

SUITE_ORDER = ("cocycle", "casimir", "operators", "transforms", "variational", "induced")

_ETA = np.array([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class CheckResult:
    name: str
    tolerance_name: str
    tolerance: float
    defect: float
    bound: str  # "upper": defect <= tolerance, "lower": defect >= tolerance
    passed: bool
    runtime: float


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    seed: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def n_checks(self) -> int:
        return len(self.checks)

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "n_checks": self.n_checks,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "defect": float(f"{c.defect:.12g}"),
                    "tolerance": c.tolerance,
                    "tolerance_name": c.tolerance_name,
                    "bound": c.bound,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        lines = [
            f"suite {self.suite}  seed {self.seed}  "
            f"checks {self.n_checks}  {'PASS' if self.passed else 'FAIL'}"
        ]
        width = max((len(c.name) for c in self.checks), default=0)
        for c in self.checks:
            rel = "<=" if c.bound == "upper" else ">="
            lines.append(
                f"  {'pass' if c.passed else 'FAIL'}  {c.name:<{width}}  "
                f"defect {c.defect:.3e} {rel} {c.tolerance:.1e} "
                f"({c.tolerance_name})  {c.runtime:.2f}s"
            )
        return "\n".join(lines) + "\n"


class _Collector:
    """Accumulates check results; times each check since the previous one."""

    def __init__(self, config: Config):
        self.config = config
        self.results = []
        self._mark = time.perf_counter()

    def add(self, name, tolerance_name, defect, bound="upper"):
        if tolerance_name not in self.config.tolerances:
            raise ConfigError(f"check {name} references unknown tolerance {tolerance_name!r}")
        tol = float(self.config.tolerances[tolerance_name])
        defect = float(defect)
        passed = defect <= tol if bound == "upper" else defect >= tol
        now = time.perf_counter()
        self.results.append(
            CheckResult(name, tolerance_name, tol, defect, bound, passed, now - self._mark)
        )
        self._mark = now


def _suite_rng(config: Config, suite: str) -> np.random.Generator:
    idx = SUITE_ORDER.index(suite)
    return np.random.default_rng(np.random.SeedSequence(entropy=config.seed, spawn_key=(idx,)))


def _random_sphere_function(rng, L_max, scale=1.0) -> SphereFunction:
    return SphereFunction(L_max, scale * rng.standard_normal((L_max + 1) ** 2))


def _span_function(dirs: DirectionSet, weights) -> SphereFunction:
    coeffs = np.zeros((dirs.L_max + 1) ** 2)
    for (l, m), w in zip(dirs.directions, weights):
        coeffs[sh_index(l, m)] = w
    return SphereFunction(dirs.L_max, coeffs)


# ------------------------------------------------------------------- suites


def _suite_cocycle(config: Config, out: _Collector):
    rng = _suite_rng(config, "cocycle")
    L = config.L_max

    worst = 0.0
    for _ in range(200):
        lam1 = random_sl2c(rng)
        lam2 = random_sl2c(rng)
        zeta = complex(rng.standard_normal(), rng.standard_normal())
        lhs = conformal_factor(lam1, mobius(lam2, zeta)) * conformal_factor(lam2, zeta)
        rhs = conformal_factor(lam1 @ lam2, zeta)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    out.add("conformal_cocycle", "cocycle", worst)

    def rand_g():
        # band-limited supertranslations keep the acted tail inside the
        # truncation; full-band ones are aliasing-dominated at any L_max
        band = calibrated_band(L)
        coeffs = np.zeros((L + 1) ** 2)
        coeffs[: (band + 1) ** 2] = rng.standard_normal((band + 1) ** 2)
        return BMSElement(random_calibrated(rng, L_max=L), SphereFunction(L, coeffs))

    def g_defect(g1, g2):
        d_lam = np.max(np.abs(g1.lam.matrix - g2.lam.matrix))
        return max(d_lam, float(np.max(np.abs(g1.f.coeffs - g2.f.coeffs))))

    e = identity_element(L)
    worst = 0.0
    for _ in range(20):
        g = rand_g()
        worst = max(worst, g_defect(compose(g, e), g), g_defect(compose(e, g), g))
    out.add("group_identity", "group_law", worst)

    worst = 0.0
    for _ in range(20):
        g = rand_g()
        worst = max(worst, g_defect(compose(g, inverse(g)), e), g_defect(compose(inverse(g), g), e))
    out.add("group_inverse", "group_law", worst)

    worst = 0.0
    for _ in range(50):
        g1, g2, g3 = rand_g(), rand_g(), rand_g()
        worst = max(worst, g_defect(compose(compose(g1, g2), g3), compose(g1, compose(g2, g3))))
    out.add("group_associativity", "group_law", worst)


def _suite_casimir(config: Config, out: _Collector):
    rng = _suite_rng(config, "casimir")
    L = config.L_max
    sig = config.signature

    worst = 0.0
    for trial in range(150):
        beta = orbit_fixed_point("massive", 1.0 + (trial % 2), L)
        m2 = mass_squared(beta, sig)
        acted = dual_act(random_calibrated(rng, L_max=L), beta)
        worst = max(worst, abs(mass_squared(acted, sig) - m2))
    out.add("massive_boost_invariance", "casimir_massive", worst)

    worst = 0.0
    for trial in range(150):
        beta = orbit_fixed_point("massive", 1.0 + (trial % 2), L)
        m2 = mass_squared(beta, sig)
        acted = dual_act(random_rotation(rng), beta)
        worst = max(worst, abs(mass_squared(acted, sig) - m2))
    out.add("massive_rotation_invariance", "casimir_massive", worst)

    beta0 = orbit_fixed_point("massless", 1.0, L)
    worst = 0.0
    for trial in range(200):
        lam = random_rotation(rng) if trial % 2 else random_calibrated(rng, L_max=L)
        worst = max(worst, abs(mass_squared(dual_act(lam, beta0), sig)))
    out.add("massless_form_bound", "casimir_massless", worst)

    worst = 0.0
    for _ in range(50):
        p = rng.standard_normal(4)
        back = project_T4(supermomentum_from_four_momentum(p, L)).p
        worst = max(worst, float(np.max(np.abs(back - p))))
    out.add("slot_roundtrip", "slot_roundtrip", worst)

    eta = np.diag(_ETA)
    worst = 0.0
    for _ in range(50):
        mat = momentum_act_matrix(random_sl2c(rng))
        worst = max(worst, float(np.max(np.abs(mat.T @ eta @ mat - eta))))
    out.add("transport_metric", "momentum_transport", worst)

    worst = 0.0
    for _ in range(10):
        lam = random_calibrated(rng, L_max=L)
        beta = Supermomentum(L, rng.standard_normal((L + 1) ** 2))
        direct = project_T4(dual_act(lam, beta)).p
        moved = momentum_act_matrix(lam) @ project_T4(beta).p
        worst = max(worst, float(np.max(np.abs(direct - moved))))
    out.add("transport_matches_dual_action", "momentum_transport", worst)


def _suite_operators(config: Config, out: _Collector):
    rng = _suite_rng(config, "operators")
    L, k = config.L_max, config.k
    dirs = DirectionSet(config.directions, k, L)
    K = len(dirs)
    cap = config.N

    worst = 0.0
    for _ in range(100):
        f = _random_sphere_function(rng, L)
        norms = [nuclear_norm(f, p, k) for p in range(5)]
        worst = max(worst, max(a - b for a, b in zip(norms, norms[1:])))
    out.add("norm_chain_monotone", "norm_chain", max(worst, 0.0))

    direct = math.fsum(
        (l * (l + 1) + k) ** (-2.0) for l in range(201) for _ in range(2 * l + 1)
    )
    out.add("hs_partial_oracle", "hs_oracle", abs(hs_norm_partial(k, 2.0, 200) - direct))

    out.add(
        "hs_cauchy_tail",
        "hs_cauchy",
        hs_norm_partial(k, 2.0, 2000) - hs_norm_partial(k, 2.0, 1999),
    )

    worst = 0.0
    for _ in range(100):
        f = _random_sphere_function(rng, L)
        low, high = split_T4_ST(f)
        worst = max(
            worst,
            abs(float(np.dot(low.coeffs, high.coeffs))),
            float(np.max(np.abs(low.coeffs + high.coeffs - f.coeffs))),
        )
    out.add("split_orthogonality", "split_orthogonality", worst)

    n_low = len(chaos_basis(K, cap - 1))
    worst = 0.0
    for i in range(K):
        q = ladder_matrix(K, cap, i, "Q").toarray()
        d = ladder_matrix(K, cap, i, "D").toarray()
        ds = ladder_matrix(K, cap, i, "Dstar").toarray()
        worst = max(worst, float(np.max(np.abs((q - d - ds)[:, :n_low]))))
    out.add("ladder_split", "ladder_identity", worst)

    size = len(chaos_basis(K, cap))
    alpha = _span_function(dirs, rng.standard_normal(K))
    psi = HermiteSeries(dirs, cap, rng.standard_normal(size)).truncate(cap - 1).embed(cap)
    phi = HermiteSeries(dirs, cap, rng.standard_normal(size))
    lhs = gaussian_inner(adjoint_Dstar(alpha, psi), phi)
    rhs = gaussian_inner(psi, gateaux_D(alpha, phi))
    out.add("ladder_adjoint", "ladder_identity", abs(lhs - rhs) / max(1.0, abs(rhs)))

    he1 = HermiteSeries.unit(dirs, cap, (1,) + (0,) * (K - 1))
    q0 = ladder_matrix(K, cap, 0, "Q").toarray()
    out.add(
        "mult_he1_matches_q",
        "mult_symbol",
        float(np.max(np.abs(multiplication_matrix(he1).toarray() - q0))),
    )

    worst = 0.0
    L_mc = min(L, 3)
    for j in range(10):
        alpha = _random_sphere_function(rng, L_mc, scale=0.3)
        exact, estimate = characteristic_functional(
            alpha, 1_000_000, seed=config.seed * 100 + j
        )
        worst = max(worst, abs(estimate - exact))
    out.add("minlos_monte_carlo", "minlos_mc", worst)


def _suite_transforms(config: Config, out: _Collector):
    rng = _suite_rng(config, "transforms")
    L, k = config.L_max, config.k
    t4 = DirectionSet(config.directions[:4], k, L)
    dirs = DirectionSet(config.directions, k, L)
    K = len(dirs)

    # momentum-side transform intertwines the two ladder families
    out_cap = min(config.N + 2, 6)
    in_cap = out_cap - 2
    work_cap = in_cap + 1
    ext_cap = out_cap + 1
    gamma = rng.standard_normal(4)
    work_basis = chaos_basis(4, work_cap)
    n_work = len(work_basis)
    n_in = len(chaos_basis(4, in_cap))
    f_cols = np.zeros((len(chaos_basis(4, ext_cap)), n_work), dtype=complex)
    for j in range(n_work):
        f_cols[:, j] = fourier_F(
            HermiteSeries.unit(t4, work_cap, tuple(work_basis.exponents[j])), ext_cap
        ).coeffs

    def ladder_sum(cap, kind):
        acc = sum(
            g * ladder_matrix(4, cap, i, kind).toarray() for i, g in enumerate(gamma)
        )
        return acc

    rows = len(chaos_basis(4, out_cap))
    d_work, q_work = ladder_sum(work_cap, "D"), ladder_sum(work_cap, "Q")
    d_ext, q_ext = ladder_sum(ext_cap, "D"), ladder_sum(ext_cap, "Q")
    defect_d = np.max(
        np.abs((f_cols @ d_work[:, :n_in])[:rows] - (1j * q_ext @ f_cols[:, :n_in])[:rows])
    )
    defect_q = np.max(
        np.abs((f_cols @ q_work[:, :n_in])[:rows] - (1j * d_ext @ f_cols[:, :n_in])[:rows])
    )
    out.add("fourier_d_intertwine", "fourier_intertwine", defect_d)
    out.add("fourier_q_intertwine", "fourier_intertwine", defect_q)

    cap = min(config.N, 4)
    worst = 0.0
    for n in range(min(cap, 4) + 1):
        he_n = HermiteSeries.unit(dirs, cap, (n,) + (0,) * (K - 1))
        g = fourier_gauss(math.sqrt(2.0), 1j, he_n)
        worst = max(worst, float(np.max(np.abs(g.coeffs - (1j**n) * he_n.coeffs))))
    out.add("fg_eigen_powers_of_i", "fg_eigen", worst)

    size = len(chaos_basis(K, cap))
    psi = HermiteSeries(dirs, cap, rng.standard_normal(size) + 1j * rng.standard_normal(size))
    back = fourier_gauss(math.sqrt(2.0), -1j, fourier_gauss(math.sqrt(2.0), 1j, psi))
    out.add("fg_inverse_pair", "fg_inverse", float(np.max(np.abs(back.coeffs - psi.coeffs))))

    g_psi = fourier_gauss(math.sqrt(2.0), 1j, psi)
    defect = max(
        abs(gaussian_norm(g_psi) - gaussian_norm(psi)),
        abs(gamma_A_norm(g_psi, 1) - gamma_A_norm(psi, 1)),
    )
    out.add("fg_norm_preservation", "fg_norm", defect)

    n_low = len(chaos_basis(K, cap - 1))
    worst_uno = 0.0
    worst_due = 0.0
    for a, b in ((math.sqrt(2.0), 1j), (1.3, 0.7)):
        g = fourier_gauss_matrix(dirs, cap, a, b).toarray()
        for i in (0, K - 1):
            d = ladder_matrix(K, cap, i, "D").toarray()
            q = ladder_matrix(K, cap, i, "Q").toarray()
            worst_uno = max(
                worst_uno, float(np.max(np.abs((g @ d - (1.0 / b) * d @ g)[:, :n_low])))
            )
            worst_due = max(
                worst_due,
                float(np.max(np.abs((g @ q - (a * a / b) * d @ g - b * q @ g)[:, :n_low]))),
            )
    out.add("fg_uno_intertwine", "fg_intertwine", worst_uno)
    out.add("fg_due_intertwine", "fg_intertwine", worst_due)

    basis = chaos_basis(K, cap)
    cols = np.nonzero(basis.degrees <= cap - 2)[0]
    qq = wave_operator_matrix(dirs, cap, "Q", config.signature).matrix
    qd = wave_operator_matrix(dirs, cap, "qd", config.signature).matrix
    worst = 0.0
    for b in (1j, -1j):
        g = fourier_gauss_matrix(dirs, cap, math.sqrt(2.0), b).toarray()
        worst = max(worst, float(np.max(np.abs((g @ qq + qd @ g)[:, cols]))))
    out.add("wave_conjugation", "wave_conjugation", worst)


def _suite_variational(config: Config, out: _Collector):
    rng = _suite_rng(config, "variational")
    dirs = DirectionSet(config.directions, config.k, config.L_max)
    K = len(dirs)
    sig = config.signature
    cap = min(config.N, 3)
    m2 = 0.45

    worst = 0.0
    h = 1e-5
    alpha0 = dirs.direction_function(0)
    basis = chaos_basis(K, cap)
    w = basis.weights
    for _ in range(5):
        state = random_state(dirs, cap, rng)
        grad = euler_lagrange_gradient(state, m2, signature=sig)
        for idx in rng.choice(len(basis), size=8, replace=False):
            bump = HermiteSeries.unit(dirs, cap, tuple(basis.exponents[idx]))
            dv = gateaux_D(alpha0, bump)
            plus = FieldState(state.psi + h * bump, state.v + h * dv, state.lambdas, state.lambda_vs)
            minus = FieldState(state.psi - h * bump, state.v - h * dv, state.lambdas, state.lambda_vs)
            fd = (lagrangian_full(plus, m2, sig) - lagrangian_full(minus, m2, sig)) / (2 * h)
            analytic = grad.coeffs[idx] * w[idx]
            worst = max(worst, abs(fd - analytic) / max(1.0, abs(analytic)))
    out.add("el_gradient_fd", "el_gradient", worst)

    sym_cap = min(config.N, 4)
    out.add(
        "qd_square_symmetric",
        "qd_symmetry",
        vainberg_symmetry_defect(wave_operator_matrix(dirs, sym_cap, "qd", sig)),
    )
    out.add(
        "dd_square_asymmetry",
        "dd_asymmetry_floor",
        vainberg_symmetry_defect(wave_operator_matrix(dirs, sym_cap, "D", sig)),
        bound="lower",
    )

    worst = 0.0
    for _ in range(5):
        state = random_state(dirs, cap, rng)
        worst = max(worst, abs(hamiltonian(fiber_derivative(state), m2, sig) - energy(state, m2, sig)))
    out.add("legendre_identity", "legendre", worst)

    worst = 0.0
    n = len(basis)
    for _ in range(5):
        state = random_state(dirs, cap, rng)
        base = energy(state, m2, sig)
        bumped = FieldState(
            state.psi,
            state.v,
            state.lambdas,
            tuple(HermiteSeries(dirs, cap, rng.standard_normal(n)) for _ in state.lambda_vs),
        )
        worst = max(worst, abs(energy(bumped, m2, sig) - base))
    out.add("energy_fiber_invariance", "fiber_invariance", worst)

    deficiency = 0
    for c in (1, 2, min(config.N, 3)):
        gram = symplectic_gram(dirs, c)
        deficiency += gram.shape[0] - np.linalg.matrix_rank(gram)
    out.add("symplectic_full_rank", "symplectic_rank", float(deficiency))

    # a monomial lives on the coordinate slots iff every supertranslation
    # derivative kills it; checked column by column on the derivative matrices
    eq_cap = min(config.N, 4)
    eq_basis = chaos_basis(K, eq_cap)
    lhs = (eq_basis.exponents[:, list(dirs.st_indices)] == 0).all(axis=1)
    rhs = np.ones(len(eq_basis), dtype=bool)
    for i in dirs.st_indices:
        col_norm = np.abs(ladder_matrix(K, eq_cap, i, "D").toarray()).sum(axis=0)
        rhs &= col_norm == 0.0
    out.add("support_equivalence", "support_equivalence", float(np.sum(lhs != rhs)))


def _suite_induced(config: Config, out: _Collector):
    rng = _suite_rng(config, "induced")
    L = config.L_max

    orbit = build_orbit("massive", 1.0, 2.8, 96, 13)
    out.add("orbit_on_shell_massive", "orbit_mass", orbit.mass_defect())
    out.add(
        "orbit_on_shell_massless",
        "orbit_mass",
        build_orbit("massless", 1.0, 2.8, 96, 13).mass_defect(),
    )

    phi = smooth_bump_field(orbit, 1.2, 0.28)
    st_coeffs = np.zeros((L + 1) ** 2)
    st_coeffs[sh_index(2, 1)] = 0.8
    st_coeffs[sh_index(2, 0)] = -0.5
    g_st = BMSElement(identity_element(L).lam, SphereFunction(L, st_coeffs))
    acted = induced_act(g_st, phi, orbit)
    out.add(
        "st_phase_bitwise",
        "induced_exact",
        float(np.max(np.abs(acted.values - phi.values))),
    )

    tr_coeffs = np.zeros((L + 1) ** 2)
    tr_coeffs[:4] = rng.standard_normal(4)
    g_tr = BMSElement(identity_element(L).lam, SphereFunction(L, tr_coeffs))
    moved = induced_act(g_tr, phi, orbit)
    base = orbit_norm(phi, orbit)
    out.add(
        "translation_norm",
        "induced_phase_norm",
        abs(orbit_norm(moved, orbit) - base) / base,
    )

    drifts = boost_norm_drift(
        rapidity=0.2, chi_max=2.8, n_chi=192, n_sphere=26, refine=1, L_max=L
    )
    out.add("boost_norm_drift", "induced_unitarity", drifts[0])
    out.add("boost_drift_halving", "induced_halving", drifts[1] / drifts[0])

    m = 2.0
    orbit2 = build_orbit("massive", m, 2.8, 48, 9)
    symbol = np.einsum("ij,j,ij->i", orbit2.nodes, _ETA, orbit2.nodes) - m * m
    bump = smooth_bump_field(orbit2, 1.0, 0.3)
    out.add(
        "kg_symbol_on_nodes",
        "induced_kg",
        float(np.max(np.abs(symbol * bump.values))) / float(np.max(np.abs(bump.values))),
    )

    dirs = DirectionSet(config.directions, config.k, L)
    K = len(dirs)
    psi = 0.6 * HermiteSeries.unit(dirs, 3, (2,) + (0,) * (K - 1)) + 1.1 * HermiteSeries.unit(
        dirs, 3, (0, 1) + (0,) * (K - 2)
    )
    reduced = reduce_covariant(psi)
    points = rng.standard_normal((40, 4))
    direct = 0.6 * (points[:, 0] ** 2 - 1.0) + 1.1 * points[:, 1]
    out.add(
        "reduce_he2_eval",
        "reduce_eval",
        float(np.max(np.abs(reduced.polynomial(points) - direct))),
    )


_SUITES = {
    "cocycle": _suite_cocycle,
    "casimir": _suite_casimir,
    "operators": _suite_operators,
    "transforms": _suite_transforms,
    "variational": _suite_variational,
    "induced": _suite_induced,
}


def run_suite(name: str, config: Config | None = None) -> VerificationReport:
    """Run one named battery (or `all`) and return its report."""
    if config is None:
        config = Config()
    if name != "all" and name not in _SUITES:
        raise ConfigError(
            f"unknown suite {name!r}; choose from {', '.join(SUITE_ORDER)} or all"
        )
    out = _Collector(config)
    for suite in SUITE_ORDER if name == "all" else (name,):
        _SUITES[suite](config, out)
    return VerificationReport(name, config.seed, tuple(out.results))
