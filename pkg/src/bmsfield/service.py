"""HTTP face of the package.

Pydantic models cover the transport shape; the domain documents inside them
are validated by the serialization layer, so the JSON schemas have a single
source of truth.  Build an app with create_app(config) or serve the module
attribute `app`, which reads the environment config override.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from . import serialization as ser
from .bmsgroup import (
    act_on_scri,
    compose as compose_elements,
    conformal_factor,
    identity_element,
    is_infinity,
    mobius,
    random_calibrated,
    random_rotation,
    random_sl2c,
)
from .config import Config, load_config
from .dynamics import (
    FieldState,
    energy,
    euler_lagrange_gradient,
    fiber_derivative,
    hamiltonian,
    lagrangian_full,
    random_state,
    symplectic_gram,
)
from .errors import BmsFieldError, ConfigError, DomainError, SchemaError
from .induced import boost_norm_drift, build_orbit, induced_act
from .supermomenta import dual_act, mass_squared, orbit_fixed_point, project_T4
from .verify import SUITE_ORDER, run_suite
from .whitenoise import (
    DirectionSet,
    HermiteSeries,
    adjoint_Dstar,
    chaos_basis,
    fourier_F,
    fourier_gauss,
    fourier_gauss_matrix,
    gateaux_D,
    ladder_matrix,
    multiply_Q,
    project_Pi_V,
    s_transform,
)


class HealthResponse(BaseModel):
    status: str
    package: str
    version: str


class ComposeRequest(BaseModel):
    g1: dict
    g2: dict


class ElementResponse(BaseModel):
    g: dict


class ActRequest(BaseModel):
    g: dict
    u: float
    zeta: tuple[float, float]


class ActResponse(BaseModel):
    u: float
    zeta: tuple[float, float] | None
    infinite: bool


class TrialsRequest(BaseModel):
    trials: int = 200
    seed: int | None = None


class CheckResponse(BaseModel):
    name: str
    defect: float
    tolerance: float
    tolerance_name: str
    passed: bool


class CasimirRequest(BaseModel):
    beta: dict


class CasimirResponse(BaseModel):
    mass_squared: float
    four_momentum: tuple[float, float, float, float]


class InvarianceRequest(BaseModel):
    kind: str = "massive"
    value: float = 1.0
    trials: int = 100
    seed: int | None = None


class OpRequest(BaseModel):
    op: str
    psi: dict
    alpha: dict | None = None
    a: float | None = None
    b: tuple[float, float] | None = None
    out_cap: int | None = None
    mode: str | None = None


class OpResponse(BaseModel):
    psi: dict | None = None
    terms: list | None = None


class IdentityCheckRequest(BaseModel):
    which: str


class StateRequest(BaseModel):
    state: dict
    m2: float = 0.0


class ValueResponse(BaseModel):
    value: float


class EnergyResponse(BaseModel):
    hamiltonian: float
    energy: float
    defect: float


class GradientCheckRequest(BaseModel):
    m2: float = 0.45
    picks: int = 10
    seed: int | None = None


class RankRequest(BaseModel):
    cap: int = 2


class RankResponse(BaseModel):
    size: int
    rank: int
    full_rank: bool


class OrbitRequest(BaseModel):
    kind: str
    scale: float = 1.0
    chi_max: float = 2.0
    n_chi: int = 48
    n_sphere: int = 9


class OrbitResponse(BaseModel):
    orbit: dict
    n_nodes: int
    mass_defect: float


class InducedActRequest(BaseModel):
    g: dict
    phi: dict
    escape: str = "error"


class UnitarityRequest(BaseModel):
    rapidity: float = 0.2
    chi_max: float = 2.8
    n_chi: int = 96
    n_sphere: int = 13
    refine: int = 1


class UnitarityResponse(BaseModel):
    drifts: list[float]
    tolerance: float
    tolerance_name: str
    passed: bool


class ReportResponse(BaseModel):
    report: dict
    runtimes: dict


class RoundtripRequest(BaseModel):
    document: dict


class RoundtripResponse(BaseModel):
    schema_name: str
    ok: bool


def _series_at(psi: HermiteSeries, L: int) -> HermiteSeries:
    if psi.dirs.L_max == L:
        return psi
    return HermiteSeries(DirectionSet(psi.dirs.directions, psi.dirs.k, L), psi.cap, psi.coeffs)


def _sphere_at(f, L: int):
    if f.L_max == L:
        return f
    from .sphere import SphereFunction

    padded = np.zeros((L + 1) ** 2)
    padded[: f.coeffs.shape[0]] = f.coeffs
    return SphereFunction(L, padded)


def _check(cfg: Config, name: str, defect: float, tolerance_name: str) -> CheckResponse:
    tol = float(cfg.tolerances[tolerance_name])
    return CheckResponse(
        name=name,
        defect=float(defect),
        tolerance=tol,
        tolerance_name=tolerance_name,
        passed=float(defect) <= tol,
    )


def _rng(cfg: Config, seed) -> np.random.Generator:
    return np.random.default_rng(cfg.seed if seed is None else seed)


def create_app(config: Config | None = None) -> FastAPI:
    cfg = Config() if config is None else config
    app = FastAPI(title="bmsfield", version=__version__)

    @app.exception_handler(BmsFieldError)
    def _domain_error(request, exc):
        status = 422 if isinstance(exc, SchemaError) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", package="bmsfield", version=__version__)

    @app.get("/config")
    def get_config():
        return cfg.to_json_dict()

    # ----------------------------------------------------------- bms group

    @app.post("/bms/compose", response_model=ElementResponse)
    def bms_compose(req: ComposeRequest):
        g1 = ser.parse_bms_element(req.g1)
        g2 = ser.parse_bms_element(req.g2)
        return ElementResponse(g=ser.dump_bms_element(compose_elements(g1, g2)))

    @app.post("/bms/act", response_model=ActResponse)
    def bms_act(req: ActRequest):
        g = ser.parse_bms_element(req.g)
        u2, z2 = act_on_scri(g, (req.u, complex(req.zeta[0], req.zeta[1])))
        if is_infinity(z2):
            return ActResponse(u=u2, zeta=None, infinite=True)
        return ActResponse(u=u2, zeta=(z2.real, z2.imag), infinite=False)

    @app.post("/bms/cocycle-check", response_model=CheckResponse)
    def bms_cocycle_check(req: TrialsRequest):
        rng = _rng(cfg, req.seed)
        worst = 0.0
        for _ in range(req.trials):
            lam1, lam2 = random_sl2c(rng), random_sl2c(rng)
            zeta = complex(rng.standard_normal(), rng.standard_normal())
            lhs = conformal_factor(lam1, mobius(lam2, zeta)) * conformal_factor(lam2, zeta)
            rhs = conformal_factor(lam1 @ lam2, zeta)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        return _check(cfg, "conformal_cocycle", worst, "cocycle")

    # ---------------------------------------------------------- supermomenta

    @app.post("/momenta/casimir", response_model=CasimirResponse)
    def momenta_casimir(req: CasimirRequest):
        beta = ser.parse_supermomentum(req.beta)
        p = project_T4(beta).p
        return CasimirResponse(
            mass_squared=mass_squared(beta, cfg.signature),
            four_momentum=tuple(float(x) for x in p),
        )

    @app.post("/momenta/invariance-check", response_model=CheckResponse)
    def momenta_invariance_check(req: InvarianceRequest):
        if req.kind not in ("massive", "massless"):
            raise DomainError(f"kind must be massive or massless, got {req.kind!r}")
        rng = _rng(cfg, req.seed)
        beta = orbit_fixed_point(req.kind, req.value, cfg.L_max)
        target = mass_squared(beta, cfg.signature)
        worst = 0.0
        for trial in range(req.trials):
            lam = (
                random_rotation(rng)
                if trial % 2
                else random_calibrated(rng, L_max=cfg.L_max)
            )
            worst = max(
                worst, abs(mass_squared(dual_act(lam, beta), cfg.signature) - target)
            )
        tolerance_name = "casimir_massive" if req.kind == "massive" else "casimir_massless"
        return _check(cfg, f"{req.kind}_invariance", worst, tolerance_name)

    # ----------------------------------------------------------- white noise

    @app.post("/wn/op", response_model=OpResponse)
    def wn_op(req: OpRequest):
        psi = ser.parse_hermite_series(req.psi)
        if req.op in ("Q", "D", "Dstar"):
            if req.alpha is None:
                raise DomainError(f"op {req.op} needs a direction function alpha")
            alpha = ser.parse_sphere_function(req.alpha)
            # Parsed series infer their truncation from the direction labels,
            # so both operands get lifted to a shared L_max before pairing.
            L = max(cfg.L_max, psi.dirs.L_max, alpha.L_max)
            psi = _series_at(psi, L)
            alpha = _sphere_at(alpha, L)
            mode = req.mode if req.mode is not None else cfg.cap_mode
            if req.op == "Q":
                out = multiply_Q(alpha, psi, mode=mode)
            elif req.op == "D":
                out = gateaux_D(alpha, psi)
            else:
                out = adjoint_Dstar(alpha, psi, mode=mode)
            return OpResponse(psi=ser.dump_hermite_series(out))
        if req.op == "PiV":
            out = project_Pi_V(psi, psi.dirs.t4_indices)
            return OpResponse(psi=ser.dump_hermite_series(out))
        if req.op == "S":
            poly = s_transform(psi)
            exps = poly.basis.exponents
            terms = [
                [[int(n) for n in exps[i]], float(np.real(c)), float(np.imag(c))]
                for i, c in enumerate(poly.coeffs)
                if c != 0
            ]
            return OpResponse(terms=terms)
        if req.op == "F":
            out_cap = psi.cap + 2 if req.out_cap is None else req.out_cap
            return OpResponse(psi=ser.dump_hermite_series(fourier_F(psi, out_cap)))
        if req.op == "FG":
            if req.a is None or req.b is None:
                raise DomainError("op FG needs parameters a and b")
            out = fourier_gauss(req.a, complex(req.b[0], req.b[1]), psi)
            return OpResponse(psi=ser.dump_hermite_series(out))
        raise DomainError(f"unknown op {req.op!r}; choose Q, D, Dstar, PiV, S, F or FG")

    @app.post("/wn/identity-check", response_model=CheckResponse)
    def wn_identity_check(req: IdentityCheckRequest):
        dirs = DirectionSet(cfg.directions, cfg.k, cfg.L_max)
        K = len(dirs)
        cap = min(cfg.N, 4)
        n_low = len(chaos_basis(K, cap - 1))
        if req.which == "DQ":
            worst = 0.0
            for i in range(K):
                q = ladder_matrix(K, cap, i, "Q").toarray()
                d = ladder_matrix(K, cap, i, "D").toarray()
                ds = ladder_matrix(K, cap, i, "Dstar").toarray()
                worst = max(worst, float(np.max(np.abs((q - d - ds)[:, :n_low]))))
            return _check(cfg, "ladder_split", worst, "ladder_identity")
        if req.which in ("uno", "due"):
            worst = 0.0
            for a, b in ((math.sqrt(2.0), 1j), (1.3, 0.7)):
                g = fourier_gauss_matrix(dirs, cap, a, b).toarray()
                for i in (0, K - 1):
                    d = ladder_matrix(K, cap, i, "D").toarray()
                    q = ladder_matrix(K, cap, i, "Q").toarray()
                    if req.which == "uno":
                        defect = np.abs((g @ d - (1.0 / b) * d @ g)[:, :n_low])
                    else:
                        defect = np.abs(
                            (g @ q - (a * a / b) * d @ g - b * q @ g)[:, :n_low]
                        )
                    worst = max(worst, float(np.max(defect)))
            return _check(cfg, f"fg_{req.which}_intertwine", worst, "fg_intertwine")
        if req.which == "multdiff":
            t4 = DirectionSet(cfg.directions[:4], cfg.k, cfg.L_max)
            out_cap = min(cfg.N + 2, 6)
            in_cap = out_cap - 2
            work_cap = in_cap + 1
            ext_cap = out_cap + 1
            work_basis = chaos_basis(4, work_cap)
            n_in = len(chaos_basis(4, in_cap))
            f_cols = np.zeros(
                (len(chaos_basis(4, ext_cap)), len(work_basis)), dtype=complex
            )
            for j in range(len(work_basis)):
                f_cols[:, j] = fourier_F(
                    HermiteSeries.unit(t4, work_cap, tuple(work_basis.exponents[j])),
                    ext_cap,
                ).coeffs
            rows = len(chaos_basis(4, out_cap))
            worst = 0.0
            for kind_in, kind_out in (("D", "Q"), ("Q", "D")):
                m_in = ladder_matrix(4, work_cap, 0, kind_in).toarray()
                m_out = ladder_matrix(4, ext_cap, 0, kind_out).toarray()
                lhs = (f_cols @ m_in[:, :n_in])[:rows]
                rhs = (1j * m_out @ f_cols[:, :n_in])[:rows]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
            return _check(cfg, "fourier_intertwine", worst, "fourier_intertwine")
        if req.which == "fg-inverse":
            rng = _rng(cfg, None)
            size = len(chaos_basis(K, cap))
            psi = HermiteSeries(
                dirs, cap, rng.standard_normal(size) + 1j * rng.standard_normal(size)
            )
            back = fourier_gauss(math.sqrt(2.0), -1j, fourier_gauss(math.sqrt(2.0), 1j, psi))
            defect = float(np.max(np.abs(back.coeffs - psi.coeffs)))
            return _check(cfg, "fg_inverse_pair", defect, "fg_inverse")
        raise DomainError(
            f"unknown identity {req.which!r}; choose DQ, uno, due, multdiff or fg-inverse"
        )

    # -------------------------------------------------------------- dynamics

    @app.post("/dyn/lagrangian", response_model=ValueResponse)
    def dyn_lagrangian(req: StateRequest):
        state = ser.parse_field_state(req.state)
        return ValueResponse(value=lagrangian_full(state, req.m2, cfg.signature))

    @app.post("/dyn/hamiltonian", response_model=EnergyResponse)
    def dyn_hamiltonian(req: StateRequest):
        state = ser.parse_field_state(req.state)
        h = hamiltonian(fiber_derivative(state), req.m2, cfg.signature)
        e = energy(state, req.m2, cfg.signature)
        return EnergyResponse(hamiltonian=h, energy=e, defect=abs(h - e))

    @app.post("/dyn/gradient-check", response_model=CheckResponse)
    def dyn_gradient_check(req: GradientCheckRequest):
        rng = _rng(cfg, req.seed)
        dirs = DirectionSet(cfg.directions, cfg.k, cfg.L_max)
        cap = min(cfg.N, 3)
        basis = chaos_basis(len(dirs), cap)
        state = random_state(dirs, cap, rng)
        grad = euler_lagrange_gradient(state, req.m2, signature=cfg.signature)
        alpha0 = dirs.direction_function(0)
        h = 1e-5
        worst = 0.0
        for idx in rng.choice(len(basis), size=min(req.picks, len(basis)), replace=False):
            bump = HermiteSeries.unit(dirs, cap, tuple(basis.exponents[idx]))
            dv = gateaux_D(alpha0, bump)
            plus = FieldState(
                state.psi + h * bump, state.v + h * dv, state.lambdas, state.lambda_vs
            )
            minus = FieldState(
                state.psi - h * bump, state.v - h * dv, state.lambdas, state.lambda_vs
            )
            fd = (
                lagrangian_full(plus, req.m2, cfg.signature)
                - lagrangian_full(minus, req.m2, cfg.signature)
            ) / (2 * h)
            analytic = grad.coeffs[idx] * basis.weights[idx]
            worst = max(worst, abs(fd - analytic) / max(1.0, abs(analytic)))
        return _check(cfg, "el_gradient_fd", worst, "el_gradient")

    @app.post("/dyn/legendre-check", response_model=CheckResponse)
    def dyn_legendre_check(req: GradientCheckRequest):
        rng = _rng(cfg, req.seed)
        dirs = DirectionSet(cfg.directions, cfg.k, cfg.L_max)
        state = random_state(dirs, min(cfg.N, 3), rng)
        defect = abs(
            hamiltonian(fiber_derivative(state), req.m2, cfg.signature)
            - energy(state, req.m2, cfg.signature)
        )
        return _check(cfg, "legendre_identity", defect, "legendre")

    @app.post("/dyn/symplectic-rank", response_model=RankResponse)
    def dyn_symplectic_rank(req: RankRequest):
        if req.cap < 0:
            raise DomainError(f"cap must be nonnegative, got {req.cap}")
        dirs = DirectionSet(cfg.directions, cfg.k, cfg.L_max)
        gram = symplectic_gram(dirs, req.cap)
        rank = int(np.linalg.matrix_rank(gram))
        return RankResponse(size=gram.shape[0], rank=rank, full_rank=rank == gram.shape[0])

    # --------------------------------------------------------------- induced

    @app.post("/induced/build-orbit", response_model=OrbitResponse)
    def induced_build_orbit(req: OrbitRequest):
        orbit = build_orbit(req.kind, req.scale, req.chi_max, req.n_chi, req.n_sphere)
        return OrbitResponse(
            orbit=ser.dump_orbit(orbit),
            n_nodes=orbit.n_nodes,
            mass_defect=orbit.mass_defect(),
        )

    @app.post("/induced/act", response_model=dict)
    def induced_act_endpoint(req: InducedActRequest):
        g = ser.parse_bms_element(req.g)
        phi, orbit = ser.parse_induced_field(req.phi)
        moved = induced_act(g, phi, orbit, escape=req.escape)
        return ser.dump_induced_field(moved, orbit)

    @app.post("/induced/unitarity-check", response_model=UnitarityResponse)
    def induced_unitarity_check(req: UnitarityRequest):
        drifts = boost_norm_drift(
            rapidity=req.rapidity,
            chi_max=req.chi_max,
            n_chi=req.n_chi,
            n_sphere=req.n_sphere,
            refine=req.refine,
            L_max=cfg.L_max,
        )
        tol = float(cfg.tolerances["induced_unitarity"])
        return UnitarityResponse(
            drifts=[float(d) for d in drifts],
            tolerance=tol,
            tolerance_name="induced_unitarity",
            passed=drifts[0] <= tol,
        )

    # ---------------------------------------------------------------- verify

    @app.get("/verify/suites")
    def verify_suites():
        return {"suites": list(SUITE_ORDER) + ["all"]}

    @app.post("/verify/roundtrip", response_model=RoundtripResponse)
    def verify_roundtrip(req: RoundtripRequest):
        kind, value = ser.parse_any(req.document)
        redumped = ser.dump_any(kind, value)
        _, again = ser.parse_any(redumped)
        if not ser.values_equal(kind, value, again):
            raise SchemaError(f"$: reparse changed values for schema {kind}")
        return RoundtripResponse(schema_name=kind, ok=True)

    @app.post("/verify/{suite}", response_model=ReportResponse)
    def verify_suite(suite: str):
        report = run_suite(suite, cfg)
        return ReportResponse(
            report=report.to_json_dict(),
            runtimes={c.name: c.runtime for c in report.checks},
        )

    return app


def default_app() -> FastAPI:
    """App wired from the environment config override (or defaults)."""
    return create_app(load_config())


app = default_app()
