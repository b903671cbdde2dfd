"""Command line front end.

Every command is a thin client of the HTTP service: by default the app runs
in process, `--server URL` points at a remote one instead.  Exit codes:
0 all checks pass, 1 a check failed, 2 configuration or input problem.
"""

from __future__ import annotations

import json
import sys
import warnings

import click

from .config import Config, load_config
from .errors import BmsFieldError, ConfigError, SchemaError


def _load(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$: not valid JSON ({exc})")


class Client:
    """POST/GET against the service, in process unless a server URL is given."""

    def __init__(self, server: str | None, config: Config):
        if server:
            import httpx

            self._http = httpx.Client(base_url=server, timeout=600.0)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._http = TestClient(create_app(config))

    def post(self, path, payload) -> dict:
        return self._handle(self._http.post(path, json=payload))

    def get(self, path) -> dict:
        return self._handle(self._http.get(path))

    @staticmethod
    def _handle(response) -> dict:
        body = response.json()
        if response.status_code >= 400:
            if isinstance(body, dict) and "error" in body:
                raise ConfigError(f"{body['error']}: {body['detail']}")
            raise ConfigError(f"service error {response.status_code}: {body}")
        return body


def _emit(ctx, payload, out=None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


def _finish_check(ctx, resp):
    if ctx.obj["json"]:
        click.echo(json.dumps(resp, indent=2, sort_keys=True))
    else:
        mark = "pass" if resp["passed"] else "FAIL"
        click.echo(
            f"{mark}  {resp['name']}  defect {resp['defect']:.3e} "
            f"<= {resp['tolerance']:.1e} ({resp['tolerance_name']})"
        )
    ctx.exit(0 if resp["passed"] else 1)


@click.group()
@click.option("--config", "config_path", default=None, metavar="PATH",
              help="config JSON (falls back to $BMSFIELD_CONFIG, then defaults)")
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.option("--server", default=None, metavar="URL",
              help="talk to a running service instead of in-process")
@click.pass_context
def main(ctx, config_path, seed, as_json, server):
    """Truncated symmetry group, momentum orbits, chaos calculus, dynamics."""
    ctx.ensure_object(dict)
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg = cfg.with_overrides(seed=seed)
    except BmsFieldError as exc:
        click.echo(f"config error: {exc}", err=True)
        ctx.exit(2)
    ctx.obj.update(config=cfg, json=as_json, server=server, seed=seed)


def _client(ctx) -> Client:
    return Client(ctx.obj["server"], ctx.obj["config"])


def _run(ctx, fn):
    try:
        fn()
    except SchemaError as exc:
        click.echo(f"schema error: {exc}", err=True)
        ctx.exit(2)
    except BmsFieldError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(2)


# ---------------------------------------------------------------------- bms


@main.group()
def bms():
    """Symmetry group elements: compose, act, conformal-weight battery."""


@bms.command("compose")
@click.option("--g1", "g1_path", required=True, metavar="PATH")
@click.option("--g2", "g2_path", required=True, metavar="PATH")
@click.option("--out", default=None, metavar="PATH")
@click.pass_context
def bms_compose(ctx, g1_path, g2_path, out):
    def go():
        resp = _client(ctx).post(
            "/bms/compose", {"g1": _load(g1_path), "g2": _load(g2_path)}
        )
        _emit(ctx, resp["g"], out)

    _run(ctx, go)


@bms.command("act")
@click.option("--g", "g_path", required=True, metavar="PATH")
@click.option("--u", type=float, required=True)
@click.option("--zeta", nargs=2, type=float, required=True, metavar="RE IM")
@click.pass_context
def bms_act(ctx, g_path, u, zeta):
    def go():
        resp = _client(ctx).post(
            "/bms/act", {"g": _load(g_path), "u": u, "zeta": list(zeta)}
        )
        if ctx.obj["json"]:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        elif resp["infinite"]:
            click.echo(f"u' = {resp['u']!r}, zeta' = infinity")
        else:
            click.echo(
                f"u' = {resp['u']!r}, zeta' = {resp['zeta'][0]!r} + {resp['zeta'][1]!r}i"
            )

    _run(ctx, go)


@bms.command("cocycle-check")
@click.option("--trials", type=int, default=200, show_default=True)
@click.pass_context
def bms_cocycle_check(ctx, trials):
    def go():
        resp = _client(ctx).post(
            "/bms/cocycle-check", {"trials": trials, "seed": ctx.obj["seed"]}
        )
        _finish_check(ctx, resp)

    _run(ctx, go)


# ------------------------------------------------------------------ momenta


@main.group()
def momenta():
    """Supermomentum pairing, Casimir mass, orbit invariance battery."""


@momenta.command("casimir")
@click.option("--input", "input_path", required=True, metavar="PATH")
@click.pass_context
def momenta_casimir(ctx, input_path):
    def go():
        resp = _client(ctx).post("/momenta/casimir", {"beta": _load(input_path)})
        if ctx.obj["json"]:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        else:
            p = resp["four_momentum"]
            click.echo(f"mass^2 = {resp['mass_squared']!r}")
            click.echo(f"p = ({p[0]!r}, {p[1]!r}, {p[2]!r}, {p[3]!r})")

    _run(ctx, go)


@momenta.command("invariance-check")
@click.option("--kind", type=click.Choice(["massive", "massless"]), default="massive",
              show_default=True)
@click.option("--value", type=float, default=1.0, show_default=True)
@click.option("--trials", type=int, default=100, show_default=True)
@click.pass_context
def momenta_invariance_check(ctx, kind, value, trials):
    def go():
        resp = _client(ctx).post(
            "/momenta/invariance-check",
            {"kind": kind, "value": value, "trials": trials, "seed": ctx.obj["seed"]},
        )
        _finish_check(ctx, resp)

    _run(ctx, go)


# ----------------------------------------------------------------------- wn


@main.group()
def wn():
    """Chaos-series operators and transform identities."""


@wn.command("op")
@click.option("--op", "op_name", required=True,
              type=click.Choice(["Q", "D", "Dstar", "PiV", "S", "F", "FG"]))
@click.option("--psi", "psi_path", required=True, metavar="PATH")
@click.option("--alpha", "alpha_path", default=None, metavar="PATH",
              help="direction function for Q, D, Dstar")
@click.option("--a", type=float, default=None, help="FG scale parameter")
@click.option("--b", nargs=2, type=float, default=None, metavar="RE IM",
              help="FG Gaussian parameter")
@click.option("--out-cap", type=int, default=None, help="output degree cap for F")
@click.option("--mode", type=click.Choice(["strict", "grow"]), default=None,
              help="cap handling for Q and Dstar (default from config)")
@click.option("--out", default=None, metavar="PATH")
@click.pass_context
def wn_op(ctx, op_name, psi_path, alpha_path, a, b, out_cap, mode, out):
    def go():
        payload = {"op": op_name, "psi": _load(psi_path)}
        if alpha_path:
            payload["alpha"] = _load(alpha_path)
        if a is not None:
            payload["a"] = a
        if b is not None:
            payload["b"] = list(b)
        if out_cap is not None:
            payload["out_cap"] = out_cap
        if mode is not None:
            payload["mode"] = mode
        resp = _client(ctx).post("/wn/op", payload)
        _emit(ctx, resp["psi"] if resp.get("psi") is not None else resp["terms"], out)

    _run(ctx, go)


@wn.command("identity-check")
@click.option("--which", required=True,
              type=click.Choice(["DQ", "uno", "due", "multdiff", "fg-inverse"]))
@click.pass_context
def wn_identity_check(ctx, which):
    def go():
        resp = _client(ctx).post("/wn/identity-check", {"which": which})
        _finish_check(ctx, resp)

    _run(ctx, go)


# ---------------------------------------------------------------------- dyn


@main.group()
def dyn():
    """Constrained Lagrangian, Hamiltonian, and variational checks."""


@dyn.command("lagrangian")
@click.option("--state", "state_path", required=True, metavar="PATH")
@click.option("--m2", type=float, default=0.0, show_default=True)
@click.pass_context
def dyn_lagrangian(ctx, state_path, m2):
    def go():
        resp = _client(ctx).post(
            "/dyn/lagrangian", {"state": _load(state_path), "m2": m2}
        )
        if ctx.obj["json"]:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        else:
            click.echo(f"L = {resp['value']!r}")

    _run(ctx, go)


@dyn.command("hamiltonian")
@click.option("--state", "state_path", required=True, metavar="PATH")
@click.option("--m2", type=float, default=0.0, show_default=True)
@click.pass_context
def dyn_hamiltonian(ctx, state_path, m2):
    def go():
        resp = _client(ctx).post(
            "/dyn/hamiltonian", {"state": _load(state_path), "m2": m2}
        )
        if ctx.obj["json"]:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        else:
            click.echo(f"H(FL(state)) = {resp['hamiltonian']!r}")
            click.echo(f"E(state)     = {resp['energy']!r}")
            click.echo(f"defect       = {resp['defect']:.6e}")

    _run(ctx, go)


@dyn.command("gradient-check")
@click.option("--m2", type=float, default=0.45, show_default=True)
@click.option("--picks", type=int, default=10, show_default=True)
@click.pass_context
def dyn_gradient_check(ctx, m2, picks):
    def go():
        resp = _client(ctx).post(
            "/dyn/gradient-check",
            {"m2": m2, "picks": picks, "seed": ctx.obj["seed"]},
        )
        _finish_check(ctx, resp)

    _run(ctx, go)


@dyn.command("legendre-check")
@click.option("--m2", type=float, default=0.45, show_default=True)
@click.pass_context
def dyn_legendre_check(ctx, m2):
    def go():
        resp = _client(ctx).post(
            "/dyn/legendre-check", {"m2": m2, "seed": ctx.obj["seed"]}
        )
        _finish_check(ctx, resp)

    _run(ctx, go)


@dyn.command("symplectic-rank")
@click.option("--cap", type=int, default=2, show_default=True)
@click.pass_context
def dyn_symplectic_rank(ctx, cap):
    def go():
        resp = _client(ctx).post("/dyn/symplectic-rank", {"cap": cap})
        if ctx.obj["json"]:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        else:
            click.echo(
                f"gram {resp['size']}x{resp['size']}, rank {resp['rank']}, "
                f"{'full' if resp['full_rank'] else 'DEFICIENT'}"
            )
        ctx.exit(0 if resp["full_rank"] else 1)

    _run(ctx, go)


# ------------------------------------------------------------------ induced


@main.group()
def induced():
    """Orbit quadratures and the induced momentum-space action."""


@induced.command("build-orbit")
@click.option("--kind", type=click.Choice(["massive", "massless"]), required=True)
@click.option("--scale", type=float, default=1.0, show_default=True)
@click.option("--chi-max", type=float, default=2.0, show_default=True)
@click.option("--n-chi", type=int, default=48, show_default=True)
@click.option("--n-sphere", type=int, default=9, show_default=True)
@click.option("--out", default=None, metavar="PATH")
@click.pass_context
def induced_build_orbit(ctx, kind, scale, chi_max, n_chi, n_sphere, out):
    def go():
        resp = _client(ctx).post(
            "/induced/build-orbit",
            {"kind": kind, "scale": scale, "chi_max": chi_max,
             "n_chi": n_chi, "n_sphere": n_sphere},
        )
        if ctx.obj["json"] and not out:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        else:
            click.echo(
                f"{kind} orbit: {resp['n_nodes']} nodes, "
                f"on-shell defect {resp['mass_defect']:.3e}"
            )
            if out:
                _emit(ctx, resp["orbit"], out)

    _run(ctx, go)


@induced.command("act")
@click.option("--g", "g_path", required=True, metavar="PATH")
@click.option("--phi", "phi_path", required=True, metavar="PATH")
@click.option("--escape", type=click.Choice(["error", "zero"]), default="error",
              show_default=True)
@click.option("--out", default=None, metavar="PATH")
@click.pass_context
def induced_act_cmd(ctx, g_path, phi_path, escape, out):
    def go():
        resp = _client(ctx).post(
            "/induced/act",
            {"g": _load(g_path), "phi": _load(phi_path), "escape": escape},
        )
        _emit(ctx, resp, out)

    _run(ctx, go)


@induced.command("unitarity-check")
@click.option("--rapidity", type=float, default=0.2, show_default=True)
@click.option("--chi-max", type=float, default=2.8, show_default=True)
@click.option("--n-chi", type=int, default=96, show_default=True)
@click.option("--n-sphere", type=int, default=13, show_default=True)
@click.option("--refine", type=int, default=1, show_default=True)
@click.pass_context
def induced_unitarity_check(ctx, rapidity, chi_max, n_chi, n_sphere, refine):
    def go():
        resp = _client(ctx).post(
            "/induced/unitarity-check",
            {"rapidity": rapidity, "chi_max": chi_max, "n_chi": n_chi,
             "n_sphere": n_sphere, "refine": refine},
        )
        if ctx.obj["json"]:
            click.echo(json.dumps(resp, indent=2, sort_keys=True))
        else:
            levels = ", ".join(f"{d:.3e}" for d in resp["drifts"])
            mark = "pass" if resp["passed"] else "FAIL"
            click.echo(
                f"{mark}  norm drift per refinement level: {levels} "
                f"(<= {resp['tolerance']:.1e}, {resp['tolerance_name']})"
            )
        ctx.exit(0 if resp["passed"] else 1)

    _run(ctx, go)


# ------------------------------------------------------------------- verify


@main.command("verify")
@click.argument("suite", default="all")
@click.option("--roundtrip", "roundtrip_path", default=None, metavar="PATH",
              help="check parse->serialize->parse on a JSON document instead")
@click.pass_context
def verify_cmd(ctx, suite, roundtrip_path):
    """Run a named check battery (default: all)."""

    def go():
        client = _client(ctx)
        if roundtrip_path:
            resp = client.post("/verify/roundtrip", {"document": _load(roundtrip_path)})
            if ctx.obj["json"]:
                click.echo(json.dumps(resp, indent=2, sort_keys=True))
            else:
                click.echo(f"roundtrip ok: {resp['schema_name']}")
            ctx.exit(0)
        resp = client.post(f"/verify/{suite}", None)
        report = resp["report"]
        if ctx.obj["json"]:
            click.echo(json.dumps(report, indent=2, sort_keys=True))
        else:
            runtimes = resp.get("runtimes", {})
            status = "PASS" if report["passed"] else "FAIL"
            click.echo(
                f"suite {report['suite']}  seed {report['seed']}  "
                f"checks {report['n_checks']}  {status}"
            )
            width = max((len(c["name"]) for c in report["checks"]), default=0)
            for c in report["checks"]:
                rel = "<=" if c["bound"] == "upper" else ">="
                mark = "pass" if c["passed"] else "FAIL"
                rt = runtimes.get(c["name"])
                tail = f"  {rt:.2f}s" if isinstance(rt, (int, float)) else ""
                click.echo(
                    f"  {mark}  {c['name']:<{width}}  defect {c['defect']:.3e} "
                    f"{rel} {c['tolerance']:.1e} ({c['tolerance_name']}){tail}"
                )
        ctx.exit(0 if report["passed"] else 1)

    _run(ctx, go)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service (requires uvicorn)."""
    try:
        import uvicorn
    except ImportError:
        click.echo("uvicorn is not installed; pip install bmsfield[serve]", err=True)
        ctx.exit(2)
    from .service import create_app

    uvicorn.run(create_app(ctx.obj["config"]), host=host, port=port)


if __name__ == "__main__":
    main()
