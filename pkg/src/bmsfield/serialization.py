"""JSON documents for the package value types, with exact reparse.

Every dump writes plain Python ints and floats (complex numbers as [re, im]
pairs), so the standard json module round-trips each value bit for bit.
Parsers validate strictly and report violations with the JSON path to the
offending field. Grids and quadratures are never serialized: documents carry
the parameters that regenerate them.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .bmsgroup import SL2C, BMSElement
from .dynamics import CotangentPoint, FieldState
from .errors import BmsFieldError, SchemaError
from .induced import InducedField, OrbitQuadrature, build_orbit
from .sphere import SphereFunction, sh_index, sh_pairs
from .supermomenta import Supermomentum
from .whitenoise.basis import DirectionSet, HermiteSeries, chaos_basis

__all__ = [
    "dump_sphere_function",
    "parse_sphere_function",
    "dump_supermomentum",
    "parse_supermomentum",
    "dump_bms_element",
    "parse_bms_element",
    "dump_hermite_series",
    "parse_hermite_series",
    "dump_field_state",
    "parse_field_state",
    "dump_orbit",
    "parse_orbit",
    "dump_induced_field",
    "parse_induced_field",
    "detect_schema",
    "dump_any",
    "parse_any",
    "roundtrip_file",
    "values_equal",
]


def _fail(path, why):
    raise SchemaError(f"{path}: {why}")


def _expect_object(doc, path, required, optional=()):
    if not isinstance(doc, dict):
        _fail(path, f"expected a JSON object, got {type(doc).__name__}")
    missing = [k for k in required if k not in doc]
    if missing:
        _fail(path, f"missing required fields {missing}")
    unknown = sorted(set(doc) - set(required) - set(optional))
    if unknown:
        _fail(path, f"unknown fields {unknown}")


def _as_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _as_real(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(path, f"expected a finite number, got {value!r}")
    return value


def _as_list(value, path, length=None):
    if not isinstance(value, list):
        _fail(path, f"expected a list, got {type(value).__name__}")
    if length is not None and len(value) != length:
        _fail(path, f"expected {length} entries, got {len(value)}")
    return value


def _as_complex_pair(value, path):
    pair = _as_list(value, path, length=2)
    return complex(_as_real(pair[0], f"{path}[0]"), _as_real(pair[1], f"{path}[1]"))


# ------------------------------------------------------------ sphere functions


def _dump_sphere_coeffs(coeffs, L_max):
    out = []
    for i, (l, m) in enumerate(sh_pairs(L_max)):
        if coeffs[i] != 0.0:
            out.append([l, m, float(coeffs[i])])
    return out


def _parse_sphere_body(doc, path, optional=()):
    _expect_object(doc, path, required=("L_max", "coeffs"), optional=optional)
    L_max = _as_int(doc["L_max"], f"{path}.L_max")
    if L_max < 0:
        _fail(f"{path}.L_max", f"must be nonnegative, got {L_max}")
    coeffs = np.zeros((L_max + 1) ** 2)
    seen = set()
    for j, entry in enumerate(_as_list(doc["coeffs"], f"{path}.coeffs")):
        epath = f"{path}.coeffs[{j}]"
        triple = _as_list(entry, epath, length=3)
        l = _as_int(triple[0], f"{epath}[0]")
        m = _as_int(triple[1], f"{epath}[1]")
        value = _as_real(triple[2], f"{epath}[2]")
        if l < 0 or l > L_max or abs(m) > l:
            _fail(epath, f"slot ({l},{m}) outside the L_max={L_max} truncation")
        if (l, m) in seen:
            _fail(epath, f"duplicate slot ({l},{m})")
        seen.add((l, m))
        coeffs[sh_index(l, m)] = value
    return L_max, coeffs


def dump_sphere_function(f: SphereFunction) -> dict:
    return {"L_max": int(f.L_max), "coeffs": _dump_sphere_coeffs(f.coeffs, f.L_max)}


def parse_sphere_function(doc, path="$") -> SphereFunction:
    L_max, coeffs = _parse_sphere_body(doc, path)
    return SphereFunction(L_max, coeffs)


def dump_supermomentum(beta: Supermomentum) -> dict:
    doc = dump_sphere_function(beta)
    doc["dual"] = True
    return doc


def parse_supermomentum(doc, path="$") -> Supermomentum:
    L_max, coeffs = _parse_sphere_body(doc, path, optional=("dual",))
    if doc.get("dual") is not True:
        _fail(f"{path}.dual", "supermomentum documents must carry dual: true")
    return Supermomentum(L_max, coeffs)


# ------------------------------------------------------------ group elements


def dump_bms_element(g: BMSElement) -> dict:
    entries = [g.lam.a, g.lam.b, g.lam.c, g.lam.d]
    return {
        "lambda": [[z.real, z.imag] for z in entries],
        "f": dump_sphere_function(g.f),
    }


def parse_bms_element(doc, path="$") -> BMSElement:
    _expect_object(doc, path, required=("lambda", "f"))
    rows = _as_list(doc["lambda"], f"{path}.lambda", length=4)
    entries = [_as_complex_pair(rows[i], f"{path}.lambda[{i}]") for i in range(4)]
    try:
        lam = SL2C(*entries)
    except BmsFieldError as exc:
        _fail(f"{path}.lambda", str(exc))
    return BMSElement(lam, parse_sphere_function(doc["f"], f"{path}.f"))


# ------------------------------------------------------------ chaos series


def dump_hermite_series(psi: HermiteSeries) -> dict:
    basis = psi.basis
    coeffs = []
    for i in range(len(psi.coeffs)):
        c = complex(psi.coeffs[i])
        if c != 0.0:
            coeffs.append([[int(n) for n in basis.exponents[i]], c.real, c.imag])
    return {
        "N": int(psi.cap),
        "directions": [[l, m] for (l, m) in psi.dirs.directions],
        "k": float(psi.dirs.k),
        "coeffs": coeffs,
    }


def parse_hermite_series(doc, path="$") -> HermiteSeries:
    _expect_object(doc, path, required=("N", "directions", "k", "coeffs"))
    cap = _as_int(doc["N"], f"{path}.N")
    if cap < 0:
        _fail(f"{path}.N", f"must be nonnegative, got {cap}")
    directions = []
    for j, entry in enumerate(_as_list(doc["directions"], f"{path}.directions")):
        pair = _as_list(entry, f"{path}.directions[{j}]", length=2)
        directions.append(
            (
                _as_int(pair[0], f"{path}.directions[{j}][0]"),
                _as_int(pair[1], f"{path}.directions[{j}][1]"),
            )
        )
    k = _as_real(doc["k"], f"{path}.k")
    # the direction list fixes the sphere truncation it needs
    L_max = max([l for l, m in directions], default=1)
    try:
        dirs = DirectionSet(tuple(directions), k=k, L_max=L_max)
    except BmsFieldError as exc:
        _fail(f"{path}.directions", str(exc))
    basis = chaos_basis(len(directions), cap)
    coeffs = np.zeros(len(basis), dtype=complex)
    seen = set()
    for j, entry in enumerate(_as_list(doc["coeffs"], f"{path}.coeffs")):
        epath = f"{path}.coeffs[{j}]"
        triple = _as_list(entry, epath, length=3)
        multi = tuple(
            _as_int(n, f"{epath}[0][{i}]")
            for i, n in enumerate(_as_list(triple[0], f"{epath}[0]", length=len(directions)))
        )
        if any(n < 0 for n in multi):
            _fail(f"{epath}[0]", f"negative exponent in {list(multi)}")
        if sum(multi) > cap:
            _fail(f"{epath}[0]", f"degree {sum(multi)} exceeds the cap N={cap}")
        if multi in seen:
            _fail(f"{epath}[0]", f"duplicate multi-index {list(multi)}")
        seen.add(multi)
        coeffs[basis.index_of(multi)] = complex(
            _as_real(triple[1], f"{epath}[1]"), _as_real(triple[2], f"{epath}[2]")
        )
    if np.all(coeffs.imag == 0.0):
        coeffs = coeffs.real.copy()
    return HermiteSeries(dirs, cap, coeffs)


# ------------------------------------------------------------ dynamic states


def dump_field_state(state: FieldState) -> dict:
    return {
        "psi": dump_hermite_series(state.psi),
        "v": dump_hermite_series(state.v),
        "lambdas": [dump_hermite_series(lam) for lam in state.lambdas],
        "lambda_vs": [dump_hermite_series(w) for w in state.lambda_vs],
    }


def parse_field_state(doc, path="$") -> FieldState:
    _expect_object(doc, path, required=("psi", "v"), optional=("lambdas", "lambda_vs"))
    psi = parse_hermite_series(doc["psi"], f"{path}.psi")
    v = parse_hermite_series(doc["v"], f"{path}.v")
    lambdas = tuple(
        parse_hermite_series(entry, f"{path}.lambdas[{j}]")
        for j, entry in enumerate(_as_list(doc.get("lambdas", []), f"{path}.lambdas"))
    )
    lambda_vs = tuple(
        parse_hermite_series(entry, f"{path}.lambda_vs[{j}]")
        for j, entry in enumerate(_as_list(doc.get("lambda_vs", []), f"{path}.lambda_vs"))
    )
    try:
        return FieldState(psi, v, lambdas, lambda_vs)
    except BmsFieldError as exc:
        _fail(path, str(exc))


# ------------------------------------------------------------ orbits and fields


def dump_orbit(orbit: OrbitQuadrature) -> dict:
    return {
        "kind": orbit.kind,
        "scale": float(orbit.mass_scale),
        "chi_max": float(orbit.chi_max),
        "n_chi": int(orbit.n_chi),
        "n_sphere": int(orbit.n_sphere),
    }


def parse_orbit(doc, path="$") -> OrbitQuadrature:
    _expect_object(doc, path, required=("kind", "scale", "chi_max", "n_chi", "n_sphere"))
    kind = doc["kind"]
    if kind not in ("massive", "massless"):
        _fail(f"{path}.kind", f"expected 'massive' or 'massless', got {kind!r}")
    try:
        return build_orbit(
            kind,
            _as_real(doc["scale"], f"{path}.scale"),
            _as_real(doc["chi_max"], f"{path}.chi_max"),
            _as_int(doc["n_chi"], f"{path}.n_chi"),
            _as_int(doc["n_sphere"], f"{path}.n_sphere"),
        )
    except BmsFieldError as exc:
        _fail(path, str(exc))


def dump_induced_field(phi: InducedField, orbit: OrbitQuadrature) -> dict:
    values = np.asarray(phi.values, dtype=complex)
    return {
        "orbit": dump_orbit(orbit),
        "values": [[z.real, z.imag] for z in values],
    }


def parse_induced_field(doc, path="$"):
    """Returns the (field, orbit) pair; the orbit is rebuilt from parameters."""
    _expect_object(doc, path, required=("orbit", "values"))
    orbit = parse_orbit(doc["orbit"], f"{path}.orbit")
    raw = _as_list(doc["values"], f"{path}.values", length=orbit.n_nodes)
    values = np.array(
        [_as_complex_pair(entry, f"{path}.values[{j}]") for j, entry in enumerate(raw)]
    )
    if len(values) and np.all(values.imag == 0.0):
        values = values.real.copy()
    try:
        return InducedField(values), orbit
    except BmsFieldError as exc:
        _fail(f"{path}.values", str(exc))


# ------------------------------------------------------------ dispatch and roundtrip

_DETECTORS = (
    ("bms_element", lambda d: "lambda" in d),
    ("field_state", lambda d: "psi" in d),
    ("hermite_series", lambda d: "N" in d and "directions" in d),
    ("induced_field", lambda d: "orbit" in d),
    ("orbit", lambda d: "kind" in d),
    ("supermomentum", lambda d: d.get("dual") is True),
    ("sphere_function", lambda d: "L_max" in d),
)

_PARSERS = {
    "sphere_function": parse_sphere_function,
    "supermomentum": parse_supermomentum,
    "bms_element": parse_bms_element,
    "hermite_series": parse_hermite_series,
    "field_state": parse_field_state,
    "orbit": parse_orbit,
    "induced_field": parse_induced_field,
}

_DUMPERS = {
    "sphere_function": dump_sphere_function,
    "supermomentum": dump_supermomentum,
    "bms_element": dump_bms_element,
    "hermite_series": dump_hermite_series,
    "field_state": dump_field_state,
    "orbit": dump_orbit,
    "induced_field": lambda pair: dump_induced_field(*pair),
}


def detect_schema(doc) -> str:
    if not isinstance(doc, dict):
        raise SchemaError(f"$: expected a JSON object, got {type(doc).__name__}")
    for name, probe in _DETECTORS:
        if probe(doc):
            return name
    raise SchemaError("$: document matches no published schema")


def parse_any(doc):
    kind = detect_schema(doc)
    return kind, _PARSERS[kind](doc)


def dump_any(kind, obj) -> dict:
    return _DUMPERS[kind](obj)


def values_equal(kind, first, second) -> bool:
    """Exact equality of parsed values, used by the reparse check."""
    if kind in ("sphere_function", "supermomentum"):
        return first.L_max == second.L_max and np.array_equal(first.coeffs, second.coeffs)
    if kind == "bms_element":
        return (
            (first.lam.a, first.lam.b, first.lam.c, first.lam.d)
            == (second.lam.a, second.lam.b, second.lam.c, second.lam.d)
        ) and values_equal("sphere_function", first.f, second.f)
    if kind == "hermite_series":
        # L_max is not part of the document (it is rebuilt from the direction
        # labels), so equality goes through the serialized fields only.
        return (
            first.dirs.directions == second.dirs.directions
            and first.dirs.k == second.dirs.k
            and first.cap == second.cap
            and np.array_equal(first.coeffs, second.coeffs)
        )
    if kind == "field_state":
        parts_first = (first.psi, first.v) + tuple(first.lambdas) + tuple(first.lambda_vs)
        parts_second = (second.psi, second.v) + tuple(second.lambdas) + tuple(second.lambda_vs)
        return len(parts_first) == len(parts_second) and all(
            values_equal("hermite_series", a, b) for a, b in zip(parts_first, parts_second)
        )
    if kind == "orbit":
        return dump_orbit(first) == dump_orbit(second)
    if kind == "induced_field":
        return np.array_equal(first[0].values, second[0].values) and values_equal(
            "orbit", first[1], second[1]
        )
    raise SchemaError(f"unknown schema kind {kind!r}")


def roundtrip_file(path) -> str:
    """Parse, serialize, reparse; returns the schema name when values survive exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"$: not valid JSON ({exc})")
    kind, first = parse_any(doc)
    redumped = dump_any(kind, first)
    _, second = parse_any(json.loads(json.dumps(redumped)))
    if not values_equal(kind, first, second):
        raise SchemaError(f"$: reparse of a {kind} document changed values")
    return kind
