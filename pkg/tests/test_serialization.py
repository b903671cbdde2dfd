import json

import numpy as np
import pytest

from bmsfield.bmsgroup import SL2C, BMSElement, random_sl2c
from bmsfield.dynamics import FieldState, random_state
from bmsfield.errors import SchemaError
from bmsfield.induced import InducedField, build_orbit, induced_act
from bmsfield.serialization import (
    detect_schema,
    dump_any,
    dump_bms_element,
    dump_field_state,
    dump_hermite_series,
    dump_induced_field,
    dump_orbit,
    dump_sphere_function,
    dump_supermomentum,
    parse_any,
    parse_bms_element,
    parse_field_state,
    parse_hermite_series,
    parse_induced_field,
    parse_orbit,
    parse_sphere_function,
    parse_supermomentum,
    roundtrip_file,
    values_equal,
)
from bmsfield.sphere import SphereFunction
from bmsfield.supermomenta import Supermomentum
from bmsfield.whitenoise import DirectionSet, HermiteSeries

T4 = ((0, 0), (1, -1), (1, 0), (1, 1))
DIRS5 = DirectionSet(T4 + ((2, 0),), k=2.0, L_max=4)


def rng_(seed=0):
    return np.random.default_rng(seed)


def through_json(doc):
    return json.loads(json.dumps(doc))


# ------------------------------------------------------------ sphere and dual


def test_sphere_function_roundtrip_exact():
    f = SphereFunction(5, rng_(1).standard_normal(36))
    doc = through_json(dump_sphere_function(f))
    g = parse_sphere_function(doc)
    assert g.L_max == 5
    assert np.array_equal(g.coeffs, f.coeffs)
    assert dump_sphere_function(g) == dump_sphere_function(f)


def test_sphere_zero_coeffs_dropped():
    f = SphereFunction(3)
    assert dump_sphere_function(f)["coeffs"] == []


def test_supermomentum_needs_dual_flag():
    beta = Supermomentum(4, rng_(2).standard_normal(25))
    doc = dump_supermomentum(beta)
    assert doc["dual"] is True
    out = parse_supermomentum(through_json(doc))
    assert np.array_equal(out.coeffs, beta.coeffs)
    # the plain parser refuses the dual document and vice versa
    with pytest.raises(SchemaError):
        parse_sphere_function(doc)
    with pytest.raises(SchemaError):
        parse_supermomentum(dump_sphere_function(SphereFunction(2)))


def test_sphere_schema_violations_name_the_path():
    with pytest.raises(SchemaError, match=r"\$\.coeffs\[1\]\[2\]"):
        parse_sphere_function({"L_max": 2, "coeffs": [[0, 0, 1.0], [1, 0, "x"]]})
    with pytest.raises(SchemaError, match="duplicate"):
        parse_sphere_function({"L_max": 2, "coeffs": [[1, 1, 1.0], [1, 1, 2.0]]})
    with pytest.raises(SchemaError, match="outside"):
        parse_sphere_function({"L_max": 1, "coeffs": [[2, 0, 1.0]]})
    with pytest.raises(SchemaError, match="unknown fields"):
        parse_sphere_function({"L_max": 1, "coeffs": [], "extra": 1})
    with pytest.raises(SchemaError, match="missing"):
        parse_sphere_function({"L_max": 1})
    with pytest.raises(SchemaError, match="finite"):
        parse_sphere_function({"L_max": 1, "coeffs": [[0, 0, float("inf")]]})


# ------------------------------------------------------------ group elements


def test_bms_element_roundtrip_bitwise():
    rng = rng_(3)
    for _ in range(10):
        g = BMSElement(random_sl2c(rng), SphereFunction(3, rng.standard_normal(16)))
        doc = dump_bms_element(g)
        h = parse_bms_element(through_json(doc))
        assert values_equal("bms_element", g, h)
        assert json.dumps(dump_bms_element(h)) == json.dumps(doc)


def test_bms_element_rejects_singular_matrix():
    doc = {
        "lambda": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        "f": {"L_max": 2, "coeffs": []},
    }
    with pytest.raises(SchemaError, match="lambda"):
        parse_bms_element(doc)


# ------------------------------------------------------------ chaos series


def test_hermite_series_real_roundtrip():
    rng = rng_(4)
    psi = HermiteSeries(DIRS5, 3, rng.standard_normal(56))
    doc = through_json(dump_hermite_series(psi))
    out = parse_hermite_series(doc)
    assert out.cap == psi.cap
    assert out.dirs.directions == psi.dirs.directions
    assert np.array_equal(out.coeffs, psi.coeffs)
    assert not np.iscomplexobj(out.coeffs)


def test_hermite_series_complex_roundtrip():
    rng = rng_(5)
    coeffs = rng.standard_normal(56) + 1j * rng.standard_normal(56)
    psi = HermiteSeries(DIRS5, 3, coeffs)
    doc = through_json(dump_hermite_series(psi))
    out = parse_hermite_series(doc)
    assert np.array_equal(out.coeffs, psi.coeffs)


def test_hermite_series_schema_violations():
    base = dump_hermite_series(HermiteSeries.unit(DIRS5, 2, (1, 0, 0, 0, 0)))
    bad = json.loads(json.dumps(base))
    bad["coeffs"][0][0] = [3, 0, 0, 0, 0]
    with pytest.raises(SchemaError, match="exceeds the cap"):
        parse_hermite_series(bad)
    bad = json.loads(json.dumps(base))
    bad["coeffs"][0][0] = [1, 0, 0]
    with pytest.raises(SchemaError, match=r"coeffs\[0\]\[0\]"):
        parse_hermite_series(bad)
    bad = json.loads(json.dumps(base))
    bad["coeffs"].append(bad["coeffs"][0])
    with pytest.raises(SchemaError, match="duplicate"):
        parse_hermite_series(bad)
    bad = json.loads(json.dumps(base))
    bad["directions"] = [[1, 0], [0, 0], [1, -1], [1, 1], [2, 0]]
    with pytest.raises(SchemaError, match="directions"):
        parse_hermite_series(bad)


# ------------------------------------------------------------ field states


def test_field_state_roundtrip():
    state = random_state(DIRS5, 3, rng_(6))
    doc = through_json(dump_field_state(state))
    out = parse_field_state(doc)
    assert values_equal("field_state", state, out)


def test_field_state_mismatched_parts():
    state = random_state(DIRS5, 3, rng_(7))
    doc = dump_field_state(state)
    doc["v"]["N"] = 5
    with pytest.raises(SchemaError):
        parse_field_state(through_json(doc))


# ------------------------------------------------------------ orbits and fields


def test_orbit_roundtrip_regenerates_nodes():
    orbit = build_orbit("massive", 1.5, 2.0, 6, 5)
    out = parse_orbit(through_json(dump_orbit(orbit)))
    assert np.array_equal(out.nodes, orbit.nodes)
    assert np.array_equal(out.weights, orbit.weights)


def test_orbit_schema_violation():
    with pytest.raises(SchemaError, match=r"\$\.kind"):
        parse_orbit({"kind": "spacelike", "scale": 1.0, "chi_max": 1.0, "n_chi": 4, "n_sphere": 4})
    with pytest.raises(SchemaError):
        parse_orbit({"kind": "massive", "scale": -1.0, "chi_max": 1.0, "n_chi": 4, "n_sphere": 4})


def test_induced_field_roundtrip_complex():
    orbit = build_orbit("massive", 1.0, 1.5, 5, 5)
    rng = rng_(8)
    phi = InducedField(rng.standard_normal(orbit.n_nodes))
    coeffs = np.zeros(25)
    coeffs[:4] = rng.standard_normal(4)
    g = BMSElement(SL2C.identity(), SphereFunction(4, coeffs))
    acted = induced_act(g, phi, orbit)
    doc = through_json(dump_induced_field(acted, orbit))
    out_field, out_orbit = parse_induced_field(doc)
    assert np.array_equal(out_field.values, acted.values)
    assert np.array_equal(out_orbit.nodes, orbit.nodes)


def test_induced_field_wrong_length():
    orbit = build_orbit("massive", 1.0, 1.5, 5, 5)
    doc = dump_induced_field(InducedField(np.zeros(orbit.n_nodes)), orbit)
    doc["values"] = doc["values"][:-1]
    with pytest.raises(SchemaError, match="entries"):
        parse_induced_field(doc)


# ------------------------------------------------------------ dispatch and files


def test_detect_schema_all_kinds():
    state = random_state(DIRS5, 2, rng_(9))
    orbit = build_orbit("massless", 1.0, 1.0, 4, 4)
    docs = {
        "sphere_function": dump_sphere_function(SphereFunction(2)),
        "supermomentum": dump_supermomentum(Supermomentum(2)),
        "bms_element": dump_bms_element(BMSElement(SL2C.identity(), SphereFunction(2))),
        "hermite_series": dump_hermite_series(state.psi),
        "field_state": dump_field_state(state),
        "orbit": dump_orbit(orbit),
        "induced_field": dump_induced_field(InducedField(np.zeros(orbit.n_nodes)), orbit),
    }
    for kind, doc in docs.items():
        assert detect_schema(doc) == kind
        parsed_kind, obj = parse_any(through_json(doc))
        assert parsed_kind == kind
        assert dump_any(kind, obj) == doc
    with pytest.raises(SchemaError, match="no published schema"):
        detect_schema({"foo": 1})


def test_roundtrip_file(tmp_path):
    rng = rng_(10)
    path = tmp_path / "beta.json"
    path.write_text(json.dumps(dump_supermomentum(Supermomentum(3, rng.standard_normal(16)))))
    assert roundtrip_file(path) == "supermomentum"

    series = tmp_path / "psi.json"
    coeffs = rng.standard_normal(56) + 1j * rng.standard_normal(56)
    series.write_text(json.dumps(dump_hermite_series(HermiteSeries(DIRS5, 3, coeffs))))
    assert roundtrip_file(series) == "hermite_series"

    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text('{"L_max": 2, "coeffs": [[0')
    with pytest.raises(SchemaError, match="not valid JSON"):
        roundtrip_file(corrupt)
