"""Run configuration: truncation orders, metric signature, direction choices, tolerances."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from .errors import ConfigError

ENV_CONFIG_PATH = "BMSFIELD_CONFIG"

DEFAULT_TOLERANCES = {
    "cocycle": 1e-12,
    "group_law": 1e-9,
    "norm_chain": 0.0,
    "hs_oracle": 1e-14,
    "hs_cauchy": 1e-8,
    "split_orthogonality": 1e-14,
    "casimir_massive": 1e-7,
    "casimir_massless": 1e-10,
    "slot_roundtrip": 1e-14,
    "momentum_transport": 1e-9,
    "ladder_identity": 1e-14,
    "mult_symbol": 1e-12,
    "minlos_mc": 3e-3,
    "fg_eigen": 1e-12,
    "fg_inverse": 1e-12,
    "fg_norm": 1e-12,
    "fg_intertwine": 1e-10,
    "fourier_intertwine": 1e-10,
    "wave_conjugation": 1e-10,
    "qd_symmetry": 1e-12,
    "dd_asymmetry_floor": 0.5,
    "el_gradient": 1e-6,
    "legendre": 1e-10,
    "fiber_invariance": 1e-12,
    "support_equivalence": 0.0,
    "symplectic_rank": 0.0,
    "orbit_mass": 1e-10,
    "induced_exact": 0.0,
    "induced_phase_norm": 1e-12,
    "induced_unitarity": 1e-3,
    "induced_halving": 0.5,
    "induced_kg": 1e-10,
    "reduce_eval": 1e-12,
}

# the five l=2 real harmonics, the default proper-supertranslation directions
DEFAULT_ST_DIRECTIONS = ((2, -2), (2, -1), (2, 0), (2, 1), (2, 2))

T4_DIRECTIONS = ((0, 0), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Config:
    """Global knobs read by every module.

    L_max: spherical-harmonic truncation order.
    k: the constant in A = L^2 + k I, must exceed 1.
    N: Hermite chaos degree cap, at least 2.
    signature: Minkowski metric diagonal, time first.
    st_directions: (l, m) labels of the active proper-supertranslation directions, all l > 1.
    seed: base seed for every randomized battery.
    cap_mode: "strict" errors on degree overflow, "grow" raises the cap.
    tolerances: named tolerance map; reports reference these names.
    """

    L_max: int = 8
    k: float = 2.0
    N: int = 6
    signature: tuple[int, int, int, int] = (1, -1, -1, -1)
    st_directions: tuple[tuple[int, int], ...] = DEFAULT_ST_DIRECTIONS
    seed: int = 7
    cap_mode: str = "strict"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if self.k <= 1:
            raise ConfigError(f"k must exceed 1 (A = L^2 + k I needs eigenvalues > 1), got k={self.k}")
        if self.N < 2:
            raise ConfigError(f"N must be at least 2, got N={self.N}")
        if self.L_max < 2:
            raise ConfigError(f"L_max must be at least 2 to hold ST directions, got {self.L_max}")
        for (l, m) in self.st_directions:
            if l <= 1:
                raise ConfigError(f"ST directions need l > 1, got ({l},{m})")
            if abs(m) > l or l > self.L_max:
                raise ConfigError(f"direction ({l},{m}) outside the L_max={self.L_max} truncation")
        if tuple(sorted(abs(s) for s in self.signature)) != (1, 1, 1, 1):
            raise ConfigError(f"signature must be four unit entries, got {self.signature}")
        if self.cap_mode not in ("strict", "grow"):
            raise ConfigError(f"cap_mode must be 'strict' or 'grow', got {self.cap_mode!r}")

    @property
    def directions(self) -> tuple[tuple[int, int], ...]:
        """T4 directions followed by the active ST directions."""
        return T4_DIRECTIONS + tuple(tuple(d) for d in self.st_directions)

    def with_overrides(self, **kw) -> "Config":
        return replace(self, **kw)

    def to_json_dict(self) -> dict:
        return {
            "L_max": self.L_max,
            "k": self.k,
            "N": self.N,
            "signature": list(self.signature),
            "st_directions": [list(d) for d in self.st_directions],
            "seed": self.seed,
            "cap_mode": self.cap_mode,
            "tolerances": dict(sorted(self.tolerances.items())),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Config":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        known = {"L_max", "k", "N", "signature", "st_directions", "seed", "cap_mode", "tolerances"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kw = {}
        for key in known & set(doc):
            value = doc[key]
            if key == "signature":
                value = tuple(int(s) for s in value)
            elif key == "st_directions":
                value = tuple((int(l), int(m)) for l, m in value)
            elif key == "tolerances":
                base = dict(DEFAULT_TOLERANCES)
                base.update({str(n): float(t) for n, t in value.items()})
                value = base
            kw[key] = value
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: str | None = None) -> Config:
    """Load a config JSON file; fall back to the environment override, then defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH)
    if path is None:
        return Config()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    return Config.from_json_dict(doc)


def save_config(config: Config, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
