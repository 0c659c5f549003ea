"""Experiment configuration: a versioned YAML file with six sections.

Every value not given in the file is filled from DEFAULTS and its dotted path
is recorded in ``provenance`` as "default".
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import yaml

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or inconsistent configuration; the message names the field path."""


DEFAULTS = {
    "geometry": {
        "r0_nm": 114.0,
        "r_top_nm": 930.0,
        "theta_deg": 0.8,
        "h_nm": 24142.0,
        "n_top": 11,
        "n_bot": 46,
        "wavelength_nm": 925.0,
        "tune_antinode": True,
        "ar_coating": True,
    },
    "materials": {
        "high": {"name": "GaAs", "n": 3.4788},
        "low": {"name": "AlGaAs", "n": 2.9895},
        "clad_n": 1.0,
    },
    "collection": {
        "na": 0.82,
        "taper_modes": 4,
        "taper_segments": None,
    },
    "emitter": {
        "gamma_bulk_per_s": 1.0e9,
        "gamma_b_ratio": 0.05,
        "gamma_b_table": None,
        "gamma_pd_per_s": 0.0,
        "detuning_rad_per_s": 0.0,
    },
    "phonons": {
        "enabled": True,
        "alpha_ps2": None,
        "omega_b_per_ps": None,
        "temperature_k": 4.0,
        "source": None,
    },
    "sweep": {
        "fig2": {"r_top_nm": {"start": 300.0, "stop": 2000.0, "num": 50}},
        "fig3": {"theta_deg": [0.1, 0.2, 0.4, 0.8, 1.2, 1.6, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]},
        "fig4": {"n_top": list(range(1, 16))},
        "fig5": {"n_top": list(range(1, 16))},
        "optimize": {"parameter": "n_top", "lower": 1, "upper": 15},
    },
}

# phonon preset shipped with the package, see configs/design.yaml
REPRESENTATIVE_PHONONS = {
    "alpha_ps2": 0.027,
    "omega_b_per_ps": 2.2,
    "temperature_k": 4.0,
    "source": "representative InAs QD at 4 K (LA phonons, deformation-potential coupling)",
}

_POSITIVE = {
    "geometry.r0_nm", "geometry.r_top_nm", "geometry.h_nm", "geometry.wavelength_nm",
    "materials.high.n", "materials.low.n", "materials.clad_n", "emitter.gamma_bulk_per_s",
    "phonons.omega_b_per_ps",
}
_NON_NEGATIVE = {
    "geometry.theta_deg", "geometry.n_top", "geometry.n_bot", "emitter.gamma_b_ratio",
    "emitter.gamma_pd_per_s", "phonons.alpha_ps2", "phonons.temperature_k",
}
_INTEGER = {"geometry.n_top", "geometry.n_bot", "collection.taper_modes"}
_OPEN_MAPS = {"sweep"}  # keys below these are checked by the sweep parser


@dataclass
class Config:
    data: dict
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def get(self, path: str):
        node = self.data
        for part in path.split("."):
            node = node[part]
        return node

    def replace(self, path: str, value) -> "Config":
        """Copy with one dotted-path value changed (validated again)."""
        data = copy.deepcopy(self.data)
        node = data
        parts = path.split(".")
        for part in parts[:-1]:
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"{path}: unknown key")
        node[parts[-1]] = value
        prov = dict(self.provenance)
        prov[path] = "override"
        _validate(data)
        return Config(data, prov)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **copy.deepcopy(self.data)}

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _merge(defaults, given, path, provenance):
    out = {}
    for key, value in given.items():
        if key not in defaults and path.split(".")[0] not in _OPEN_MAPS:
            raise ConfigError(f"{path + '.' if path else ''}{key}: unknown key")
    for key, dval in defaults.items():
        full = f"{path}.{key}" if path else key
        if key in given:
            gval = given[key]
            if isinstance(dval, dict) and full.split(".")[0] not in _OPEN_MAPS:
                if not isinstance(gval, dict):
                    raise ConfigError(f"{full}: expected a mapping")
                out[key] = _merge(dval, gval, full, provenance)
            else:
                out[key] = copy.deepcopy(gval)
                provenance[full] = "config"
        else:
            out[key] = copy.deepcopy(dval)
            _mark_default(dval, full, provenance)
    if path.split(".")[0] in _OPEN_MAPS:
        for key in given:
            if key not in defaults:
                out[key] = copy.deepcopy(given[key])
                provenance[f"{path}.{key}"] = "config"
    return out


def _mark_default(value, path, provenance):
    if isinstance(value, dict) and path.split(".")[0] not in _OPEN_MAPS:
        for k, v in value.items():
            _mark_default(v, f"{path}.{k}", provenance)
    else:
        provenance[path] = "default"


def _validate(data):
    for path in sorted(_POSITIVE | _NON_NEGATIVE | _INTEGER):
        node = data
        for part in path.split("."):
            node = node[part]
        if node is None:
            continue
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {node!r}")
        if path in _INTEGER and int(node) != node:
            raise ConfigError(f"{path}: expected an integer, got {node!r}")
        if path in _POSITIVE and not node > 0:
            raise ConfigError(f"{path}: must be positive, got {node!r}")
        if path in _NON_NEGATIVE and not node >= 0:
            raise ConfigError(f"{path}: must be non-negative, got {node!r}")
    g = data["geometry"]
    if g["r_top_nm"] < g["r0_nm"]:
        raise ConfigError("geometry.r_top_nm: must not be smaller than geometry.r0_nm")
    if g["theta_deg"] >= 90:
        raise ConfigError("geometry.theta_deg: must be below 90")
    na = data["collection"]["na"]
    if not (isinstance(na, (int, float)) and 0 < na <= 1):
        raise ConfigError(f"collection.na: must lie in (0, 1], got {na!r}")
    if data["collection"]["taper_modes"] < 1:
        raise ConfigError("collection.taper_modes: must be at least 1")
    seg = data["collection"]["taper_segments"]
    if seg is not None and (not isinstance(seg, int) or seg < 10):
        raise ConfigError("collection.taper_segments: must be an integer >= 10 or null")
    table = data["emitter"]["gamma_b_table"]
    if table is not None:
        try:
            pairs = [(float(r), float(v)) for r, v in table]
        except (TypeError, ValueError):
            raise ConfigError("emitter.gamma_b_table: expected a list of [radius_nm, ratio] pairs") from None
        if len(pairs) < 2 or any(v < 0 for _, v in pairs):
            raise ConfigError("emitter.gamma_b_table: need at least two pairs with non-negative ratios")
        radii = [r for r, _ in pairs]
        if sorted(radii) != radii or len(set(radii)) != len(radii):
            raise ConfigError("emitter.gamma_b_table: radii must be strictly increasing")
    ph = data["phonons"]
    if not isinstance(ph["enabled"], bool):
        raise ConfigError("phonons.enabled: expected true or false")
    if ph["enabled"]:
        missing = [k for k in ("alpha_ps2", "omega_b_per_ps") if ph[k] is None]
        if missing:
            raise ConfigError(
                "phonons." + missing[0] + ": required when phonons are enabled; no value is implied by the "
                "device description, so take alpha and omega_b from the cited QD phonon reference and record "
                "the origin in phonons.source (or run with --no-phonons)"
            )


def from_dict(raw: dict) -> Config:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping")
    raw = dict(raw)
    version = raw.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}")
    provenance: dict = {}
    data = _merge(DEFAULTS, raw, "", provenance)
    _validate(data)
    return Config(data, provenance)


def parse_config(path=None, text: str | None = None) -> Config:
    """Load and validate a config file (or YAML text); ``None`` gives the defaults."""
    if text is None and path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text) if text else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax: {exc}") from None
    return from_dict(raw)


def without_phonons(cfg: Config) -> Config:
    return cfg.replace("phonons.enabled", False)


def sweep_values(cfg: Config, figure: str, name: str):
    """Explicit list or {start, stop, num} linspace from the sweep section."""
    try:
        axis = cfg["sweep"][figure][name]
    except (KeyError, TypeError):
        raise ConfigError(f"sweep.{figure}.{name}: missing") from None
    if isinstance(axis, dict):
        if set(axis) != {"start", "stop", "num"}:
            raise ConfigError(f"sweep.{figure}.{name}: expected start, stop and num")
        num = axis["num"]
        if not isinstance(num, int) or num < 1:
            raise ConfigError(f"sweep.{figure}.{name}.num: must be a positive integer")
        if num == 1:
            return [float(axis["start"])]
        step = (axis["stop"] - axis["start"]) / (num - 1)
        return [float(axis["start"] + k * step) for k in range(num)]
    if not isinstance(axis, list) or not axis:
        raise ConfigError(f"sweep.{figure}.{name}: expected a non-empty list or a linspace mapping")
    return list(axis)


def design_config() -> Config:
    """Defaults plus the representative phonon preset (provenance "preset")."""
    cfg = from_dict({"phonons": dict(REPRESENTATIVE_PHONONS)})
    for key in REPRESENTATIVE_PHONONS:
        cfg.provenance[f"phonons.{key}"] = "preset"
    return cfg
