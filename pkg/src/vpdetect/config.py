"""Run configuration: an INI file with fixed sections and typed keys.

Every key has a default; unknown sections or keys are rejected.  The
resolved configuration (all effective values) is hashed so outputs can be
traced back to their inputs.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os

from .errors import ConfigurationError

_MOD = "cli"

COMMANDS = ("spectrum", "merit", "sweep", "dynamics", "sweep-T", "measurement", "full-pipeline")
OUTPUT_ENV = "VPDETECT_OUTPUT_DIR"


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.replace(";", ",").split(",") if v.strip()]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str):
    s = s.strip()
    return None if s.lower() in ("", "none", "auto") else float(s)


def _combos(s: str) -> list[list[str]]:
    out = []
    for item in s.split(","):
        item = item.strip()
        if not item:
            continue
        variant, _, port = item.partition(":")
        if variant not in ("full", "rw", "ladder") or port not in ("q", "gamma"):
            raise ValueError(f"bad variant:port pair {item!r}")
        out.append([variant, port])
    return out


def _choice(*options):
    def parse(s: str) -> str:
        s = s.strip()
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s

    return parse


def _workers(s: str) -> int:
    s = s.strip().lower()
    if s in ("", "auto"):
        return os.cpu_count() or 1
    n = int(s)
    if n < 1:
        raise ValueError("workers must be >= 1")
    return n


# section -> key -> (parser, default as written in a config file)
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {
        "command": (_choice(*COMMANDS), "full-pipeline"),
        "workers": (_workers, "auto"),
    },
    "circuit": {
        "ej_over_ec1": (float, "0.9"),
        "u11_over_ej": (float, "0.081"),
        "g_over_wc": (float, "0.5"),
        "wc_over_eps_eg": (float, "1.0"),
        "l1_over_l": (float, "0.0"),
        "ej_ghz": (float, "10.0"),
        "cg_ff": (_opt_float, "none"),
    },
    "truncation": {
        "n_points": (int, "2048"),
        "half_width": (float, str(8 * math.pi)),
        "n_levels": (int, "16"),
        "aa_tol": (float, "1e-7"),
        "n_atom": (int, "8"),
        "n_fock": (int, "12"),
        "dyn_n_atom": (int, "12"),
        "dyn_n_fock": (int, "16"),
        "vacuum_rule": (_choice("lowest-non-probe", "max-overlap"), "lowest-non-probe"),
        "rw_variant": (_choice("rw", "ladder"), "rw"),
        "truncation_tol": (float, "1e-3"),
        "on_truncation": (_choice("ignore", "warn", "error"), "warn"),
        "max_dim": (int, "4096"),
    },
    "protocol": {
        "kind": (_choice("stirap", "raman"), "stirap"),
        "port": (_choice("q", "gamma"), "q"),
        "omega0_T": (float, "15"),
        "t_width": (float, "3000"),
        "tau": (float, "0.7"),
        "delta_p": (float, "0"),
        "delta_s": (float, "0"),
        "dt": (float, "0.02"),
        "n_samples": (int, "601"),
        "norm_tol": (float, "1e-9"),
        "verify_dt": (_bool, "false"),
        "rw_compare": (_bool, "true"),
    },
    "sweep": {
        "ec1_min": (float, "0.7"),
        "ec1_max": (float, "1.4"),
        "n_ec1": (int, "40"),
        "u11_min": (float, "0.05"),
        "u11_max": (float, "0.35"),
        "n_u11": (int, "40"),
        "g_over_wc": (float, "0.5"),
        "n_points": (int, "512"),
        "eps_eg_guide": (float, "0.2"),
        "eps_ratio_guide": (float, "5.0"),
    },
    "sweep_t": {
        "t_values": (_floats, "250, 500, 1000, 1500, 2000, 2500, 3000, 3500, 4000"),
        "omega0": (float, "0.005"),
        "combos": (_combos, "full:q, rw:q, rw:gamma"),
        "tau": (float, "0.7"),
        "dt": (float, "0.02"),
    },
    "merit": {
        "slice_u11": (_floats, ""),
    },
    "measurement": {
        "theta_mk": (float, "50"),
        "t_noise_k": (float, "2"),
        "t_ej": (float, "3000"),
        "t_m_ej": (float, "40000"),
        "tau_over_T": (float, "0.7"),
        "kappa": (_opt_float, "auto"),
        "freq_resolution_ghz": (float, "0.1"),
    },
    "output": {
        "directory": (str, "out"),
        "plots": (_bool, "true"),
        "wavefunctions": (_bool, "true"),
    },
}


def _resolve(parser: configparser.ConfigParser, source: str) -> dict:
    unknown = [s for s in parser.sections() if s not in SCHEMA]
    if unknown:
        raise ConfigurationError(f"unknown section(s) {unknown} in {source}", module=_MOD, operation="load_config")
    cfg: dict = {}
    for sec, keys in SCHEMA.items():
        given = dict(parser.items(sec)) if parser.has_section(sec) else {}
        bad = sorted(set(given) - set(keys))
        if bad:
            raise ConfigurationError(
                f"unknown key(s) {', '.join(bad)} in section [{sec}]", module=_MOD, operation="load_config"
            )
        cfg[sec] = {}
        for key, (parse, default) in keys.items():
            raw = given.get(key, default)
            try:
                cfg[sec][key] = parse(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigurationError(f"[{sec}] {key} = {raw!r}: {exc}", module=_MOD, operation="load_config") from None
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    c = cfg["circuit"]
    for k in ("ej_over_ec1", "u11_over_ej", "wc_over_eps_eg", "ej_ghz"):
        if not c[k] > 0:
            raise ConfigurationError(f"[circuit] {k} must be positive", module=_MOD, operation="validate")
    if c["g_over_wc"] < 0 or c["l1_over_l"] < 0:
        raise ConfigurationError("[circuit] g_over_wc and l1_over_l must be >= 0", module=_MOD, operation="validate")
    t = cfg["truncation"]
    if t["n_atom"] > t["n_levels"] or t["dyn_n_atom"] > t["n_levels"]:
        raise ConfigurationError("[truncation] n_atom exceeds n_levels", module=_MOD, operation="validate")
    if min(t["n_atom"], t["n_fock"], t["dyn_n_atom"], t["dyn_n_fock"]) < 3:
        raise ConfigurationError("[truncation] truncations must be >= 3", module=_MOD, operation="validate")
    p = cfg["protocol"]
    if not (p["t_width"] > 0 and p["dt"] > 0 and p["omega0_T"] >= 0):
        raise ConfigurationError("[protocol] t_width, dt must be positive", module=_MOD, operation="validate")
    if p["kind"] == "stirap" and not p["tau"] > 0:
        raise ConfigurationError("[protocol] STIRAP requires tau > 0", module=_MOD, operation="validate")
    s = cfg["sweep"]
    if not (0 < s["ec1_min"] <= s["ec1_max"] and 0 < s["u11_min"] <= s["u11_max"]):
        raise ConfigurationError("[sweep] ranges must be positive and ordered", module=_MOD, operation="validate")
    if min(s["n_ec1"], s["n_u11"]) < 1:
        raise ConfigurationError("[sweep] point counts must be >= 1", module=_MOD, operation="validate")
    st = cfg["sweep_t"]
    if not st["t_values"] or min(st["t_values"]) <= 0:
        raise ConfigurationError("[sweep_t] t_values must be a non-empty list of positive widths", module=_MOD, operation="validate")
    if not st["combos"]:
        raise ConfigurationError("[sweep_t] combos must not be empty", module=_MOD, operation="validate")


def load_config(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (omega0_T)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}", module=_MOD, operation="load_config") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}", module=_MOD, operation="load_config") from None
    return _resolve(parser, str(path))


def default_config() -> dict:
    return _resolve(configparser.ConfigParser(), "<defaults>")


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form of the resolved configuration.

    The output directory and the worker count are excluded: neither changes
    any computed value.
    """
    body = {s: dict(v) for s, v in cfg.items() if s != "output"}
    body["run"].pop("workers", None)
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def output_directory(cfg: dict) -> str:
    return os.environ.get(OUTPUT_ENV) or cfg["output"]["directory"]
