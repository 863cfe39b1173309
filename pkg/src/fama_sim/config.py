"""
JSON run configuration.

Example::

    {
      "environment": {"k_factor": 20, "omega": 1, "n_paths": 5},
      "antenna": [
        {"kind": "omni"},
        {"kind": "scfa", "patterns": {"source": "file", "path": "scfa.csv"}},
        {"kind": "dcfa", "ports": {"mapping": "first-channel"}}
      ],
      "budget": {"gamma_db": 0, "noise_var": 1},
      "sweep": {"snr_db": [0, 10, 20, 30], "m_users": [1, 2, 3, 4]},
      "strategy": ["dynamic", "static"],
      "trials": 100000,
      "seed": 1,
      "common_random_numbers": true
    }

Relative pattern paths are resolved against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelError, ScatteringEnvironment
from .fama import LinkBudget, SelectionStrategy
from .montecarlo import DEFAULT_SNR_DB, DEFAULT_TRIALS, Antenna, SimConfig, sweep_configs
from .patterns import (
    PatternError,
    SyntheticProfile,
    load_pattern_set,
    make_synthetic_dcfa_set,
    make_synthetic_set,
    omni_set,
)
from .ports import W_DCFA, W_SCFA, dcfa_grid, linear_ports


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the culprit."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class DataError(ValueError):
    """A referenced data file is unreadable or inconsistent."""


TOP_KEYS = {"environment", "antenna", "ports", "budget", "sweep", "strategy", "trials",
            "seed", "common_random_numbers", "block_size", "threads"}
ENV_KEYS = {"k_factor", "omega", "n_paths"}
ANTENNA_KEYS = {"name", "kind", "patterns", "ports"}
PATTERN_KEYS = {"source", "path", "profile"}
PORT_KEYS = {"layout", "n", "n1", "n2", "w", "mapping"}
BUDGET_KEYS = {"snr_db", "gamma_db", "noise_var"}
SWEEP_KEYS = {"snr_db", "m_users"}
PROFILE_KEYS = set(SyntheticProfile.__dataclass_fields__)


@dataclass
class RunPlan:
    """Everything ``run`` needs: the expanded sweep plus provenance."""

    configs: list
    antennas: list
    common_random_numbers: bool
    master_seed: int
    threads: int | None
    raw: dict
    input_digests: dict = field(default_factory=dict)


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(where or "<root>", "expected a JSON object")
    for key in obj:
        if key not in allowed:
            name = f"{where}.{key}" if where else key
            raise ConfigError(name, "unknown key")


def _number(obj, key, where, default=None, minimum=None, strict=False, integer=False):
    name = f"{where}.{key}" if where else key
    if key not in obj:
        if default is None:
            raise ConfigError(name, "required")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(name, f"expected a number, got {val!r}")
    if integer and int(val) != val:
        raise ConfigError(name, f"expected an integer, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(name, "must be finite")
    if minimum is not None and (val <= minimum if strict else val < minimum):
        op = ">" if strict else ">="
        raise ConfigError(name, f"must be {op} {minimum}")
    return int(val) if integer else float(val)


def _number_list(obj, key, where, integer=False, minimum=None):
    name = f"{where}.{key}"
    val = obj[key]
    vals = val if isinstance(val, list) else [val]
    if not vals:
        raise ConfigError(name, "must not be empty")
    return [_number({key: v}, key, where, integer=integer, minimum=minimum) for v in vals]


def _ports(spec, kind, where):
    spec = dict(spec or {})
    _check_keys(spec, PORT_KEYS, where)
    default_layout = "dcfa" if kind == "dcfa" else "linear"
    layout = spec.get("layout", default_layout)
    if layout not in ("linear", "dcfa"):
        raise ConfigError(f"{where}.layout", f"unknown layout {layout!r}")
    if layout == "linear":
        for bad in ("n1", "n2", "mapping"):
            if bad in spec:
                raise ConfigError(f"{where}.{bad}", "only valid with layout 'dcfa'")
        n_def = {"scfa": 20, "omni": 1}.get(kind)
        w_def = {"scfa": W_SCFA, "omni": 0.0}.get(kind)
        if kind == "custom" and "n" not in spec:
            raise ConfigError(f"{where}.n", "required for custom antennas")
        n = _number(spec, "n", where, n_def, minimum=1, integer=True)
        w = _number(spec, "w", where, w_def if w_def is not None else W_SCFA, minimum=0)
        return linear_ports(n, w, kind)
    if "n" in spec:
        raise ConfigError(f"{where}.n", "use n1/n2 with layout 'dcfa'")
    n1 = _number(spec, "n1", where, 12, minimum=1, integer=True)
    n2 = _number(spec, "n2", where, 12, minimum=1, integer=True)
    w = _number(spec, "w", where, W_DCFA, minimum=0)
    mapping = spec.get("mapping", "index-linear")
    if mapping not in ("index-linear", "first-channel"):
        raise ConfigError(f"{where}.mapping", f"unknown mapping {mapping!r}")
    return dcfa_grid(n1, n2, w, mapping)


def profile_from_dict(obj, where="profile"):
    _check_keys(obj, PROFILE_KEYS, where)
    kw = {k: _number(obj, k, where) for k in obj}
    try:
        return SyntheticProfile(**kw).validate()
    except PatternError as exc:
        raise ConfigError(where, str(exc)) from None


def _patterns(spec, kind, port_set, where, base_dir, digests):
    default_source = "omni" if kind == "omni" else "synthetic"
    spec = dict(spec or {})
    _check_keys(spec, PATTERN_KEYS, where)
    source = spec.get("source", default_source)
    if source == "omni":
        return omni_set(len(port_set))
    if source == "synthetic":
        profile = profile_from_dict(spec.get("profile", {}), f"{where}.profile")
        if port_set.grid_shape is not None:
            return make_synthetic_dcfa_set(*port_set.grid_shape, profile)
        return make_synthetic_set(len(port_set), profile)
    if source == "file":
        if "path" not in spec:
            raise ConfigError(f"{where}.path", "required when source is 'file'")
        path = Path(spec["path"])
        if not path.is_absolute():
            path = base_dir / path
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise DataError(f"cannot read pattern file {path}: {exc.strerror}") from None
        digests[str(path)] = hashlib.sha256(data).hexdigest()
        try:
            return load_pattern_set(data)
        except PatternError as exc:
            raise DataError(f"{path}: {exc}") from None
    raise ConfigError(f"{where}.source", f"unknown pattern source {source!r}")


def _antenna(spec, default_ports, where, base_dir, digests):
    _check_keys(spec, ANTENNA_KEYS, where)
    kind = spec.get("kind", "custom")
    if kind not in ("scfa", "dcfa", "omni", "custom"):
        raise ConfigError(f"{where}.kind", f"unknown antenna kind {kind!r}")
    name = spec.get("name", kind)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{where}.name", "expected a non-empty string")
    port_spec = spec.get("ports", default_ports)
    port_set = _ports(port_spec, kind, f"{where}.ports")
    patterns = _patterns(spec.get("patterns"), kind, port_set, f"{where}.patterns", base_dir,
                         digests)
    try:
        return Antenna(name, port_set, patterns)
    except ValueError as exc:
        raise DataError(f"antenna {name!r}: {exc}") from None


def _strategies(val):
    vals = val if isinstance(val, list) else [val]
    if not vals:
        raise ConfigError("strategy", "must not be empty")
    out = []
    for v in vals:
        if not isinstance(v, str):
            raise ConfigError("strategy", f"expected a strategy name, got {v!r}")
        try:
            out.append(SelectionStrategy.parse(v))
        except ValueError as exc:
            raise ConfigError("strategy", str(exc)) from None
    return out


def build_plan(raw, base_dir=Path("."), seed=None, trials=None, threads=None):
    """Validate a parsed config and expand it into per-point :class:`SimConfig` objects.

    ``seed``, ``trials`` and ``threads`` override the file's values.
    """
    _check_keys(raw, TOP_KEYS, "")
    env_spec = raw.get("environment", {})
    _check_keys(env_spec, ENV_KEYS, "environment")
    try:
        env = ScatteringEnvironment(
            _number(env_spec, "k_factor", "environment", 20.0, minimum=0),
            _number(env_spec, "omega", "environment", 1.0, minimum=0, strict=True),
            _number(env_spec, "n_paths", "environment", 5, minimum=0, integer=True),
        )
    except ChannelError as exc:
        raise ConfigError("environment", str(exc)) from None

    digests = {}
    ant_spec = raw.get("antenna", {"kind": "omni"})
    ant_list = ant_spec if isinstance(ant_spec, list) else [ant_spec]
    if not ant_list:
        raise ConfigError("antenna", "must not be empty")
    default_ports = raw.get("ports")
    antennas = []
    for n, a in enumerate(ant_list):
        where = f"antenna[{n}]" if isinstance(ant_spec, list) else "antenna"
        antennas.append(_antenna(a, default_ports, where, base_dir, digests))
    names = [a.name for a in antennas]
    if len(set(names)) != len(names):
        raise ConfigError("antenna", f"antenna names must be unique, got {names}")

    budget = raw.get("budget", {})
    _check_keys(budget, BUDGET_KEYS, "budget")
    sw = raw.get("sweep", {})
    _check_keys(sw, SWEEP_KEYS, "sweep")
    if "snr_db" in sw and "snr_db" in budget:
        raise ConfigError("sweep.snr_db", "give snr_db in either budget or sweep, not both")
    if "snr_db" in sw:
        snr = _number_list(sw, "snr_db", "sweep")
    elif "snr_db" in budget:
        snr = _number_list(budget, "snr_db", "budget")
    else:
        snr = [float(s) for s in DEFAULT_SNR_DB]
    m_users = _number_list(sw, "m_users", "sweep", integer=True, minimum=1) if "m_users" in sw else [1]
    gamma_db = _number(budget, "gamma_db", "budget", 0.0)
    noise_var = _number(budget, "noise_var", "budget", 1.0, minimum=0, strict=True)
    strategies = _strategies(raw.get("strategy", "dynamic"))
    for s in strategies:
        for a in antennas:
            try:
                s.check(a.n_ports)
            except ValueError as exc:
                raise ConfigError("strategy", f"{exc} (antenna {a.name!r})") from None

    n_trials = trials if trials is not None else _number(raw, "trials", "", DEFAULT_TRIALS,
                                                         minimum=1, integer=True)
    if n_trials < 1:
        raise ConfigError("trials", "must be >= 1")
    master_seed = seed if seed is not None else _number(raw, "seed", "", 0, minimum=0,
                                                        integer=True)
    if not 0 <= master_seed < 2 ** 64:
        raise ConfigError("seed", "must fit in 64 bits")
    block = _number(raw, "block_size", "", 1024, minimum=1, integer=True)
    crn = raw.get("common_random_numbers", False)
    if not isinstance(crn, bool):
        raise ConfigError("common_random_numbers", "expected true or false")
    if threads is None and "threads" in raw:
        threads = _number(raw, "threads", "", 1, minimum=1, integer=True)

    template = SimConfig(env, m_users[0], antennas[0],
                         LinkBudget.from_snr_db(snr[0], gamma_db, noise_var, env.omega),
                         strategies[0], n_trials=n_trials, master_seed=master_seed,
                         block_size=block)
    configs = sweep_configs(template, snr, m_users, strategies, antennas, crn,
                            gamma_db=gamma_db, noise_var=noise_var)
    return RunPlan(configs, antennas, crn, master_seed, threads, raw, digests)


def load_config(path, **overrides):
    """Read a JSON config file and build its :class:`RunPlan`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    plan = build_plan(raw, path.parent, **overrides)
    plan.input_digests[str(path)] = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return plan


def resolved(config):
    """JSON-ready echo of one sweep point."""
    ant = config.antenna
    return {
        "antenna": ant.name,
        "port_kind": ant.ports.kind,
        "n_ports": ant.n_ports,
        "w": ant.ports.w_normalized,
        "pattern_source": ant.patterns.source,
        "environment": {"k_factor": config.env.k_factor, "omega": config.env.omega,
                        "n_paths": config.env.n_paths},
        "m_users": config.m_users,
        "snr_db": config.snr_db,
        "gamma": config.budget.gamma,
        "noise_var": config.budget.noise_var,
        "tx_power": np.atleast_1d(config.budget.tx_power).tolist(),
        "strategy": config.strategy.name,
        "n_trials": config.n_trials,
        "master_seed": config.master_seed,
        "stream_key": list(config.stream_key),
        "block_size": config.block_size,
        "m_draw": config.draw_users,
    }
