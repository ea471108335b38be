"""Scenario files: JSON with a fixed key set, strict validation, located errors."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from typing import Optional

from .blind_pairs import DevicePair, validate_pairs
from .channel import ChannelParams, RisSpec, dbm_to_watts, db_to_linear
from .environment import Environment, GridSpec, build_environment
from .errors import ScenarioError, ValidationError

SEED_ENV = "RIS_PLANNER_SEED"


@dataclass(frozen=True)
class ChannelConfig:
    """Channel settings in file units (dBm, dB, exponent of rho_L)."""

    tx_power_dbm: float = 30.0
    phase_power_dbm: float = 5.0
    pathloss_1m_exp: float = -3.53
    alpha: float = 2.0
    rician_k_db: float = 10.0
    bandwidth_hz: float = 500e6
    carrier_hz: float = 60e9
    packets: int = 1
    bits_per_packet: int = 1000

    def params(self) -> ChannelParams:
        return ChannelParams(
            carrier_hz=self.carrier_hz,
            bandwidth_hz=self.bandwidth_hz,
            tx_power=dbm_to_watts(self.tx_power_dbm),
            phase_shift_power=dbm_to_watts(self.phase_power_dbm),
            pathloss_1m=10.0 ** self.pathloss_1m_exp,
            pathloss_exponent=self.alpha,
            rician_k=db_to_linear(self.rician_k_db),
            packets=self.packets,
            bits_per_packet=self.bits_per_packet,
        )


@dataclass(frozen=True)
class RisShape:
    rows: int = 4
    cols: int = 4
    subgroups: int = 4


@dataclass(frozen=True)
class Scenario:
    grid: GridSpec
    obstacle_cells: tuple
    device_pairs: tuple
    coverage_radius_m: float
    ris: RisShape = field(default_factory=RisShape)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    t_threshold: Optional[float] = None  # None: 1 bit/s/Hz over the bandwidth
    seed: int = 0

    @cached_property
    def env(self) -> Environment:
        return build_environment(self.grid, self.obstacle_cells)

    @cached_property
    def params(self) -> ChannelParams:
        return self.channel.params()

    @cached_property
    def ris_spec(self) -> RisSpec:
        return RisSpec.tiled(self.ris.rows, self.ris.cols, self.ris.subgroups, self.params.phase_shift_power)

    @property
    def threshold(self) -> float:
        return self.params.default_threshold if self.t_threshold is None else self.t_threshold

    def validate(self, text: Optional[str] = None) -> "Scenario":
        """Check cross-field constraints; errors name the field (and line when ``text`` is given)."""
        def at(name, fn):
            try:
                return fn()
            except ValidationError as e:
                raise e.located(name, _line_of(text, name)) from e

        if not self.coverage_radius_m > 0 or not math.isfinite(self.coverage_radius_m):
            raise ScenarioError("radius must be positive", "radius", _line_of(text, "radius"))
        env = at("obstacles", lambda: self.env)
        at("channel", lambda: self.params)
        at("ris", lambda: self.ris_spec)
        at("pairs", lambda: validate_pairs(env, self.device_pairs, self.coverage_radius_m))
        if self.t_threshold is not None and not self.t_threshold >= 0:
            raise ScenarioError("t_threshold must be >= 0", "t_threshold", _line_of(text, "t_threshold"))
        return self

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "grid": {"rows": self.grid.rows, "cols": self.grid.cols, "cell_size": self.grid.cell_size},
            "obstacles": list(self.obstacle_cells),
            "pairs": [list(p) for p in self.device_pairs],
            "radius": self.coverage_radius_m,
            "ris": {"rows": self.ris.rows, "cols": self.ris.cols, "subgroups": self.ris.subgroups},
            "channel": {k: getattr(self.channel, k) for k in _CHANNEL_KEYS},
            "t_threshold": self.t_threshold,
            "seed": self.seed,
        }


_TOP_KEYS = ("grid", "obstacles", "pairs", "radius", "ris", "channel", "t_threshold", "seed")
_REQUIRED = ("grid", "obstacles", "pairs", "radius")
_GRID_KEYS = ("rows", "cols", "cell_size")
_RIS_KEYS = ("rows", "cols", "subgroups")
_CHANNEL_KEYS = ("tx_power_dbm", "phase_power_dbm", "pathloss_1m_exp", "alpha", "rician_k_db",
                 "bandwidth_hz", "carrier_hz", "packets", "bits_per_packet")
_CHANNEL_INTS = ("packets", "bits_per_packet")


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    if not text:
        return None
    needle = f'"{key}"'
    for n, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return n
    return None


def _reject_duplicates(items):
    out = {}
    for k, v in items:
        if k in out:
            raise ScenarioError(f"duplicate key {k!r}", k)
        out[k] = v
    return out


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _section(d, name, keys, text):
    if not isinstance(d, dict):
        raise ScenarioError("expected an object", name, _line_of(text, name))
    extra = sorted(set(d) - set(keys))
    if extra:
        where = extra[0] if name == "scenario" else f"{name}.{extra[0]}"
        raise ScenarioError(f"unknown key {extra[0]!r}", where, _line_of(text, extra[0]))
    return d


def _int(d, key, name, text, default=None):
    v = d.get(key, default)
    if not _is_int(v):
        raise ScenarioError(f"expected an integer, got {v!r}", f"{name}.{key}", _line_of(text, key))
    return v


def _num(d, key, name, text, default=None):
    v = d.get(key, default)
    if not _is_num(v):
        raise ScenarioError(f"expected a number, got {v!r}", f"{name}.{key}", _line_of(text, key))
    return float(v)


def scenario_from_dict(d: dict, text: Optional[str] = None) -> Scenario:
    _section(d, "scenario", _TOP_KEYS, text)
    for k in _REQUIRED:
        if k not in d:
            raise ScenarioError("missing required key", k)

    g = _section(d["grid"], "grid", _GRID_KEYS, text)
    for k in ("rows", "cols"):
        if k not in g:
            raise ScenarioError("missing required key", f"grid.{k}", _line_of(text, "grid"))
    try:
        grid = GridSpec(_int(g, "rows", "grid", text), _int(g, "cols", "grid", text),
                        _num(g, "cell_size", "grid", text, 1.0))
    except ValidationError as e:
        if isinstance(e, ScenarioError):
            raise
        raise e.located("grid", _line_of(text, "grid")) from e

    obstacles = d["obstacles"]
    if not isinstance(obstacles, list) or not all(_is_int(c) for c in obstacles):
        raise ScenarioError("expected a list of cell ids", "obstacles", _line_of(text, "obstacles"))
    pairs = d["pairs"]
    if not isinstance(pairs, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(_is_int(c) for c in p) for p in pairs):
        raise ScenarioError("expected a list of [u, v] cell pairs", "pairs", _line_of(text, "pairs"))
    try:
        device_pairs = tuple(DevicePair.of(*p) for p in pairs)
    except ValidationError as e:
        raise e.located("pairs", _line_of(text, "pairs")) from e
    if len(set(device_pairs)) != len(device_pairs):
        raise ScenarioError("duplicate device pair", "pairs", _line_of(text, "pairs"))

    radius = d["radius"]
    if not _is_num(radius):
        raise ScenarioError(f"expected a number, got {radius!r}", "radius", _line_of(text, "radius"))

    r = _section(d.get("ris", {}), "ris", _RIS_KEYS, text)
    ris = RisShape(*(_int(r, k, "ris", text, getattr(RisShape, k)) for k in _RIS_KEYS))

    c = _section(d.get("channel", {}), "channel", _CHANNEL_KEYS, text)
    vals = {}
    for k in _CHANNEL_KEYS:
        reader = _int if k in _CHANNEL_INTS else _num
        vals[k] = reader(c, k, "channel", text, getattr(ChannelConfig, k))
    channel = ChannelConfig(**vals)

    t_th = d.get("t_threshold")
    if t_th is not None and not _is_num(t_th):
        raise ScenarioError(f"expected a number or null, got {t_th!r}", "t_threshold",
                            _line_of(text, "t_threshold"))
    seed = d.get("seed", 0)
    if not _is_int(seed):
        raise ScenarioError(f"expected an integer, got {seed!r}", "seed", _line_of(text, "seed"))

    sc = Scenario(grid, tuple(sorted(set(obstacles))), device_pairs, float(radius), ris, channel,
                  None if t_th is None else float(t_th), seed)
    return sc.validate(text)


def loads_scenario(text: str) -> Scenario:
    try:
        d = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, line=e.lineno) from e
    if isinstance(d, ScenarioError):  # pragma: no cover
        raise d
    return scenario_from_dict(d, text)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as f:
        return loads_scenario(f.read())


def dumps_scenario(sc: Scenario) -> str:
    """One top-level key per line, so error line numbers stay meaningful."""
    d = sc.to_dict()
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in d.items())
    return "{\n" + body + "\n}\n"


def save_scenario(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_scenario(sc))


def bundled_example(name: str = "4x4") -> str:
    """Text of a scenario shipped with the package."""
    if name != "4x4":
        raise ValidationError(f"unknown example {name!r}; available: 4x4")
    return resources.files("ris_planner").joinpath("data").joinpath("example_4x4.json").read_text(encoding="utf-8")


def seed_override(sc: Scenario, environ=None) -> Scenario:
    """Apply ``RIS_PLANNER_SEED`` if set."""
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw is None or raw == "":
        return sc
    try:
        seed = int(raw, 0)
    except ValueError:
        raise ScenarioError(f"{SEED_ENV} must be an integer, got {raw!r}", SEED_ENV) from None
    return sc.with_seed(seed)
