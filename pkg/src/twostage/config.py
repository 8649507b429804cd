"""Scenario configuration and its ``key = value`` text format.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment. Keys are the field names of :class:`ScenarioConfig`. Keys that are
not given keep their defaults, which follow the published scenario
(64-antenna BS, 16-antenna UE, 512 subcarriers at 28 GHz, ...).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ArrayGeometry
from .errors import ConfigurationError
from .rates import overhead_factor

__all__ = ["ScenarioConfig", "ConfigError", "parse_config", "format_config", "parse_grid"]


class ConfigError(ConfigurationError):
    """Configuration error, optionally tied to a line of the config text."""

    def __init__(self, message: str, keys: tuple[str, ...] = (), line: int | None = None):
        self.message = message
        self.keys = keys
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_grid(text: str) -> tuple[float, ...]:
    """``"a:b:step"`` (inclusive of ``b``) or a comma-separated list."""
    text = text.strip().strip("()[]")
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad grid {text!r}; expected start:stop:step with step > 0")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + k * step) for k in range(count))
    values = tuple(float(p) for p in text.split(",") if p.strip())
    if not values:
        raise ValueError("empty grid")
    return values


@dataclass(frozen=True)
class ScenarioConfig:
    """Every physical and simulation parameter of a run.

    Powers are given in dBm; :attr:`P_t_linear` and :attr:`P_r_linear` are
    the noise-normalized linear values used by the estimators and designs.
    ``t_p=None`` resolves to ``N_r``.
    """

    N_t: int = 64
    N_r: int = 16
    N_c: int = 4
    N_s: int = 3
    S: int = 512
    L: int = 6
    f_c_GHz: float = 28.0
    spacing_over_wavelength: float = 0.5
    P_t_dBm: float = 30.0
    P_r_dBm: float = 23.0
    noise_power_dBm: float = -87.0
    t_p: int | None = None
    t_c: int = 190
    blocks_per_window: int = 10
    speed_mps: float = 5.0
    bs_position: tuple[float, float] = (0.0, 0.0)
    ue_start: tuple[float, float] = (20.0, 0.0)
    N_cl: int = 3
    has_los: bool = True
    nlos_relative_power: float = 0.1
    tap_decay: float = 2.0
    cluster_margin_m: float = 10.0
    time_end_s: float = 4.0
    time_points: int = 9
    snr_time_s: float = 3.0
    snr_grid_dB: tuple[float, ...] = field(default=(-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0))
    noiseless: bool = False
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.t_p is None:
            object.__setattr__(self, "t_p", self.N_r)
        object.__setattr__(self, "bs_position", tuple(float(v) for v in self.bs_position))
        object.__setattr__(self, "ue_start", tuple(float(v) for v in self.ue_start))
        object.__setattr__(self, "snr_grid_dB", tuple(float(v) for v in self.snr_grid_dB))
        self._validate()

    def _validate(self):
        def check(ok, message, *keys):
            if not ok:
                raise ConfigError(message, keys)

        for name in ("N_t", "N_r", "N_c", "N_s", "S", "L", "t_c", "blocks_per_window", "trials", "time_points"):
            check(getattr(self, name) >= 1, f"{name} must be >= 1", name)
        check(self.trials >= 2, "trials must be >= 2 (the UatF statistics need two samples)", "trials")
        check(self.N_cl >= 0, "N_cl must be >= 0", "N_cl")
        check(self.N_s <= self.N_c <= self.N_r, "N_s ≤ N_c ≤ N_r violated", "N_s", "N_c", "N_r")
        check(self.N_s <= self.N_t, "N_s must not exceed N_t", "N_s", "N_t")
        check(self.L <= self.S, "L ≤ S violated", "L", "S")
        check(self.t_p >= self.N_r, "t_p must be at least N_r (largest pilot row count)", "t_p", "N_r")
        check(self.t_p + self.N_s < self.t_c, "t_p + N_s must be below t_c", "t_p", "N_s", "t_c")
        check(self.N_cl + int(self.has_los) >= 1, "channel needs at least one path", "N_cl", "has_los")
        check(self.spacing_over_wavelength > 0, "spacing must be positive", "spacing_over_wavelength")
        check(self.f_c_GHz > 0, "f_c_GHz must be positive", "f_c_GHz")
        check(self.nlos_relative_power >= 0, "nlos_relative_power must be >= 0", "nlos_relative_power")
        check(self.tap_decay > 0, "tap_decay must be positive", "tap_decay")
        check(self.speed_mps >= 0, "speed_mps must be >= 0", "speed_mps")
        check(self.time_end_s >= 0 and self.snr_time_s >= 0, "times must be >= 0", "time_end_s", "snr_time_s")
        check(self.cluster_margin_m >= 0, "cluster_margin_m must be >= 0", "cluster_margin_m")
        check(len(self.bs_position) == 2 and len(self.ue_start) == 2, "positions are 2-D", "bs_position", "ue_start")
        check(len(self.snr_grid_dB) >= 1, "snr grid is empty", "snr_grid_dB")
        check(0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer", "seed")

    @property
    def P_t_linear(self) -> float:
        return 10 ** ((self.P_t_dBm - self.noise_power_dBm) / 10)

    @property
    def P_r_linear(self) -> float:
        return 10 ** ((self.P_r_dBm - self.noise_power_dBm) / 10)

    @property
    def rho(self) -> float:
        return overhead_factor(self.t_p, self.N_s, self.t_c)

    @property
    def num_data_symbols(self) -> int:
        """``N_d``: symbols per coherence block left after the pilots."""
        return self.t_c - self.t_p - self.N_s

    @property
    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.time_end_s, self.time_points)

    @property
    def tx_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N_t, self.spacing_over_wavelength)

    @property
    def rx_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N_r, self.spacing_over_wavelength)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(text) if text.strip().lstrip("+-").isdigit() else int(value)


def _parse_optional_int(text: str):
    return None if text.strip().lower() in ("none", "") else _parse_int(text)


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.strip().strip("()[]").split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


_PARSERS = {
    "int": _parse_int,
    "float": float,
    "bool": _parse_bool,
    "int | None": _parse_optional_int,
    "tuple[float, float]": _parse_pair,
    "tuple[float, ...]": parse_grid,
}

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: ScenarioConfig) -> str:
    """Every field as ``key = value``; :func:`parse_config` reads it back exactly."""
    return "".join(f"{name} = {_format_value(getattr(cfg, name))}\n" for name in _FIELDS)


def parse_config(source: str | Path | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Read a config from a file path, from config text, or use defaults.

    Parameters
    ----------
    source : str or Path or None
        A :class:`~pathlib.Path` is read from disk; a ``str`` is taken as the
        config text itself; ``None`` means the defaults.
    overrides : dict, optional
        Field values applied after the text (already typed).

    Raises
    ------
    ConfigError
        Unknown key, unparsable value or violated invariant; the message
        carries the offending line number.
    """
    if isinstance(source, Path):
        text = source.read_text()
    else:
        text = source or ""

    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", line=lineno)
        key, _, value = (part.strip() for part in content.partition("="))
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", (key,), line=lineno)
        parser = _PARSERS[str(_FIELDS[key].type)]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {key} = {value!r}: {exc}", (key,), line=lineno) from None
        lines[key] = lineno

    for key in overrides or {}:
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", (key,))
    values.update(overrides or {})

    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        involved = [lines[k] for k in exc.keys if k in lines]
        raise ConfigError(exc.message, exc.keys, line=max(involved) if involved else None) from None
