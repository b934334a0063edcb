"""Plain-text scenario configuration.

Format: UTF-8 ``key = value`` lines, ``#`` starts a comment, optional
``[section]`` headers group keys cosmetically (key names are global).
Unknown keys and sections are hard errors so that typos never silently
fall back to defaults.

Angles accept literal radians or ``pi`` expressions (``pi``, ``-pi/2``,
``3pi/4``, ``2pi``).  Grids use ``start:stop:count`` and include both
endpoints; ``segment_counts`` is a comma-separated integer list.
"""

from __future__ import annotations

import math
import re
from typing import Callable

import numpy as np

from .experiments import ScenarioConfig
from .twophoton import SOURCE_PRESETS

__all__ = ["ConfigError", "parse_config", "parse_angle", "parse_grid"]


class ConfigError(ValueError):
    """Malformed or unknown configuration input."""


_ANGLE_RE = re.compile(r"([+-]?)([0-9]*\.?[0-9]*(?:e[+-]?[0-9]+)?)?pi(?:/([0-9]+\.?[0-9]*))?")


def parse_angle(text: str) -> float:
    """Angle in radians from a float literal or a ``pi`` expression."""
    s = text.strip().lower().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    match = _ANGLE_RE.fullmatch(s)
    if match is None:
        raise ValueError(f"expected an angle (radians or pi expression), got {text!r}")
    sign = -1.0 if match.group(1) == "-" else 1.0
    coefficient = float(match.group(2)) if match.group(2) else 1.0
    divisor = float(match.group(3)) if match.group(3) else 1.0
    if divisor == 0.0:
        raise ValueError(f"division by zero in angle {text!r}")
    return sign * coefficient * math.pi / divisor


def parse_grid(text: str) -> np.ndarray:
    """Uniform grid from ``start:stop:count`` (endpoints included)."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"expected grid syntax start:stop:count, got {text!r}")
    start = parse_angle(parts[0])
    stop = parse_angle(parts[1])
    count = _parse_positive_int(parts[2])
    return np.linspace(start, stop, count)


def _parse_positive_int(text: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        value = -1
    if value < 1:
        raise ValueError(f"expected positive integer, got {text!r}")
    return value


def _parse_nonneg_int(text: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        value = -1
    if value < 0:
        raise ValueError(f"expected nonnegative integer, got {text!r}")
    return value


def _parse_seed(text: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        value = -1
    if not 0 <= value < 2**64:
        raise ValueError(f"expected unsigned 64-bit integer, got {text!r}")
    return value


def _parse_nonneg_float(text: str) -> float:
    try:
        value = float(text.strip())
    except ValueError as exc:
        raise ValueError(f"expected nonnegative number, got {text!r}") from exc
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"expected nonnegative number, got {text!r}")
    return value


def _parse_choice(*choices: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {text!r}")
        return value

    return parse


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(_parse_positive_int(item) for item in text.split(","))


def _parse_string(text: str) -> str:
    return text.strip()


_KEY_PARSERS: dict[str, Callable[[str], object]] = {
    "medium_kind": _parse_choice("gaussian", "unitary"),
    "n_out": _parse_positive_int,
    "n_in": _parse_positive_int,
    "medium_seed": _parse_seed,
    "segments": _parse_positive_int,
    "output_m": _parse_nonneg_int,
    "output_n": _parse_nonneg_int,
    "circuit": _parse_choice("ideal", "shaped"),
    "t": _parse_nonneg_float,
    "alpha": parse_angle,
    "method": _parse_choice("analytic", "stepped"),
    "steps": _parse_positive_int,
    "alpha_grid": parse_grid,
    "delta_theta_grid": parse_grid,
    "delay_grid": parse_grid,
    "source": _parse_choice(*sorted(SOURCE_PRESETS)),
    "overlap": _parse_nonneg_float,
    "bandwidth_fwhm_nm": _parse_nonneg_float,
    "mean_pairs_per_pulse": _parse_nonneg_float,
    "counting": _parse_choice("analytic", "montecarlo"),
    "pulses_per_point": _parse_positive_int,
    "seeds": _parse_positive_int,
    "segment_counts": _parse_int_list,
    "out_dir": _parse_string,
}

_KNOWN_SECTIONS = {
    "medium", "shaping", "circuit", "outputs", "scan", "source", "counting", "study", "run",
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse configuration text into a :class:`ScenarioConfig`.

    Omitted keys take their defaults; unknown keys, unknown sections,
    duplicate keys and type errors raise :class:`ConfigError` with the
    offending line number.
    """
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {raw.strip()!r}")
            section = line[1:-1].strip()
            if section not in _KNOWN_SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section {section!r}")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEY_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
    try:
        return ScenarioConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
