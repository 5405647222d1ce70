import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

_TOP_SECTION = ""


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"Line {line}: {message}")
        self.line = line


class Command(Enum):
    GYRO = "gyro"
    DISPERSION = "dispersion"
    BANDS = "bands"
    GAPS = "gaps"
    SWEEP_ALPHA = "sweep-alpha"
    CONTOURS = "contours"
    CONTINUUM = "continuum"


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"'{text}' is not a boolean")


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"'{text}' is not a finite number")
    return value


def _parse_floats(text: str) -> List[float]:
    return [_parse_float(part) for part in text.split(",") if part.strip()]


def _format_float(value: float) -> str:
    return repr(float(value))


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "float": _parse_float,
    "int": int,
    "bool": _parse_bool,
    "str": str.strip,
    "floats": _parse_floats,
}

_FORMATTERS: Dict[str, Callable[[Any], str]] = {
    "float": _format_float,
    "int": str,
    "bool": lambda value: "true" if value else "false",
    "str": str,
    "floats": lambda values: ", ".join(_format_float(v) for v in values),
}

# section -> key -> (type, default); a None default means "derived when unset"
SCHEMA: Dict[str, Dict[str, Tuple[str, Any]]] = {
    _TOP_SECTION: {
        "command": ("str", None),
        "output": ("str", None),
        "plotdata": ("bool", False),
        "seed": ("int", 0),
        "threads": ("int", None),
    },
    "lattice": {
        "flavor": ("str", "monatomic"),
        "l": ("float", 1.0),
        "c": ("float", 1.0),
        "m": ("float", 1.0),
        "m1": ("float", None),
        "m2": ("float", None),
        "alpha": ("float", 0.0),
        "alpha1": ("float", None),
        "alpha2": ("float", None),
    },
    "spinner": {
        "i0": ("float", 1.0),
        "i": ("float", 1.0),
        "h": ("float", 1.0),
        "omega": ("float", 1.0),
        "branch": ("str", "plus"),
    },
    "dispersion": {
        "k1l": ("float", 0.0),
        "k2l": ("float", 0.0),
        "oracle": ("bool", False),
        "omega_max": ("float", 10.0),
        "n_steps": ("int", 4000),
    },
    "bands": {
        "resolution": ("int", 64),
        "omega_max": ("float", None),
        "gap_threshold": ("float", 1e-3),
        "probe_points": ("int", 0),
        "k1l_min": ("float", None),
        "k1l_max": ("float", None),
        "k2l_min": ("float", None),
        "k2l_max": ("float", None),
    },
    "sweep": {
        "alpha_min": ("float", 0.0),
        "alpha_max": ("float", 2.0),
        "alpha_steps": ("int", 41),
        "kl_min": ("float", 0.0),
        "kl_max": ("float", math.pi),
        "kl_steps": ("int", 65),
    },
    "contours": {
        "levels": ("floats", None),
        "resolution": ("int", 128),
    },
    "domain": {
        "size_wavelengths": ("float", 12.0),
        "size": ("float", None),
        "points_per_wavelength": ("float", 16.0),
        "spacing": ("float", None),
        "pml_cells": ("int", 20),
        "pml_strength": ("float", 10.0),
        "full_scale": ("bool", False),
    },
    "medium": {
        "lambda": ("float", None),
        "mu": ("float", 1.0),
        "rho": ("float", 1.0),
        "alpha": ("float", 0.0),
        "omega": ("float", 10.0),
    },
    "source": {
        "kind": ("str", "force"),
        "x": ("float", None),
        "y": ("float", None),
        "direction_x": ("float", None),
        "direction_y": ("float", None),
        "magnitude": ("float", 1.0),
    },
    "inclusion": {
        "enabled": ("bool", False),
        "x": ("float", 0.0),
        "y": ("float", 0.0),
        "r_inner": ("float", None),
        "lambda": ("float", 23.0),
        "mu": ("float", 12.0),
        "axis_x": ("float", 1.0),
        "axis_y": ("float", -1.0),
    },
    "coating": {
        "enabled": ("bool", False),
        "r_outer": ("float", None),
        "alpha": ("float", 0.0),
        "positive_side": ("int", -1),
    },
    "report": {
        "profile_samples": ("int", 512),
        "shadow_half_angle": ("float", 30.0),
        "reference": ("bool", False),
        "sweep_alphas": ("floats", None),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """
    Resolved run configuration: top-level settings plus one dict per schema section, every key
    present (unset derived values are None).
    """

    command: Optional[Command] = None
    output: Optional[str] = None
    plotdata: bool = False
    seed: int = 0
    threads: Optional[int] = None
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def section(self, name: str) -> Dict[str, Any]:
        return dict(self.sections[name])

    def scene_sections(self) -> Dict[str, Dict[str, Any]]:
        return {
            name: self.section(name)
            for name in ["domain", "medium", "source", "inclusion", "coating"]
        }


def _defaults() -> Dict[str, Dict[str, Any]]:
    return {
        name: {key: default for key, (_, default) in keys.items()}
        for name, keys in SCHEMA.items()
    }


def _convert(section: str, key: str, text: str, line: Optional[int]) -> Any:
    if section not in SCHEMA:
        raise ConfigError(f"Unknown section [{section}]", line)
    if key not in SCHEMA[section]:
        where = f"section [{section}]" if section else "the top level"
        raise ConfigError(f"Unknown key '{key}' in {where}", line)
    kind = SCHEMA[section][key][0]
    try:
        return _PARSERS[kind](text)
    except ValueError as e:
        raise ConfigError(f"Invalid {kind} value for '{key}': {e}", line)


def _build(values: Dict[str, Dict[str, Any]]) -> RunConfig:
    top = values.pop(_TOP_SECTION)
    command = top["command"]
    try:
        command = None if command is None else Command(command)
    except ValueError:
        raise ConfigError(
            f"Unknown command '{command}'. Expected one of {[c.value for c in Command]}"
        )
    return RunConfig(
        command=command,
        output=top["output"],
        plotdata=top["plotdata"],
        seed=top["seed"],
        threads=top["threads"],
        sections=values,
    )


def parse_config(text: str) -> RunConfig:
    """
    Parses ``key = value`` lines grouped under ``[section]`` headers.

    Keys before the first header belong to the top level. Blank lines and lines starting with
    '#' or ';' are ignored.

    Raises:
        ConfigError: On malformed lines, unknown sections or keys, bad values and duplicate keys.
    """
    values = _defaults()
    seen: Dict[Tuple[str, str], int] = {}
    section = _TOP_SECTION
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"Malformed section header '{line}'", number)
            section = line[1:-1].strip().lower()
            if section not in SCHEMA or section == _TOP_SECTION:
                raise ConfigError(f"Unknown section [{section}]", number)
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got '{line}'", number)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if (section, key) in seen:
            raise ConfigError(
                f"Duplicate key '{key}' on lines {seen[(section, key)]} and {number}", number
            )
        values[section][key] = _convert(section, key, value, number)
        seen[(section, key)] = number
    return _build(values)


def apply_overrides(config: RunConfig, overrides: List[str]) -> RunConfig:
    """Applies ``section.key=value`` (or top-level ``key=value``) overrides."""
    values = {name: dict(keys) for name, keys in config.sections.items()}
    values[_TOP_SECTION] = {
        "command": None if config.command is None else config.command.value,
        "output": config.output,
        "plotdata": config.plotdata,
        "seed": config.seed,
        "threads": config.threads,
    }
    for override in overrides:
        if "=" not in override:
            raise ConfigError(f"Override must look like section.key=value. Received: '{override}'")
        path, text = (part.strip() for part in override.split("=", 1))
        section, _, key = path.rpartition(".")
        values.setdefault(section.lower(), {})
        values[section.lower()][key.lower()] = _convert(section.lower(), key.lower(), text, None)
    return _build(values)


def serialize_config(config: RunConfig) -> str:
    """Inverse of ``parse_config``: writes every set value, omitting unset derived ones."""
    lines = []
    top = {
        "command": None if config.command is None else config.command.value,
        "output": config.output,
        "plotdata": config.plotdata,
        "seed": config.seed,
        "threads": config.threads,
    }
    for key, value in top.items():
        if value is not None:
            lines.append(f"{key} = {_FORMATTERS[SCHEMA[_TOP_SECTION][key][0]](value)}")
    for name, keys in SCHEMA.items():
        if name == _TOP_SECTION:
            continue
        lines.append("")
        lines.append(f"[{name}]")
        for key, (kind, _) in keys.items():
            value = config.sections[name].get(key)
            if value is not None:
                lines.append(f"{key} = {_FORMATTERS[kind](value)}")
    return "\n".join(lines) + "\n"


def resolved_parameters(config: RunConfig) -> dict:
    return {
        "command": None if config.command is None else config.command.value,
        "output": config.output,
        "plotdata": config.plotdata,
        "seed": config.seed,
        "threads": config.threads,
        "sections": {name: dict(keys) for name, keys in config.sections.items()},
    }
