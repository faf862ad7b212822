"""Flat ``key = value`` config files with unit-suffixed numbers.

The format is deliberately primitive (diff-friendly, parseable anywhere):
one assignment per line, ``#`` comments, units appended to numbers
(``g1 = 100 MHz``, ``tau_d = 1.5 ns``), comma lists with one trailing unit
(``T_grid = 5,10,15,20,25,30 us``). Unknown keys are rejected with the
offending line number. ``tol_<name>`` keys override the tolerance table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields

from .experiments import SimulationConfig
from .tolerances import DEFAULT, Tolerances, with_overrides


class ConfigError(ValueError):
    """Malformed config file or override (reported with line context)."""


_NUMBER_RE = re.compile(
    r"^(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(?P<unit>[A-Za-z]*)$"
)

_FREQ_TO_MHZ = {"Hz": 1e-6, "kHz": 1e-3, "MHz": 1.0, "GHz": 1e3}
_TIME_TO_S = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}

# key in file -> (SimulationConfig field, kind)
_KEYS: dict[str, tuple[str, str]] = {
    "g1": ("g1_mhz", "freq"),
    "g2": ("g2_mhz", "freq"),
    "Omega10": ("omega10_mhz", "freq"),
    "Omega21": ("omega21_mhz", "freq"),
    "tau_d": ("tau_d_ns", "time_ns"),
    "N_c": ("n_cavity", "int"),
    "alpha": ("alpha", "complex"),
    "beta": ("beta", "complex"),
    "gamma": ("gamma", "complex"),
    "T": ("t_us", "time_us"),
    "kappa_inv": ("kappa_inv_us", "time_us"),
    "T_grid": ("t_grid_us", "grid_us"),
    "kappa_inv_grid": ("kappa_inv_grid_us", "grid_us"),
    "max_phase_step": ("max_phase_step", "float"),
    "hard_step_cap": ("hard_step_cap_ns", "time_ns"),
    "schedule_mode": ("schedule_mode", "mode"),
    "seed": ("seed", "int"),
    "workers": ("workers", "int"),
    "fidelity_traced": ("fidelity_traced", "bool"),
    "check_convergence": ("check_convergence", "bool"),
}

_TOL_FIELDS = {f.name for f in fields(Tolerances)}


@dataclass
class LoadedConfig:
    sim: SimulationConfig
    tolerances: Tolerances


def _parse_scalar(value: str, where: str) -> tuple[float, str]:
    m = _NUMBER_RE.match(value.strip())
    if not m:
        raise ConfigError(f"{where}: cannot parse number {value!r}")
    return float(m.group("num")), m.group("unit")


def _to_mhz(value: str, where: str) -> float:
    num, unit = _parse_scalar(value, where)
    unit = unit or "MHz"
    if unit not in _FREQ_TO_MHZ:
        raise ConfigError(f"{where}: unknown frequency unit {unit!r}")
    return num * _FREQ_TO_MHZ[unit]


def _to_time(value: str, target: float, default_unit: str, where: str) -> float:
    num, unit = _parse_scalar(value, where)
    unit = unit or default_unit
    if unit not in _TIME_TO_S:
        raise ConfigError(f"{where}: unknown time unit {unit!r}")
    return num * _TIME_TO_S[unit] / target


def _to_complex(value: str, where: str) -> complex:
    try:
        return complex(value.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"{where}: cannot parse complex number {value!r}") from None


def _to_bool(value: str, where: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {value!r}")


def _to_grid_us(value: str, where: str) -> tuple[float, ...]:
    parts = [p.strip() for p in value.split(",")]
    if not parts or any(not p for p in parts):
        raise ConfigError(f"{where}: empty entry in list {value!r}")
    # A unit on the final entry applies to the whole list.
    _, last_unit = _parse_scalar(parts[-1], where)
    unit = last_unit or "us"
    out = []
    for p in parts:
        num, u = _parse_scalar(p, where)
        u = u or unit
        if u not in _TIME_TO_S:
            raise ConfigError(f"{where}: unknown time unit {u!r}")
        out.append(num * _TIME_TO_S[u] / 1e-6)
    return tuple(out)


def _convert(key: str, value: str, where: str):
    field_name, kind = _KEYS[key]
    if kind == "freq":
        return field_name, _to_mhz(value, where)
    if kind == "time_ns":
        return field_name, _to_time(value, 1e-9, "ns", where)
    if kind == "time_us":
        return field_name, _to_time(value, 1e-6, "us", where)
    if kind == "grid_us":
        return field_name, _to_grid_us(value, where)
    if kind == "int":
        num, unit = _parse_scalar(value, where)
        if unit or num != int(num):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return field_name, int(num)
    if kind == "float":
        num, unit = _parse_scalar(value, where)
        if unit:
            raise ConfigError(f"{where}: unexpected unit on {key!r}")
        return field_name, num
    if kind == "complex":
        return field_name, _to_complex(value, where)
    if kind == "bool":
        return field_name, _to_bool(value, where)
    if kind == "mode":
        mode = value.strip()
        if mode not in ("serial", "concurrent"):
            raise ConfigError(f"{where}: schedule_mode must be serial|concurrent")
        return field_name, mode
    raise AssertionError(f"unhandled kind {kind}")


def parse_assignment(line: str, where: str, sim: dict, tols: dict) -> None:
    if "=" not in line:
        raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
    key, _, value = line.partition("=")
    key = key.strip()
    value = value.strip()
    if not key or not value:
        raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
    if key.startswith("tol_"):
        name = key[4:]
        if name not in _TOL_FIELDS:
            raise ConfigError(f"{where}: unknown tolerance {key!r}")
        num, unit = _parse_scalar(value, where)
        if unit:
            raise ConfigError(f"{where}: tolerances are dimensionless")
        tols[name] = int(num) if name == "max_dim" else num
        return
    if key not in _KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    field_name, converted = _convert(key, value, where)
    sim[field_name] = converted


def parse_config_text(text: str, source: str = "<config>") -> LoadedConfig:
    sim: dict = {}
    tols: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parse_assignment(line, f"{source}:{lineno}", sim, tols)
    return _build(sim, tols)


def _build(sim: dict, tols: dict) -> LoadedConfig:
    try:
        cfg = SimulationConfig(**sim)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return LoadedConfig(sim=cfg, tolerances=with_overrides(DEFAULT, tols))


def load_config(
    path: str | None = None,
    overrides: tuple[str, ...] = (),
) -> LoadedConfig:
    """Load a config file (or defaults) and apply ``key=value`` overrides."""
    sim: dict = {}
    tols: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parse_assignment(line, f"{path}:{lineno}", sim, tols)
    for i, item in enumerate(overrides, start=1):
        parse_assignment(item.strip(), f"--set #{i}", sim, tols)
    return _build(sim, tols)


def reference_config_text() -> str:
    """A commented config reproducing the reference parameter set."""
    return (
        "# Reference parameters: all drives at 2*pi*100 MHz.\n"
        "g1 = 100 MHz\n"
        "g2 = 100 MHz\n"
        "Omega10 = 100 MHz\n"
        "Omega21 = 100 MHz\n"
        "tau_d = 1.5 ns\n"
        "N_c = 3\n"
        "# Weights of alpha|00> + beta|11> + gamma|22> (normalized on load).\n"
        "alpha = 0.5773502691896258\n"
        "beta = 0.5773502691896258\n"
        "gamma = 0.5773502691896258\n"
        "# Decoherence point for 'evolve'.\n"
        "T = 30 us\n"
        "kappa_inv = 2.5 us\n"
        "# Sweep grids.\n"
        "T_grid = 5,10,15,20,25,30 us\n"
        "kappa_inv_grid = 0.5,1.0,1.5,2.0,2.5,3.0 us\n"
        "max_phase_step = 0.005\n"
        "schedule_mode = serial\n"
        "seed = 42\n"
        "workers = 1\n"
    )
