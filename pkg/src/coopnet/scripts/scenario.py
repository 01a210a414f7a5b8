"""
Scenario Files

Line-oriented `key = value` grammar:
- `#` starts a comment, blank lines are ignored
- numeric values may carry a dB suffix (`sigma2_sr = 30dB` is 1000)
- lists are comma-separated (`rates = 2, 4`)
- unknown or repeated keys are errors

Example:
    schemes = DF-MSC-opt, DDF
    M = 15
    K = 3
    Nr = 3
    rate = 2
    snr_db_start = 0
    snr_db_stop = 30
    snr_db_step = 5
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ..simulator.channel import SystemParams
from ..simulator.config import (
    DEFAULT_CODEWORD_LENGTH,
    DEFAULT_DELTA_R,
    DEFAULT_RATE_TOLERANCE,
    DEFAULT_TARGET_POUT,
    DEFAULT_TRIALS,
    Scheme,
)
from ..simulator.errors import ConfigParseError, ConfigValidationError, ParameterError
from ..simulator.numerics import db_to_linear, linear_to_db

_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(db)?$", re.IGNORECASE)

# key -> (kind, canonical name)
_KEYS: Dict[str, Tuple[str, str]] = {
    "scheme": ("schemes", "schemes"),
    "schemes": ("schemes", "schemes"),
    "M": ("int", "M"),
    "K": ("int", "K"),
    "Nr": ("int", "Nr"),
    "N": ("int", "N"),
    "rate": ("floats", "rates"),
    "rates": ("floats", "rates"),
    "rho_s": ("linear", "rho_s"),
    "relay_powers": ("linears", "relay_powers"),
    "sigma2_sr": ("linear", "sigma2_sr"),
    "sigma2_d": ("linear", "sigma2_d"),
    "snr_db_start": ("float", "snr_db_start"),
    "snr_db_stop": ("float", "snr_db_stop"),
    "snr_db_step": ("float", "snr_db_step"),
    "trials": ("int", "trials"),
    "master_seed": ("int", "master_seed"),
    "target_pout": ("float", "target_pout"),
    "rate_tolerance": ("float", "rate_tolerance"),
    "delta_r": ("float", "delta_r"),
    "region": ("int", "region"),
    "output": ("str", "output"),
}

_SCHEMES_BY_NAME = {scheme.value.lower(): scheme for scheme in Scheme}


@dataclass(frozen=True)
class ScenarioConfig:
    """A parsed, validated scenario file."""

    schemes: Tuple[Scheme, ...]
    params: SystemParams
    snr_db_start: float
    snr_db_stop: float
    snr_db_step: float
    rates: Tuple[float, ...]
    trials: int = DEFAULT_TRIALS
    master_seed: Optional[int] = None
    target_pout: float = DEFAULT_TARGET_POUT
    rate_tolerance: float = DEFAULT_RATE_TOLERANCE
    delta_r: float = DEFAULT_DELTA_R
    region: Optional[int] = None
    output: Optional[str] = None

    @property
    def snr_grid_db(self) -> Tuple[float, ...]:
        return snr_grid(self.snr_db_start, self.snr_db_stop, self.snr_db_step)


def snr_grid(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """Inclusive grid start, start+step, ..., <= stop."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


# ============================================================================
# Value parsing
# ============================================================================

def _number(token: str, line_number: int, allow_db: bool) -> float:
    match = _NUMBER.match(token.strip())
    if not match:
        raise ConfigParseError(line_number, f"not a number: {token.strip()!r}")
    value = float(match.group(1))
    if match.group(2):
        if not allow_db:
            raise ConfigParseError(line_number, f"dB suffix not allowed here: {token.strip()!r}")
        value = db_to_linear(value)
    return value


def _integer(token: str, line_number: int) -> int:
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    value = _number(token, line_number, allow_db=False)
    if not value.is_integer():
        raise ConfigParseError(line_number, f"not an integer: {token!r}")
    return int(value)


def _list(value: str, line_number: int):
    items = [item.strip() for item in value.split(",")]
    if any(not item for item in items):
        raise ConfigParseError(line_number, f"empty list element in {value!r}")
    return items


def _convert(kind: str, value: str, line_number: int):
    if kind == "int":
        return _integer(value, line_number)
    if kind == "float":
        return _number(value, line_number, allow_db=False)
    if kind == "linear":
        return _number(value, line_number, allow_db=True)
    if kind == "floats":
        return tuple(_number(v, line_number, allow_db=False) for v in _list(value, line_number))
    if kind == "linears":
        return tuple(_number(v, line_number, allow_db=True) for v in _list(value, line_number))
    if kind == "schemes":
        schemes = []
        for name in _list(value, line_number):
            if name.lower() not in _SCHEMES_BY_NAME:
                valid = ", ".join(s.value for s in Scheme)
                raise ConfigParseError(line_number, f"unknown scheme {name!r} (valid: {valid})")
            schemes.append(_SCHEMES_BY_NAME[name.lower()])
        return tuple(schemes)
    return value


def _read_pairs(text: str) -> Dict[str, object]:
    values: Dict[str, object] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigParseError(line_number, f"expected 'key = value', got {raw.strip()!r}")
        if not value:
            raise ConfigParseError(line_number, f"missing value for {key!r}")
        if key not in _KEYS:
            raise ConfigParseError(line_number, f"unknown key {key!r}")
        kind, name = _KEYS[key]
        if name in values:
            raise ConfigParseError(line_number, f"{key!r} given more than once")
        values[name] = _convert(kind, value, line_number)
    return values


# ============================================================================
# Validation
# ============================================================================

def parse_config(text: str) -> ScenarioConfig:
    """
    Parse and validate a scenario file.

    Raises:
        ConfigParseError: On grammar errors, with the offending line number
        ConfigValidationError: When a value violates a scenario invariant
    """
    values = _read_pairs(text)

    for required in ("M", "K", "Nr", "rates"):
        if required not in values:
            raise ConfigValidationError(f"missing required key {required!r}")

    start = values.get("snr_db_start")
    if start is None:
        rho_s = values.get("rho_s", 1.0)
        start = linear_to_db(rho_s) if rho_s > 0 else 0.0
    stop = values.get("snr_db_stop", start)
    step = values.get("snr_db_step", 1.0)
    if not step > 0.0:
        raise ConfigValidationError(f"snr_db_step > 0 required, got {step}")
    if stop < start:
        raise ConfigValidationError(f"snr_db_stop ≥ snr_db_start required, got {stop} < {start}")

    rates = values["rates"]
    if any(not r > 0.0 for r in rates):
        raise ConfigValidationError(f"every rate must be positive, got {rates}")

    trials = values.get("trials", DEFAULT_TRIALS)
    if trials < 1:
        raise ConfigValidationError(f"trials ≥ 1 required, got {trials}")
    seed = values.get("master_seed")
    if seed is not None and not 0 <= seed < 2 ** 64:
        raise ConfigValidationError(f"master_seed must be a 64-bit unsigned integer, got {seed}")
    target = values.get("target_pout", DEFAULT_TARGET_POUT)
    if not 0.0 < target < 1.0:
        raise ConfigValidationError(f"0 < target_pout < 1 required, got {target}")
    tolerance = values.get("rate_tolerance", DEFAULT_RATE_TOLERANCE)
    if not tolerance > 0.0:
        raise ConfigValidationError(f"rate_tolerance > 0 required, got {tolerance}")
    delta_r = values.get("delta_r", DEFAULT_DELTA_R)
    if not delta_r > 0.0:
        raise ConfigValidationError(f"delta_r > 0 required, got {delta_r}")

    try:
        params = SystemParams(
            M=values["M"],
            K=values["K"],
            Nr=values["Nr"],
            R=rates[0],
            rho_s=values.get("rho_s", db_to_linear(start)),
            N=values.get("N", DEFAULT_CODEWORD_LENGTH),
            sigma2_sr=values.get("sigma2_sr", 1.0),
            sigma2_d=values.get("sigma2_d", 1.0),
            relay_powers=values.get("relay_powers"),
        )
    except ParameterError as e:
        raise ConfigValidationError(str(e)) from e

    region = values.get("region")
    L_T = min(params.Nr, params.K + 1)
    if region is not None and not 0 <= region < L_T:
        raise ConfigValidationError(f"0 ≤ region < min(Nr, K+1) = {L_T} required, got {region}")

    return ScenarioConfig(
        schemes=values.get("schemes", (Scheme.DF_MSC_OPT,)),
        params=params,
        snr_db_start=start,
        snr_db_stop=stop,
        snr_db_step=step,
        rates=rates,
        trials=trials,
        master_seed=seed,
        target_pout=target,
        rate_tolerance=tolerance,
        delta_r=delta_r,
        region=region,
        output=values.get("output"),
    )
