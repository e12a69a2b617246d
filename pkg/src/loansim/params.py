"""Flat run-parameter set: the sweep keys plus fixed knobs, file parsing for
the `key = value` config format, and environment-variable overrides.

Bias knob values map one-to-one onto generator coefficients; the matching
measurement-noise scale switches on whenever its knob is nonzero, so a zero
knob reproduces the undistorted column exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass

from .errors import ConfigError
from .glm import UtilityParams
from .policies import Method, PolicyConfig
from .simulator import SimConfig
from .synthgen import BiasConfig

ENV_PREFIX = "SIM_"


@dataclass(frozen=True)
class RunParams:
    # swept bias knobs
    l_y: float = 0.0        # historical bias on the latent score
    l_m_y: float = 0.0      # measurement bias on the observed label
    l_h_r: float = 0.0      # historical bias on resources
    l_h_q: float = 0.0      # historical bias on the contextual feature
    l_m: float = 0.0        # proxy measurement bias on resources
    l_y_b: float = 0.0      # group-by-resource interaction bias on the label
    # swept method hyperparameters
    proportion_certain: float = 0.7
    delta: float = 0.05
    random_seed: int = 0
    # fixed data generation
    dim: int = 20000
    num_partitions: int = 8
    l_q: int = 2
    sy: float = 2.0
    # fixed decision procedure
    rejection_threshold: float = 0.1
    budget_prop: float = 0.8
    gain_percentage: float = 0.4
    # fixed model training
    n_epochs: int = 40
    lr: float = 0.05
    # extras outside the results-CSV columns
    omit_resource: bool = False
    include_sensitive: bool = True
    method: str = "all"

    def bias_config(self) -> BiasConfig:
        return BiasConfig(
            beta_Y_hist=self.l_y,
            beta_Y_meas=self.l_m_y,
            beta_R_hist=self.l_h_r,
            beta_Q_hist=self.l_h_q,
            beta_R_meas=self.l_m,
            beta_Y_interact=self.l_y_b,
            sigma_R_meas=1.0 if self.l_m > 0 else 0.0,
            sigma_S_meas=1.0 if (self.l_m_y > 0 or self.l_y_b > 0) else 0.0,
            q_levels=self.l_q,
            sigma_S=self.sy,
            omit_resource=self.omit_resource,
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            bias=self.bias_config(),
            policy=PolicyConfig(
                rejection_threshold=self.rejection_threshold,
                proportion_certain=self.proportion_certain,
                delta_explore=self.delta,
            ),
            utility=UtilityParams(gain=self.gain_percentage),
            dim=self.dim,
            num_partitions=self.num_partitions,
            budget_prop=self.budget_prop,
            n_epochs=self.n_epochs,
            lr=self.lr,
            seed=self.random_seed,
            include_sensitive=self.include_sensitive,
        )

    def content_hash(self) -> str:
        parts = [f"{f.name}={getattr(self, f.name)!r}"
                 for f in dataclasses.fields(RunParams)]
        return hashlib.sha256(";".join(parts).encode("utf-8")).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunParams)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"invalid value for key '{key}': {raw!r}") from None


def parse_config_text(text: str) -> dict[str, list]:
    """Parse `key = value` lines; comma-separated values become lists."""
    values: dict[str, list] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno} is not 'key = value': {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key '{key}'")
        values[key] = [_coerce(key, part) for part in raw.split(",")]
    return values


def _env_overrides() -> dict[str, list]:
    out = {}
    for key in _FIELD_TYPES:
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            out[key] = [_coerce(key, part) for part in raw.split(",")]
    return out


def load_config_values(path: str | None) -> dict[str, list]:
    """File values (if any) with SIM_* environment overrides applied."""
    values: dict[str, list] = {}
    if path is not None:
        try:
            with open(path) as fh:
                values = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values.update(_env_overrides())
    return values


def run_params_from_values(values: dict[str, list]) -> RunParams:
    scalars = {}
    for key, vals in values.items():
        if len(vals) != 1:
            raise ConfigError(
                f"key '{key}' has {len(vals)} values; lists are only valid in sweep grids")
        scalars[key] = vals[0]
    return RunParams(**scalars)


def load_run_params(path: str | None, seed_override: int | None = None) -> RunParams:
    params = run_params_from_values(load_config_values(path))
    if seed_override is not None:
        params = dataclasses.replace(params, random_seed=seed_override)
    return params


def parse_method(name: str) -> Method:
    try:
        return Method(name)
    except ValueError:
        valid = ", ".join(m.value for m in Method)
        raise ConfigError(f"unknown method '{name}'; valid: {valid}, all") from None
