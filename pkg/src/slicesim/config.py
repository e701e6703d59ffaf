"""Typed configuration for the slicing simulator.

All scalars the model needs live here, grouped by subsystem.  Values are
loaded from a flat TOML file and/or ``key=value`` override strings; every
load runs the full validation pass.  Power-like quantities are stored in
dBm exactly as configured and converted to linear watts once, through the
derived properties, so all downstream math is linear-scale.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np


class ConfigError(ValueError):
    """A configuration field violated its documented bound."""


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class NetworkConfig:
    """Radio parameters (defaults follow the standard simulation table)."""

    bandwidth_hz: float = 10e6          # total system bandwidth B
    noise_variance_dbm: float = -110.0  # sigma^2
    transmit_power_dbm: float = 20.0    # p_ij, per PRB
    num_prbs: int = 25                  # K
    reliability_target: float = 0.95    # chi_s
    delay_deadline_s: float = 0.02      # D_max
    n_embb: int = 3
    n_urllc: int = 3
    rayleigh_scale: float = 1.0

    @property
    def n_users(self) -> int:
        return self.n_embb + self.n_urllc

    @property
    def prb_bandwidth_hz(self) -> float:
        # B in the rate formula is per-PRB bandwidth; the configured value is
        # the total, so divide by K once here.
        return self.bandwidth_hz / self.num_prbs

    @property
    def noise_variance_w(self) -> float:
        return dbm_to_watts(self.noise_variance_dbm)

    @property
    def transmit_power_w(self) -> float:
        return dbm_to_watts(self.transmit_power_dbm)

    def validate(self):
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be > 0")
        if self.transmit_power_w <= 0 or self.noise_variance_w <= 0:
            raise ConfigError("powers must convert to positive watts")
        if self.num_prbs < 1:
            raise ConfigError("num_prbs must be >= 1")
        if self.n_embb < 1 or self.n_urllc < 1:
            raise ConfigError("each slice needs at least one user")
        if self.num_prbs < self.n_embb + self.n_urllc:
            raise ConfigError(
                f"num_prbs >= n_embb+n_urllc violated "
                f"({self.num_prbs} < {self.n_embb}+{self.n_urllc})")
        if not 0.0 < self.reliability_target <= 1.0:
            raise ConfigError(
                f"reliability_target (chi_s) must lie in (0, 1], got {self.reliability_target}")
        if self.delay_deadline_s <= 0:
            raise ConfigError("delay_deadline_s must be > 0")
        if self.rayleigh_scale <= 0:
            raise ConfigError("rayleigh_scale must be > 0")


@dataclass
class QueueConfig:
    """Arrival/departure laws for both slices.

    ``base_arrival_rate`` and ``arrival_sensitivity`` parameterize the
    rate-adjusted Poisson arrivals of the teleoperation slice; the adjusted
    rate subtracts ``arrival_sensitivity`` times the user rate expressed in
    Mbps (clamped at zero).  ``delay_rate_coeff`` couples per-user data rate
    to the end-to-end delay tail; the default puts the 5%-violation root
    near a two-PRB data rate so the reliability constraint is active but
    satisfiable at default channel scales.
    """

    base_arrival_rate: float = 50.0       # lambda_0, packets/s
    arrival_sensitivity: float = 0.1      # alpha in (0,1), per Mbps
    serving_coefficient: float = 1e5      # beta, bits/s per unit DI
    embb_arrival_rate: float = 4500.0     # packets/s per eMBB user
    delay_rate_coeff: float = 4.3e-6      # alpha_1, per bit
    epsilon: float = 1e-3                 # cost floor in the inverse-square cost
    penalty_weight: float = 10.0          # V
    slot_duration_s: float = 0.01         # tau
    urllc_packet_bytes: int = 256
    embb_packet_bytes: int = 1500
    eq12_as_printed: bool = False         # keep the literal slack sign from the source formula

    def validate(self):
        if not 0.0 < self.arrival_sensitivity < 1.0:
            raise ConfigError(
                f"arrival_sensitivity (alpha) must lie in (0, 1), got {self.arrival_sensitivity}")
        if self.serving_coefficient <= 0:
            raise ConfigError("serving_coefficient (beta) must be > 0")
        if self.base_arrival_rate < 0 or self.embb_arrival_rate < 0:
            raise ConfigError("arrival rates must be >= 0")
        if self.delay_rate_coeff <= 0:
            raise ConfigError("delay_rate_coeff (alpha_1) must be > 0")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if self.penalty_weight <= 0:
            raise ConfigError("penalty_weight (V) must be > 0")
        if self.slot_duration_s <= 0:
            raise ConfigError("slot_duration_s must be > 0")
        if self.urllc_packet_bytes <= 0 or self.embb_packet_bytes <= 0:
            raise ConfigError("packet sizes must be > 0")


@dataclass
class ControlConfig:
    """Delay-robust control loop parameters.

    The default plant is a two-axis double integrator expressed per control
    step, with a delayed self-coupling of strength ``delayed_coupling``.
    ``sampling_interval_s`` is the wall-clock length of one control step and
    binds sampled network delays (seconds) to plant delays (steps).
    """

    axes: int = 2
    delayed_coupling: float = 0.1     # A_d = coupling * I
    max_delay_steps: int = 3          # T_d^max
    decay_rate: float = 0.15          # alpha of the Razumikhin condition
    sampling_interval_s: float = 0.01
    lqr_q_weight: float = 0.01        # ladder start for the state weight
    lqr_r_weight: float = 1.0
    synth_ladder_factor: float = 1.25
    synth_ladder_steps: int = 30

    @property
    def gamma(self) -> float:
        return 1.0 + self.decay_rate * self.max_delay_steps

    @property
    def n_states(self) -> int:
        return 2 * self.axes

    def plant_a(self) -> np.ndarray:
        a1 = np.array([[1.0, 1.0], [0.0, 1.0]])
        return np.kron(np.eye(self.axes), a1)

    def plant_ad(self) -> np.ndarray:
        return self.delayed_coupling * np.eye(self.n_states)

    def plant_b(self) -> np.ndarray:
        b1 = np.array([[0.5], [1.0]])
        return np.kron(np.eye(self.axes), b1)

    def validate(self):
        if self.axes < 1:
            raise ConfigError("axes must be >= 1")
        if self.max_delay_steps < 0:
            raise ConfigError("max_delay_steps must be >= 0")
        if self.decay_rate <= 0:
            raise ConfigError("decay_rate must be > 0")
        if self.gamma <= 1.0 and self.max_delay_steps > 0:
            raise ConfigError("gamma = 1 + decay_rate*max_delay_steps must exceed 1")
        if self.sampling_interval_s <= 0:
            raise ConfigError("sampling_interval_s must be > 0")
        if self.lqr_q_weight <= 0 or self.lqr_r_weight <= 0:
            raise ConfigError("LQR weights must be > 0")
        if self.synth_ladder_factor <= 1.0:
            raise ConfigError("synth_ladder_factor must be > 1")


@dataclass
class DrlConfig:
    """Hyperparameters of the dual-agent actor-critic."""

    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    discount: float = 0.95
    replay_capacity: int = 10000
    batch_size: int = 64
    episodes: int = 300
    steps_per_episode: int = 50
    lagrange_lr: float = 0.01
    hidden_sizes: tuple = (64, 64)
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.5   # fraction of training over which epsilon anneals
    entropy_coeff: float = 0.01
    reward_clip: float = 100.0
    queue_norm: float = 100.0     # backlog scale used inside the reward drift term
    seed: int = 0

    def validate(self):
        if not 0.0 <= self.discount < 1.0:
            raise ConfigError(f"discount must lie in [0, 1), got {self.discount}")
        if self.replay_capacity < self.batch_size:
            raise ConfigError("replay_capacity must be >= batch_size")
        if min(self.actor_lr, self.critic_lr, self.lagrange_lr) <= 0:
            raise ConfigError("learning rates must be > 0")
        if self.episodes < 0 or self.steps_per_episode < 1:
            raise ConfigError("episode counts out of range")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigError("epsilon schedule must satisfy 0 <= eps_end <= eps_start <= 1")
        if not 0.0 < self.eps_decay_frac <= 1.0:
            raise ConfigError("eps_decay_frac must lie in (0, 1]")
        if self.reward_clip <= 0 or self.queue_norm <= 0:
            raise ConfigError("reward_clip and queue_norm must be > 0")
        if any(h < 1 for h in self.hidden_sizes):
            raise ConfigError("hidden sizes must be >= 1")


@dataclass
class SimConfig:
    """Bundle of all subsystem configs plus simulator-level knobs."""

    network: NetworkConfig = field(default_factory=NetworkConfig)
    queue: QueueConfig = field(default_factory=QueueConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    drl: DrlConfig = field(default_factory=DrlConfig)
    di_window: int = 20
    reference_kind: str = "moderate"

    def validate(self):
        self.network.validate()
        self.queue.validate()
        self.control.validate()
        self.drl.validate()
        if self.di_window < 1:
            raise ConfigError("di_window must be >= 1")
        if self.reference_kind not in ("low", "moderate", "high", "custom"):
            raise ConfigError(f"unknown reference_kind {self.reference_kind!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["drl"]["hidden_sizes"] = list(self.drl.hidden_sizes)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SECTIONS = ("network", "queue", "control", "drl")


def _field_map():
    """Map flat field name -> (section, field descriptor)."""
    out = {}
    for section, cls in zip(_SECTIONS, (NetworkConfig, QueueConfig, ControlConfig, DrlConfig)):
        for f in dataclasses.fields(cls):
            if f.name in out:
                raise RuntimeError(f"duplicate config field name {f.name}")
            out[f.name] = (section, f)
    for f in dataclasses.fields(SimConfig):
        if f.name not in _SECTIONS:
            out[f.name] = (None, f)
    return out


def _coerce(raw, f):
    t = f.type
    if isinstance(raw, str):
        if t in ("int", int):
            return int(raw)
        if t in ("float", float):
            return float(raw)
        if t in ("bool", bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"cannot parse boolean from {raw!r} for {f.name}")
        if t in ("tuple", tuple):
            return tuple(int(x) for x in raw.split(":") if x)
        return raw
    if t in ("int", int):
        if isinstance(raw, float) and not raw.is_integer():
            raise ConfigError(f"{f.name} expects an integer, got {raw}")
        return int(raw)
    if t in ("float", float):
        return float(raw)
    if t in ("tuple", tuple):
        return tuple(int(x) for x in raw)
    return raw


def load_config(path=None, overrides=(), env=None) -> SimConfig:
    """Build a validated SimConfig from an optional TOML file plus overrides.

    Override precedence: file < environment (``SLICESIM_<FIELD>``) < explicit
    ``key=value`` strings.  Keys are the flat field names of the subsystem
    configs; unknown keys are rejected.
    """
    fmap = _field_map()
    values = {}

    if path is not None:
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
        flat = {}
        for key, val in data.items():
            if isinstance(val, dict):  # allow optional [section] grouping
                for k2, v2 in val.items():
                    flat[k2] = v2
            else:
                flat[key] = val
        values.update(flat)

    if env:
        for field_name in fmap:
            env_key = "SLICESIM_" + field_name.upper()
            if env_key in env:
                values[field_name] = env[env_key]

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, val = item.partition("=")
        values[key.strip()] = val.strip()

    cfg = SimConfig()
    for key, raw in values.items():
        if key not in fmap:
            raise ConfigError(f"unknown config key {key!r}")
        section, f = fmap[key]
        val = _coerce(raw, f)
        target = cfg if section is None else getattr(cfg, section)
        setattr(target, key, val)

    cfg.validate()
    return cfg


def dump_config(cfg: SimConfig) -> str:
    """Serialize to the flat TOML dialect accepted by load_config."""
    lines = []
    for section in _SECTIONS:
        sub = getattr(cfg, section)
        for f in dataclasses.fields(sub):
            val = getattr(sub, f.name)
            if isinstance(val, bool):
                lines.append(f"{f.name} = {'true' if val else 'false'}")
            elif isinstance(val, tuple):
                lines.append(f"{f.name} = [{', '.join(str(v) for v in val)}]")
            elif isinstance(val, str):
                lines.append(f'{f.name} = "{val}"')
            else:
                lines.append(f"{f.name} = {val!r}")
    lines.append(f"di_window = {cfg.di_window}")
    lines.append(f'reference_kind = "{cfg.reference_kind}"')
    return "\n".join(lines) + "\n"
