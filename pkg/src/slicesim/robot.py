"""Delayed discrete-time plant, reference trajectories and the dexterity index.

The default plant is a two-axis double integrator expressed per control
step: state per axis is (position, velocity), the control input is an
acceleration, and a delayed self-coupling A_d x(k - T_d) models the effect
of network delay on the plant per the delayed linear model.  Feedback uses
the current state; the delay enters through the coupling term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DI_TRACKING_NORM = 10.0
DI_ORIENTATION_NORM = 180.0
DI_CURVATURE_NORM = 1.0
_SPEED_FLOOR = 1e-3


@dataclass
class RobotState:
    """Plant state with enough history to evaluate delayed couplings.

    The history ring holds the last ``capacity`` states (oldest first); the
    capacity covers twice the nominal delay bound so violation scenarios can
    still be simulated.
    """

    history: list                 # of state vectors, newest last
    gain: np.ndarray              # state-feedback gain K
    last_input: np.ndarray = None
    capacity: int = 7
    prev_position: np.ndarray = None
    prev_heading: float = None    # degrees, heading of the last movement

    @classmethod
    def initial(cls, gain, n_states, capacity):
        x0 = np.zeros(n_states)
        return cls(history=[x0.copy() for _ in range(capacity)], gain=gain,
                   last_input=None, capacity=capacity,
                   prev_position=x0[0::2].copy(), prev_heading=None)

    @property
    def state(self) -> np.ndarray:
        return self.history[-1]

    @property
    def position(self) -> np.ndarray:
        return self.state[0::2]

    @property
    def velocity(self) -> np.ndarray:
        return self.state[1::2]

    def delayed_state(self, delay_steps) -> np.ndarray:
        if delay_steps >= self.capacity:
            raise ValueError(
                f"delay of {delay_steps} steps exceeds history capacity {self.capacity}")
        return self.history[-1 - delay_steps]


def lift_setpoint(setpoint) -> np.ndarray:
    """Embed a position setpoint into the full state (zero desired velocity)."""
    sp = np.asarray(setpoint, dtype=float)
    ref = np.zeros(2 * len(sp))
    ref[0::2] = sp
    return ref


def step_plant(rs: RobotState, setpoint, delay_steps, cfg) -> RobotState:
    """Advance the plant one step under state feedback toward the setpoint."""
    if delay_steps < 0:
        raise ValueError("delay_steps must be >= 0")
    a, ad, b = cfg.plant_a(), cfg.plant_ad(), cfg.plant_b()
    x = rs.state
    xd = rs.delayed_state(delay_steps)
    ref = lift_setpoint(setpoint)
    u = -rs.gain @ (x - ref)
    x_next = a @ x + ad @ xd + b @ u
    hist = rs.history[1:] + [x_next]
    return RobotState(history=hist, gain=rs.gain, last_input=u,
                      capacity=rs.capacity, prev_position=rs.position.copy(),
                      prev_heading=rs.prev_heading)


def _heading_deg(v) -> float:
    return math.degrees(math.atan2(v[1], v[0]))


def _wrap_deg(d) -> float:
    return abs((d + 180.0) % 360.0 - 180.0)


def track_components(rs: RobotState, setpoint, prev_setpoint):
    """Extract (tracking_error, orientation_error_deg, curvature) for one step.

    Orientation compares the velocity heading against the reference heading;
    when the reference is stationary the direction toward the setpoint
    stands in.  Curvature is the discrete |heading change| / arc length of
    the executed path, clamped to [0, 1].  Updates the state's path memory.
    """
    pos, vel = rs.position, rs.velocity
    sp = np.asarray(setpoint, dtype=float)
    tracking = float(np.linalg.norm(pos - sp))

    ref_vel = sp - np.asarray(prev_setpoint, dtype=float)
    if np.linalg.norm(ref_vel) > _SPEED_FLOOR:
        ref_heading = _heading_deg(ref_vel)
    elif np.linalg.norm(sp - pos) > _SPEED_FLOOR:
        ref_heading = _heading_deg(sp - pos)
    else:
        ref_heading = None
    if ref_heading is not None and np.linalg.norm(vel) > _SPEED_FLOOR:
        orientation = _wrap_deg(_heading_deg(vel) - ref_heading)
    else:
        orientation = 0.0

    dpos = pos - rs.prev_position
    arclen = float(np.linalg.norm(dpos))
    if rs.prev_heading is not None and arclen > 1e-9:
        dh = _wrap_deg(_heading_deg(dpos) - rs.prev_heading)
        curvature = min(DI_CURVATURE_NORM, math.radians(dh) / arclen)
    else:
        curvature = 0.0
    if arclen > 1e-9:
        rs.prev_heading = _heading_deg(dpos)
    return tracking, orientation, curvature


@dataclass
class DexterityIndex:
    value: float
    tracking_error: float
    orientation_error: float
    curvature: float


def compute_di(components) -> DexterityIndex:
    """Dexterity index from a window of (tracking, orientation, curvature) rows.

    Components are averaged over the window first, then scored as
    0.4*max(0, 1 - tracking/10) + 0.3*(max(0, 1 - orientation/180)
    + max(0, 1 - curvature/1)).
    """
    arr = np.asarray(components, dtype=float)
    if arr.size == 0:
        raise ValueError("compute_di needs a non-empty component window")
    arr = arr.reshape(-1, 3)
    tr, oe, cu = arr.mean(axis=0)
    value = (0.4 * max(0.0, 1.0 - tr / DI_TRACKING_NORM)
             + 0.3 * (max(0.0, 1.0 - oe / DI_ORIENTATION_NORM)
                      + max(0.0, 1.0 - cu / DI_CURVATURE_NORM)))
    return DexterityIndex(value=value, tracking_error=float(tr),
                          orientation_error=float(oe), curvature=float(cu))


@dataclass
class ReferenceTrajectory:
    """Setpoint schedule; kinds are tuned to land in distinct DI bands."""

    kind: str
    horizon: int
    _fn: callable

    def setpoint(self, k) -> np.ndarray:
        return self._fn(max(0, min(k, self.horizon - 1)))


def make_reference(kind, horizon, rng=None, waypoints=None) -> ReferenceTrajectory:
    """Build one of the named reference classes (or hold custom waypoints).

    high: slow saturating ramp, easy to track (measured DI ~ 0.85);
    moderate: gentle orbit (DI ~ 0.65); low: near-aliasing fast orbit that
    defeats tracking, heading and curvature at once (DI ~ 0.33).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if kind == "high":
        def fn(k):
            s = min(0.05 * k, 6.0)
            return np.array([s * math.sqrt(0.5), s * math.sqrt(0.5)])
    elif kind == "moderate":
        def fn(k):
            return np.array([1.5 * math.cos(0.5 * k), 1.5 * math.sin(0.5 * k)])
    elif kind == "low":
        def fn(k):
            return np.array([9.0 * math.cos(2.9 * k), 9.0 * math.sin(2.9 * k)])
    elif kind == "custom":
        if not waypoints:
            raise ValueError("custom reference needs waypoints")
        pts = sorted((int(s), np.asarray(p, dtype=float)) for s, p in waypoints)

        def fn(k):
            cur = pts[0][1]
            for s, p in pts:
                if s <= k:
                    cur = p
            return cur
    else:
        raise ValueError(f"unknown reference kind {kind!r}")
    return ReferenceTrajectory(kind=kind, horizon=horizon, _fn=fn)


def deadbeat_gain(cfg) -> np.ndarray:
    """Dead-beat gain for the unit-step double integrator (per-axis [1, 1.5])."""
    k1 = np.array([[1.0, 1.5]])
    return np.kron(np.eye(cfg.axes), k1)
