"""Upper-level cost, drift-plus-penalty, delay tail and the Lagrangian state.

The delay-tail slack is exposed in the literal printed orientation
(exp(-a1 r D_max) - (1 - chi)); the Lagrangian update uses the
reliability-consistent sign by default, where positive slack means the
tail probability is below its budget, so the multiplier rises exactly when
the constraint is violated.  Setting ``eq12_as_printed`` in the queue
config reproduces the literal formula inside the Lagrangian as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LagrangianState:
    lambda_l: float = 0.0
    last_drift: float = 0.0
    last_penalty: float = 0.0
    last_slack: float = 0.0
    value: float = 0.0


@dataclass
class DelaySample:
    delays_s: np.ndarray
    violations: np.ndarray  # boolean, delay exceeded the deadline


def cost_h(rates_mbps, epsilon):
    """Sum of inverse-square rate terms; epsilon keeps zero rates finite."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    r = np.asarray(rates_mbps, dtype=float)
    return float(np.sum(1.0 / (r ** 2 + epsilon)))


def lyapunov_value(urllc_total, embb_total):
    """Quadratic network Lyapunov function on the slice-summed backlogs."""
    return 0.5 * (urllc_total ** 2 + embb_total ** 2)


def drift_plus_penalty(q_prev, q_next, h, penalty_weight):
    """Lyapunov drift between two queue states plus the weighted cost."""
    drift = lyapunov_value(q_next.urllc_total, q_next.embb_total) \
        - lyapunov_value(q_prev.urllc_total, q_prev.embb_total)
    return drift + penalty_weight * h


def delay_slack(rate_bits_per_s, net, qcfg):
    """Delay-tail slack in the literal printed form.

    exp(-a1 * r * D_max) - (1 - chi_s): positive when the tail probability
    still exceeds the reliability budget (see module docstring for the sign
    discussion).
    """
    r = np.asarray(rate_bits_per_s, dtype=float)
    tail = np.exp(-qcfg.delay_rate_coeff * r * net.delay_deadline_s)
    return tail - (1.0 - net.reliability_target)


def reliability_slack(rate_bits_per_s, net, qcfg):
    """Slack in the reliability-consistent sign: >= 0 means constraint met."""
    if qcfg.eq12_as_printed:
        return delay_slack(rate_bits_per_s, net, qcfg)
    return -delay_slack(rate_bits_per_s, net, qcfg)


def sample_delay(rng, rate_bits_per_s, net, qcfg) -> DelaySample:
    """Draw per-user end-to-end delays with tail P(D > d) = exp(-a1 r d).

    A zero rate yields an infinite delay, flagged as a violation.
    """
    r = np.asarray(rate_bits_per_s, dtype=float)
    delays = np.full(r.shape, np.inf)
    pos = r > 0
    if np.any(pos):
        delays[pos] = rng.exponential(1.0 / (qcfg.delay_rate_coeff * r[pos]))
    return DelaySample(delays_s=delays, violations=delays > net.delay_deadline_s)


def lagrangian_update(state: LagrangianState, drift, penalty, slack,
                      lagrange_lr) -> LagrangianState:
    """Advance the multiplier by projected ascent, then evaluate the Lagrangian.

    The multiplier moves against the slack sign (negative slack is a
    violation, so it rises then) and is projected at zero.  The stored value
    is drift + penalty - lambda * slack with the updated multiplier, so the
    state is always internally consistent.
    """
    new_lambda = max(0.0, state.lambda_l - lagrange_lr * slack)
    value = drift + penalty - new_lambda * slack
    return LagrangianState(lambda_l=new_lambda, last_drift=float(drift),
                           last_penalty=float(penalty), last_slack=float(slack),
                           value=float(value))
