"""Rayleigh block-fading channel and the per-user PRB rate computation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ChannelState:
    """Per-(user, PRB) fading amplitudes for one decision slot."""

    gains: np.ndarray  # shape (n_users, K), amplitudes >= 0
    slot_index: int = 0

    @property
    def n_users(self):
        return self.gains.shape[0]

    @property
    def n_prbs(self):
        return self.gains.shape[1]


@dataclass
class PRBAllocation:
    """Binary user-by-PRB assignment matrix."""

    assign: np.ndarray  # shape (n_users, K), entries in {0, 1}


@dataclass
class RateVector:
    """Per-user data rates in bits/s with slice labels ('embb' / 'urllc')."""

    rates: np.ndarray
    slices: tuple

    def slice_rates(self, name):
        mask = np.array([s == name for s in self.slices])
        return self.rates[mask]


class AllocationError(ValueError):
    """Raised when an allocation violates the assignment constraints."""


def sample_channel(rng, n_users, k, scale) -> ChannelState:
    """Draw i.i.d. Rayleigh(scale) amplitudes for every (user, PRB) pair.

    Fading is block-constant within a slot and independent across slots,
    users and PRBs; the scale sweep stands in for varying multipath
    conditions (no separate path-loss term).
    """
    gains = rng.rayleigh(scale, size=(n_users, k))
    return ChannelState(gains=gains)


def validate_allocation(alloc: PRBAllocation, n_users, k):
    """Check the three assignment constraints; return list of violations.

    Violations are returned, not raised: ('total', count), ('prb', j) for a
    PRB not assigned to exactly one user, ('user', i) for a user holding no
    PRB.
    """
    a = np.asarray(alloc.assign)
    problems = []
    if a.shape != (n_users, k):
        return [("shape", a.shape)]
    if not np.isin(a, (0, 1)).all():
        return [("binary", None)]
    total = int(a.sum())
    if total != k:
        problems.append(("total", total))
    col = a.sum(axis=0)
    for j in np.nonzero(col != 1)[0]:
        problems.append(("prb", int(j)))
    row = a.sum(axis=1)
    for i in np.nonzero(row < 1)[0]:
        problems.append(("user", int(i)))
    return problems


def compute_rates(ch: ChannelState, alloc: PRBAllocation, net) -> RateVector:
    """Per-user Shannon rate summed over assigned PRBs.

    r_i = B_prb * sum_j assign_ij * log2(1 + p * h_ij^2 / sigma^2) with p and
    sigma^2 in linear watts and B_prb the per-PRB bandwidth.
    """
    a = np.asarray(alloc.assign, dtype=float)
    if a.shape != ch.gains.shape:
        raise AllocationError(
            f"allocation shape {a.shape} does not match channel {ch.gains.shape}")
    problems = validate_allocation(alloc, ch.n_users, ch.n_prbs)
    if problems:
        raise AllocationError(f"infeasible allocation: {problems[:4]}")
    snr = net.transmit_power_w * ch.gains ** 2 / net.noise_variance_w
    per_prb = net.prb_bandwidth_hz * np.log2(1.0 + snr)
    rates = (a * per_prb).sum(axis=1)
    slices = tuple(
        "embb" if i < net.n_embb else "urllc" for i in range(ch.n_users))
    return RateVector(rates=rates, slices=slices)


def per_prb_rates(ch: ChannelState, net) -> np.ndarray:
    """Rate each user would get from each PRB alone (used by schedulers)."""
    snr = net.transmit_power_w * ch.gains ** 2 / net.noise_variance_w
    return net.prb_bandwidth_hz * np.log2(1.0 + snr)
