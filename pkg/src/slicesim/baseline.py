"""Proportional-fair PRB allocator used as the comparison policy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelState, PRBAllocation, per_prb_rates

EWMA_FLOOR = 1e3  # bits/s, division guard


@dataclass
class PFState:
    ewma_rate: np.ndarray     # per-user throughput average, bits/s
    smoothing: float = 0.01   # 1 / t_c with t_c = 100 slots

    @classmethod
    def initial(cls, n_users, smoothing=0.01):
        return cls(ewma_rate=np.full(n_users, EWMA_FLOOR), smoothing=smoothing)


def pf_allocate(ch: ChannelState, state: PFState, net) -> PRBAllocation:
    """Assign each PRB to the user maximizing instantaneous rate / average rate.

    After the per-PRB pass, users left empty-handed take over the surplus
    PRB with the lowest metric among users that can spare one, so every
    user ends with at least one PRB.  The average-rate state is updated
    with the achieved rates.
    """
    n_users, k = ch.n_users, ch.n_prbs
    rates_ij = per_prb_rates(ch, net)
    metric = rates_ij / state.ewma_rate[:, None]
    owner = np.argmax(metric, axis=0)
    assign = np.zeros((n_users, k))
    assign[owner, np.arange(k)] = 1.0

    counts = assign.sum(axis=1)
    for i in range(n_users):
        if counts[i] >= 1:
            continue
        candidates = [(metric[owner[j], j], j) for j in range(k) if counts[owner[j]] > 1]
        _, j = min(candidates)
        counts[owner[j]] -= 1
        assign[owner[j], j] = 0.0
        assign[i, j] = 1.0
        owner[j] = i
        counts[i] = 1

    achieved = (assign * rates_ij).sum(axis=1)
    state.ewma_rate = np.maximum(
        (1.0 - state.smoothing) * state.ewma_rate + state.smoothing * achieved,
        EWMA_FLOOR)
    return PRBAllocation(assign=assign)
