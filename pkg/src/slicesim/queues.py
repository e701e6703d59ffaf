"""Virtual queue dynamics for the URLLC and eMBB slices.

Queues are measured in packets.  URLLC arrivals follow the rate-adjusted
Poisson law (base rate minus a sensitivity times the user rate in Mbps,
clamped at zero) over a window of one slot plus the user's application
delay.  Departures are bit rates bridged to packets per slot through the
configured packet sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SliceQueues:
    urllc_backlog: np.ndarray  # packets, one entry per URLLC user
    embb_backlog: np.ndarray   # packets, one entry per eMBB user
    slot_index: int = 0

    @classmethod
    def empty(cls, n_urllc, n_embb):
        return cls(np.zeros(n_urllc), np.zeros(n_embb))

    @property
    def urllc_total(self):
        return float(self.urllc_backlog.sum())

    @property
    def embb_total(self):
        return float(self.embb_backlog.sum())


@dataclass
class ArrivalSample:
    count: np.ndarray          # packets arrived per user
    effective_rate: np.ndarray  # clamped adjusted rate, packets/s
    window: np.ndarray         # slot + per-user application delay, seconds


@dataclass
class ServiceSample:
    rate: np.ndarray  # bits/s after the DI penalty, clamped at zero


def arrival_pmf(k, rate, window):
    """Poisson probability of k arrivals in the window, computed in log space."""
    if rate < 0 or window <= 0 or k < 0:
        raise ValueError("arrival_pmf needs rate >= 0, window > 0, k >= 0")
    mu = rate * window
    if mu == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(mu) - mu - math.lgamma(k + 1))


def adjusted_arrival_rate(rate_bits_per_s, qcfg):
    """lambda(u): base arrival rate minus sensitivity * rate in Mbps, >= 0."""
    r_mbps = np.asarray(rate_bits_per_s, dtype=float) / 1e6
    return np.maximum(0.0, qcfg.base_arrival_rate - qcfg.arrival_sensitivity * r_mbps)


def sample_urllc_arrivals(rng, rate_bits_per_s, delay_s, qcfg) -> ArrivalSample:
    """Draw per-user Poisson arrival counts over one slot plus the app delay."""
    lam = adjusted_arrival_rate(rate_bits_per_s, qcfg)
    window = qcfg.slot_duration_s + np.asarray(delay_s, dtype=float)
    counts = rng.poisson(lam * window)
    return ArrivalSample(count=counts, effective_rate=lam, window=window)


def urllc_departure(rate_bits_per_s, di, qcfg) -> ServiceSample:
    """Serving rate: user rate minus the dexterity-index penalty, >= 0."""
    rate = np.maximum(0.0, np.asarray(rate_bits_per_s, dtype=float)
                      - qcfg.serving_coefficient * np.asarray(di, dtype=float))
    return ServiceSample(rate=rate)


def bits_rate_to_packets(rate_bits_per_s, packet_bytes, slot_s):
    """Bridge a bit rate to packets served in one slot."""
    return np.asarray(rate_bits_per_s, dtype=float) * slot_s / (8.0 * packet_bytes)


def step_queues(q: SliceQueues, urllc_arrivals, urllc_service, embb_arrivals,
                embb_rates_bps, qcfg) -> SliceQueues:
    """One recursion step of both slice queues with the non-negativity projection.

    ``urllc_arrivals``/``embb_arrivals`` are packet counts; ``urllc_service``
    is a ServiceSample (bits/s) and ``embb_rates_bps`` raw bit rates, both
    converted to packets/slot here.
    """
    dep_u = bits_rate_to_packets(urllc_service.rate, qcfg.urllc_packet_bytes,
                                 qcfg.slot_duration_s)
    dep_e = bits_rate_to_packets(embb_rates_bps, qcfg.embb_packet_bytes,
                                 qcfg.slot_duration_s)
    new_u = np.maximum(0.0, q.urllc_backlog + urllc_arrivals - dep_u)
    new_e = np.maximum(0.0, q.embb_backlog + embb_arrivals - dep_e)
    return SliceQueues(urllc_backlog=new_u, embb_backlog=new_e,
                       slot_index=q.slot_index + 1)
