"""Rayleigh fading and per-user PRB rates.

Samples the block-fading channel at a few scale factors and shows how the
per-user data rate responds, including the closed-form sanity check for a
single PRB at unit SNR.
"""

import numpy as np

from slicesim.channel import PRBAllocation, compute_rates, sample_channel
from slicesim.config import NetworkConfig

net = NetworkConfig()
rng = np.random.default_rng(0)

print("== fading amplitudes ==")
for scale in (0.5, 1.0, 2.0):
    ch = sample_channel(rng, net.n_users, net.num_prbs, scale)
    print(f"scale {scale:3.1f}: mean gain {ch.gains.mean():.3f} "
          f"(closed form {scale * np.sqrt(np.pi / 2):.3f})")

print("\n== per-user rates under a one-PRB-each + surplus-to-user-0 split ==")
ch = sample_channel(rng, net.n_users, net.num_prbs, net.rayleigh_scale)
assign = np.zeros((net.n_users, net.num_prbs))
for j in range(net.num_prbs):
    assign[j % net.n_users if j < net.n_users else 0, j] = 1.0
rates = compute_rates(ch, PRBAllocation(assign=assign), net)
for i, (r, s) in enumerate(zip(rates.rates, rates.slices)):
    prbs = int(assign[i].sum())
    print(f"user {i} ({s:5s}): {prbs:2d} PRBs -> {r / 1e6:8.1f} Mbps")

print("\nPer-PRB bandwidth is the configured total divided by K:"
      f" {net.prb_bandwidth_hz / 1e3:.0f} kHz")
