"""Policy comparison and parameter sweeps.

Trains briefly, compares the learned allocator against proportional fair
on matched seeds, then runs the fading-scale and task-difficulty sweeps
that characterize the operating envelope.
"""

import numpy as np

from slicesim.config import SimConfig
from slicesim.drl import train
from slicesim.sim import SliceEnv, compare_policies, run_sweep

cfg = SimConfig()
cfg.drl.episodes = 120
cfg.drl.seed = 3

env = SliceEnv(cfg, np.random.default_rng(cfg.drl.seed))
result = train(env, cfg.drl)
agents = (result.agent_embb, result.agent_urllc)

report = compare_policies(cfg, seeds=list(range(100, 106)), agents=agents,
                          frozen_norm=result.norm_snapshot,
                          lambda_init=result.lambda_l, steps=400)
print("== DRL vs proportional fair (matched seeds) ==")
print(f"violation freq: drl {report['mean_drl_violation_freq']:.4f}  "
      f"pf {report['mean_pf_violation_freq']:.4f}")
print(f"URLLC rate: drl {report['mean_drl_rate_urllc_mbps']:.1f} Mbps  "
      f"pf {report['mean_pf_rate_urllc_mbps']:.1f} Mbps")
print(f"eMBB  rate: drl {report['mean_drl_rate_embb_mbps']:.1f} Mbps  "
      f"pf {report['mean_pf_rate_embb_mbps']:.1f} Mbps")

print("\n== fading-scale sweep (proportional fair, 5 seeds each) ==")
for row in run_sweep("rayleigh-scale", [0.5, 1.0, 1.5, 2.0], reps=5, cfg=cfg,
                     steps=120):
    print(f"scale {row['value']:3.1f}: eMBB {row['mean_rate_embb_mbps']:6.1f} Mbps, "
          f"URLLC {row['mean_rate_urllc_mbps']:6.1f} Mbps, "
          f"queues e={row['mean_queue_embb']:5.1f} u={row['mean_queue_urllc']:4.2f}")

print("\n== task-difficulty sweep: dexterity feeds the service rate ==")
for row in run_sweep("di-level", ["low", "moderate", "high"], reps=5, cfg=cfg,
                     steps=120):
    print(f"{row['value']:8s}: DI {row['mean_di']:.3f}, URLLC departures "
          f"{row['mean_departure_urllc_mbps']:6.1f} Mbps")
