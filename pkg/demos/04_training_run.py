"""A short dual-agent training run.

Fifty episodes are enough to see the reward trend and the eMBB backlog
shrinking as the agents learn to cover the arrival load; the full 300
episodes of the default configuration sharpen the same picture.
"""

import numpy as np

from slicesim.config import SimConfig
from slicesim.drl import train
from slicesim.sim import SliceEnv

cfg = SimConfig()
cfg.drl.episodes = 50
cfg.drl.seed = 0

env = SliceEnv(cfg, np.random.default_rng(cfg.drl.seed))
result = train(env, cfg.drl)

print("episode   total reward   eMBB backlog   lambda")
for row in result.curves[::10]:
    total = row["reward_embb"] + row["reward_urllc"]
    print(f"{row['episode']:7d}   {total:12.2f}   {row['g_mean']:12.2f}   "
          f"{row['lambda_l']:.4f}")

tot = [r["reward_embb"] + r["reward_urllc"] for r in result.curves]
g = [r["g_mean"] for r in result.curves]
print(f"\nfirst-10 mean reward {np.mean(tot[:10]):7.2f} -> "
      f"last-10 {np.mean(tot[-10:]):7.2f}")
print(f"first-10 mean eMBB backlog {np.mean(g[:10]):6.1f} -> "
      f"last-10 {np.mean(g[-10:]):6.1f}")
