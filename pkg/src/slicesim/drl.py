"""Dual-agent advantage actor-critic with replay buffers.

One agent per slice; each owns a small tanh MLP actor over discrete PRB
demands and an MLP critic, trained from its own replay buffer with
one-step TD targets.  Networks are plain numpy with explicit forward and
backward passes, so training is single-threaded and bit-reproducible for
a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelState, PRBAllocation

OBS_DIM = 6


class NetworkFault(RuntimeError):
    """A network produced a non-finite output or loss."""


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=-1, keepdims=True)


class MLP:
    """Fully-connected net, tanh hidden layers, linear output, SGD updates."""

    def __init__(self, sizes, rng, out_scale=0.01):
        self.weights = [rng.normal(0.0, np.sqrt(2.0 / sizes[i]),
                                   size=(sizes[i], sizes[i + 1]))
                        for i in range(len(sizes) - 1)]
        self.biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
        self.weights[-1] = self.weights[-1] * out_scale

    def forward(self, x):
        """Return the list of layer activations, input first, output last."""
        acts = [x]
        h = x
        for i in range(len(self.weights) - 1):
            h = np.tanh(h @ self.weights[i] + self.biases[i])
            acts.append(h)
        acts.append(h @ self.weights[-1] + self.biases[-1])
        return acts

    def __call__(self, x):
        return self.forward(x)[-1]

    def gradients(self, acts, grad_out):
        """Backprop grad_out (batch, out_dim) through the recorded activations."""
        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        batch = grad_out.shape[0]
        g = grad_out
        for i in range(len(self.weights) - 1, -1, -1):
            gw[i] = acts[i].T @ g / batch
            gb[i] = g.mean(axis=0)
            if i > 0:
                g = (g @ self.weights[i].T) * (1.0 - acts[i] ** 2)
        return gw, gb

    def apply(self, gw, gb, lr, clip=1.0):
        total = np.sqrt(sum(float((w ** 2).sum()) for w in gw)
                        + sum(float((b ** 2).sum()) for b in gb))
        if clip is not None and total > clip:
            scale = clip / total
            gw = [w * scale for w in gw]
            gb = [b * scale for b in gb]
        for i in range(len(self.weights)):
            self.weights[i] = self.weights[i] - lr * gw[i]
            self.biases[i] = self.biases[i] - lr * gb[i]

    def state(self):
        return {"weights": [w.tolist() for w in self.weights],
                "biases": [b.tolist() for b in self.biases]}

    def load_state(self, state):
        self.weights = [np.array(w, dtype=float) for w in state["weights"]]
        self.biases = [np.array(b, dtype=float) for b in state["biases"]]


class ReplayBuffer:
    """FIFO transition store with a hard capacity."""

    def __init__(self, capacity):
        self.capacity = capacity
        self._data = []
        self._head = 0

    def push(self, transition):
        if len(self._data) < self.capacity:
            self._data.append(transition)
        else:
            self._data[self._head] = transition
            self._head = (self._head + 1) % self.capacity

    def __len__(self):
        return len(self._data)

    def sample(self, rng, batch_size):
        idx = rng.integers(0, len(self._data), size=batch_size)
        return [self._data[i] for i in idx]


def actor_loss_grad_logits(probs, onehot, advantages, entropy_coeff):
    """Gradient of the policy loss w.r.t. logits.

    Loss per sample: -adv * log pi(a|s) - entropy_coeff * H(pi).
    """
    logp = np.log(probs + 1e-12)
    entropy = -(probs * logp).sum(axis=1, keepdims=True)
    grad_pg = -advantages[:, None] * (onehot - probs)
    grad_ent = entropy_coeff * probs * (logp + entropy)
    return grad_pg + grad_ent


def actor_loss_value(probs, onehot, advantages, entropy_coeff):
    logp = np.log(probs + 1e-12)
    entropy = -(probs * logp).sum(axis=1)
    pg = -(advantages * (logp * onehot).sum(axis=1))
    return float(np.mean(pg - entropy_coeff * entropy))


@dataclass
class UpdateStats:
    critic_loss: float
    actor_loss: float
    mean_advantage: float


class Agent:
    """Actor-critic pair for one slice."""

    def __init__(self, cfg, rng, n_actions, obs_dim=OBS_DIM):
        sizes = [obs_dim] + list(cfg.hidden_sizes)
        self.actor = MLP(sizes + [n_actions], rng)
        self.critic = MLP(sizes + [1], rng)
        self.buffer = ReplayBuffer(cfg.replay_capacity)
        self.cfg = cfg
        self.n_actions = n_actions

    def act(self, obs, explore, rng, epsilon=0.0):
        """Action index; epsilon-greedy over the policy when exploring."""
        logits = self.actor(obs[None, :])[0]
        if not np.all(np.isfinite(logits)):
            raise NetworkFault(
                f"actor produced non-finite logits; |W| max "
                f"{max(float(np.abs(w).max()) for w in self.actor.weights):.3g}")
        if explore:
            if rng.random() < epsilon:
                return int(rng.integers(0, self.n_actions))
            return int(rng.choice(self.n_actions, p=softmax(logits)))
        return int(np.argmax(logits))

    def store(self, obs, action, reward, next_obs):
        self.buffer.push((obs, action, float(reward), next_obs))

    def update(self, rng, mid_hook=None):
        """One critic + actor step from a replay batch.

        ``mid_hook`` runs between the critic and actor updates; the
        training loop uses it to advance the Lagrange multiplier inside the
        URLLC agent's update.
        """
        cfg = self.cfg
        if len(self.buffer) < cfg.batch_size:
            if mid_hook is not None:
                mid_hook()
            return None
        batch = self.buffer.sample(rng, cfg.batch_size)
        obs = np.array([b[0] for b in batch])
        act = np.array([b[1] for b in batch])
        rew = np.array([b[2] for b in batch])
        nxt = np.array([b[3] for b in batch])

        v_next = self.critic(nxt)[:, 0]
        target = rew + cfg.discount * v_next
        acts_c = self.critic.forward(obs)
        v = acts_c[-1][:, 0]
        advantage = target - v
        critic_loss = float(np.mean((v - target) ** 2))
        if not np.isfinite(critic_loss):
            raise NetworkFault(f"critic loss non-finite on batch of {len(batch)}")
        # d/dv of 0.5 * (v - target)^2, target held fixed
        gw, gb = self.critic.gradients(acts_c, (v - target)[:, None])
        self.critic.apply(gw, gb, cfg.critic_lr)

        if mid_hook is not None:
            mid_hook()

        acts_a = self.actor.forward(obs)
        probs = softmax(acts_a[-1])
        onehot = np.zeros_like(probs)
        onehot[np.arange(len(batch)), act] = 1.0
        grad_logits = actor_loss_grad_logits(probs, onehot, advantage,
                                             cfg.entropy_coeff)
        actor_loss = actor_loss_value(probs, onehot, advantage, cfg.entropy_coeff)
        if not np.isfinite(actor_loss):
            raise NetworkFault(f"actor loss non-finite on batch of {len(batch)}")
        gw, gb = self.actor.gradients(acts_a, grad_logits)
        self.actor.apply(gw, gb, cfg.actor_lr)
        return UpdateStats(critic_loss=critic_loss, actor_loss=actor_loss,
                           mean_advantage=float(np.mean(advantage)))

    def state(self):
        return {"actor": self.actor.state(), "critic": self.critic.state()}

    def load_state(self, state):
        self.actor.load_state(state["actor"])
        self.critic.load_state(state["critic"])


def epsilon_at(cfg, episode):
    """Linear epsilon anneal over the first eps_decay_frac of training."""
    horizon = max(1.0, cfg.eps_decay_frac * cfg.episodes)
    frac = min(1.0, episode / horizon)
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac


def largest_remainder_split(demand_embb, demand_urllc, k):
    """Split k PRBs proportionally to the demands; ties favor URLLC."""
    total = demand_embb + demand_urllc
    quota_e = demand_embb / total * k
    quota_u = demand_urllc / total * k
    share_e, share_u = int(np.floor(quota_e)), int(np.floor(quota_u))
    rem_e, rem_u = quota_e - share_e, quota_u - share_u
    while share_e + share_u < k:
        if rem_u >= rem_e:   # tie goes to the latency-critical slice
            share_u += 1
            rem_u = -1.0
        else:
            share_e += 1
            rem_e = -1.0
    return share_e, share_u


def coordinate_allocations(demand_embb, demand_urllc, ch: ChannelState, net) -> PRBAllocation:
    """Turn the two slice demands into a feasible user-by-PRB assignment.

    Slice PRB counts are the largest-remainder split of the demands,
    clamped so each slice can cover its users.  eMBB takes the low PRB
    indices, URLLC the rest; within a slice every user first receives the
    best remaining PRB, then leftovers go to whichever slice user has the
    highest gain on them.
    """
    k, n_e, n_u = net.num_prbs, net.n_embb, net.n_urllc
    if not (1 <= demand_embb <= k - 1 and 1 <= demand_urllc <= k - 1):
        raise ValueError("slice demands must lie in [1, K-1]")
    if n_e + n_u > k:
        raise ValueError("more users than PRBs; infeasible configuration")
    share_e, share_u = largest_remainder_split(demand_embb, demand_urllc, k)
    share_e = max(n_e, min(k - n_u, share_e))
    share_u = k - share_e

    assign = np.zeros((n_e + n_u, k))
    groups = (
        (list(range(n_e)), list(range(share_e))),
        (list(range(n_e, n_e + n_u)), list(range(share_e, k))),
    )
    for users, prbs in groups:
        gains = ch.gains[np.ix_(users, prbs)]
        taken = np.zeros(len(prbs), dtype=bool)
        for row, user in enumerate(users):   # coverage pass: one PRB each
            free = np.nonzero(~taken)[0]
            best = free[np.argmax(gains[row, free])]
            assign[user, prbs[best]] = 1.0
            taken[best] = True
        for col in np.nonzero(~taken)[0]:    # surplus: best gain wins
            row = int(np.argmax(gains[:, col]))
            assign[users[row], prbs[col]] = 1.0
    return PRBAllocation(assign=assign)


def slice_reward(drift_term, cost_term, lam, slack, cfg):
    """Per-slice reward: negative drift-plus-penalty with the Lagrangian term.

    ``slack`` is zero for the eMBB agent.  Clipped symmetrically.
    """
    raw = -(drift_term + cost_term - lam * slack)
    return float(np.clip(raw, -cfg.reward_clip, cfg.reward_clip))


@dataclass
class TrainResult:
    agent_embb: Agent
    agent_urllc: Agent
    lambda_l: float
    curves: list            # per-episode dict rows
    norm_snapshot: dict


def train(env, cfg) -> TrainResult:
    """Algorithm-1 style training loop over the slicing environment.

    Per step: both agents act, the environment executes the joint
    allocation, transitions are stored, agent 1 (eMBB) updates, then agent
    2 (URLLC) updates with the Lagrange multiplier ascent between its
    critic and actor steps.
    """
    rng = np.random.default_rng(cfg.seed)
    n_actions = env.num_prbs - 1
    agent_e = Agent(cfg, rng, n_actions)
    agent_u = Agent(cfg, rng, n_actions)
    curves = []
    for episode in range(cfg.episodes):
        eps = epsilon_at(cfg, episode)
        obs_e, obs_u = env.reset()
        ep = {"episode": episode, "reward_embb": 0.0, "reward_urllc": 0.0,
              "f_mean": 0.0, "g_mean": 0.0}
        for _ in range(cfg.steps_per_episode):
            a_e = agent_e.act(obs_e, True, rng, eps)
            a_u = agent_u.act(obs_u, True, rng, eps)
            out = env.step(a_e + 1, a_u + 1)
            agent_e.store(obs_e, a_e, out.reward_embb, out.obs_embb)
            agent_u.store(obs_u, a_u, out.reward_urllc, out.obs_urllc)
            agent_e.update(rng)
            agent_u.update(rng, mid_hook=env.lagrange_ascent)
            obs_e, obs_u = out.obs_embb, out.obs_urllc
            ep["reward_embb"] += out.reward_embb
            ep["reward_urllc"] += out.reward_urllc
            ep["f_mean"] += out.f_total / cfg.steps_per_episode
            ep["g_mean"] += out.g_total / cfg.steps_per_episode
        ep["lambda_l"] = env.lambda_l
        curves.append(ep)
    return TrainResult(agent_embb=agent_e, agent_urllc=agent_u,
                       lambda_l=env.lambda_l, curves=curves,
                       norm_snapshot=env.norm_snapshot())
