"""Closed-loop orchestration: channel, allocation, delays, robots, queues,
objective and rewards, plus the episode/sweep/comparison harnesses.

Per slot the environment samples the channel, executes a feasible PRB
allocation, draws per-user end-to-end delays from the rate-coupled tail
model, steps every teleoperated robot (switching to an adjusted gain on
slots whose delay exceeds the certified bound), folds the dexterity index
into the URLLC departure rate, advances both virtual queues, and scores
the slot with the drift-plus-penalty pieces that also form the agents'
rewards.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from . import channel as ch_mod
from . import control as ctl
from . import drl as drl_mod
from . import objective as obj
from . import queues as q_mod
from . import robot as rob
from .baseline import PFState, pf_allocate
from .channel import PRBAllocation, sample_channel, compute_rates, validate_allocation
from .queues import SliceQueues

GAIN_MEAN_FACTOR = math.sqrt(math.pi / 2.0)  # Rayleigh mean over scale


class RunningPercentile:
    """95th percentile over a sliding window, with a floor of 1."""

    def __init__(self, window=512, frozen=None):
        self.window = window
        self.values = []
        self.frozen = frozen

    def update(self, v):
        if self.frozen is None:
            self.values.append(float(v))
            if len(self.values) > self.window:
                self.values.pop(0)

    def value(self):
        if self.frozen is not None:
            return self.frozen
        if not self.values:
            return 1.0
        return max(1.0, float(np.percentile(self.values, 95)))


@dataclass
class StepOutput:
    obs_embb: np.ndarray
    obs_urllc: np.ndarray
    reward_embb: float
    reward_urllc: float
    f_total: float
    g_total: float
    record: dict


class SliceEnv:
    """The Fig.-1 style closed loop as a steppable environment."""

    def __init__(self, cfg, rng, frozen_norm=None, lambda_init=0.0,
                 reference_kind=None):
        cfg.validate()
        self.cfg = cfg
        self.net = cfg.network
        self.qcfg = cfg.queue
        self.ccfg = cfg.control
        self.rng = rng
        self.reference_kind = reference_kind or cfg.reference_kind
        self.num_prbs = self.net.num_prbs

        self.nominal_cert = ctl.synthesize_gain(self.ccfg)
        self._adjusted_cache = {}
        self.robot_capacity = 2 * self.ccfg.max_delay_steps + 1

        frozen_norm = frozen_norm or {}
        self.norm_f = RunningPercentile(frozen=frozen_norm.get("f"))
        self.norm_g = RunningPercentile(frozen=frozen_norm.get("g"))
        self.gain_norm = self.net.rayleigh_scale * GAIN_MEAN_FACTOR

        self.lag_state = obj.LagrangianState(lambda_l=lambda_init)
        self._pending_slack = 0.0
        self._pending_drift = 0.0
        self._pending_penalty = 0.0
        self.reset()

    # -- lifecycle ---------------------------------------------------------

    def reset(self):
        """New episode: queues, robots and references restart; the Lagrange
        multiplier persists across episodes."""
        n_u, n_e = self.net.n_urllc, self.net.n_embb
        self.queues = SliceQueues.empty(n_u, n_e)
        self.robots = [
            rob.RobotState.initial(self.nominal_cert.gain, self.ccfg.n_states,
                                   self.robot_capacity)
            for _ in range(n_u)
        ]
        self.references = [
            rob.make_reference(self.reference_kind, 10 ** 9) for _ in range(n_u)
        ]
        self.di_windows = [[] for _ in range(n_u)]
        self.di = np.ones(n_u)
        self.prev_delays = np.zeros(n_u)
        self.share_embb = self.num_prbs // 2
        self.share_urllc = self.num_prbs - self.share_embb
        self.slot = 0
        self.channel = sample_channel(self.rng, self.net.n_users, self.num_prbs,
                                      self.net.rayleigh_scale)
        return self.observations()

    @property
    def lambda_l(self):
        return self.lag_state.lambda_l

    def norm_snapshot(self):
        return {"f": self.norm_f.value(), "g": self.norm_g.value()}

    # -- observations ------------------------------------------------------

    def observations(self):
        f_n = self.queues.urllc_total / self.norm_f.value()
        g_n = self.queues.embb_total / self.norm_g.value()
        gains = self.channel.gains
        mean_e = gains[:self.net.n_embb].mean() / self.gain_norm
        mean_u = gains[self.net.n_embb:].mean() / self.gain_norm
        obs_e = np.array([g_n, f_n, mean_e, self.share_embb / self.num_prbs,
                          0.0, self.lambda_l])
        obs_u = np.array([f_n, g_n, mean_u, self.share_urllc / self.num_prbs,
                          float(self.di.mean()), self.lambda_l])
        return obs_e, obs_u

    # -- dynamics ----------------------------------------------------------

    def _adjusted_gain(self, delay_steps):
        if delay_steps not in self._adjusted_cache:
            self._adjusted_cache[delay_steps] = ctl.adjust_gain(
                self.nominal_cert, delay_steps, self.ccfg)
        return self._adjusted_cache[delay_steps]

    def step(self, demand_embb, demand_urllc) -> StepOutput:
        alloc = drl_mod.coordinate_allocations(demand_embb, demand_urllc,
                                               self.channel, self.net)
        return self.step_alloc(alloc)

    def step_alloc(self, alloc: PRBAllocation) -> StepOutput:
        net, qcfg, ccfg = self.net, self.qcfg, self.ccfg
        problems = validate_allocation(alloc, net.n_users, self.num_prbs)
        if problems:
            raise ch_mod.AllocationError(f"infeasible allocation at slot "
                                         f"{self.slot}: {problems[:4]}")
        rates = compute_rates(self.channel, alloc, net)
        r_e = rates.rates[:net.n_embb]
        r_u = rates.rates[net.n_embb:]

        delay = obj.sample_delay(self.rng, r_u, net, qcfg)

        # robots: delayed coupling in steps, adjusted gain past the bound
        tracking = np.zeros(net.n_urllc)
        gain_modes = []
        delay_steps_v = []
        positions = []
        setpoints = []
        for i, rs in enumerate(self.robots):
            steps = max(1, math.ceil(delay.delays_s[i] / ccfg.sampling_interval_s)) \
                if np.isfinite(delay.delays_s[i]) else self.robot_capacity - 1
            steps = min(steps, self.robot_capacity - 1)
            delay_steps_v.append(steps)
            if steps > ccfg.max_delay_steps:
                adj = self._adjusted_gain(steps)
                rs.gain = adj.adjusted
                gain_modes.append("adjusted")
            else:
                rs.gain = self.nominal_cert.gain
                gain_modes.append("nominal")
            sp = self.references[i].setpoint(self.slot)
            sp_prev = self.references[i].setpoint(self.slot - 1) if self.slot else sp
            new_rs = rob.step_plant(rs, sp, steps, ccfg)
            comp = rob.track_components(new_rs, sp, sp_prev)
            self.robots[i] = new_rs
            win = self.di_windows[i]
            win.append(comp)
            if len(win) > self.cfg.di_window:
                win.pop(0)
            self.di[i] = rob.compute_di(win).value
            tracking[i] = comp[0]
            positions.append(new_rs.position.tolist())
            setpoints.append(np.asarray(sp, dtype=float).tolist())

        arrivals = q_mod.sample_urllc_arrivals(self.rng, r_u, self.prev_delays, qcfg)
        service = q_mod.urllc_departure(r_u, self.di, qcfg)
        arr_e = self.rng.poisson(qcfg.embb_arrival_rate * qcfg.slot_duration_s,
                                 size=net.n_embb)
        q_prev = self.queues
        q_next = q_mod.step_queues(q_prev, arrivals.count, service, arr_e, r_e, qcfg)

        h_e = obj.cost_h(r_e / 1e6, qcfg.epsilon)
        h_u = obj.cost_h(r_u / 1e6, qcfg.epsilon)
        slack = float(np.mean(obj.reliability_slack(r_u, net, qcfg)))

        qn = self.cfg.drl.queue_norm
        drift_e = 0.5 * ((q_next.embb_total / qn) ** 2 - (q_prev.embb_total / qn) ** 2)
        drift_u = 0.5 * ((q_next.urllc_total / qn) ** 2 - (q_prev.urllc_total / qn) ** 2)
        v = qcfg.penalty_weight
        lam = self.lambda_l
        r1 = drl_mod.slice_reward(drift_e, v * h_e, lam, 0.0, self.cfg.drl)
        r2 = drl_mod.slice_reward(drift_u, v * h_u, lam, slack, self.cfg.drl)

        self._pending_drift = (drift_e + drift_u)
        self._pending_penalty = v * (h_e + h_u)
        self._pending_slack = slack
        lag_value = self._pending_drift + self._pending_penalty - lam * slack

        record = {
            "slot": self.slot,
            "share_embb": int(alloc.assign[:net.n_embb].sum()),
            "share_urllc": int(alloc.assign[net.n_embb:].sum()),
            "rates_embb": r_e.tolist(),
            "rates_urllc": r_u.tolist(),
            "f_total": q_next.urllc_total,
            "g_total": q_next.embb_total,
            "arr_urllc": float(np.sum(arrivals.count)),
            "dep_urllc": float(np.sum(q_mod.bits_rate_to_packets(
                service.rate, qcfg.urllc_packet_bytes, qcfg.slot_duration_s))),
            "arr_embb": float(np.sum(arr_e)),
            "dep_embb": float(np.sum(q_mod.bits_rate_to_packets(
                r_e, qcfg.embb_packet_bytes, qcfg.slot_duration_s))),
            "f_prev": q_prev.urllc_total,
            "g_prev": q_prev.embb_total,
            "f_users": q_next.urllc_backlog.tolist(),
            "g_users": q_next.embb_backlog.tolist(),
            "f_users_prev": q_prev.urllc_backlog.tolist(),
            "g_users_prev": q_prev.embb_backlog.tolist(),
            "arr_urllc_users": np.asarray(arrivals.count, dtype=float).tolist(),
            "dep_urllc_users": q_mod.bits_rate_to_packets(
                service.rate, qcfg.urllc_packet_bytes,
                qcfg.slot_duration_s).tolist(),
            "arr_embb_users": np.asarray(arr_e, dtype=float).tolist(),
            "dep_embb_users": q_mod.bits_rate_to_packets(
                r_e, qcfg.embb_packet_bytes, qcfg.slot_duration_s).tolist(),
            "delays_s": delay.delays_s.tolist(),
            "violations": delay.violations.astype(int).tolist(),
            "delay_steps": delay_steps_v,
            "gain_modes": gain_modes,
            "di": self.di.tolist(),
            "tracking": tracking.tolist(),
            "positions": positions,
            "setpoints": setpoints,
            "departure_rate_urllc": service.rate.tolist(),
            "reward_embb": r1,
            "reward_urllc": r2,
            "drift_embb": drift_e,
            "drift_urllc": drift_u,
            "h_embb": h_e,
            "h_urllc": h_u,
            "slack": slack,
            "lambda_l": lam,
            "lagrangian": lag_value,
        }

        self.queues = q_next
        self.prev_delays = np.where(np.isfinite(delay.delays_s),
                                    delay.delays_s, net.delay_deadline_s * 10)
        self.share_embb = record["share_embb"]
        self.share_urllc = record["share_urllc"]
        self.slot += 1
        self.norm_f.update(q_next.urllc_total)
        self.norm_g.update(q_next.embb_total)
        self.channel = sample_channel(self.rng, net.n_users, self.num_prbs,
                                      net.rayleigh_scale)
        obs_e, obs_u = self.observations()
        return StepOutput(obs_embb=obs_e, obs_urllc=obs_u, reward_embb=r1,
                          reward_urllc=r2, f_total=q_next.urllc_total,
                          g_total=q_next.embb_total, record=record)

    def lagrange_ascent(self):
        """Projected multiplier ascent on the last step's slack (training hook)."""
        self.lag_state = obj.lagrangian_update(
            self.lag_state, self._pending_drift, self._pending_penalty,
            self._pending_slack, self.cfg.drl.lagrange_lr)


@dataclass
class EpisodeTrace:
    policy: str
    seed: int
    config_hash: str
    records: list = field(default_factory=list)

    def column(self, key):
        return [r[key] for r in self.records]

    def violation_freq(self):
        v = np.array(self.column("violations"))
        return float(v.mean()) if v.size else 0.0

    def mean_rate(self, slice_name):
        key = "rates_embb" if slice_name == "embb" else "rates_urllc"
        return float(np.mean(self.column(key)))

    def aggregate(self) -> dict:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "slots": len(self.records),
            "mean_rate_embb_mbps": self.mean_rate("embb") / 1e6,
            "mean_rate_urllc_mbps": self.mean_rate("urllc") / 1e6,
            "mean_queue_embb": float(np.mean(self.column("g_total"))),
            "mean_queue_urllc": float(np.mean(self.column("f_total"))),
            "violation_freq": self.violation_freq(),
            "mean_di": float(np.mean(self.column("di"))),
            "mean_departure_urllc_mbps": float(np.mean(self.column(
                "departure_rate_urllc"))) / 1e6,
            "mean_tracking_error": float(np.mean(self.column("tracking"))),
            "mean_lambda": float(np.mean(self.column("lambda_l"))),
        }


def run_episode(policy, cfg, seed, agents=None, steps=None, frozen_norm=None,
                lambda_init=0.0, reference_kind=None) -> EpisodeTrace:
    """One evaluation episode under a frozen policy ('drl' needs agents)."""
    if policy not in ("drl", "pf"):
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "drl" and agents is None:
        raise ValueError("drl policy needs trained agents")
    env = SliceEnv(cfg, np.random.default_rng(seed), frozen_norm=frozen_norm,
                   lambda_init=lambda_init, reference_kind=reference_kind)
    steps = steps or cfg.drl.steps_per_episode
    trace = EpisodeTrace(policy=policy, seed=seed, config_hash=cfg.config_hash())
    pf_state = PFState.initial(cfg.network.n_users)
    obs_e, obs_u = env.observations()
    for _ in range(steps):
        if policy == "drl":
            agent_e, agent_u = agents
            a_e = agent_e.act(obs_e, False, env.rng)
            a_u = agent_u.act(obs_u, False, env.rng)
            out = env.step(a_e + 1, a_u + 1)
        else:
            alloc = pf_allocate(env.channel, pf_state, cfg.network)
            out = env.step_alloc(alloc)
        obs_e, obs_u = out.obs_embb, out.obs_urllc
        trace.records.append(out.record)
    return trace


def _aggregate_worker(args):
    """Picklable per-episode worker for multi-process sweeps/comparisons."""
    policy, cfg, seed, agents, steps, frozen_norm, lambda_init, ref = args
    trace = run_episode(policy, cfg, seed, agents=agents, steps=steps,
                        frozen_norm=frozen_norm, lambda_init=lambda_init,
                        reference_kind=ref)
    return trace.aggregate()


def _map_jobs(worker, work_items, jobs):
    """Order-preserving map, optionally across processes."""
    if jobs <= 1 or len(work_items) <= 1:
        return [worker(item) for item in work_items]
    import concurrent.futures

    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, work_items))


SWEEP_KINDS = ("rayleigh-scale", "sampling-interval", "di-level")


def _sweep_cfg(cfg, kind, value):
    c = copy.deepcopy(cfg)
    ref = None
    if kind == "rayleigh-scale":
        c.network.rayleigh_scale = float(value)
    elif kind == "sampling-interval":
        c.control.sampling_interval_s = float(value)
    elif kind == "di-level":
        ref = str(value)
        if ref not in ("low", "moderate", "high"):
            raise ValueError(f"di-level sweep values must be reference kinds, got {value!r}")
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")
    return c, ref


def run_sweep(kind, values, reps, cfg, policy="pf", agents=None,
              frozen_norm=None, base_seed=1000, steps=None, jobs=1):
    """One ExperimentResult-style row per value, averaged over rep seeds."""
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind {kind!r}; use one of {SWEEP_KINDS}")
    if not values:
        raise ValueError("sweep needs at least one value")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rows = []
    for value in values:
        c, ref = _sweep_cfg(cfg, kind, value)
        work = [(policy, c, base_seed + rep, agents, steps, frozen_norm, 0.0, ref)
                for rep in range(reps)]
        aggs = _map_jobs(_aggregate_worker, work, jobs)
        row = {"kind": kind, "value": value, "reps": reps, "policy": policy}
        for key in ("mean_rate_embb_mbps", "mean_rate_urllc_mbps",
                    "mean_queue_embb", "mean_queue_urllc", "violation_freq",
                    "mean_di", "mean_departure_urllc_mbps",
                    "mean_tracking_error"):
            vals = [a[key] for a in aggs]
            row[key] = float(np.mean(vals))
            row[key + "_std"] = float(np.std(vals))
        rows.append(row)
    return rows


def compare_policies(cfg, seeds, agents, frozen_norm=None, lambda_init=0.0,
                     steps=None, jobs=1):
    """Matched-seed DRL vs proportional-fair comparison report."""
    drl_work = [("drl", cfg, seed, agents, steps, frozen_norm, lambda_init, None)
                for seed in seeds]
    pf_work = [("pf", cfg, seed, None, steps, None, 0.0, None) for seed in seeds]
    drl_aggs = _map_jobs(_aggregate_worker, drl_work, jobs)
    pf_aggs = _map_jobs(_aggregate_worker, pf_work, jobs)
    per_seed = []
    for seed, a, b in zip(seeds, drl_aggs, pf_aggs):
        per_seed.append({
            "seed": seed,
            "drl_violation_freq": a["violation_freq"],
            "pf_violation_freq": b["violation_freq"],
            "drl_rate_embb_mbps": a["mean_rate_embb_mbps"],
            "pf_rate_embb_mbps": b["mean_rate_embb_mbps"],
            "drl_rate_urllc_mbps": a["mean_rate_urllc_mbps"],
            "pf_rate_urllc_mbps": b["mean_rate_urllc_mbps"],
            "violation_diff": a["violation_freq"] - b["violation_freq"],
        })
    def mean(key):
        return float(np.mean([r[key] for r in per_seed]))
    report = {
        "seeds": list(seeds),
        "per_seed": per_seed,
        "mean_drl_violation_freq": mean("drl_violation_freq"),
        "mean_pf_violation_freq": mean("pf_violation_freq"),
        "mean_violation_diff": mean("violation_diff"),
        "mean_drl_rate_embb_mbps": mean("drl_rate_embb_mbps"),
        "mean_pf_rate_embb_mbps": mean("pf_rate_embb_mbps"),
        "mean_drl_rate_urllc_mbps": mean("drl_rate_urllc_mbps"),
        "mean_pf_rate_urllc_mbps": mean("pf_rate_urllc_mbps"),
    }
    return report
