"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS line on success (run with ``pytest -s`` to see
them); a failed assertion is the FAIL signal.  The training-dependent
criteria share one set of five full training runs through module-scoped
fixtures.
"""

import math
import time

import numpy as np
import pytest

import slicesim.control as ctl
from slicesim.channel import (PRBAllocation, compute_rates, sample_channel,
                              validate_allocation)
from slicesim.cli import EXIT_OK, main as cli_main
from slicesim.config import NetworkConfig, QueueConfig, SimConfig
from slicesim.drl import coordinate_allocations, train
from slicesim.objective import sample_delay
from slicesim.queues import (ServiceSample, SliceQueues, arrival_pmf,
                             sample_urllc_arrivals, step_queues)
from slicesim.robot import compute_di
from slicesim.baseline import PFState, pf_allocate
from slicesim.sim import SliceEnv, compare_policies, run_episode, run_sweep

N_TRAIN_SEEDS = 5


def report(name):
    print(f"\nACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def trained_runs():
    """Five complete trainings at the default configuration."""
    runs = []
    for seed in range(N_TRAIN_SEEDS):
        cfg = SimConfig()
        cfg.drl.seed = seed
        env = SliceEnv(cfg, np.random.default_rng(seed))
        runs.append((cfg, train(env, cfg.drl)))
    return runs


def test_rate_formula_matches_naive_reference(rng):
    """Per-user rate equals an element-by-element reference, 1e-12 relative."""
    t0 = time.time()
    for _ in range(1000):
        n_users = int(rng.integers(2, 7))
        k = int(rng.integers(n_users, 9))
        n_e = int(rng.integers(1, n_users))
        net = NetworkConfig(num_prbs=k, n_embb=n_e, n_urllc=n_users - n_e)
        ch = sample_channel(rng, n_users, k, float(rng.uniform(0.2, 2.0)))
        assign = np.zeros((n_users, k))
        for j in range(k):
            assign[j % n_users, j] = 1.0
        rates = compute_rates(ch, PRBAllocation(assign=assign), net).rates
        ref = np.zeros(n_users)
        for i in range(n_users):
            for j in range(k):
                if assign[i, j]:
                    snr = net.transmit_power_w * ch.gains[i, j] ** 2 / net.noise_variance_w
                    ref[i] += net.prb_bandwidth_hz * math.log2(1.0 + snr)
        assert np.allclose(rates, ref, rtol=1e-12, atol=0.0)
    assert time.time() - t0 < 5.0
    report("eq1-rate-oracle")


def test_arrival_pmf_normalization_and_mean():
    for mu in (0.5, 3.0, 12.0, 50.0):
        total = sum(arrival_pmf(k, mu, 1.0) for k in range(201))
        assert abs(total - 1.0) <= 1e-9
    qcfg = QueueConfig(slot_duration_s=1.0)
    rng = np.random.default_rng(101)
    sample = sample_urllc_arrivals(rng, np.full(10 ** 5, 20e6),
                                   np.zeros(10 ** 5), qcfg)
    expected = qcfg.base_arrival_rate - qcfg.arrival_sensitivity * 20.0
    assert abs(sample.count.mean() - expected) / expected < 0.01
    report("eq2-arrival-law")


def test_queue_laws_conservation_and_stability():
    qcfg = QueueConfig()
    rng = np.random.default_rng(202)
    checked = 0
    for _ in range(100):
        q = SliceQueues.empty(2, 2)
        for _ in range(100):
            arr_u = rng.poisson(3.0, 2).astype(float)
            rate_u = rng.uniform(0, 5e6, 2)
            arr_e = rng.poisson(3.0, 2).astype(float)
            rate_e = rng.uniform(0, 5e6, 2)
            dep_u = rate_u * qcfg.slot_duration_s / (8 * qcfg.urllc_packet_bytes)
            dep_e = rate_e * qcfg.slot_duration_s / (8 * qcfg.embb_packet_bytes)
            nxt = step_queues(q, arr_u, ServiceSample(rate_u), arr_e, rate_e, qcfg)
            assert np.all(nxt.urllc_backlog >= 0) and np.all(nxt.embb_backlog >= 0)
            flow_u = q.urllc_backlog + arr_u - dep_u
            flow_e = q.embb_backlog + arr_e - dep_e
            keep_u = flow_u >= 0
            keep_e = flow_e >= 0
            assert np.allclose(nxt.urllc_backlog[keep_u], flow_u[keep_u], atol=1e-9)
            assert np.allclose(nxt.embb_backlog[keep_e], flow_e[keep_e], atol=1e-9)
            checked += 1
            q = nxt
    assert checked == 10 ** 4

    service_pkts = 10.0
    rate = service_pkts * 8 * qcfg.urllc_packet_bytes / qcfg.slot_duration_s
    arrival_rate = 0.8 * service_pkts
    q = SliceQueues(np.array([0.0]), np.array([0.0]))
    trace = np.empty(10 ** 4)
    for t in range(10 ** 4):
        arr = float(rng.poisson(arrival_rate))
        q = step_queues(q, np.array([arr]), ServiceSample(np.array([rate])),
                        np.array([0.0]), np.array([0.0]), qcfg)
        trace[t] = q.urllc_backlog[0]
    slope = np.polyfit(np.arange(trace.size), trace, 1)[0]
    assert abs(slope) < 0.01 * arrival_rate
    report("eq5-6-queue-laws")


def test_dexterity_index_range_and_anchors(rng):
    tr = rng.uniform(0, 40, 10 ** 5)
    oe = rng.uniform(0, 400, 10 ** 5)
    cu = rng.uniform(0, 4, 10 ** 5)
    vals = (0.4 * np.maximum(0, 1 - tr / 10)
            + 0.3 * (np.maximum(0, 1 - oe / 180) + np.maximum(0, 1 - cu)))
    single = [compute_di([(tr[i], oe[i], cu[i])]).value for i in range(0, 10 ** 5, 101)]
    assert np.all((0 <= vals) & (vals <= 1))
    assert all(0 <= v <= 1 for v in single)
    assert compute_di([(0.0, 0.0, 0.0)]).value == pytest.approx(1.0)
    assert compute_di([(10.0, 180.0, 1.0)]).value == pytest.approx(0.0)
    assert compute_di([(5.0, 90.0, 0.5)]).value == pytest.approx(0.5)
    report("eq3-dexterity-index")


def test_delay_tail_consistency():
    net = NetworkConfig()
    qcfg = QueueConfig()
    rng = np.random.default_rng(303)
    for r in (15e6, 30e6, 60e6):
        sample = sample_delay(rng, np.full(10 ** 6, r), net, qcfg)
        expected = math.exp(-qcfg.delay_rate_coeff * r * net.delay_deadline_s)
        assert abs(sample.violations.mean() - expected) <= 0.005
    root = math.log(1.0 / (1.0 - net.reliability_target)) / (
        qcfg.delay_rate_coeff * net.delay_deadline_s)
    sample = sample_delay(rng, np.full(10 ** 6, root), net, qcfg)
    assert abs(sample.violations.mean() - 0.05) <= 0.005
    report("eq12-8a-delay-tail")


def test_certificate_soundness_50_instances():
    t0 = time.time()
    cfg = SimConfig().control
    rng = np.random.default_rng(404)
    import scipy.linalg as sla
    done = 0
    attempts = 0
    while done < 50 and attempts < 200:
        attempts += 1
        n_axes = int(rng.integers(1, 3))
        blocks, bblocks = [], []
        for _ in range(n_axes):
            step = rng.uniform(0.5, 1.5)
            damping = rng.uniform(0.0, 0.3)
            blocks.append(np.array([[1.0, step], [0.0, 1.0 - damping]]))
            bblocks.append(np.array([[step ** 2 / 2], [step]]) * rng.uniform(0.5, 2.0))
        a = sla.block_diag(*blocks)
        b = sla.block_diag(*bblocks)
        ad = rng.uniform(0.02, 0.12) * np.eye(a.shape[0])
        try:
            cert = ctl.synthesize_gain(cfg, plant=(a, ad, b))
        except ctl.SynthesisError:
            continue
        for delay in range(cfg.max_delay_steps + 1):
            sup = ctl.simulate_delayed_loop(cert.gain, a, ad, b, delay, 10 ** 4)
            assert sup < 1e3, f"instance {done} diverged at delay {delay}"
        done += 1
    assert done == 50
    assert time.time() - t0 < 60.0
    report("eq15-certificate-soundness")


def test_gain_adjustment_direction_table2():
    ccfg = SimConfig().control
    cert = ctl.synthesize_gain(ccfg)
    double = 2 * ccfg.max_delay_steps
    adj = ctl.adjust_gain(cert, double, ccfg)
    assert adj.distance > 0
    a, ad, b = ccfg.plant_a(), ccfg.plant_ad(), ccfg.plant_b()

    def track(gain, seed, steps=160, switch=40):
        rr = np.random.default_rng(seed)
        hist = [np.zeros(4)] * (double + 1)
        sp = np.zeros(2)
        errs = []
        for k in range(steps):
            if k % switch == 0:
                sp = rr.uniform(-5, 5, size=2)
            ref = np.array([sp[0], 0.0, sp[1], 0.0])
            x, xd = hist[-1], hist[0]
            xn = a @ x + ad @ xd - b @ (gain @ (x - ref))
            hist = hist[1:] + [xn]
            errs.append(float(np.linalg.norm(xn[[0, 2]] - sp)))
        return float(np.mean(errs))

    wins = sum(track(adj.adjusted, s) < track(cert.gain, s) for s in range(20))
    assert wins >= 16
    report("table2-gain-adjustment")


def test_training_convergence_trend(trained_runs):
    t0 = time.time()
    good = 0
    for cfg, result in trained_runs:
        tot = [c["reward_embb"] + c["reward_urllc"] for c in result.curves]
        g = [c["g_mean"] for c in result.curves]
        decile = max(1, len(g) // 10)
        reward_up = np.mean(tot[-50:]) > np.mean(tot[:50])
        backlog_down = np.mean(g[-decile:]) < np.mean(g[:decile])
        good += reward_up and backlog_down
    assert good >= 4, f"only {good}/{N_TRAIN_SEEDS} seeds show the trend"
    report("algorithm1-convergence-trend")


def test_drl_vs_pf_matched_seeds(trained_runs):
    cfg, result = trained_runs[0]
    agents = (result.agent_embb, result.agent_urllc)
    seeds = list(range(100, 120))
    rep = compare_policies(cfg, seeds, agents, frozen_norm=result.norm_snapshot,
                           lambda_init=result.lambda_l, steps=800)
    assert rep["mean_drl_violation_freq"] <= rep["mean_pf_violation_freq"]
    for slice_name in ("embb", "urllc"):
        a = rep[f"mean_drl_rate_{slice_name}_mbps"]
        b = rep[f"mean_pf_rate_{slice_name}_mbps"]
        assert abs(a - b) / b < 0.15, f"{slice_name} rates differ {a} vs {b}"
    report("fig8-drl-vs-pf")


def test_sweep_trends():
    cfg = SimConfig()
    rows = run_sweep("rayleigh-scale", [0.5, 1.0, 1.5, 2.0], reps=20, cfg=cfg,
                     steps=120)
    for key in ("mean_rate_embb_mbps", "mean_rate_urllc_mbps"):
        vals = [r[key] for r in rows]
        assert vals == sorted(vals), f"{key} not non-decreasing: {vals}"
    rows = run_sweep("di-level", ["low", "moderate", "high"], reps=20, cfg=cfg,
                     steps=120)
    di = [r["mean_di"] for r in rows]
    dep = [r["mean_departure_urllc_mbps"] for r in rows]
    assert di[0] < di[1] < di[2]
    assert dep[0] > dep[1] > dep[2]
    report("fig5-fig7-sweep-trends")


def test_allocation_feasibility_both_policies(rng):
    net = NetworkConfig()
    pf_state = PFState.initial(net.n_users)
    for _ in range(2000):
        ch = sample_channel(rng, net.n_users, net.num_prbs,
                            float(rng.uniform(0.3, 2.0)))
        alloc = pf_allocate(ch, pf_state, net)
        assert validate_allocation(alloc, net.n_users, net.num_prbs) == []
        d_e = int(rng.integers(1, net.num_prbs))
        d_u = int(rng.integers(1, net.num_prbs))
        alloc = coordinate_allocations(d_e, d_u, ch, net)
        assert validate_allocation(alloc, net.n_users, net.num_prbs) == []
    # episode traces also re-validate every slot inside the environment
    trace = run_episode("pf", SimConfig(), 55, steps=200)
    assert len(trace.records) == 200
    report("eq8b-8d-feasibility")


def test_reproducibility_cli(tmp_path):
    args = ["--seed", "7", "train", "--episodes", "5"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_main(["--out-dir", str(a)] + args) == EXIT_OK
    assert cli_main(["--out-dir", str(b)] + args) == EXIT_OK
    assert (a / "checkpoint.json").read_bytes() == (b / "checkpoint.json").read_bytes()

    eargs = ["--policy", "pf", "--seed", "5", "evaluate", "--steps", "50"]
    c, d = tmp_path / "c", tmp_path / "d"
    assert cli_main(["--out-dir", str(c)] + eargs) == EXIT_OK
    assert cli_main(["--out-dir", str(d)] + eargs) == EXIT_OK
    for name in ("rates_cdf.csv", "queue_trace.csv", "tracking.csv",
                 "violations.csv"):
        assert (c / name).read_bytes() == (d / name).read_bytes()
    report("determinism")
