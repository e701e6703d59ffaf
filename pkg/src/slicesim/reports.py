"""CSV and JSON emitters plus checkpoint serialization.

All floats are written through ``repr`` so a fixed seed reproduces output
files byte for byte.
"""

from __future__ import annotations

import json
import os

import numpy as np

VERSION = "slicesim-0.1.0"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[h]) for h in header) + "\n")


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")


def trace_csv_rows(trace):
    """Flatten an EpisodeTrace into per-file row iterables."""
    rates_rows, queue_rows, track_rows, viol_rows = [], [], [], []
    for rec in trace.records:
        slot = rec["slot"]
        for i, rate in enumerate(rec["rates_embb"]):
            rates_rows.append({"slot": slot, "user": i, "slice": "embb",
                               "rate_bps": rate})
        n_e = len(rec["rates_embb"])
        for i, rate in enumerate(rec["rates_urllc"]):
            rates_rows.append({"slot": slot, "user": n_e + i, "slice": "urllc",
                               "rate_bps": rate})
        queue_rows.append({
            "slot": slot, "F": rec["f_total"], "G": rec["g_total"],
            "arr_urllc": rec["arr_urllc"], "dep_urllc": rec["dep_urllc"],
            "arr_embb": rec["arr_embb"], "dep_embb": rec["dep_embb"],
            "f_prev": rec["f_prev"], "g_prev": rec["g_prev"],
            "h_embb": rec["h_embb"], "h_urllc": rec["h_urllc"],
            "drift_embb": rec["drift_embb"], "drift_urllc": rec["drift_urllc"],
            "slack": rec["slack"], "lambda_l": rec["lambda_l"],
            "lagrangian": rec["lagrangian"],
            "reward_embb": rec["reward_embb"], "reward_urllc": rec["reward_urllc"],
        })
        for i, (d, v, t, di, mode) in enumerate(zip(
                rec["delays_s"], rec["violations"], rec["tracking"],
                rec["di"], rec["gain_modes"])):
            pos = rec["positions"][i]
            sp = rec["setpoints"][i]
            track_rows.append({"slot": slot, "robot": i, "delay_s": d,
                               "violation": v, "tracking_error": t, "di": di,
                               "gain_mode": mode,
                               "delay_steps": rec["delay_steps"][i],
                               "pos_x": pos[0], "pos_y": pos[1],
                               "set_x": sp[0], "set_y": sp[1]})
        viol_rows.append({"slot": slot,
                          "violations": int(np.sum(rec["violations"])),
                          "share_embb": rec["share_embb"],
                          "share_urllc": rec["share_urllc"]})
    return rates_rows, queue_rows, track_rows, viol_rows


def write_trace(trace, outdir):
    os.makedirs(outdir, exist_ok=True)
    rates_rows, queue_rows, track_rows, viol_rows = trace_csv_rows(trace)
    write_csv(os.path.join(outdir, "rates_cdf.csv"),
              ["slot", "user", "slice", "rate_bps"], rates_rows)
    write_csv(os.path.join(outdir, "queue_trace.csv"),
              ["slot", "F", "G", "arr_urllc", "dep_urllc", "arr_embb",
               "dep_embb", "f_prev", "g_prev", "h_embb", "h_urllc",
               "drift_embb", "drift_urllc", "slack", "lambda_l", "lagrangian",
               "reward_embb", "reward_urllc"], queue_rows)
    write_csv(os.path.join(outdir, "tracking.csv"),
              ["slot", "robot", "delay_s", "violation", "tracking_error",
               "di", "gain_mode", "delay_steps", "pos_x", "pos_y",
               "set_x", "set_y"], track_rows)
    write_csv(os.path.join(outdir, "violations.csv"),
              ["slot", "violations", "share_embb", "share_urllc"], viol_rows)
    write_json(os.path.join(outdir, "summary.json"),
               {"version": VERSION, **trace.aggregate()})


def write_sweep(rows, kind, outdir):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"sweep_{kind}.csv")
    header = list(rows[0].keys())
    write_csv(path, header, rows)
    return path


def write_comparison(report, outdir):
    os.makedirs(outdir, exist_ok=True)
    write_json(os.path.join(outdir, "comparison.json"), report)
    rows = [{"seed": r["seed"],
             "drl_violation_freq": r["drl_violation_freq"],
             "pf_violation_freq": r["pf_violation_freq"],
             "drl_rate_urllc_mbps": r["drl_rate_urllc_mbps"],
             "pf_rate_urllc_mbps": r["pf_rate_urllc_mbps"]}
            for r in report["per_seed"]]
    write_csv(os.path.join(outdir, "violations_compare.csv"),
              ["seed", "drl_violation_freq", "pf_violation_freq",
               "drl_rate_urllc_mbps", "pf_rate_urllc_mbps"], rows)


def save_checkpoint(path, result, cfg):
    """Serialize trained agents, the multiplier and normalization stats."""
    data = {
        "version": VERSION,
        "config_hash": cfg.config_hash(),
        "lambda_l": result.lambda_l,
        "norm": result.norm_snapshot,
        "agent_embb": result.agent_embb.state(),
        "agent_urllc": result.agent_urllc.state(),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path, cfg):
    """Rebuild frozen agents from a checkpoint file."""
    from .drl import Agent

    with open(path) as fh:
        data = json.load(fh)
    rng = np.random.default_rng(0)  # weights are overwritten immediately
    n_actions = cfg.network.num_prbs - 1
    agent_e = Agent(cfg.drl, rng, n_actions)
    agent_u = Agent(cfg.drl, rng, n_actions)
    agent_e.load_state(data["agent_embb"])
    agent_u.load_state(data["agent_urllc"])
    return {
        "agents": (agent_e, agent_u),
        "lambda_l": data["lambda_l"],
        "norm": data["norm"],
        "config_hash": data["config_hash"],
        "version": data.get("version"),
    }


def write_learning_curves(curves, path):
    write_csv(path, ["episode", "reward_embb", "reward_urllc", "f_mean",
                     "g_mean", "lambda_l"], curves)
