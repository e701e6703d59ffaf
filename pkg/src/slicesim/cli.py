"""Command-line entry point: train / evaluate / compare / sweep / synth-gain."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import control as ctl
from . import reports
from .config import ConfigError, load_config
from .drl import train
from .sim import SWEEP_KINDS, SliceEnv, compare_policies, run_episode, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="slicesim",
        description="5G eMBB/URLLC slicing simulator with a dual-agent "
                    "actor-critic allocator and a delay-robust control loop")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field (repeatable)")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out-dir", default="runs/latest", help="output directory")
    p.add_argument("--policy", choices=("drl", "pf"), default="drl",
                   help="allocation policy for evaluate")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker cap for multi-episode runs")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("train", help="train the dual-agent allocator")
    sp.add_argument("--episodes", type=int, help="override drl.episodes")
    sp.add_argument("--checkpoint", default=None,
                    help="checkpoint path (default <out-dir>/checkpoint.json)")

    sp = sub.add_parser("evaluate", help="run frozen-policy episodes")
    sp.add_argument("--checkpoint", help="trained checkpoint (drl policy)")
    sp.add_argument("--steps", type=int, help="slots per episode")
    sp.add_argument("--reference", choices=("low", "moderate", "high"),
                    help="robot reference class")

    sp = sub.add_parser("compare", help="DRL vs proportional fair on matched seeds")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--seeds", default="100:119",
                    help="seed list 'a,b,c' or range 'a:b' inclusive")
    sp.add_argument("--steps", type=int, help="slots per episode")

    sp = sub.add_parser("sweep", help="parameter sweep")
    sp.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    sp.add_argument("--values", required=True,
                    help="comma-separated sweep values")
    sp.add_argument("--reps", type=int, default=20)
    sp.add_argument("--checkpoint", help="use a trained policy for the sweep")
    sp.add_argument("--steps", type=int)

    sub.add_parser("synth-gain", help="print the certified gain as JSON")
    return p


def parse_seeds(spec):
    if ":" in spec:
        a, _, b = spec.partition(":")
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in spec.split(",") if s]


def write_manifest(outdir, args, cfg, extra=None, runtime=None):
    os.makedirs(outdir, exist_ok=True)
    manifest = {
        "command": args.command,
        "version": reports.VERSION,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.drl.seed,
        "out_dir": outdir,
        "runtime_s": runtime,
        # full invocation so the run can be replayed exactly
        "invocation": {k: v for k, v in sorted(vars(args).items())},
    }
    if extra:
        manifest.update(extra)
    reports.write_json(os.path.join(outdir, "manifest.json"), manifest)


def _load_cfg(args):
    cfg = load_config(args.config, overrides=args.set, env=os.environ)
    if args.seed is not None:
        cfg.drl.seed = args.seed
    return cfg


def _checkpoint_bundle(path, cfg):
    bundle = reports.load_checkpoint(path, cfg)
    return bundle


def cmd_train(args, cfg):
    t0 = time.time()
    outdir = args.out_dir
    write_manifest(outdir, args, cfg)
    if args.episodes is not None:
        cfg.drl.episodes = args.episodes
    env = SliceEnv(cfg, np.random.default_rng(cfg.drl.seed))
    result = train(env, cfg.drl)
    ckpt = args.checkpoint or os.path.join(outdir, "checkpoint.json")
    reports.save_checkpoint(ckpt, result, cfg)
    reports.write_learning_curves(result.curves,
                                  os.path.join(outdir, "learning_curve.csv"))
    write_manifest(outdir, args, cfg, extra={"checkpoint": ckpt},
                   runtime=time.time() - t0)
    print(f"trained {cfg.drl.episodes} episodes -> {ckpt}")
    return EXIT_OK


def cmd_evaluate(args, cfg):
    t0 = time.time()
    outdir = args.out_dir
    write_manifest(outdir, args, cfg)
    agents, norm, lam = None, None, 0.0
    if args.policy == "drl":
        if not args.checkpoint:
            raise ConfigError("evaluate --policy drl needs --checkpoint")
        bundle = _checkpoint_bundle(args.checkpoint, cfg)
        agents, norm, lam = bundle["agents"], bundle["norm"], bundle["lambda_l"]
    trace = run_episode(args.policy, cfg, cfg.drl.seed, agents=agents,
                        steps=args.steps, frozen_norm=norm, lambda_init=lam,
                        reference_kind=args.reference)
    reports.write_trace(trace, outdir)
    write_manifest(outdir, args, cfg, runtime=time.time() - t0)
    print(f"evaluated {len(trace.records)} slots under {args.policy} -> {outdir}")
    return EXIT_OK


def cmd_compare(args, cfg):
    t0 = time.time()
    outdir = args.out_dir
    write_manifest(outdir, args, cfg)
    bundle = _checkpoint_bundle(args.checkpoint, cfg)
    seeds = parse_seeds(args.seeds)
    report = compare_policies(cfg, seeds, bundle["agents"],
                              frozen_norm=bundle["norm"],
                              lambda_init=bundle["lambda_l"], steps=args.steps,
                              jobs=args.jobs)
    reports.write_comparison(report, outdir)
    write_manifest(outdir, args, cfg, runtime=time.time() - t0)
    print(f"compare: DRL viol={report['mean_drl_violation_freq']:.4f} "
          f"PF viol={report['mean_pf_violation_freq']:.4f} -> {outdir}")
    return EXIT_OK


def cmd_sweep(args, cfg):
    t0 = time.time()
    outdir = args.out_dir
    write_manifest(outdir, args, cfg)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if args.kind != "di-level":
        values = [float(v) for v in values]
    agents, norm, policy = None, None, "pf"
    if args.checkpoint:
        bundle = _checkpoint_bundle(args.checkpoint, cfg)
        agents, norm, policy = bundle["agents"], bundle["norm"], "drl"
    rows = run_sweep(args.kind, values, args.reps, cfg, policy=policy,
                     agents=agents, frozen_norm=norm, steps=args.steps,
                     jobs=args.jobs)
    path = reports.write_sweep(rows, args.kind, outdir)
    write_manifest(outdir, args, cfg, runtime=time.time() - t0)
    print(f"sweep {args.kind} over {values} -> {path}")
    return EXIT_OK


def cmd_synth_gain(args, cfg):
    cert = ctl.synthesize_gain(cfg.control)
    payload = {"version": reports.VERSION, **cert.to_dict()}
    print(json.dumps(payload, sort_keys=True, indent=2))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        cfg = _load_cfg(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {
        "train": cmd_train,
        "evaluate": cmd_evaluate,
        "compare": cmd_compare,
        "sweep": cmd_sweep,
        "synth-gain": cmd_synth_gain,
    }[args.command]
    try:
        return handler(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime fault
        print(f"runtime fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
