"""Command-line entry point: train / evaluate / compare / simulate.

Exit codes: 0 success, 1 runtime failure, 2 configuration/usage error.
Flags override values from the YAML config file; the data directory can also
be pointed elsewhere with the HVACGRID_DATA_DIR environment variable.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

import numpy as np

from . import harness
from .config import ConfigError, ExperimentConfig, load_config, save_config
from .ddpg import DdpgAgent

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file (defaults apply when omitted)")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--output", help="output directory for run artifacts")
    p.add_argument("--weather", help="weather CSV path (default: bundled data)")
    p.add_argument("--prices", help="price CSV path (default: bundled data)")
    p.add_argument("-v", "--verbose", action="store_true", help="chatty progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hvacgrid",
        description="Building-HVAC / microgrid co-simulation with MPC and DDPG controllers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a combo or drl agent")
    _add_common(p_train)
    p_train.add_argument("--scenario", choices=["combo", "drl"],
                         help="learning scenario to train")
    p_train.add_argument("--epochs", type=int, help="training episodes override")

    p_eval = sub.add_parser("evaluate", help="evaluate a scenario on the test days")
    _add_common(p_eval)
    p_eval.add_argument("--scenario", choices=["mpc", "combo", "drl"],
                        help="scenario to evaluate")
    p_eval.add_argument("--checkpoint", help="agent checkpoint (required for combo/drl)")
    p_eval.add_argument("--days", type=int, help="number of evaluation days override")

    p_cmp = sub.add_parser("compare", help="merge several run reports into one table")
    p_cmp.add_argument("--reports", nargs="+", required=True,
                       help="run directories holding summary.json")
    p_cmp.add_argument("--output", required=True, help="directory for the comparison")

    p_sim = sub.add_parser("simulate", help="open-loop plant stepping for debugging")
    _add_common(p_sim)
    p_sim.add_argument("--days", type=int, default=1, help="days to simulate")
    p_sim.add_argument("--mdot", type=float, help="constant per-zone airflow (kg/s)")
    return parser


def _load(args, scenario_override=None) -> ExperimentConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "scenario": scenario_override,
        "epochs": getattr(args, "epochs", None),
        "output_dir": getattr(args, "output", None),
        "weather": getattr(args, "weather", None),
        "prices": getattr(args, "prices", None),
    }
    if getattr(args, "days", None) is not None and args.command == "evaluate":
        overrides["test_days"] = args.days
    return load_config(getattr(args, "config", None),
                       {k: v for k, v in overrides.items() if v is not None})


def cmd_train(args) -> int:
    cfg = _load(args, scenario_override=args.scenario)
    if cfg.scenario not in ("combo", "drl"):
        print("train: scenario must be combo or drl (pass --scenario or set it "
              "in the config)", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.verbose:
        print(f"training scenario={cfg.scenario} seed={cfg.seed} "
              f"epochs={cfg.effective_epochs()}")
    agent, log = harness.train_scenario(cfg)
    save_config(cfg, out / "config.yaml")
    agent.save(out / "checkpoint.npz")
    rows = log.to_rows()
    import csv
    with open(out / "train_log.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(rows[0].keys()) if rows else ["episode"])
        for r in rows:
            writer.writerow([v if isinstance(v, int) else repr(float(v))
                             for v in r.values()])
    if args.verbose and rows:
        print(f"final episode return: {rows[-1]['episode_return']:.4f}")
    print(f"checkpoint written to {out / 'checkpoint.npz'}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _load(args, scenario_override=args.scenario)
    agent = None
    if cfg.scenario in ("combo", "drl"):
        if not args.checkpoint:
            print("evaluate: --checkpoint is required for combo/drl", file=sys.stderr)
            return EXIT_CONFIG
        ckpt = Path(args.checkpoint)
        if not ckpt.exists():
            print(f"evaluate: checkpoint not found: {ckpt}", file=sys.stderr)
            return EXIT_CONFIG
        agent = DdpgAgent.load(ckpt)
    report = harness.run_scenario(cfg, out_dir=cfg.output_dir, agent=agent)
    if args.verbose:
        for k, v in report.summary.items():
            print(f"{k}: {v}")
    print(f"report written to {cfg.output_dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    for rd in args.reports:
        if not (Path(rd) / "summary.json").exists():
            print(f"compare: no summary.json in {rd}", file=sys.stderr)
            return EXIT_CONFIG
    if len(args.reports) < 2:
        print("compare: need at least two reports", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = harness.compare_runs(list(args.reports), args.output)
    except ValueError as exc:
        print(f"compare: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"comparison written to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    weather, prices, train_days, test_days = harness.build_dataset(cfg)
    plant = harness.build_plant(cfg)
    mdot = args.mdot if args.mdot is not None else 0.5 * (
        cfg.hvac.mdot_min_kg_s + cfg.hvac.mdot_max_kg_s)
    rows = []
    for day in (train_days + test_days)[: args.days]:
        plant.reset(weather, prices, day)
        for _ in range(cfg.slots_per_episode):
            rec = plant.step(np.full(plant.n_zones, mdot), 0.0)
            info = {
                "day": rec.day, "slot": rec.slot, "t_out_c": rec.t_out_c,
                "irradiance_kw_m2": rec.irradiance_kw_m2, "buy_price": rec.buy_price,
                "soc_kwh": rec.soc_kwh, "p_ess_kw": rec.p_ess_kw,
                "p_dg_kw": rec.p_dg_kw, "p_solar_kw": rec.p_solar_kw,
                "p_hvac_kw": rec.p_hvac_kw, "p_net_kw": rec.p_net_kw,
                "p_grid_kw": rec.p_grid_kw, "cost": rec.cost,
                "balance_residual_kw": rec.balance_residual_kw,
                "zone_temps_c": rec.zone_temps_c, "mdots": rec.mdots,
            }
            rows.append(harness._row_from_info(info, plant.n_zones))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    harness.write_slot_log(rows, plant.n_zones, out / "slots.csv")
    print(f"open-loop log written to {out / 'slots.csv'}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"train": cmd_train, "evaluate": cmd_evaluate,
                "compare": cmd_compare, "simulate": cmd_simulate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        if getattr(args, "verbose", False):
            traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
