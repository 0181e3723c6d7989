"""Command-line interface: plan / simulate / experiment / heal-curve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import OamLinkError
from .field import write_field, write_field_csv
from .link_design import LinkBudget, compare_with_reference, derive_link, max_beam_radius
from .scenario import (default_config, run_experiment, run_scenario,
                       scenario_from_config, validate_config, wavelength_from,
                       write_healing_csv)


def _load_config(path):
    if path is None:
        return default_config()
    with open(path) as fh:
        return validate_config(json.load(fh))


def _apply_overrides(cfg, args):
    if getattr(args, "seed", None) is not None:
        cfg["rx"]["noise_seed"] = args.seed
    if getattr(args, "grid", None) is not None:
        cfg["grid"]["side"] = args.grid
    if getattr(args, "snr_db", None) is not None:
        cfg["rx"]["snr_db"] = args.snr_db
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_plan(args):
    cfg = _apply_overrides(_load_config(args.config), args)
    link = cfg["link"]
    budget = LinkBudget(bandwidth_B=link["bandwidth_hz"],
                        num_modes_K=link["num_modes"],
                        link_distance_L=link["distance_m"],
                        rx_spacing_d=link["rx_spacing_m"],
                        digital_if_F=link["digital_if_hz"],
                        rf_frequency=link["rf_hz"])
    derived = derive_link(budget, link["beam_radius_m"],
                          wavelength=link["wavelength_override_m"])
    plan = {
        "max_beam_radius_m": max_beam_radius(budget),
        "beam_radius_m": derived.beam_radius_R,
        "wavelength_m": derived.wavelength_lambda,
        "tx_radius_m": derived.tx_radius_r,
        "far_field_m": derived.far_field_L_far,
        "num_elements": derived.num_elements_N,
        "reference_comparison": compare_with_reference(
            derive_link(budget, 0.87, wavelength=0.011)),
    }
    out = _out_dir(args)
    _write_json(plan, out / "plan.json")
    print(json.dumps(plan, indent=2, sort_keys=True))


def cmd_simulate(args):
    cfg = _apply_overrides(_load_config(args.config), args)
    s = scenario_from_config(cfg, args.mode, obstructed=not args.clear,
                             h_scale=None)
    result = run_scenario(s, keep_fields=args.dump_fields)
    out = _out_dir(args)
    summary = {
        "mode": s.order_l,
        "scenario": "clear" if args.clear else "obstructed",
        "h": [[float(v.real), float(v.imag)] for v in result.h_raw],
        "rx_power_db": result.metrics.rx_power_db,
        "rx_power_avg_db": result.metrics.rx_power_avg_db,
        "snr_db": result.metrics.snr_db,
        "combined_evm_pct": result.metrics.combined_evm_pct,
        "channel_phases_deg": result.metrics.channel_phases_deg,
    }
    _write_json(summary, out / "scenario.json")
    if args.dump_fields:
        for name, f in result.fields.items():
            write_field(f, out / f"{name}.oamf")
            write_field_csv(f, out / f"{name}.csv")
    print(json.dumps(summary, indent=2, sort_keys=True))


def cmd_experiment(args):
    cfg = _apply_overrides(_load_config(args.config), args)
    report = run_experiment(cfg, out_dir=args.out, dump_fields=args.dump_fields)
    for l, data in sorted(report["modes"].items(), key=lambda kv: int(kv[0])):
        print(f"mode {l}: d_power={data['d_power_db']:+.2f} dB  "
              f"d_snr={data['d_snr_db_mean']:+.2f} dB  "
              f"d_evm={data['d_evm_pct_mean']:+.2f} pct  "
              f"similarity@final={data['final_similarity']:.3f}")
    print(f"report written to {Path(args.out) / 'report.json'}")


def cmd_heal_curve(args):
    cfg = _apply_overrides(_load_config(args.config), args)
    cfg["rx"]["num_noise_seeds"] = 1
    report = run_experiment(cfg, out_dir=None)
    out = _out_dir(args)
    write_healing_csv(report, out / "healing_curve.csv")
    for l, data in sorted(report["modes"].items(), key=lambda kv: int(kv[0])):
        curve = data["healing_curve"]
        tail = curve["similarity"][-1]
        print(f"mode {l}: similarity {curve['similarity'][0]:.3f} @ "
              f"{curve['z_m'][0]:g} m -> {tail:.3f} @ {curve['z_m'][-1]:g} m")
    print(f"curve written to {out / 'healing_curve.csv'}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oamlink",
        description="Simulate self-healing OAM millimeter-wave links")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None,
                       help="JSON experiment config (defaults are built in)")
        p.add_argument("--out", type=str, default="out",
                       help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the noise seed")
        p.add_argument("--grid", type=int, default=None,
                       help="override the grid side length")
        p.add_argument("--snr-db", dest="snr_db", type=float, default=None,
                       help="override the configured RX SNR")
        p.add_argument("--dump-fields", action="store_true",
                       help="write field snapshots")

    p = sub.add_parser("plan", help="derive the link geometry")
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run a single scenario")
    common(p)
    p.add_argument("--mode", type=int, default=2, help="OAM order")
    p.add_argument("--clear", action="store_true",
                   help="run without the obstruction")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run the clear/obstructed matrix")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("heal-curve", help="healing curves vs distance")
    common(p)
    p.set_defaults(func=cmd_heal_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except OamLinkError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
