"""Command line entry point: predict, simulate, compare, sweep, selftest."""

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .harness import (
    catalog,
    get_scenario,
    render,
    run_scenario,
    scenario_from_config,
    simulate,
    sweep,
)
from .sim import write_snapshot_csv
from .tracker import track, write_track_csv


def load_target(target: str):
    """Return (scenario, output_dir) for a catalog label or a JSON config path."""
    if target.lower().endswith(".json") or os.path.isfile(target):
        with open(target, encoding="utf-8") as fh:
            cfg = json.load(fh)
        base = get_scenario(cfg["scenario"]) if "scenario" in cfg else None
        return scenario_from_config(cfg, base), cfg.get("output_dir")
    return get_scenario(target), None


def _out_dir(args, cfg_dir, label):
    return args.output_dir or cfg_dir or os.path.join("out", label)


def _summary(report) -> dict:
    d = report.to_dict()
    return {"label": d["label"], "mode": d["mode"], "passed": d["passed"],
            "checks": d["checks"], "errors": d["errors"]}


def cmd_predict(args) -> int:
    s, cfg_dir = load_target(args.target)
    report = run_scenario(s, "analytics")
    out = _out_dir(args, cfg_dir, s.label)
    render(report, out, svg=args.svg)
    print(json.dumps(report.to_dict()["prediction"], indent=2, sort_keys=True))
    return 0 if not report.errors else 1


def cmd_simulate(args) -> int:
    s, cfg_dir = load_target(args.target)
    out = _out_dir(args, cfg_dir, s.label)
    os.makedirs(out, exist_ok=True)
    snaps = simulate(s)
    keep = {round(t, 9) for t in s.sample_times} | {round(snaps[-1].t, 9)}
    for snap in snaps:
        if round(snap.t, 9) in keep:
            write_snapshot_csv(os.path.join(out, f"snapshot_t{snap.t:g}.csv"), snap)
    if s.a0 > 0:
        write_track_csv(os.path.join(out, "track.csv"), track(snaps, s.x0, s.a0))
    print(f"{s.label}: {len(snaps)} snapshots, t_end={snaps[-1].t:g}, written to {out}")
    return 0


def cmd_compare(args) -> int:
    s, cfg_dir = load_target(args.target)
    report = run_scenario(s, "compare", keep_snapshots=args.svg)
    out = _out_dir(args, cfg_dir, s.label)
    render(report, out, svg=args.svg)
    if report.track:
        write_track_csv(os.path.join(out, "track.csv"), report.track)
    print(json.dumps(_summary(report), indent=2, sort_keys=True))
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    try:
        amps = [float(a) for a in args.amps.split(",") if a.strip()]
    except ValueError:
        print(f"cannot parse --amps {args.amps!r}", file=sys.stderr)
        return 2
    template, cfg_dir = load_target(args.template)
    if args.x0 is not None:
        template = replace(template, x0=args.x0)
    mode = "analytics" if args.analytics_only else "compare"
    result = sweep(amps, template, mode)
    out = args.output_dir or cfg_dir
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "sweep.json"), "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    if mode == "analytics":
        return 0
    ok = all(r["match"] and not r["error"] for r in result["rows"])
    return 0 if ok else 1


def _selftest_checks():
    from .elliptic import ellip_E, ellip_K
    from .meanfield import WellSpec, boundaries, critical_time
    from .sim import Grid, SolverConfig, WaveField, evolve, soliton_profile
    from .tracker import detect_soliton
    from .whitham import Genus1State, whitham_velocities

    m = 0.5
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(40):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    yield "K(0.5) vs AGM", abs(ellip_K(m) - math.pi / (2.0 * a)) / ellip_K(m), 1e-12
    K, E, Kp, Ep = ellip_K(m), ellip_E(m), ellip_K(1 - m), ellip_E(1 - m)
    yield "Legendre relation", abs(E * Kp + Ep * K - K * Kp - math.pi / 2.0), 1e-10

    st = Genus1State(-1.0, 1.0 - 2e-8, 1.0)
    v = whitham_velocities(st)
    yield "soliton-limit velocity", abs(v[1] - (2.0 * st.lambda1 + 4.0 * st.lambda3)) / 2.0, 1e-5

    well = WellSpec(-1.0, 20.0)
    ts = critical_time(well)
    lo, hi = boundaries(well, ts * (1 - 1e-12)), boundaries(well, ts * (1 + 1e-12))
    yield "x_P continuity at t*", abs(lo.x_P - hi.x_P), 1e-9

    grid = Grid(-40.0, 40.0, 512)
    u0 = WaveField(grid, soliton_profile(grid.x, 2.0, -10.0))
    snaps = evolve(u0, 5.0, SolverConfig(dt=2e-3, sample_interval=5.0))
    pt = detect_soliton(snaps[-1], (0.0, 20.0))
    yield "soliton amplitude after t=5", abs(pt.a_meas - 2.0) / 2.0, 1e-2
    yield "soliton position after t=5", abs(pt.x_peak - 10.0) / 20.0, 5e-3


def cmd_selftest(args) -> int:
    failed = 0
    for name, value, tol in _selftest_checks():
        ok = bool(np.isfinite(value) and value <= tol)
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3g} (tol {tol:g})")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    labels = ", ".join(s.label for s in catalog())
    p = argparse.ArgumentParser(prog="kdvmeanfield",
                                description="Soliton / mean-field interaction for KdV well data.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, hlp in (("predict", cmd_predict, "analytic predictions only"),
                          ("simulate", cmd_simulate, "run the solver only"),
                          ("compare", cmd_compare, "predict, simulate and check tolerances")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("target", help=f"scenario label ({labels}) or config .json")
        sp.add_argument("-o", "--output-dir")
        if name != "simulate":
            sp.add_argument("--svg", action="store_true", help="also write report.svg (needs matplotlib)")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("sweep", help="classification sweep over trial amplitudes")
    sp.add_argument("--amps", required=True, help="comma-separated amplitudes, e.g. 0.1,1,2,3")
    sp.add_argument("--template", default="FIG7", help="scenario label or config .json (default FIG7)")
    sp.add_argument("--x0", type=float)
    sp.add_argument("--analytics-only", action="store_true")
    sp.add_argument("-o", "--output-dir")
    sp.set_defaults(func=cmd_sweep)
    sp = sub.add_parser("selftest", help="fast internal consistency checks")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
