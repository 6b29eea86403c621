"""Command-line front end: run scenarios, sweeps, plots and curve dumps."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    PRESETS,
    load_scenario,
    preset_isolated_sweep,
)
from .degradation import write_curve_csv
from .engine import run_replicate
from .experiments import run_specs, write_outputs
from .plotting import render_boxplot_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tunnelswarm",
        description="Tunnel-excavation swarm simulator with predictive "
                    "fault detection, diagnosis and recovery.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario across replicates")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="TOML scenario file")
    src.add_argument("--preset", choices=sorted(PRESETS),
                     help="built-in scenario preset")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--replicates", type=int, default=None)
    run_p.add_argument("--out", type=Path, default=Path("out"))
    run_p.add_argument("--parallel", type=int, default=1)
    run_p.add_argument("--trace", action="store_true",
                       help="write per-replicate pose/battery traces")

    sweep_p = sub.add_parser("sweep", help="run a 0-5 faulty-robot sweep")
    sweep_p.add_argument("--fault", choices=("sensing", "motor", "excavation"),
                         required=True)
    sweep_p.add_argument("--pfddr", choices=("on", "off"), required=True)
    sweep_p.add_argument("--seed", type=int, default=1)
    sweep_p.add_argument("--replicates", type=int, default=10)
    sweep_p.add_argument("--out", type=Path, default=Path("out"))
    sweep_p.add_argument("--parallel", type=int, default=1)

    plot_p = sub.add_parser("plot", help="render box plots from result CSVs")
    plot_p.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True)
    plot_p.add_argument("--kind", choices=("blocks", "power", "dc-at-detection"),
                        required=True)
    plot_p.add_argument("--out", type=Path, required=True)

    curves_p = sub.add_parser("curves", help="dump degradation curves as CSV")
    curves_p.add_argument("--out", type=Path, required=True)
    curves_p.add_argument("--dc-max", type=float, default=2.0)
    curves_p.add_argument("--points", type=int, default=201)
    return parser


def _cmd_run(args) -> int:
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
            return EXIT_IO
        try:
            spec = load_scenario(text)
        except ConfigError as exc:
            print(f"error: invalid config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if args.seed is not None or args.replicates is not None:
            from dataclasses import replace
            spec = replace(
                spec,
                seed=spec.seed if args.seed is None else args.seed,
                replicates=spec.replicates if args.replicates is None else args.replicates)
        specs = [spec]
    else:
        seed = 1 if args.seed is None else args.seed
        replicates = 10 if args.replicates is None else args.replicates
        specs = PRESETS[args.preset](seed, replicates)
    try:
        metrics = run_specs(specs, parallel=max(1, args.parallel))
        write_outputs(args.out, specs, metrics)
        if args.trace:
            for spec in specs:
                for k in range(spec.replicates):
                    path = args.out / f"trace-{spec.scenario_id}-r{k:03d}.csv"
                    with path.open("w", newline="\n") as fh:
                        fh.write("t,robot,x,y,theta,battery,payload,mode,"
                                 "dc_s,dc_l,dc_e\n")
                        run_replicate(spec, k, trace=fh)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_sweep(args) -> int:
    specs = preset_isolated_sweep(args.fault, args.pfddr == "on",
                                  seed=args.seed, replicates=args.replicates)
    try:
        metrics = run_specs(specs, parallel=max(1, args.parallel))
        write_outputs(args.out, specs, metrics,
                      extra_manifest={"sweep_fault": args.fault,
                                      "sweep_pfddr": args.pfddr})
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:] if line]


def _cmd_plot(args) -> int:
    if args.kind == "dc-at-detection":
        groups = {"sensing": [], "motor": [], "excavation": []}
        required = {"category", "dc_at_detection"}
        filename = "detections.csv"
    else:
        column = "blocks_excavated" if args.kind == "blocks" else "power_consumed_pct"
        required = {"scenario_id", "n_faulty", column}
        groups = {}
        filename = "results.csv"
    for in_dir in args.inputs:
        path = in_dir / filename if in_dir.is_dir() else in_dir
        if not path.exists():
            print(f"error: {path} not found", file=sys.stderr)
            return EXIT_IO
        header, rows = _read_csv(path)
        if not required.issubset(header):
            missing = sorted(required - set(header))
            print(f"error: {path} missing columns: {', '.join(missing)}",
                  file=sys.stderr)
            return EXIT_CONFIG
        idx = {name: header.index(name) for name in header}
        for row in rows:
            if args.kind == "dc-at-detection":
                groups[row[idx["category"]]].append(float(row[idx["dc_at_detection"]]))
            else:
                n_faulty = row[idx["n_faulty"]]
                sid = row[idx["scenario_id"]]
                label = f"n={n_faulty}" if sid.startswith("sweep-") else sid
                groups.setdefault(label, []).append(float(row[idx[column]]))
    titles = {
        "blocks": ("Blocks excavated", "blocks"),
        "power": ("Power consumed", "% of one battery"),
        "dc-at-detection": ("Degradation severity at detection", "dc"),
    }
    title, y_label = titles[args.kind]
    svg = render_boxplot_svg(sorted(groups.items()), title, y_label)
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(svg, newline="\n")
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_curves(args) -> int:
    grid = np.linspace(0.0, args.dc_max, args.points)
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with args.out.open("w", newline="\n") as fh:
            write_curve_csv(fh, grid)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "plot": _cmd_plot,
        "curves": _cmd_curves,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
