"""Command line front end.

    deliverysim plan --scenario demo_4x4
    deliverysim run --scenario dynamic_6x6 --seed 3 --out runs/
    deliverysim sweep-tags --trials 100 --out figs/
    deliverysim sweep-grids --format csv
    deliverysim tags plan --scenario calibrated_tags_60m --count 20
    deliverysim odm geom --kind conv --input 224 --kernel 3 --pad 1

Exit status: 0 ok, 1 configuration or schema problem, 2 file I/O problem.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, DeliverySimError
from .harness import (SweepConfig, emit_csv, emit_png, emit_svg, planned_route,
                      sweep_grids, sweep_tags)
from .mapmodel import grid_to_graph
from .mission import run_mission
from .odm import (VGG16_LAYERS, LayerGeom, conv_output_size, layer_table, pool_output_size,
                  roi_bin_shapes, write_detection_csv)
from .planner import cell_path, grid_count
from .rfid import decode, encode, spread_tags
from .scenario import bundled, read_scenario

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

FORMATS = {"csv": ("csv",), "svg": ("svg",), "png": ("png",), "both": ("csv", "svg"), "all": ("csv", "svg", "png")}


def _load(name: str):
    """A scenario path, or the name of a bundled scenario."""
    p = Path(name)
    if p.suffix == ".json" or p.exists():
        return read_scenario(p)
    return read_scenario(bundled(name))


def _out_dir(path) -> Path | None:
    if path is None:
        return None
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_plan(args) -> int:
    sc = _load(args.scenario)
    cfg = sc.config()
    g = grid_to_graph(cfg.grid)
    path = cell_path(g, cfg.source, cfg.dest)
    gc = grid_count(path, cfg.grid)
    doc = {
        "source": list(cfg.source),
        "dest": list(cfg.dest),
        "cost_m": path.cost,
        "row_moves": gc.row_moves,
        "col_moves": gc.col_moves,
        "grid_count": gc.total,
        "path": [list(c) for c in path.cells],
    }
    text = json.dumps(doc, indent=2)
    out = _out_dir(args.out)
    if out is not None:
        (out / "plan.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def cmd_run(args) -> int:
    sc = _load(args.scenario)
    cfg = sc.config()
    seed = args.seed if args.seed is not None else cfg.detector.rng_seed
    log = run_mission(cfg, seed)
    out = _out_dir(args.out)
    if out is not None:
        with (out / "mission.csv").open("w", newline="", encoding="utf-8") as fh:
            log.write_csv(fh)
        (out / "summary.json").write_text(log.summary_json() + "\n", encoding="utf-8")
        if log.detections:
            with (out / "detections.csv").open("w", newline="", encoding="utf-8") as fh:
                write_detection_csv(log.detections, fh)
    print(log.summary_json())
    return EXIT_OK


def _sweep(args, variable: str, default_scenario: str, fn) -> int:
    sc = _load(args.scenario or default_scenario)
    cfg = SweepConfig.from_scenario(variable, sc, trials_per_point=args.trials,
                                    master_seed=args.seed, jobs=args.jobs)
    result = fn(cfg)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("variable", "distance_m", "successes", "trials", "success_rate"))
    for r in result.rows:
        w.writerow([r.value, r.distance_m, r.successes, r.trials, f"{r.success_rate:.4f}"])
    out = _out_dir(args.out)
    if out is not None:
        stem = out / f"sweep_{variable}"
        title = f"{variable.replace('_', ' ')} sweep, {cfg.trials_per_point} trials/point"
        for kind in FORMATS[args.format]:
            if kind == "csv":
                emit_csv(result, stem.with_suffix(".csv"))
            elif kind == "svg":
                emit_svg(result, stem.with_suffix(".svg"), title=title)
            else:
                emit_png(result, stem.with_suffix(".png"), title=title)
    pk = result.peak()
    print(f"# peak {variable}={pk.value} success_rate={pk.success_rate:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep_tags(args) -> int:
    return _sweep(args, "tag_count", "calibrated_tags_60m", sweep_tags)


def cmd_sweep_grids(args) -> int:
    return _sweep(args, "grid_number", "calibrated_grids_40m", sweep_grids)


def cmd_tags_plan(args) -> int:
    sc = _load(args.scenario)
    cfg = sc.config()
    if args.count is None:
        tags = list(cfg.tags)
    else:
        tags = spread_tags(planned_route(cfg), args.count)
    rows = [(t.pos.row, t.pos.col, str(t.code), decode(t.code).value) for t in tags]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("row", "col", "code", "decision"))
    w.writerows(rows)
    out = _out_dir(args.out)
    if out is not None:
        with (out / "tags.csv").open("w", newline="", encoding="utf-8") as fh:
            cw = csv.writer(fh, lineterminator="\n")
            cw.writerow(("row", "col", "code", "decision"))
            cw.writerows(rows)
    return EXIT_OK


def cmd_tags_encode(args) -> int:
    code = encode(args.position, args.length)
    print(code, decode(code).value)
    return EXIT_OK


def cmd_odm_geom(args) -> int:
    if args.table == "vgg16":
        rows = layer_table(VGG16_LAYERS)
    elif args.roi is not None:
        h, w, bh, bw = args.roi
        shapes = roi_bin_shapes(h, w, bh, bw)
        rows = [dict(bin_row=i, bin_col=j, height=s[0], width=s[1])
                for i, line in enumerate(shapes) for j, s in enumerate(line)]
    else:
        if args.input is None or args.kernel is None:
            raise ConfigError("odm geom needs --input and --kernel, --roi, or --table vgg16")
        g = LayerGeom(args.input, args.kernel, args.stride, args.pad, args.dilation)
        size = conv_output_size(g) if args.kind == "conv" else pool_output_size(g)
        rows = [dict(kind=args.kind, input=g.input_size, kernel=g.kernel, stride=g.stride,
                     pad=g.pad, dilation=g.dilation, output=size)]
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deliverysim", description="Grid delivery robot planner and simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="shortest route and grid count for a scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON path or bundled name")
    p.add_argument("--out", help="directory for plan.json")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="simulate one mission")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, help="RNG seed (default: detector seed from the scenario)")
    p.add_argument("--out", help="directory for mission.csv, summary.json, detections.csv")
    p.set_defaults(func=cmd_run)

    for name, func in (("sweep-tags", cmd_sweep_tags), ("sweep-grids", cmd_sweep_grids)):
        p = sub.add_parser(name, help=f"success-rate sweep ({name[6:]})")
        p.add_argument("--scenario", help="base scenario (default: the bundled calibrated one)")
        p.add_argument("--trials", type=int, help="trials per point (default from the scenario, else 500)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--out", help="directory for sweep files")
        p.add_argument("--format", choices=sorted(FORMATS), default="all")
        p.set_defaults(func=func)

    tags = sub.add_parser("tags", help="RFID tag utilities").add_subparsers(dest="tags_command", required=True)
    p = tags.add_parser("plan", help="list tag placements and decoded decisions")
    p.add_argument("--scenario", required=True)
    p.add_argument("--count", type=int, help="spread this many tags along the planned route instead")
    p.add_argument("--out", help="directory for tags.csv")
    p.set_defaults(func=cmd_tags_plan)
    p = tags.add_parser("encode", help="code for a route position")
    p.add_argument("position", type=int)
    p.add_argument("length", type=int)
    p.set_defaults(func=cmd_tags_encode)

    odm = sub.add_parser("odm", help="detector geometry").add_subparsers(dest="odm_command", required=True)
    p = odm.add_parser("geom", help="conv/pool output sizes and ROI bins")
    p.add_argument("--kind", choices=("conv", "pool"), default="conv")
    p.add_argument("--input", type=int)
    p.add_argument("--kernel", type=int)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--pad", type=int, default=0)
    p.add_argument("--dilation", type=int, default=1)
    p.add_argument("--roi", type=int, nargs=4, metavar=("H", "W", "BINS_H", "BINS_W"))
    p.add_argument("--table", choices=("vgg16",))
    p.set_defaults(func=cmd_odm_geom)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DeliverySimError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
