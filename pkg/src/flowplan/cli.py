"""Command-line interface: plan | partition | bench | plot.

Exit codes: 0 success, 1 planning failure, 2 input error, 3 benchmark
tolerance failure. Planning failures emit a machine-readable error JSON on
stdout; input errors report on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import backends
from .bench import run_suite
from .cost import energy_model, time_model
from .errors import FlowPlanError, InputError, PlanningFailureError
from .fixtures import FIXTURE_NAMES, fixture
from .mej import IDSchedule, optimize
from .partition import mercator_grid, partition_grid, read_grid_csv
from .sceneio import dump_json, load_scene, report_dict, scene_to_dict
from .svg import partition_svg, scene_svg


def _parse_point(text: str, dim_hint: int | None = None) -> np.ndarray:
    try:
        p = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"cannot parse point {text!r}; expected comma-separated numbers") from None
    if dim_hint is not None and p.shape != (dim_hint,):
        raise InputError(f"point {text!r} must have {dim_hint} coordinates")
    return p


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--threads", type=int, default=None,
                   help="optimizer round parallelism (default: all cores)")
    p.add_argument("--json-out", default=None, metavar="PATH",
                   help="write the JSON document here ('-' for stdout)")
    p.add_argument("--svg-out", default=None, metavar="PATH", help="write an SVG plot here")


def _resolve_scene(token: str, seed: int):
    """Scene argument is a JSON path or a bundled fixture name."""
    if token in FIXTURE_NAMES and not os.path.exists(token):
        fx = fixture(token, seed=seed)
        return fx.scene, token, fx.start, fx.goal, fx.V, fx.schedule, []
    if not os.path.exists(token):
        raise InputError(
            f"{token!r} is neither a scene file nor a bundled fixture "
            f"({', '.join(FIXTURE_NAMES)})"
        )
    doc = load_scene(token)
    V = doc.model.V if doc.model is not None else None
    return doc.scene, token, doc.start, doc.goal, V, None, doc.warnings


def _emit(doc: dict, path: str | None):
    text = dump_json(doc)
    if path == "-":
        sys.stdout.write(text)
    elif path is not None:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_plan(args) -> int:
    scene, scene_id, start, goal, V, schedule, warnings = _resolve_scene(args.scene, args.seed)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.start is not None:
        start = _parse_point(args.start, scene.dimension)
    if args.goal is not None:
        goal = _parse_point(args.goal, scene.dimension)
    if start is None or goal is None:
        raise InputError("start and goal must come from the scene file or --start/--goal")
    if args.V is not None:
        V = args.V
    if V is None:
        raise InputError("vehicle speed missing: set --V or a model block in the scene file")
    model = time_model(V=V) if args.model == "time" else energy_model(V=V, C=args.C)

    if schedule is None:
        schedule = IDSchedule(seed=args.seed)
    overrides = {"seed": args.seed}
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    if args.h is not None:
        overrides["h"] = args.h
    if args.sigma0 is not None:
        overrides["sigma0"] = args.sigma0
    if args.duration is not None:
        overrides["perturb_duration"] = args.duration
    schedule = IDSchedule(**{**schedule.__dict__, **overrides})

    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    t0 = time.perf_counter()
    result = optimize(scene, start, goal, model, schedule, threads=threads)
    elapsed = time.perf_counter() - t0

    doc = report_dict(scene, scene_id, model, schedule, result,
                      wall_clock=None if args.no_timing else elapsed)
    _emit(doc, args.json_out)
    if args.json_out != "-":
        junc = ", ".join("(" + ", ".join(f"{c:.4f}" for c in p) + ")"
                         for p in result.chain.junction_points(scene))
        print(f"cost {result.cost:.4f} via {len(result.chain.boundaries)} junctions: {junc}")
        co = [m for m in result.local_minima if m.co_optimal]
        if len(co) > 1:
            print(f"co-optimal paths: {len(co)}")
        if not args.no_timing:
            print(f"elapsed {elapsed:.2f}s")
    if args.svg_out:
        pts = np.vstack([np.asarray(start, dtype=float),
                         *result.chain.junction_points(scene),
                         np.asarray(goal, dtype=float)])
        with open(args.svg_out, "w") as fh:
            fh.write(scene_svg(scene, path=pts,
                               junctions=result.chain.junction_points(scene),
                               start=start, goal=goal))
    return 0


def cmd_partition(args) -> int:
    grid = read_grid_csv(args.grid)
    if args.mercator is not None:
        origin = _parse_point(args.mercator, 2)
        grid = mercator_grid(grid, origin=(float(origin[0]), float(origin[1])))
    res = partition_grid(grid, args.k, seed=args.seed, objective=args.objective)

    lines_json = []
    for (a, b), fits in sorted(res.fitted_lines.items()):
        for fit in fits:
            lines_json.append({"pair": [a, b], "a": fit.a, "c": fit.c,
                               "vertical": fit.vertical})
    doc = {
        "k": res.k,
        "labels": res.labels.tolist(),
        "centroids": res.centroids.tolist(),
        "mean_flows": res.mean_flows.tolist(),
        "boundary_points": {f"{a},{b}": pts.tolist()
                            for (a, b), pts in sorted(res.boundary_points.items())},
        "fitted_lines": lines_json,
        "objective_history": res.objective_history,
    }
    _emit(doc, args.json_out)

    if args.skeleton_out:
        mins = grid.positions.reshape(-1, 2).min(axis=0)
        maxs = grid.positions.reshape(-1, 2).max(axis=0)
        skeleton = {
            "dimension": 2,
            "domain": [mins.tolist(), maxs.tolist()],
            "regions": [
                {"id": c + 1, "flow": res.mean_flows[c].tolist(), "vertices": []}
                for c in range(res.k)
            ],
            "boundaries": [],
            "fitted_lines": lines_json,
        }
        with open(args.skeleton_out, "w") as fh:
            fh.write(dump_json(skeleton))

    if args.json_out != "-":
        sizes = [int(np.sum(res.labels == c)) for c in range(res.k)]
        print(f"k={res.k} cluster sizes {sizes}")
        for c in range(res.k):
            u = res.mean_flows[c]
            print(f"  region {c}: mean flow ({u[0]:.4f}, {u[1]:.4f})")
        for entry in lines_json:
            if entry["vertical"]:
                print(f'  boundary {tuple(entry["pair"])}: x = {entry["c"]:.4f}')
            else:
                print(f'  boundary {tuple(entry["pair"])}: '
                      f'{entry["a"]:.4f}*x + y + {entry["c"]:.4f} = 0')
    if args.svg_out:
        all_fits = [fit for fits in res.fitted_lines.values() for fit in fits]
        with open(args.svg_out, "w") as fh:
            fh.write(partition_svg(grid, res.labels, all_fits))
    return 0


def cmd_bench(args) -> int:
    passed, rows, table = run_suite(seed=args.seed, threads=args.threads)
    print(table)
    _emit({"passed": passed, "cases": rows}, args.json_out)
    return 0 if passed else 3


def cmd_plot(args) -> int:
    scene, scene_id, start, goal, _, _, warnings = _resolve_scene(args.scene, args.seed)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    path_pts = junctions = None
    if args.report:
        with open(args.report) as fh:
            rep = json.load(fh)
        res = rep["result"]
        junctions = [np.asarray(p, dtype=float) for p in res["junction_points"]]
        start = np.asarray(res["start"], dtype=float)
        goal = np.asarray(res["goal"], dtype=float)
        path_pts = np.vstack([start, *junctions, goal]) if junctions else np.vstack([start, goal])
    out = args.svg_out or (os.path.splitext(os.path.basename(args.scene))[0] + ".svg")
    with open(out, "w") as fh:
        fh.write(scene_svg(scene, path=path_pts, junctions=junctions,
                           start=start, goal=goal, arrows_per_axis=args.arrows))
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="flowplan",
        description="Optimal path planning through piecewise-constant flow fields.",
    )
    ap.add_argument("--backend", choices=("auto", "numba", "numpy"), default=None,
                    help="kernel backend (default: env FLOWPLAN_BACKEND or auto)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a path through a scene")
    p.add_argument("scene", help="scene JSON path or bundled fixture name")
    p.add_argument("--start", default=None, help="start point, comma-separated")
    p.add_argument("--goal", default=None, help="goal point, comma-separated")
    p.add_argument("--model", choices=("time", "energy"), default="time")
    p.add_argument("--V", type=float, default=None, help="vehicle maximum speed")
    p.add_argument("--C", type=float, default=1.0, help="energy running cost")
    p.add_argument("--rounds", type=int, default=None, help="diffusion rounds")
    p.add_argument("--h", type=float, default=None, help="descent step size")
    p.add_argument("--sigma0", type=float, default=None, help="initial noise level")
    p.add_argument("--duration", type=int, default=None, help="noisy-phase step count")
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock from output for byte-stable reports")
    _add_common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("partition", help="partition a gridded flow field")
    p.add_argument("grid", help="flow grid CSV (header x,y,u,v)")
    p.add_argument("--k", type=int, required=True, help="cluster count")
    p.add_argument("--objective", choices=("squared", "absolute"), default="squared")
    p.add_argument("--mercator", default=None, metavar="LON0,LAT0",
                   help="treat x,y as lon/lat degrees and project about this origin")
    p.add_argument("--skeleton-out", default=None, metavar="PATH",
                   help="write a scene-JSON skeleton for manual completion")
    _add_common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("bench", help="run the benchmark suite")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="render a scene (optionally with a planned path)")
    p.add_argument("scene", help="scene JSON path or bundled fixture name")
    p.add_argument("--report", default=None, help="run-report JSON to overlay")
    p.add_argument("--arrows", type=int, default=8, help="flow arrows per axis")
    _add_common(p)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend is not None:
        backends.reset()
        backends.kernels(args.backend if args.backend != "auto" else None)
    try:
        return args.func(args)
    except PlanningFailureError as exc:
        sys.stdout.write(dump_json({
            "error": {"type": "planning_failure", "message": str(exc),
                      "diagnostics": getattr(exc, "diagnostics", {})},
        }))
        return 1
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FlowPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
