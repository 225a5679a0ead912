"""Command-line entry point: ``poolplan plan | validate | bench``.

Exit codes: 0 success, 1 input error, 2 uncovered or unreachable target,
3 validation failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import contextmanager
from typing import Sequence

import numpy as np

from . import bench as benchmod
from .grid import (
    Coord,
    GridError,
    GridMap,
    comb_maze,
    comb_start,
    make_sources,
    random_free_cells,
    random_maze,
)
from .mapio import MapFormatError, RunReport, export_pgm, load_input, scene_summary, write_report
from .oracle import LENGTH_TOL, ValidationReport, bfs_multi_source, check_activity, check_path, dijkstra_octile
from .propagate import ActivityMap, PropagationError, layer_bound, propagate, propagate_auto
from .reconstruct import (
    ReconstructionError,
    UncoveredTarget,
    path_metrics,
    reconstruct_euclidean,
    reconstruct_simple,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNCOVERED = 2
EXIT_INVALID = 3


class InputError(Exception):
    pass


def _coord(text: str) -> Coord:
    try:
        r, c = text.split(",")
        return Coord(int(r), int(c))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected row,col, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _dims(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}") from None


def _layers(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--layers must be an integer or 'auto', got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("--layers must be >= 1")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; 2 means "uncovered" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poolplan", description="Max-pool activity-map path planner.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scene_args(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--map", help="Moving AI .map file or ASCII scene file")
        src.add_argument("--comb", type=_dims, metavar="WxH", help="generated comb (serpentine) maze")
        src.add_argument("--random", type=_dims, metavar="WxH", help="generated random maze")
        sp.add_argument("--density", type=float, default=0.3, help="obstacle density for --random")
        sp.add_argument("--maze-seed", type=int, default=0, help="seed for --random")
        sp.add_argument("--sources", type=_coord, nargs="+", metavar="ROW,COL", help="override sources")
        sp.add_argument("--targets", type=_coord, nargs="+", metavar="ROW,COL", help="override targets")
        sp.add_argument("--num-sources", type=int, default=1,
                        help="random free sources when the input carries none")
        sp.add_argument("--layers", type=_layers, default="auto", help="layer count or 'auto'")
        sp.add_argument("--auto-cap", type=int, default=None,
                        help="layer limit for --layers auto (default 2x max grid dimension)")
        sp.add_argument("--mode", choices=("batched", "iterative"), default="batched")
        sp.add_argument("--method", choices=("simple", "euclidean"), default="euclidean")
        sp.add_argument("--seed", type=int, default=0, help="tie-break seed for simple reconstruction")
        sp.add_argument("--corner", choices=("strict", "permissive"), default="permissive",
                        help="diagonal squeeze rule shared by straightening and the octile oracle")
        sp.add_argument("--threads", type=int, default=None, help="kernel threads (default: all)")
        sp.add_argument("--report", help="write the JSON run report here (default: stdout)")
        sp.add_argument("--pgm", help="write the activity map as a binary PGM here")

    plan = sub.add_parser("plan", help="propagate and reconstruct paths")
    scene_args(plan)

    val = sub.add_parser("validate", help="check the planner against BFS/Dijkstra oracles")
    scene_args(val)
    val.add_argument("--suite", type=int, default=None, metavar="N",
                     help="with --random: validate N mazes with maze seeds 0..N-1")
    val.add_argument("--max-targets", type=int, default=32,
                     help="targets sampled from covered cells when none are given")
    val.add_argument("--inject-fault", type=_coord, default=None, help=argparse.SUPPRESS)

    b = sub.add_parser("bench", help="time the propagation kernel")
    b.add_argument("--sizes", type=_int_list, default=None, help="comma-separated linear sizes")
    b.add_argument("--layers", type=int, default=None, help="fixed layer count")
    b.add_argument("--layer-ratio", type=float, default=None, help="L = ratio * n")
    b.add_argument("--mode", choices=("batched", "iterative"), default="batched")
    b.add_argument("--mode-compare", action="store_true", help="time batched against iterative")
    b.add_argument("--density-compare", action="store_true", help="time density 0 against 0.45")
    b.add_argument("--size", type=int, default=None, help="linear size for the compare modes")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--interleave", action="store_true",
                   help="cycle through sizes on every repeat so load drift hits all sizes alike")
    b.add_argument("--threads", type=int, default=None)
    b.add_argument("--report", help="write the JSON bench report here (default: stdout)")
    return p


@contextmanager
def _timed(timing: dict, phase: str):
    t0 = time.perf_counter()
    yield
    timing[phase] = round((time.perf_counter() - t0) * 1e3, 3)


def _load_scene(args, maze_seed: int | None = None):
    seed = args.maze_seed if maze_seed is None else maze_seed
    if args.map:
        try:
            grid, srcs, tgts = load_input(args.map)
        except OSError as e:
            raise InputError(f"cannot read {args.map}: {e.strerror or e}") from None
        except (MapFormatError, GridError) as e:
            raise InputError(f"{args.map}: {e}") from None
    elif args.comb:
        grid = comb_maze(*args.comb)
        srcs, tgts = [comb_start(grid)], []
    else:
        w, h = args.random
        grid = random_maze(w, h, args.density, seed)
        srcs, tgts = [], []
    if args.sources:
        srcs = list(args.sources)
    if args.targets:
        tgts = list(args.targets)
    if not srcs:
        srcs = random_free_cells(grid, args.num_sources, seed)
    try:
        sources = make_sources(grid, srcs)
    except GridError as e:
        raise InputError(str(e)) from None
    for t in tgts:
        if not grid.in_bounds(t):
            raise InputError(f"target {tuple(t)} is out of bounds")
        if grid.is_obstacle(t):
            raise InputError(f"target {tuple(t)} lies on an obstacle")
    return grid, sources, tgts


def _propagate(grid, sources, args, timing) -> tuple[ActivityMap, dict]:
    cap = args.auto_cap if args.auto_cap is not None else 2 * max(grid.shape)
    with _timed(timing, "propagate"):
        if args.layers == "auto":
            res = propagate_auto(grid, sources, cap, args.threads)
            return res.activity, {"layers_used": res.layers_used, "termination": res.cause, "auto_cap": cap}
        act = propagate(grid, sources, args.layers, args.mode, args.threads)
    return act, {"layers_used": act.layers_applied, "termination": "fixed"}


def _config(args) -> dict:
    return {
        "layers": args.layers,
        "auto_cap": args.auto_cap,
        "mode": args.mode,
        "method": args.method,
        "seed": args.seed,
        "corner_rule": args.corner,
        "threads": args.threads,
    }


def _path_entry(target, path) -> dict:
    m = path_metrics(path)
    return {
        "target": list(target),
        "status": "ok",
        "source": list(path.source),
        "steps": m.steps,
        "euclidean_length": round(m.euclidean_length, 12),
        "points": [list(p) for p in path.points],
    }


def _reconstruct(method, act, grid, sources, t, args):
    if method == "simple":
        return reconstruct_simple(act, grid, sources, t, args.seed)
    return reconstruct_euclidean(act, grid, sources, t, args.corner)


def _emit(report: RunReport, dest: str | None) -> None:
    text = write_report(report)
    if dest:
        with open(dest, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_pgm(act: ActivityMap, dest: str | None) -> None:
    if dest:
        with open(dest, "wb") as fh:
            fh.write(export_pgm(act))


def cmd_plan(args) -> int:
    timing: dict = {}
    grid, sources, targets = _load_scene(args)
    act, prop = _propagate(grid, sources, args, timing)
    paths, uncovered = [], 0
    with _timed(timing, "reconstruct"):
        for t in targets:
            try:
                paths.append(_path_entry(t, _reconstruct(args.method, act, grid, sources, t, args)))
            except UncoveredTarget as e:
                uncovered += 1
                paths.append({"target": list(t), "status": "uncovered", "message": str(e)})
                print(f"poolplan: {e}", file=sys.stderr)
    report = RunReport(
        kind="plan",
        scene=scene_summary(grid, sources, targets),
        config=_config(args),
        outputs={**prop, "paths": paths},
        timing_ms=timing,
    )
    _emit(report, args.report)
    _write_pgm(act, args.pgm)
    return EXIT_UNCOVERED if uncovered else EXIT_OK


def _default_targets(act: ActivityMap, grid: GridMap, count: int, seed: int) -> list[Coord]:
    covered = np.flatnonzero((act.values > 0) & grid.free)
    if covered.size == 0:
        return []
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(covered, size=min(count, covered.size), replace=False))
    return [Coord(int(p // grid.width), int(p % grid.width)) for p in picks]


def validate_scene(grid, sources, targets, args, timing, inject=None) -> tuple[dict, ValidationReport, int]:
    """Run the full oracle comparison on one scene; returns (outputs, report, uncovered)."""
    act, prop = _propagate(grid, sources, args, timing)
    if inject is not None:
        vals = np.array(act.values)
        vals[inject] += 1
        act = ActivityMap(vals, act.layers_applied)
    with _timed(timing, "oracles"):
        hops = bfs_multi_source(grid, sources)
        octile = dijkstra_octile(grid, sources, args.corner)
    rep = check_activity(act, hops)
    if not targets:
        targets = _default_targets(act, grid, args.max_targets, args.seed)
    uncovered = 0
    comparisons = []
    with _timed(timing, "paths"):
        for t in targets:
            if act.values[t] <= 0:
                uncovered += 1
                continue
            try:
                simple = reconstruct_simple(act, grid, sources, t, args.seed)
                eucl = reconstruct_euclidean(act, grid, sources, t, args.corner)
            except ReconstructionError:
                rep.step_optimality[Coord(*t)] = False
                continue
            rep.merge(check_path(simple, grid, sources, hops, None))
            erep = check_path(eucl, grid, sources, hops, octile, check_nearest=False)
            rep.step_optimality[Coord(*t)] = rep.step_optimality[Coord(*t)] and erep.step_optimality[Coord(*t)]
            rep.euclidean_excess.update(erep.euclidean_excess)
            sm, em = path_metrics(simple), path_metrics(eucl)
            comparisons.append(em.euclidean_length <= sm.euclidean_length + LENGTH_TOL)
    lb = layer_bound(grid)
    reach = hops.reachable()
    ecc = int(hops.distance[reach].max()) if reach.any() else 0
    outputs = {
        **prop,
        "bfs_eccentricity": ecc,
        "layer_bound": {"worst_case": lb.worst_case, "heuristic_low": lb.heuristic_low,
                        "heuristic_high": lb.heuristic_high},
        "targets_checked": len(targets) - uncovered,
        "uncovered_targets": uncovered,
        "euclidean_not_longer_than_simple": sum(comparisons),
        "validation": rep.to_dict(),
    }
    return outputs, rep, uncovered


def cmd_validate(args) -> int:
    timing: dict = {}
    if args.suite is not None and not args.random:
        raise InputError("--suite needs --random WxH")
    seeds = range(args.suite) if args.suite is not None else [args.maze_seed]
    scenes, total, uncovered_total = [], ValidationReport(), 0
    for s in seeds:
        grid, sources, targets = _load_scene(args, s)
        sub_timing: dict = {}
        out, rep, unc = validate_scene(grid, sources, targets, args, sub_timing, args.inject_fault)
        for k, v in sub_timing.items():
            timing[k] = round(timing.get(k, 0.0) + v, 3)
        total.merge(rep)
        uncovered_total += unc
        scenes.append({"maze_seed": s, "scene": scene_summary(grid, sources, targets or ()), **out})
    summary = total.to_dict()
    report = RunReport(
        kind="validate",
        scene=scenes[0]["scene"] if len(scenes) == 1 else {"suite": len(scenes)},
        config=_config(args),
        outputs={"scenes": scenes, "summary": summary},
        timing_ms=timing,
    )
    _emit(report, args.report)
    ex = summary["euclidean_excess"]
    print(
        f"validate: {len(scenes)} scene(s), activity violations {summary['activity_law_violations']['count']}, "
        f"step failures {len(summary['step_optimality']['failures'])}, "
        f"euclidean excess > 0 on {ex['positive']}/{ex['checked']} targets (max {ex['max']:.6f})",
        file=sys.stderr,
    )
    if total.activity_violations or total.step_failures:
        if total.activity_violations:
            sample = ", ".join(str(tuple(c)) for c in total.activity_violations[:10])
            print(f"validate: activity-law violations at {sample}", file=sys.stderr)
        if total.step_failures:
            sample = ", ".join(str(tuple(c)) for c in total.step_failures[:10])
            print(f"validate: step-optimality failures at {sample}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_UNCOVERED if uncovered_total else EXIT_OK


def cmd_bench(args) -> int:
    result: dict = {}
    if args.mode_compare or args.density_compare:
        if args.size is None or args.layers is None:
            raise InputError("--mode-compare/--density-compare need --size and --layers")
        if args.mode_compare:
            cmp = benchmod.compare_modes(args.size, args.layers, args.threads, args.repeats)
            result["mode_compare"] = {
                "batched": benchmod.sample_dict(cmp["batched"]),
                "iterative": benchmod.sample_dict(cmp["iterative"]),
                "iterative_over_batched": cmp["iterative_over_batched"],
            }
        if args.density_compare:
            cmp = benchmod.compare_densities(args.size, args.layers, threads=args.threads, repeats=args.repeats)
            result["density_compare"] = {
                "samples": [benchmod.sample_dict(s) for s in cmp["samples"]],
                "median_difference_ms": cmp["median_difference_ms"],
                "noise_band_ms": cmp["noise_band_ms"],
            }
    else:
        if args.sizes is None:
            raise InputError("bench needs --sizes (or --mode-compare/--density-compare)")
        if (args.layers is None) == (args.layer_ratio is None):
            raise InputError("bench needs exactly one of --layers or --layer-ratio")
        samples = benchmod.run_benchmark(
            args.sizes, args.layers, args.layer_ratio, args.mode, args.threads, args.repeats,
            interleave=args.interleave,
        )
        result["samples"] = [benchmod.sample_dict(s) for s in samples]
        try:
            result["fit"] = benchmod.fit_scaling(samples).to_dict()
        except benchmod.BenchError as e:
            result["fit"] = {"error": str(e)}
        for s in samples:
            status = "skipped" if s.skipped else f"median {s.median_ms:.3f} ms (min {s.min_ms:.3f})"
            print(f"bench: n={s.n} L={s.L} {status}", file=sys.stderr)
    report = RunReport(kind="bench", config={"repeats": args.repeats, "threads": args.threads,
                                             "mode": args.mode, "interleave": args.interleave}, bench=result)
    _emit(report, args.report)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # usage errors and --help
        return e.code if isinstance(e.code, int) else EXIT_INPUT
    handlers = {"plan": cmd_plan, "validate": cmd_validate, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except (InputError, PropagationError, benchmod.BenchError, GridError) as e:
        print(f"poolplan: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
