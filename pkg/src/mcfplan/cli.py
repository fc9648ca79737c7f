"""Experiment harness: seeded runs, asymmetry sweeps, model export, validation.

Subcommands: run, sweep-ar, export-ilp, validate, layout, oracle.  All outputs
are CSV (or LP text) with '#'-prefixed key=value header lines echoing the
configuration, so a run can be reproduced from its own artifacts.  Exit codes:
0 ok, 1 infeasible run or failed validation, 2 invalid input.

Configuration comes from an optional "key = value" text file plus command-line
flags, with flags taking precedence.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .crosstalk import CrosstalkReport, total_crosstalk
from .demand import (
    Demand,
    DemandSet,
    demands_from_totals,
    generate_demands,
    load_demands,
    pair_totals,
    symmetric_reservation,
)
from .errors import CommitError, McfplanError
from .heuristic import RscaSolution, solve_all
from .ilp import ExactLimits, IlpParams, build_ilp, solve_exact_small, write_lp
from .oracle import OracleParams, brute_force_rsca
from .state import DOWN, UNUSED, UP, Mode, NetworkState, SpectrumWindow
from .topology import (
    Level,
    McfGeometry,
    Topology,
    hex_geometry,
    load_builtin_topology,
    load_geometry,
    load_topology,
    route_from_nodes,
)

_DIRECTION_GLYPH = {UNUSED: "-", UP: "OUT", DOWN: "IN"}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's full parameterization; see the config-file keys of
    the same names."""

    topology: str = "nsfnet"
    cores: int = 7
    geometry_file: str = ""
    mode: str = "counter"
    strategy: str = "LC"
    k: int = 3
    w: int = 50
    fiber_cap: int = 16
    alpha: float = 0.01
    weights: str = "100,10,1"
    order: str = "input"
    demands_file: str = ""
    x: int = 20
    ar: float = 1.0
    seed: int = 1
    pairs: str = "all"
    outdir: str = "out"


_INT_KEYS = {"cores", "k", "w", "fiber_cap", "x", "seed"}
_FLOAT_KEYS = {"alpha", "ar"}


def load_config_file(path: str) -> dict[str, str]:
    """Parse a line-oriented "key = value" config file; '#' starts a comment."""
    values: dict[str, str] = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise McfplanError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in known:
            raise McfplanError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _coerce(key: str, value: str):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return value


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        file_values = {k: _coerce(k, v) for k, v in load_config_file(args.config).items()}
        cfg = replace(cfg, **file_values)
    overrides = {}
    for f in fields(ExperimentConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            overrides[f.name] = flag
    return replace(cfg, **overrides)


def resolve_topology(cfg: ExperimentConfig) -> Topology:
    if Path(cfg.topology).is_file():
        return load_topology(Path(cfg.topology).read_text())
    return load_builtin_topology(cfg.topology)


def resolve_geometry(cfg: ExperimentConfig) -> McfGeometry:
    parts = [int(v) for v in cfg.weights.split(",")]
    if len(parts) != 3:
        raise McfplanError(f"weights must be three integers 'L1,L2,L3', got {cfg.weights!r}")
    weights = {Level.L1: parts[0], Level.L2: parts[1], Level.L3: parts[2]}
    if cfg.geometry_file:
        return load_geometry(Path(cfg.geometry_file).read_text(), weights)
    return hex_geometry(cfg.cores, weights)


def resolve_demands(cfg: ExperimentConfig, topology: Topology) -> DemandSet:
    if cfg.demands_file:
        return load_demands(Path(cfg.demands_file).read_text())
    pairs: str | int = cfg.pairs if cfg.pairs == "all" else int(cfg.pairs)
    return generate_demands(topology, cfg.x, cfg.ar, cfg.seed, pairs)


def run_experiment(
    cfg: ExperimentConfig, demands: DemandSet | None = None
) -> tuple[RscaSolution, NetworkState, DemandSet, float]:
    """Solve one configured experiment.

    Co-propagation runs model the conventional symmetric design: each
    bidirectional pair is served at the larger of its two requirements
    (see demand.symmetric_reservation), with fibers deployed in opposed
    pairs.  Counter runs serve the actual directional sizes.
    """
    topology = resolve_topology(cfg)
    geometry = resolve_geometry(cfg)
    if demands is None:
        demands = resolve_demands(cfg, topology)
    if Mode(cfg.mode) is Mode.CO:
        demands = symmetric_reservation(demands)
    state = NetworkState(topology, geometry, cfg.mode, cfg.w, cfg.fiber_cap)
    t0 = time.perf_counter()
    solution = solve_all(state, demands, cfg.strategy, k_routes=cfg.k, order=cfg.order)
    wall = time.perf_counter() - t0
    return solution, state, demands, wall


def _header_lines(cfg: ExperimentConfig, demands: DemandSet) -> list[str]:
    lines = [
        f"# topology={cfg.topology}",
        f"# cores={cfg.cores}",
        f"# geometry_file={cfg.geometry_file}",
        f"# mode={cfg.mode}",
        f"# strategy={cfg.strategy}",
        f"# k={cfg.k}",
        f"# w={cfg.w}",
        f"# fiber_cap={cfg.fiber_cap}",
        f"# alpha={cfg.alpha:g}",
        f"# weights={cfg.weights}",
        f"# order={cfg.order}",
    ]
    for key, value in demands.metadata.items():
        lines.append(f"# demand.{key}={value}")
    return lines


def _fmt_link(link: tuple[int, int]) -> str:
    return f"{link[0]}-{link[1]}"


def metrics_csv(cfg: ExperimentConfig, demands: DemandSet, sol: RscaSolution, wall: float) -> str:
    lines = _header_lines(cfg, demands)
    lines.append(
        "mode,strategy,mcf_count,total_crosstalk,avg_crosstalk_per_mcf,"
        "served,total_demands,wall_time_s"
    )
    lines.append(
        f"{cfg.mode},{cfg.strategy},{sol.mcf_count},{sol.crosstalk.total_weighted},"
        f"{sol.crosstalk.average_per_mcf:.4f},{sol.served},{len(demands)},{wall:.3f}"
    )
    return "\n".join(lines) + "\n"


def solution_csv(cfg: ExperimentConfig, demands: DemandSet, sol: RscaSolution) -> str:
    lines = _header_lines(cfg, demands)
    lines.append("demand_id,src,dst,fs_count,status,route,start_fs,end_fs,assignments")
    for d, rec in zip(demands, sol.records):
        if rec is None:
            lines.append(f"{d.id},{d.src},{d.dst},{d.fs_count},unserved,,,,")
            continue
        route = "-".join(str(n) for n in rec.route.nodes)
        assignments = ";".join(
            f"{_fmt_link(link)}:f{fi}:c{ci}" for link, fi, ci in rec.choices
        )
        lines.append(
            f"{d.id},{d.src},{d.dst},{d.fs_count},ok,{route},"
            f"{rec.start_fs},{rec.end_fs},{assignments}"
        )
    return "\n".join(lines) + "\n"


def crosstalk_csv(report: CrosstalkReport) -> str:
    lines = ["link,fiber,core_i,core_j,level,overlap,weighted"]
    for pair in report.pairs:
        lines.append(
            f"{_fmt_link(pair.link)},{pair.fiber},{pair.core_i},{pair.core_j},"
            f"L{int(pair.level)},{pair.overlap},{pair.weighted}"
        )
    return "\n".join(lines) + "\n"


def links_csv(state: NetworkState) -> str:
    lines = ["link,fibers_deployed,fibers_used,cores_up,cores_down"]
    for link in state.links:
        s = state.link_summary(link)
        lines.append(
            f"{_fmt_link(link)},{s['fibers_deployed']},{s['fibers_used']},"
            f"{s['cores_up']},{s['cores_down']}"
        )
    return "\n".join(lines) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    sol, state, demands, wall = run_experiment(cfg)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "metrics.csv").write_text(metrics_csv(cfg, demands, sol, wall))
    (outdir / "solution.csv").write_text(solution_csv(cfg, demands, sol))
    (outdir / "crosstalk.csv").write_text(crosstalk_csv(sol.crosstalk))
    (outdir / "links.csv").write_text(links_csv(state))
    print(metrics_csv(cfg, demands, sol, wall), end="")
    if sol.infeasible:
        print(f"infeasible: demands {list(sol.failed)} unserved", file=sys.stderr)
        return 1
    return 0


def cmd_sweep_ar(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    ar_values = [float(v) for v in args.ar_list.split(",")]
    if not ar_values:
        raise McfplanError("ar-list must name at least one ratio")
    modes = (args.modes or cfg.mode).split(",")
    strategies = (args.strategies or cfg.strategy).split(",")
    topology = resolve_topology(cfg)
    geometry = resolve_geometry(cfg)
    pairs: str | int = cfg.pairs if cfg.pairs == "all" else int(cfg.pairs)
    totals = pair_totals(topology, cfg.x, cfg.seed, pairs)
    rows = []
    any_infeasible = False
    for ar in ar_values:
        dset = demands_from_totals(
            totals,
            ar,
            {"seed": str(cfg.seed), "x_mean": str(cfg.x), "ar": f"{ar:g}", "pairs": str(pairs)},
        )
        for mode in modes:
            for strategy in strategies:
                served_set = symmetric_reservation(dset) if Mode(mode) is Mode.CO else dset
                state = NetworkState(topology, geometry, mode, cfg.w, cfg.fiber_cap)
                sol = solve_all(state, served_set, strategy, k_routes=cfg.k, order=cfg.order)
                any_infeasible = any_infeasible or sol.infeasible
                rows.append(
                    f"{ar:g},{mode},{strategy},{sol.mcf_count},"
                    f"{sol.crosstalk.total_weighted},{sol.served},{len(dset)}"
                )
    lines = [
        f"# topology={cfg.topology}",
        f"# cores={cfg.cores}",
        f"# k={cfg.k} w={cfg.w} fiber_cap={cfg.fiber_cap} alpha={cfg.alpha:g}",
        f"# seed={cfg.seed} x_mean={cfg.x} pairs={cfg.pairs} (totals shared across AR values)",
        "ar,mode,strategy,mcf_count,total_crosstalk,served,total_demands",
        *rows,
    ]
    text = "\n".join(lines) + "\n"
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "sweep_ar.csv").write_text(text)
    print(text, end="")
    return 1 if any_infeasible else 0


def cmd_export_ilp(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    topology = resolve_topology(cfg)
    geometry = resolve_geometry(cfg)
    demands = resolve_demands(cfg, topology)
    params = IlpParams(
        w_slots=cfg.w, fiber_cap=cfg.fiber_cap, k_routes=cfg.k, alpha=cfg.alpha
    )
    # Rough size check: the slot-pair family dominates the variable count.
    est = (
        len(topology.links)
        * cfg.fiber_cap
        * cfg.w
        * (geometry.core_count + geometry.core_count * (geometry.core_count - 1) // 2)
    )
    if est > 200_000:
        print(
            f"warning: roughly {est} slot-indexed variables; the export may be large "
            f"and slow to solve",
            file=sys.stderr,
        )
    inst = build_ilp(topology, geometry, demands, params)
    text = write_lp(inst)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    counts = inst.var_counts()
    print(f"wrote {out}")
    print(
        f"variables={len(inst.variables)} rows={len(inst.rows)} "
        f"families={sorted(inst.constraint_families)}"
    )
    print("variable counts: " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


def _parse_link(text: str) -> tuple[int, int]:
    for sep in ("-", ","):
        if sep in text:
            a, b = text.split(sep, 1)
            return (int(a), int(b)) if int(a) < int(b) else (int(b), int(a))
    raise McfplanError(f"link must look like '5-9', got {text!r}")


def cmd_layout(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    link = _parse_link(args.link)
    _, state, _, _ = run_experiment(cfg)
    if link not in state.links:
        raise McfplanError(f"link {args.link} is not in topology {cfg.topology}")
    ls = state.link_state(link)
    print(
        f"link {_fmt_link(link)} mode={cfg.mode} cores={state.geometry.core_count} "
        f"fibers={len(ls.fibers)}"
    )
    print("legend: OUT = toward the higher-numbered node, IN = toward the lower, - = unused")
    for fi, fiber in enumerate(ls.fibers, 1):
        glyphs = " ".join(
            f"{ci}:{_DIRECTION_GLYPH[core.direction]}" for ci, core in enumerate(fiber.cores, 1)
        )
        out = sum(1 for c in fiber.cores if c.direction == UP)
        into = sum(1 for c in fiber.cores if c.direction == DOWN)
        tag = {UP: " fixed=OUT", DOWN: " fixed=IN", UNUSED: ""}[fiber.fixed_direction]
        print(f"fiber {fi}{tag}: {glyphs}  (out={out} in={into})")
    return 0


_VIOLATION_NAMES = [
    ("busy", "non-overlap"),
    ("width", "contiguity"),
    ("exceeds", "slot-range"),
    ("flows the other way", "direction-immutability"),
    ("fixed to the opposite", "co-mode-direction"),
    ("not adjacent", "route-adjacency"),
    ("revisits", "route-loopless"),
]


def _violation_name(message: str) -> str:
    for needle, name in _VIOLATION_NAMES:
        if needle in message:
            return name
    return "precondition"


def cmd_validate(args: argparse.Namespace) -> int:
    text = Path(args.solution).read_text()
    meta: dict[str, str] = {}
    rows: list[dict[str, str]] = []
    header: list[str] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(dict(zip(header, line.split(","))))
    if header is None:
        print("error: no CSV header found in solution log", file=sys.stderr)
        return 2
    mode = args.mode or meta.get("mode")
    w = args.w or int(meta.get("w", 0))
    fiber_cap = args.fiber_cap or int(meta.get("fiber_cap", 0))
    cores = args.cores or int(meta.get("cores", 0))
    if not (mode and w and fiber_cap and cores):
        print("error: mode/w/fiber_cap/cores missing from header and flags", file=sys.stderr)
        return 2
    topology = load_topology(Path(args.topology).read_text()) if Path(args.topology).is_file() \
        else load_builtin_topology(args.topology)
    geometry = (
        load_geometry(Path(args.geometry_file).read_text())
        if args.geometry_file
        else hex_geometry(cores)
    )
    state = NetworkState(topology, geometry, mode, w, fiber_cap)
    violations: list[str] = []
    served = 0
    for row in rows:
        if row.get("status") != "ok":
            continue
        demand_id = int(row["demand_id"])
        try:
            nodes = [int(n) for n in row["route"].split("-")]
            route = route_from_nodes(topology, nodes)
            start, end = int(row["start_fs"]), int(row["end_fs"])
            fs = int(row["fs_count"])
            if end - start + 1 != fs:
                violations.append(
                    f"demand {demand_id}: contiguity: window [{start}..{end}] "
                    f"does not span {fs} slots"
                )
                continue
            choices = []
            for part in row["assignments"].split(";"):
                link_part, f_part, c_part = part.split(":")
                a, b = link_part.split("-")
                link = (int(a), int(b))
                fi, ci = int(f_part[1:]), int(c_part[1:])
                ls = state.link_state(link)
                while len(ls.fibers) < fi:
                    state.add_fiber(link)
                choices.append((fi, ci))
            links_in_row = [
                tuple(sorted((int(p.split(":")[0].split("-")[0]),
                              int(p.split(":")[0].split("-")[1]))))
                for p in row["assignments"].split(";")
            ]
            if list(route.links) != links_in_row:
                violations.append(
                    f"demand {demand_id}: continuity: assignment links do not match the route"
                )
                continue
            demand = Demand(id=demand_id, src=nodes[0], dst=nodes[-1], fs_count=fs)
            state.commit_lightpath(demand, route, choices, SpectrumWindow(start, fs))
            served += 1
        except (CommitError, ValueError) as exc:
            violations.append(f"demand {demand_id}: {_violation_name(str(exc))}: {exc}")
    report = total_crosstalk(state)
    if args.metrics:
        mlines = [
            line for line in Path(args.metrics).read_text().splitlines()
            if line and not line.startswith("#")
        ]
        mrow = dict(zip(mlines[0].split(","), mlines[1].split(",")))
        if int(mrow["mcf_count"]) != state.mcf_count():
            violations.append(
                f"metrics: mcf_count {mrow['mcf_count']} != recomputed {state.mcf_count()}"
            )
        if int(mrow["total_crosstalk"]) != report.total_weighted:
            violations.append(
                f"metrics: total_crosstalk {mrow['total_crosstalk']} != "
                f"recomputed {report.total_weighted}"
            )
    if violations:
        for v in violations:
            print(f"VIOLATION {v}")
        print(f"validation failed: {len(violations)} violation(s) over {served} replayed records")
        return 1
    print(
        f"validation clean: {served} records replayed, mcf_count={state.mcf_count()}, "
        f"total_crosstalk={report.total_weighted}"
    )
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    topology = resolve_topology(cfg)
    geometry = resolve_geometry(cfg)
    demands = resolve_demands(cfg, topology)
    params = OracleParams(
        w_slots=cfg.w, fiber_cap=cfg.fiber_cap, k_routes=cfg.k, alpha=cfg.alpha
    )
    result = brute_force_rsca(topology, geometry, demands, params, cfg.mode)
    print(
        f"objective={result.objective:g} mcf_count={result.mcf_count} "
        f"crosstalk={result.crosstalk} optimal_plans={len(result.assignments)} "
        f"explored={result.explored}"
    )
    plan = result.assignments[0]
    for demand_id in sorted(plan):
        rec = plan[demand_id]
        route = "-".join(str(n) for n in rec.route.nodes)
        picks = ";".join(f"{_fmt_link(link)}:f{fi}:c{ci}" for link, fi, ci in rec.choices)
        print(f"demand {demand_id}: route={route} fs=[{rec.start_fs}..{rec.end_fs}] {picks}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--topology", help="built-in name (nsfnet, cost239, n6s8) or file path")
    parser.add_argument("--cores", type=int, help="built-in MCF geometry size (7 or 19)")
    parser.add_argument("--geometry-file", dest="geometry_file", help="core coordinate file")
    parser.add_argument("--mode", choices=["co", "counter"])
    parser.add_argument("--strategy", choices=["FF", "LC"])
    parser.add_argument("--k", type=int, help="candidate routes per demand")
    parser.add_argument("--w", type=int, help="frequency slots per core")
    parser.add_argument("--fiber-cap", dest="fiber_cap", type=int, help="max fibers per link")
    parser.add_argument("--alpha", type=float, help="crosstalk weight in the objective")
    parser.add_argument("--weights", help="crosstalk level weights 'L1,L2,L3'")
    parser.add_argument("--order", choices=["input", "largest-first"], help="serving order")
    parser.add_argument("--demands-file", dest="demands_file", help="load demands from a file")
    parser.add_argument("--x", type=int, help="mean total FS per node pair when generating")
    parser.add_argument("--ar", type=float, help="bidirectional asymmetry ratio")
    parser.add_argument("--seed", type=int, help="demand generation seed")
    parser.add_argument("--pairs", help="'all' or a pair count")
    parser.add_argument("--outdir", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcfplan",
        description="Multi-core-fiber network planning: routing, spectrum, and core assignment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write metric/solution CSVs")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep-ar", help="sweep the asymmetry ratio with shared totals")
    _add_common(p_sweep)
    p_sweep.add_argument("--ar-list", required=True, help="comma-separated ratios, e.g. 1,2,4,6")
    p_sweep.add_argument("--modes", help="comma-separated modes to sweep (default: config mode)")
    p_sweep.add_argument("--strategies", help="comma-separated strategies (default: config)")
    p_sweep.set_defaults(func=cmd_sweep_ar)

    p_export = sub.add_parser("export-ilp", help="write the instantiated model as an LP file")
    _add_common(p_export)
    p_export.add_argument("--out", required=True, help="output LP path")
    p_export.set_defaults(func=cmd_export_ilp)

    p_val = sub.add_parser("validate", help="replay a solution log and re-check all invariants")
    p_val.add_argument("--solution", required=True, help="solution.csv produced by run")
    p_val.add_argument("--topology", required=True)
    p_val.add_argument("--cores", type=int)
    p_val.add_argument("--geometry-file", dest="geometry_file")
    p_val.add_argument("--mode", choices=["co", "counter"])
    p_val.add_argument("--w", type=int)
    p_val.add_argument("--fiber-cap", dest="fiber_cap", type=int)
    p_val.add_argument("--metrics", help="metrics.csv to cross-check totals against")
    p_val.set_defaults(func=cmd_validate)

    p_layout = sub.add_parser("layout", help="print per-fiber core directions on one link")
    _add_common(p_layout)
    p_layout.add_argument("--link", required=True, help="link to inspect, e.g. 5-9")
    p_layout.set_defaults(func=cmd_layout)

    p_oracle = sub.add_parser("oracle", help="brute-force optimum of a micro instance")
    _add_common(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except McfplanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
