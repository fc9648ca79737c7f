"""Integer linear program for the joint routing/spectrum/core assignment.

`build_ilp` instantiates the full model (route selection, slot-window
assignment, non-overlap, core assignment, per-core direction consistency and
pairwise same-direction slot-overlap counting) over candidate routes obtained
with the link-disjoint K-shortest-path algorithm.  `write_lp` renders it in
the conventional LP text format with deterministic naming.  `solve_exact_small`
is an in-process exact optimizer for desk-size instances: it enumerates
(route, window start, per-link core) tuples with branch-and-bound pruning and
evaluates the same objective, fiber count plus alpha times weighted crosstalk.

Big-M values are tightened per constraint family to the smallest provably
valid bound instead of one global constant; crosstalk pair variables are
indexed over unordered core pairs so each pair's contribution is counted
once, matching the pairwise crosstalk reports.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .demand import Demand, DemandSet
from .errors import InfeasibleError, SearchSpaceError
from .state import DOWN, UNUSED, UP, Mode
from .topology import McfGeometry, Route, Topology, k_shortest_paths, link_direction


@dataclass(frozen=True)
class IlpParams:
    w_slots: int = 50
    fiber_cap: int = 16
    k_routes: int = 3
    alpha: float = 0.01
    epsilon: float = 0.5
    big_m: float = 10_000.0
    link_disjoint: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def alpha_fraction(self) -> Fraction:
        return Fraction(str(self.alpha))


@dataclass(frozen=True)
class IlpVariable:
    name: str
    kind: str  # "binary" | "integer"
    lb: int
    ub: int


@dataclass(frozen=True)
class IlpRow:
    name: str
    terms: tuple[tuple[float, str], ...]
    sense: str  # "<=", ">=", "="
    rhs: float

    @property
    def family(self) -> int:
        prefix = self.name[1:].split("_", 1)[0]
        return int("".join(ch for ch in prefix if ch.isdigit()))


@dataclass
class IlpInstance:
    topology: Topology
    geometry: McfGeometry
    demands: tuple[Demand, ...]
    routes: dict[int, tuple[Route, ...]]  # demand index (1-based) -> candidates
    params: IlpParams
    variables: dict[str, IlpVariable] = field(default_factory=dict)
    rows: list[IlpRow] = field(default_factory=list)
    objective: tuple[tuple[float, str], ...] = ()
    delta: dict[tuple[tuple[int, int], tuple[int, int]], int] = field(default_factory=dict)

    @property
    def constraint_families(self) -> set[int]:
        return {row.family for row in self.rows}

    def var_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for name in self.variables:
            prefix = name.split("_", 1)[0]
            counts[prefix] = counts.get(prefix, 0) + 1
        return counts

    def fingerprint(self) -> str:
        basis = repr((
            self.topology.links,
            tuple((d.src, d.dst, d.fs_count) for d in self.demands),
            tuple((r, tuple(route.nodes for route in routes))
                  for r, routes in sorted(self.routes.items())),
            (self.params.w_slots, self.params.fiber_cap, self.params.k_routes,
             self.params.alpha, self.params.epsilon),
        ))
        return hashlib.sha1(basis.encode()).hexdigest()[:16]


def build_ilp(
    topology: Topology, geometry: McfGeometry, demands: DemandSet, params: IlpParams
) -> IlpInstance:
    """Instantiate the model over link-disjoint K-shortest candidate routes."""
    demand_list = tuple(demands)
    routes: dict[int, tuple[Route, ...]] = {}
    for r, d in enumerate(demand_list, 1):
        cands = k_shortest_paths(
            topology, d.src, d.dst, params.k_routes, link_disjoint=params.link_disjoint
        )
        if not cands:
            raise InfeasibleError(f"no candidate route for demand {d.id}")
        routes[r] = tuple(cands)
    inst = IlpInstance(
        topology=topology,
        geometry=geometry,
        demands=demand_list,
        routes=routes,
        params=params,
    )
    _populate(inst)
    return inst


def _populate(inst: IlpInstance) -> None:
    t = inst.topology
    g = inst.geometry
    params = inst.params
    W, F, C = params.w_slots, params.fiber_cap, g.core_count
    eps = params.epsilon
    links = list(t.links)
    link_idx = {link: li for li, link in enumerate(links, 1)}
    nR = len(inst.demands)

    var = inst.variables

    def binary(name: str) -> str:
        if name not in var:
            var[name] = IlpVariable(name, "binary", 0, 1)
        return name

    def integer(name: str, lb: int, ub: int) -> str:
        if name not in var:
            var[name] = IlpVariable(name, "integer", lb, ub)
        return name

    rows = inst.rows

    def row(name, terms, sense, rhs):
        rows.append(IlpRow(name=name, terms=tuple(terms), sense=sense, rhs=rhs))

    # Per-fiber / per-core usage, direction, and pair variables over every link.
    pairs = [(i, j) for i in range(1, C + 1) for j in range(i + 1, C + 1)]
    for li in range(1, len(links) + 1):
        for tt in range(1, F + 1):
            binary(f"f_l{li}_t{tt}")
            for i in range(1, C + 1):
                binary(f"u_l{li}_t{tt}_c{i}")
                integer(f"dc_l{li}_t{tt}_c{i}", 0, 2)
                for k in range(1, W + 1):
                    binary(f"th_l{li}_t{tt}_c{i}_k{k}")
            for i, j in pairs:
                binary(f"y_l{li}_t{tt}_c{i}_{j}")
                binary(f"ph1_l{li}_t{tt}_c{i}_{j}")
                binary(f"ph2_l{li}_t{tt}_c{i}_{j}")
                binary(f"z_l{li}_t{tt}_c{i}_{j}")
                for k in range(1, W + 1):
                    binary(f"a_l{li}_t{tt}_c{i}_{j}_k{k}")

    # Per-demand route/spectrum variables.
    route_links: dict[tuple[int, int], Route] = {}
    for r in range(1, nR + 1):
        d = inst.demands[r - 1]
        for p, route in enumerate(inst.routes[r], 1):
            route_links[(r, p)] = route
            binary(f"x_r{r}_p{p}")
            integer(f"s_r{r}_p{p}", 1, W)
            integer(f"e_r{r}_p{p}", 1, W)
            for k in range(1, W + 1):
                binary(f"b_r{r}_p{p}_k{k}")
                binary(f"g_r{r}_p{p}_k{k}")
            for link in route.links:
                li = link_idx[link]
                for tt in range(1, F + 1):
                    for i in range(1, C + 1):
                        binary(f"o_r{r}_p{p}_l{li}_t{tt}_c{i}")

    rp_list = sorted(route_links)
    for (r1, p1) in rp_list:
        for (r2, p2) in rp_list:
            if r1 != r2:
                binary(f"rho_r{r1}p{p1}_r{r2}p{p2}")

    # Route link-sharing indicator; declared for completeness, constrains nothing.
    for a_idx, key1 in enumerate(rp_list):
        for key2 in rp_list[a_idx + 1:]:
            if key1[0] == key2[0]:
                continue
            shared = set(route_links[key1].links) & set(route_links[key2].links)
            inst.delta[(key1, key2)] = 1 if shared else 0

    # (2) exactly one route per demand
    for r in range(1, nR + 1):
        row(f"c2_r{r}", [(1, f"x_r{r}_p{p}") for p in range(1, len(inst.routes[r]) + 1)], "=", 1)

    # (3)-(5) window width and upper slot bound; M covers |e - s - fs + 1|
    for r in range(1, nR + 1):
        fs = inst.demands[r - 1].fs_count
        m = W + fs
        for p in range(1, len(inst.routes[r]) + 1):
            s, e, x = f"s_r{r}_p{p}", f"e_r{r}_p{p}", f"x_r{r}_p{p}"
            row(f"c3_r{r}_p{p}", [(1, e), (-1, s), (m, x)], "<=", m + fs - 1)
            row(f"c4_r{r}_p{p}", [(1, e), (-1, s), (-m, x)], ">=", fs - 1 - m)
            row(f"c5_r{r}_p{p}", [(1, e)], "<=", W)

    # (6)/(7) non-overlap of lightpaths sharing a core; M = W + 1
    m7 = W + 1
    for a_idx, (r1, p1) in enumerate(rp_list):
        for (r2, p2) in rp_list[a_idx + 1:]:
            if r1 == r2:
                continue
            row(
                f"c6_r{r1}p{p1}_r{r2}p{p2}",
                [(1, f"rho_r{r1}p{p1}_r{r2}p{p2}"), (1, f"rho_r{r2}p{p2}_r{r1}p{p1}")],
                "=",
                1,
            )
    for (r1, p1) in rp_list:
        for (r2, p2) in rp_list:
            if r1 == r2:
                continue
            shared = [
                link
                for link in route_links[(r1, p1)].links
                if link in set(route_links[(r2, p2)].links)
            ]
            for link in shared:
                li = link_idx[link]
                for tt in range(1, F + 1):
                    for i in range(1, C + 1):
                        row(
                            f"c7_r{r1}p{p1}_r{r2}p{p2}_l{li}_t{tt}_c{i}",
                            [
                                (1, f"e_r{r2}_p{p2}"),
                                (-1, f"s_r{r1}_p{p1}"),
                                (-m7, f"rho_r{r1}p{p1}_r{r2}p{p2}"),
                                (m7, f"o_r{r1}_p{p1}_l{li}_t{tt}_c{i}"),
                                (m7, f"o_r{r2}_p{p2}_l{li}_t{tt}_c{i}"),
                            ],
                            "<=",
                            2 * m7 - 1,
                        )

    # (8)-(11) exactly one core per traversed link once a route is selected
    m89 = F * C
    for r in range(1, nR + 1):
        for p, route in enumerate(inst.routes[r], 1):
            for link in route.links:
                li = link_idx[link]
                o_terms = [
                    (1, f"o_r{r}_p{p}_l{li}_t{tt}_c{i}")
                    for tt in range(1, F + 1)
                    for i in range(1, C + 1)
                ]
                row(f"c8_r{r}_p{p}_l{li}", o_terms + [(m89, f"x_r{r}_p{p}")], "<=", m89 + 1)
                row(f"c9_r{r}_p{p}_l{li}", o_terms + [(-m89, f"x_r{r}_p{p}")], ">=", 1 - m89)
                for tt in range(1, F + 1):
                    for i in range(1, C + 1):
                        row(
                            f"c10_r{r}_p{p}_l{li}_t{tt}_c{i}",
                            [(1, f"o_r{r}_p{p}_l{li}_t{tt}_c{i}"), (-1, f"u_l{li}_t{tt}_c{i}")],
                            "<=",
                            0,
                        )
    for li in range(1, len(links) + 1):
        for tt in range(1, F + 1):
            for i in range(1, C + 1):
                row(
                    f"c11_l{li}_t{tt}_c{i}",
                    [(1, f"u_l{li}_t{tt}_c{i}"), (-1, f"f_l{li}_t{tt}")],
                    "<=",
                    0,
                )

    # (12) a used core's direction equals the traversal direction of its
    # lightpaths; linearized so unused (route, demand) tuples leave dc free.
    m12 = 2
    for r in range(1, nR + 1):
        for p, route in enumerate(inst.routes[r], 1):
            for link in route.links:
                dl = link_direction(route, link)
                li = link_idx[link]
                for tt in range(1, F + 1):
                    for i in range(1, C + 1):
                        o = f"o_r{r}_p{p}_l{li}_t{tt}_c{i}"
                        dc = f"dc_l{li}_t{tt}_c{i}"
                        row(f"c12a_r{r}_p{p}_l{li}_t{tt}_c{i}", [(dl, o), (-1, dc)], "<=", 0)
                        row(
                            f"c12b_r{r}_p{p}_l{li}_t{tt}_c{i}",
                            [(1, dc), (m12 - dl, o)],
                            "<=",
                            m12,
                        )

    # (13)-(17) same-direction detection per unordered core pair
    m1516 = 3
    for li in range(1, len(links) + 1):
        for tt in range(1, F + 1):
            for i in range(1, C + 1):
                row(
                    f"c13_l{li}_t{tt}_c{i}",
                    [(1, f"dc_l{li}_t{tt}_c{i}"), (-2, f"u_l{li}_t{tt}_c{i}")],
                    "<=",
                    0,
                )
            for i, j in pairs:
                suffix = f"l{li}_t{tt}_c{i}_{j}"
                dci, dcj = f"dc_l{li}_t{tt}_c{i}", f"dc_l{li}_t{tt}_c{j}"
                row(
                    f"c14_{suffix}",
                    [(1, f"ph1_{suffix}"), (1, f"ph2_{suffix}"), (-1, f"y_{suffix}")],
                    "<=",
                    1,
                )
                row(f"c15_{suffix}", [(1, dci), (-1, dcj), (-m1516, f"ph1_{suffix}")], "<=", -eps)
                row(f"c16_{suffix}", [(1, dcj), (-1, dci), (-m1516, f"ph2_{suffix}")], "<=", -eps)
                row(
                    f"c17_{suffix}",
                    [
                        (1, f"y_{suffix}"),
                        (1, f"u_l{li}_t{tt}_c{i}"),
                        (1, f"u_l{li}_t{tt}_c{j}"),
                        (-1, f"z_{suffix}"),
                    ],
                    "<=",
                    2,
                )

    # (18)-(20) per-slot usage detection.  The epsilon term makes the bound
    # slots (k equal to the window edge) force their indicators as well.
    m1819 = W
    for r in range(1, nR + 1):
        for p, route in enumerate(inst.routes[r], 1):
            for k in range(1, W + 1):
                row(
                    f"c18_r{r}_p{p}_k{k}",
                    [(-1, f"s_r{r}_p{p}"), (-m1819, f"b_r{r}_p{p}_k{k}")],
                    "<=",
                    -k - eps,
                )
                row(
                    f"c19_r{r}_p{p}_k{k}",
                    [(1, f"e_r{r}_p{p}"), (-m1819, f"g_r{r}_p{p}_k{k}")],
                    "<=",
                    k - eps,
                )
            for link in route.links:
                li = link_idx[link]
                for tt in range(1, F + 1):
                    for i in range(1, C + 1):
                        for k in range(1, W + 1):
                            row(
                                f"c20_r{r}_p{p}_l{li}_t{tt}_c{i}_k{k}",
                                [
                                    (1, f"b_r{r}_p{p}_k{k}"),
                                    (1, f"g_r{r}_p{p}_k{k}"),
                                    (1, f"o_r{r}_p{p}_l{li}_t{tt}_c{i}"),
                                    (-1, f"th_l{li}_t{tt}_c{i}_k{k}"),
                                ],
                                "<=",
                                2,
                            )

    # (21) same-direction pairs sharing a slot
    for li in range(1, len(links) + 1):
        for tt in range(1, F + 1):
            for i, j in pairs:
                for k in range(1, W + 1):
                    row(
                        f"c21_l{li}_t{tt}_c{i}_{j}_k{k}",
                        [
                            (1, f"th_l{li}_t{tt}_c{i}_k{k}"),
                            (1, f"th_l{li}_t{tt}_c{j}_k{k}"),
                            (1, f"z_l{li}_t{tt}_c{i}_{j}"),
                            (-1, f"a_l{li}_t{tt}_c{i}_{j}_k{k}"),
                        ],
                        "<=",
                        2,
                    )

    alpha = params.alpha_fraction
    obj: list[tuple[float, str]] = []
    for li in range(1, len(links) + 1):
        for tt in range(1, F + 1):
            obj.append((1, f"f_l{li}_t{tt}"))
    for li in range(1, len(links) + 1):
        for tt in range(1, F + 1):
            for i, j in pairs:
                coef = alpha * g.pair_weight(i, j)
                coef_out = int(coef) if coef.denominator == 1 else float(coef)
                for k in range(1, W + 1):
                    obj.append((coef_out, f"a_l{li}_t{tt}_c{i}_{j}_k{k}"))
    inst.objective = tuple(obj)


def _format_coef(coef: float, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    mag_s = str(int(mag)) if float(mag).is_integer() else f"{mag:g}"
    if mag_s == "1":
        return f"{sign} " if sign else ""
    return f"{sign} {mag_s} " if sign else f"{mag_s} "


def _format_terms(terms: tuple[tuple[float, str], ...]) -> str:
    parts = []
    for idx, (coef, name) in enumerate(terms):
        parts.append(f"{_format_coef(coef, idx == 0)}{name}")
    return " ".join(parts)


def write_lp(inst: IlpInstance) -> str:
    """Render the model in LP text format with stable naming and ordering."""
    p = inst.params
    lines = [
        "\\ mcfplan ILP model",
        f"\\ fingerprint: {inst.fingerprint()}",
        f"\\ nodes={len(inst.topology.nodes)} links={len(inst.topology.links)} "
        f"cores={inst.geometry.core_count} demands={len(inst.demands)}",
        f"\\ W={p.w_slots} F={p.fiber_cap} K={p.k_routes} alpha={p.alpha:g} "
        f"epsilon={p.epsilon:g} M_default={p.big_m:g} (per-row M tightened)",
        "\\ recommended MIPGAP: 0.01%",
    ]
    shared = [key for key, val in inst.delta.items() if val]
    lines.append(
        "\\ delta (route link-sharing indicator; informational only): "
        + (
            " ".join(f"r{a}p{b}~r{c}p{d}" for (a, b), (c, d) in shared)
            if shared
            else "none"
        )
    )
    lines.append("Minimize")
    obj_terms = _format_terms(inst.objective).split(" ")
    line = " obj:"
    for token in obj_terms:
        if len(line) + len(token) + 1 > 240:
            lines.append(line)
            line = "      "
        line += " " + token
    lines.append(line)
    lines.append("Subject To")
    for r in inst.rows:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[r.sense]
        rhs = int(r.rhs) if float(r.rhs).is_integer() else f"{r.rhs:g}"
        lines.append(f" {r.name}: {_format_terms(r.terms)} {sense} {rhs}")
    lines.append("Bounds")
    for v in inst.variables.values():
        if v.kind == "integer":
            lines.append(f" {v.lb} <= {v.name} <= {v.ub}")
    lines.append("Binaries")
    for v in inst.variables.values():
        if v.kind == "binary":
            lines.append(f" {v.name}")
    lines.append("Generals")
    for v in inst.variables.values():
        if v.kind == "integer":
            lines.append(f" {v.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExactLimits:
    max_tuples: float = 1e7
    time_limit_s: float = 300.0


@dataclass(frozen=True)
class ExactResult:
    """Provably optimal assignment of a micro instance."""

    objective: float
    objective_exact: Fraction
    fiber_count: int
    crosstalk: int
    assignment: dict[int, tuple[tuple[int, ...], int, tuple[tuple[tuple[int, int], int, int], ...]]]
    explored: int


def estimate_search_space(inst: IlpInstance, mode: Mode | str = Mode.COUNTER) -> float:
    """Upper bound on the number of raw assignment tuples, before pruning."""
    mode = Mode(mode)
    p = inst.params
    C = inst.geometry.core_count
    per_link = (p.fiber_cap // 2 if mode is Mode.CO else p.fiber_cap) * C
    total = 1.0
    for r, d in enumerate(inst.demands, 1):
        per_demand = 0.0
        for route in inst.routes[r]:
            s_count = max(p.w_slots - d.fs_count + 1, 0)
            per_demand += s_count * (per_link ** len(route.links))
        total *= max(per_demand, 1.0)
        if total > 1e18:
            return total
    return total


def solve_exact_small(
    inst: IlpInstance,
    limits: ExactLimits | None = None,
    mode: Mode | str = Mode.COUNTER,
) -> ExactResult:
    """Exact optimum by pruned exhaustive search over assignment tuples.

    Counter mode evaluates the model semantics directly (per-core directions,
    unordered-pair overlap counting).  Co mode instead fixes fiber directions
    in deployed pairs (odd fiber ids flow up) and counts per link twice the
    busier direction's used fibers.  Identical fresh fibers are explored in
    canonical id order, which prunes relabelings without losing optima.
    """
    limits = limits or ExactLimits()
    mode = Mode(mode)
    est = estimate_search_space(inst, mode)
    if est > limits.max_tuples:
        raise SearchSpaceError(
            f"estimated search space {est:.3g} exceeds the {limits.max_tuples:.3g} cap"
        )
    params = inst.params
    W, F, C = params.w_slots, params.fiber_cap, inst.geometry.core_count
    alpha = params.alpha_fraction
    ap, aq = alpha.numerator, alpha.denominator
    weights = inst.geometry._weight
    demands = inst.demands
    n = len(demands)

    options: list[list[tuple[Route, tuple[int, ...]]]] = []
    for r, d in enumerate(demands, 1):
        opts = []
        for route in inst.routes[r]:
            dls = tuple(link_direction(route, link) for link in route.links)
            opts.append((route, dls))
        options.append(opts)

    occ: dict[tuple[tuple[int, int], int, int], int] = {}
    core_dir: dict[tuple[tuple[int, int], int, int], int] = {}
    used_fibers: set[tuple[tuple[int, int], int]] = set()
    opened: dict[tuple[int, int], int] = {}  # used fibers (counter) / used pairs (co)
    pair_use: dict[tuple[tuple[int, int], int], int] = {}
    co_split: dict[tuple[int, int], list[int]] = {}  # link -> [up_used, down_used]
    fibers_cost = 0
    xt_total = 0
    chosen: list[tuple[tuple[int, int], int, int]] = []
    assignment: list[Optional[tuple]] = [None] * n
    best: dict = {"q": None, "result": None}
    explored = 0
    t0 = time.monotonic()

    def candidates(link: tuple[int, int], dl: int) -> list[tuple[int, int]]:
        out = []
        if mode is Mode.COUNTER:
            max_t = min(opened.get(link, 0) + 1, F)
            ts = range(1, max_t + 1)
        else:
            max_q = min(opened.get(link, 0) + 1, F // 2)
            ts = [2 * qq - 1 if dl == UP else 2 * qq for qq in range(1, max_q + 1)]
        for tt in ts:
            for i in range(1, C + 1):
                key = (link, tt, i)
                d0 = core_dir.get(key, UNUSED)
                if d0 not in (UNUSED, dl):
                    continue
                out.append((tt, i))
        return out

    def place(link, tt, i, dl, mask):
        nonlocal fibers_cost, xt_total, explored
        key = (link, tt, i)
        if occ.get(key, 0) & mask:
            return None
        inc = 0
        for j in range(1, C + 1):
            if j == i:
                continue
            kj = (link, tt, j)
            if core_dir.get(kj, UNUSED) == dl:
                inc += weights[i][j] * (occ.get(kj, 0) & mask).bit_count()
        undo = (key, occ.get(key, 0), core_dir.get(key, UNUSED), inc, fibers_cost)
        occ[key] = undo[1] | mask
        core_dir[key] = dl
        fkey = (link, tt)
        if fkey not in used_fibers:
            used_fibers.add(fkey)
            if mode is Mode.COUNTER:
                opened[link] = opened.get(link, 0) + 1
                fibers_cost += 1
            else:
                qq = (tt + 1) // 2
                pkey = (link, qq)
                split = co_split.setdefault(link, [0, 0])
                old = 2 * max(split)
                split[0 if tt % 2 == 1 else 1] += 1
                fibers_cost += 2 * max(split) - old
                pair_use[pkey] = pair_use.get(pkey, 0) + 1
                if pair_use[pkey] == 1:
                    opened[link] = opened.get(link, 0) + 1
        else:
            fkey = None
        xt_total += inc
        explored += 1
        return (undo, fkey)

    def unplace(token):
        nonlocal fibers_cost, xt_total
        (key, old_occ, old_dir, inc, old_cost), fkey = token
        occ[key] = old_occ
        core_dir[key] = old_dir
        xt_total -= inc
        link, tt, _ = key
        if fkey is not None:
            used_fibers.discard(fkey)
            if mode is Mode.COUNTER:
                opened[link] -= 1
            else:
                qq = (tt + 1) // 2
                split = co_split[link]
                split[0 if tt % 2 == 1 else 1] -= 1
                pair_use[(link, qq)] -= 1
                if pair_use[(link, qq)] == 0:
                    opened[link] -= 1
            fibers_cost = old_cost

    def bound_q() -> int:
        return aq * fibers_cost + ap * xt_total

    def rec_demand(di):
        if explored % 8192 == 0 and time.monotonic() - t0 > limits.time_limit_s:
            raise SearchSpaceError(f"time limit {limits.time_limit_s}s exceeded")
        if best["q"] is not None and bound_q() >= best["q"]:
            return
        if di == n:
            best["q"] = bound_q()
            best["result"] = (
                fibers_cost,
                xt_total,
                {demands[k].id: assignment[k] for k in range(n)},
            )
            return
        d = demands[di]
        if d.fs_count > W:
            return
        mark = len(chosen)
        for route, dls in options[di]:
            for s in range(1, W - d.fs_count + 2):
                mask = ((1 << d.fs_count) - 1) << (s - 1)
                rec_links(di, route, dls, 0, s, mask, mark)
        assignment[di] = None

    def rec_links(di, route, dls, hop, s, mask, mark):
        if best["q"] is not None and bound_q() >= best["q"]:
            return
        if hop == len(route.links):
            assignment[di] = (route.nodes, s, tuple(chosen[mark:]))
            rec_demand(di + 1)
            return
        link, dl = route.links[hop], dls[hop]
        for tt, i in candidates(link, dl):
            token = place(link, tt, i, dl, mask)
            if token is None:
                continue
            chosen.append((link, tt, i))
            rec_links(di, route, dls, hop + 1, s, mask, mark)
            chosen.pop()
            unplace(token)

    rec_demand(0)
    if best["result"] is None:
        raise InfeasibleError("no feasible joint assignment exists within the limits")
    fibers, xt, assign = best["result"]
    exact = Fraction(fibers) + alpha * xt
    return ExactResult(
        objective=float(exact),
        objective_exact=exact,
        fiber_count=fibers,
        crosstalk=xt,
        assignment=assign,
        explored=explored,
    )
