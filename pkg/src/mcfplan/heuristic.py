"""Auxiliary-graph RSCA heuristic for both propagation modes.

Serving one demand proceeds in five steps: enumerate candidate routes, scan
every (route, spectrum window) combination counting the links that would need
a new fiber, keep the combinations with the fewest new fibers, build an
auxiliary graph per kept combination to price the core choices by incremental
crosstalk, and finally commit either the first combination (FF) or the one
whose cheapest core path costs least (LC).

Auxiliary-graph costs: entering an unused core is heavily penalized (10^4) so
partially filled cores are exhausted first, entering a used core costs a
nominal 0.01, and each core edge costs the crosstalk the placement would add.
Costs are handled internally in integer hundredths so comparisons and
tie-breaks are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .crosstalk import CrosstalkReport, incremental_crosstalk, total_crosstalk
from .demand import Demand, DemandSet
from .errors import CapacityError, CommitError, InfeasibleError
from .state import (
    UNUSED,
    LightpathRecord,
    Mode,
    NetworkState,
    SpectrumWindow,
    sw_positions,
)
from .topology import Route, k_shortest_paths, link_direction

UNUSED_ENTRY_COST = 10_000.0
USED_ENTRY_COST = 0.01
_UNUSED_ENTRY_CENTI = 1_000_000
_USED_ENTRY_CENTI = 1
_SINK_CENTI = 1


@dataclass(frozen=True)
class ComboMatrix:
    """New-fiber counts per (candidate route, window start) combination.

    cells[r][s] is the number of links on route r that cannot carry the
    window starting at sw_starts[s] in the demand's traversal direction.
    """

    routes: tuple[Route, ...]
    sw_width: int
    sw_starts: tuple[int, ...]
    cells: tuple[tuple[int, ...], ...]


def scan_combinations(state: NetworkState, routes: list[Route], f: int) -> ComboMatrix:
    """Step-2 scan: count per combination the route links lacking a free window."""
    starts = tuple(range(1, sw_positions(state.w_slots, f) + 1))
    # Availability is a per-(link, direction) property; cache it across routes.
    avail_cache: dict[tuple[tuple[int, int], int], list[bool]] = {}

    def availability(link: tuple[int, int], direction: int) -> list[bool]:
        key = (link, direction)
        cached = avail_cache.get(key)
        if cached is not None:
            return cached
        ls = state.link_state(link)
        co = state.mode is Mode.CO
        out = [False] * len(starts)
        wmask = (1 << f) - 1
        for fiber in ls.fibers:
            if co and fiber.fixed_direction != direction:
                continue
            for core in fiber.cores:
                if core.direction not in (UNUSED, direction):
                    continue
                occ = core.occupancy
                for idx, s in enumerate(starts):
                    if not out[idx] and (occ >> (s - 1)) & wmask == 0:
                        out[idx] = True
                if all(out):
                    avail_cache[key] = out
                    return out
        avail_cache[key] = out
        return out

    cells = []
    for route in routes:
        per_link = [availability(link, link_direction(route, link)) for link in route.links]
        cells.append(
            tuple(sum(1 for ok in per_link if not ok[idx]) for idx in range(len(starts)))
        )
    return ComboMatrix(routes=tuple(routes), sw_width=f, sw_starts=starts, cells=tuple(cells))


def min_combinations(matrix: ComboMatrix) -> list[tuple[int, int]]:
    """All (route_index, sw_start) cells reaching the global minimum, row-major.

    The first element is the first-fit choice: routes in candidate order,
    window starts ascending within a route.
    """
    if not matrix.cells or not matrix.sw_starts:
        raise ValueError("combination matrix is empty")
    lmin = min(min(row) for row in matrix.cells)
    return [
        (ri, start)
        for ri, row in enumerate(matrix.cells)
        for start, value in zip(matrix.sw_starts, row)
        if value == lmin
    ]


@dataclass(frozen=True)
class AuxEdge:
    tail: str
    head: str
    cost: float
    kind: str  # "source" | "core" | "switch" | "sink"
    hop: Optional[int] = None
    fiber: Optional[int] = None
    core: Optional[int] = None


@dataclass
class AuxGraph:
    """Layered auxiliary graph for one (route, window) combination.

    Layer k holds the eligible (fiber, core) pairs of route link k.  Core
    edges carry the incremental crosstalk of the placement; edges entering a
    core cost 10^4 when the core is unused and 0.01 otherwise; consecutive
    layers are fully connected through the intermediate node.  Switch edges
    are materialized lazily by `edges()` since only their cost rule matters
    for the shortest path.
    """

    route: Route
    sw: SpectrumWindow
    layers: tuple[tuple[tuple[int, int], ...], ...]
    xt_cost: tuple[dict[tuple[int, int], int], ...]
    entry_centi: tuple[dict[tuple[int, int], int], ...]

    def core_edge_cost(self, hop: int, fiber: int, core: int) -> int:
        """Crosstalk cost of the core edge for (fiber, core) on route link `hop`."""
        return self.xt_cost[hop][(fiber, core)]

    def edges(self) -> Iterator[AuxEdge]:
        def entry(hop: int, fc: tuple[int, int]) -> float:
            return UNUSED_ENTRY_COST if self.entry_centi[hop][fc] == _UNUSED_ENTRY_CENTI \
                else USED_ENTRY_COST

        for fc in self.layers[0]:
            yield AuxEdge("s", f"in:0:f{fc[0]}:c{fc[1]}", entry(0, fc), "source",
                          hop=0, fiber=fc[0], core=fc[1])
        for hop, layer in enumerate(self.layers):
            for fi, ci in layer:
                yield AuxEdge(
                    f"in:{hop}:f{fi}:c{ci}",
                    f"out:{hop}:f{fi}:c{ci}",
                    float(self.xt_cost[hop][(fi, ci)]),
                    "core",
                    hop=hop,
                    fiber=fi,
                    core=ci,
                )
        for hop in range(1, len(self.layers)):
            for pfi, pci in self.layers[hop - 1]:
                for fc in self.layers[hop]:
                    yield AuxEdge(
                        f"out:{hop - 1}:f{pfi}:c{pci}",
                        f"in:{hop}:f{fc[0]}:c{fc[1]}",
                        entry(hop, fc),
                        "switch",
                        hop=hop,
                        fiber=fc[0],
                        core=fc[1],
                    )
        last = len(self.layers) - 1
        for fi, ci in self.layers[last]:
            yield AuxEdge(f"out:{last}:f{fi}:c{ci}", "d", USED_ENTRY_COST, "sink")

    def shortest_core_path(self) -> tuple[int, list[tuple[int, int]]]:
        """Cheapest s->d path as (total cost in hundredths, per-hop (fiber, core)).

        Entry costs depend only on the entered core, so with full inter-layer
        connectivity the optimum picks each layer's cheapest entry+core pair
        independently; ties resolve to the lowest (fiber, core).
        """
        total = _SINK_CENTI
        path: list[tuple[int, int]] = []
        for hop, layer in enumerate(self.layers):
            best_cost: int | None = None
            best_fc: tuple[int, int] | None = None
            entry = self.entry_centi[hop]
            xt = self.xt_cost[hop]
            for fc in layer:
                cost = entry[fc] + 100 * xt[fc]
                if best_cost is None or cost < best_cost:
                    best_cost = cost
                    best_fc = fc
            assert best_cost is not None and best_fc is not None
            total += best_cost
            path.append(best_fc)
        return total, path


def build_aux_graph(state: NetworkState, route: Route, sw: SpectrumWindow) -> AuxGraph:
    """Build the auxiliary graph for a combination whose links all have capacity.

    Raises CommitError when some link offers no eligible core, which signals
    that a fiber must be deployed there first.
    """
    layers: list[tuple[tuple[int, int], ...]] = []
    xt_cost: list[dict[tuple[int, int], int]] = []
    entry_centi: list[dict[tuple[int, int], int]] = []
    g = state.geometry
    for link in route.links:
        dl = link_direction(route, link)
        eligible = state.eligible_cores(link, sw, dl)
        if not eligible:
            raise CommitError(f"no eligible core on link {link}; deploy a fiber first")
        ls = state.link_state(link)
        costs: dict[tuple[int, int], int] = {}
        entries: dict[tuple[int, int], int] = {}
        for fi, ci in eligible:
            fiber = ls.fiber(fi)
            costs[(fi, ci)] = incremental_crosstalk(fiber, ci, sw, dl, g)
            entries[(fi, ci)] = (
                _UNUSED_ENTRY_CENTI if fiber.core(ci).direction == UNUSED else _USED_ENTRY_CENTI
            )
        layers.append(tuple(eligible))
        xt_cost.append(costs)
        entry_centi.append(entries)
    return AuxGraph(
        route=route,
        sw=sw,
        layers=tuple(layers),
        xt_cost=tuple(xt_cost),
        entry_centi=tuple(entry_centi),
    )


def assign_one(
    state: NetworkState, demand: Demand, routes: list[Route], strategy: str
) -> LightpathRecord:
    """Serve one demand with the FF or LC combination strategy.

    Links lacking a free window get a new fiber (counter) or fiber pair (co)
    before the auxiliary graph is built; under LC each minimal combination is
    priced on a cloned state and only the winner's deployments are applied.
    The final commit is transactional.
    """
    if strategy not in ("FF", "LC"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if not routes:
        raise ValueError("no candidate routes")
    f = demand.fs_count
    if f > state.w_slots:
        raise InfeasibleError(
            f"demand {demand.id} needs {f} slots but cores carry {state.w_slots}"
        )
    matrix = scan_combinations(state, routes, f)
    combos = min_combinations(matrix)
    if strategy == "FF":
        combos = combos[:1]
    best: tuple[int, list[tuple[int, int]], Route, SpectrumWindow, list] | None = None
    for ri, start in combos:
        route = matrix.routes[ri]
        sw = SpectrumWindow(start, f)
        missing = [
            link
            for link in route.links
            if not state.link_sw_available(link, sw, link_direction(route, link))
        ]
        if missing:
            work = state.clone()
            try:
                for link in missing:
                    work.add_fiber(link)
            except CapacityError:
                continue
        else:
            work = state
        ag = build_aux_graph(work, route, sw)
        cost, path = ag.shortest_core_path()
        if best is None or cost < best[0]:
            best = (cost, missing, route, sw, path)
    if best is None:
        raise CapacityError(f"fiber cap reached while serving demand {demand.id}")
    _, missing, route, sw, path = best
    for link in missing:
        state.add_fiber(link)
    return state.commit_lightpath(demand, route, path, sw)


@dataclass
class RscaSolution:
    """Outcome of serving a demand set: per-demand records and final metrics."""

    records: tuple[Optional[LightpathRecord], ...]
    failed: tuple[int, ...]
    mcf_count: int
    crosstalk: CrosstalkReport
    config: dict = field(default_factory=dict)

    @property
    def infeasible(self) -> bool:
        return bool(self.failed)

    @property
    def served(self) -> int:
        return sum(1 for rec in self.records if rec is not None)


def solve_all(
    state: NetworkState,
    demands: DemandSet,
    strategy: str,
    k_routes: int = 3,
    order: str = "input",
) -> RscaSolution:
    """Serve a whole demand set sequentially and report final metrics.

    Demands are served in input order, or largest-first when requested.  A
    demand that cannot be served (fiber cap exhausted) is recorded in
    `failed` and the run continues; the solution is then marked infeasible.
    """
    if order not in ("input", "largest-first"):
        raise ValueError(f"unknown serving order {order!r}")
    seq = list(demands)
    if order == "largest-first":
        seq.sort(key=lambda d: (-d.fs_count, d.id))
    by_id: dict[int, LightpathRecord] = {}
    failed: list[int] = []
    route_cache: dict[tuple[int, int], list[Route]] = {}
    for d in seq:
        key = (d.src, d.dst)
        routes = route_cache.get(key)
        if routes is None:
            routes = k_shortest_paths(state.topology, d.src, d.dst, k_routes)
            route_cache[key] = routes
        try:
            by_id[d.id] = assign_one(state, d, routes, strategy)
        except (CapacityError, InfeasibleError):
            failed.append(d.id)
    return RscaSolution(
        records=tuple(by_id.get(d.id) for d in demands),
        failed=tuple(failed),
        mcf_count=state.mcf_count(),
        crosstalk=total_crosstalk(state),
        config={
            "mode": state.mode.value,
            "strategy": strategy,
            "k_routes": k_routes,
            "w_slots": state.w_slots,
            "fiber_cap": state.fiber_cap,
            "order": order,
        },
    )
