"""Independent brute-force optimizer for micro instances.

Jointly enumerates every (candidate route, window start, per-link fiber/core)
tuple across all demands and evaluates each complete plan through the real
state and crosstalk modules, so its optimum is a ground truth the heuristic
and the exact model solver can both be checked against.  Joint enumeration
makes serving order irrelevant to the result.  Only micro instances are in
scope; a raw search-space estimate guards against larger inputs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .crosstalk import total_crosstalk
from .demand import DemandSet
from .errors import CommitError, InfeasibleError, SearchSpaceError
from .state import DOWN, UNUSED, UP, Mode, NetworkState, SpectrumWindow
from .topology import McfGeometry, Route, Topology, k_shortest_paths, link_direction


@dataclass(frozen=True)
class OracleParams:
    w_slots: int = 8
    fiber_cap: int = 2
    k_routes: int = 2
    alpha: float = 0.01
    link_disjoint: bool = True
    max_tuples: float = 1e7
    assignment_cap: int = 10

    @property
    def alpha_fraction(self) -> Fraction:
        return Fraction(str(self.alpha))


@dataclass(frozen=True)
class OracleResult:
    objective: float
    objective_exact: Fraction
    mcf_count: int
    crosstalk: int
    assignments: tuple[dict, ...]  # optimal plans, up to the configured cap
    explored: int


def brute_force_rsca(
    topology: Topology,
    geometry: McfGeometry,
    demands: DemandSet,
    params: OracleParams,
    mode: Mode | str,
) -> OracleResult:
    """Globally optimal plan for a micro instance via exhaustive enumeration.

    Every enumerated placement is validated by committing it onto a cloned
    state, so reported optima cannot violate contiguity, continuity or
    double-booking by construction.  Fresh fibers are explored in canonical
    id order (relabelings of identical fibers are skipped).
    """
    mode = Mode(mode)
    demand_list = tuple(demands)
    candidates: list[list[Route]] = []
    for d in demand_list:
        candidates.append(
            k_shortest_paths(topology, d.src, d.dst, params.k_routes, params.link_disjoint)
        )

    per_link_choices = (params.fiber_cap // 2 if mode is Mode.CO else params.fiber_cap)
    per_link_choices *= geometry.core_count
    est = 1.0
    for d, routes in zip(demand_list, candidates):
        per_demand = sum(
            max(params.w_slots - d.fs_count + 1, 0) * per_link_choices ** len(r.links)
            for r in routes
        )
        est *= max(per_demand, 1)
    if est > params.max_tuples:
        raise SearchSpaceError(
            f"estimated search space {est:.3g} exceeds the {params.max_tuples:.3g} cap"
        )

    alpha = params.alpha_fraction
    ap, aq = alpha.numerator, alpha.denominator
    base = NetworkState(topology, geometry, mode, params.w_slots, params.fiber_cap)
    best: dict = {"q": None, "plans": [], "metrics": None}
    explored = 0

    def objective_q(state: NetworkState) -> tuple[int, int, int]:
        mcf = state.mcf_count()
        xt = total_crosstalk(state).total_weighted
        return aq * mcf + ap * xt, mcf, xt

    def link_options(state: NetworkState, link, dl) -> list[tuple[int, int]]:
        ls = state.link_state(link)
        deployed = len(ls.fibers)
        out: list[tuple[int, int]] = []
        if mode is Mode.COUNTER:
            used = sum(1 for fb in ls.fibers if fb.used)
            max_t = min(used + 1, params.fiber_cap)
            ts = list(range(1, max_t + 1))
        else:
            used_pairs = sum(
                1
                for qq in range(1, deployed // 2 + 1)
                if ls.fibers[2 * qq - 2].used or ls.fibers[2 * qq - 1].used
            )
            max_q = min(used_pairs + 1, params.fiber_cap // 2)
            ts = [2 * qq - 1 if dl == UP else 2 * qq for qq in range(1, max_q + 1)]
        for tt in ts:
            for ci in range(1, geometry.core_count + 1):
                if tt <= deployed:
                    core = ls.fiber(tt).core(ci)
                    if core.direction not in (UNUSED, dl):
                        continue
                out.append((tt, ci))
        return out

    def place_demand(state: NetworkState, idx: int, plan: list) -> None:
        nonlocal explored
        oq, _, _ = objective_q(state)
        if best["q"] is not None and oq > best["q"]:
            return
        if idx == len(demand_list):
            if best["q"] is None or oq < best["q"]:
                best["q"] = oq
                best["plans"] = [dict(plan)]
                _, mcf, xt = objective_q(state)
                best["metrics"] = (mcf, xt)
            elif oq == best["q"] and len(best["plans"]) < params.assignment_cap:
                best["plans"].append(dict(plan))
            return
        d = demand_list[idx]
        if d.fs_count > params.w_slots:
            return
        for route in candidates[idx]:
            dls = [link_direction(route, link) for link in route.links]
            for s in range(1, params.w_slots - d.fs_count + 2):
                sw = SpectrumWindow(s, d.fs_count)
                options = [link_options(state, link, dl) for link, dl in zip(route.links, dls)]
                if any(not opts for opts in options):
                    continue
                for combo in itertools.product(*options):
                    work = state.clone()
                    try:
                        for link, (tt, _) in zip(route.links, combo):
                            ls = work.link_state(link)
                            while len(ls.fibers) < tt:
                                work.add_fiber(link)
                        record = work.commit_lightpath(
                            d, route, [(tt, ci) for tt, ci in combo], sw
                        )
                    except CommitError:
                        continue
                    explored += 1
                    plan.append((d.id, record))
                    place_demand(work, idx + 1, plan)
                    plan.pop()

    place_demand(base, 0, [])
    if best["q"] is None:
        raise InfeasibleError("no feasible joint plan exists within the limits")
    mcf, xt = best["metrics"]
    exact = Fraction(mcf) + alpha * xt
    return OracleResult(
        objective=float(exact),
        objective_exact=exact,
        mcf_count=mcf,
        crosstalk=xt,
        assignments=tuple(best["plans"]),
        explored=explored,
    )
