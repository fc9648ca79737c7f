"""Mutable network resource state: fibers, core directions, slot occupancy.

A NetworkState tracks, per link, a growable list of multi-core fibers.  Each
core carries a propagation direction (unused / up / down, where "up" means
smaller-to-larger node id) and a bitmap of occupied frequency slots.  Core
directions are write-once: the first lightpath through a core fixes it.

Two propagation modes are supported:

* counter: fibers are deployed one at a time and each core picks its own
  direction, so one fiber can carry both directions of a node pair.
* co: fibers are deployed in opposite-direction pairs and every core of a
  fiber inherits the fiber's fixed direction.  Deployed-fiber accounting
  follows the pairing rule (twice the larger per-direction used-fiber count),
  matching how symmetric designs reserve capacity.

Lightpath commitment is transactional: every per-link core choice is
validated before any occupancy bit is set.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .demand import Demand
from .errors import CapacityError, CommitError
from .topology import McfGeometry, Route, Topology, canonical_link, link_direction

UNUSED, UP, DOWN = 0, 1, 2


class Mode(str, Enum):
    CO = "co"
    COUNTER = "counter"


def sw_positions(w_slots: int, width: int) -> int:
    """Number of spectrum-window start positions for a `width`-slot window."""
    if width < 1:
        raise ValueError(f"window width must be >= 1, got {width}")
    if width > w_slots:
        raise ValueError(f"window width {width} exceeds the {w_slots}-slot core capacity")
    return w_slots - width + 1


@dataclass(frozen=True)
class SpectrumWindow:
    """A block of `width` contiguous slots starting at 1-based index `start`."""

    start: int
    width: int

    def __post_init__(self):
        if self.start < 1 or self.width < 1:
            raise ValueError(f"invalid spectrum window [{self.start}, width {self.width}]")

    @property
    def end(self) -> int:
        return self.start + self.width - 1

    @property
    def mask(self) -> int:
        return ((1 << self.width) - 1) << (self.start - 1)


class CoreState:
    """Direction and slot-occupancy bitmap of one core (bit k-1 = slot k)."""

    __slots__ = ("direction", "occupancy")

    def __init__(self, direction: int = UNUSED, occupancy: int = 0):
        self.direction = direction
        self.occupancy = occupancy

    @property
    def used(self) -> bool:
        return self.direction != UNUSED

    def sw_free(self, sw: SpectrumWindow) -> bool:
        return (self.occupancy & sw.mask) == 0

    def occupied_slots(self) -> list[int]:
        return [k + 1 for k in range(self.occupancy.bit_length()) if self.occupancy >> k & 1]


def sw_free_on_core(core: CoreState, sw: SpectrumWindow) -> bool:
    """True when no occupied slot intersects the window."""
    return core.sw_free(sw)


class FiberState:
    """One deployed multi-core fiber.

    `fixed_direction` is UNUSED for counter-mode fibers (cores choose freely)
    and UP or DOWN for co-mode fibers.
    """

    __slots__ = ("cores", "fixed_direction")

    def __init__(self, core_count: int, fixed_direction: int = UNUSED):
        self.cores = [CoreState() for _ in range(core_count)]
        self.fixed_direction = fixed_direction

    @property
    def used(self) -> bool:
        return any(c.used for c in self.cores)

    def core(self, core_id: int) -> CoreState:
        return self.cores[core_id - 1]


class LinkState:
    __slots__ = ("link", "fibers")

    def __init__(self, link: tuple[int, int]):
        self.link = link
        self.fibers: list[FiberState] = []

    def fiber(self, fiber_id: int) -> FiberState:
        return self.fibers[fiber_id - 1]


@dataclass(frozen=True)
class LightpathRecord:
    """An established lightpath: its route, window, and per-link core choice."""

    demand_id: int
    route: Route
    start_fs: int
    end_fs: int
    choices: tuple[tuple[tuple[int, int], int, int], ...]  # (link, fiber, core) per hop

    @property
    def fs_count(self) -> int:
        return self.end_fs - self.start_fs + 1


class NetworkState:
    """Per-link fiber deployment and occupancy for one planning run."""

    def __init__(
        self,
        topology: Topology,
        geometry: McfGeometry,
        mode: Mode | str,
        w_slots: int = 50,
        fiber_cap: int = 16,
    ):
        if w_slots < 1 or fiber_cap < 1:
            raise ValueError("w_slots and fiber_cap must be positive")
        self.topology = topology
        self.geometry = geometry
        self.mode = Mode(mode)
        self.w_slots = w_slots
        self.fiber_cap = fiber_cap
        self.links: dict[tuple[int, int], LinkState] = {
            link: LinkState(link) for link in topology.links
        }
        self.records: list[LightpathRecord] = []

    def link_state(self, link: tuple[int, int]) -> LinkState:
        key = canonical_link(*link)
        if key not in self.links:
            raise ValueError(f"unknown link {link}")
        return self.links[key]

    def core(self, link: tuple[int, int], fiber: int, core: int) -> CoreState:
        return self.link_state(link).fiber(fiber).core(core)

    def add_fiber(self, link: tuple[int, int]) -> tuple[int, ...]:
        """Deploy capacity on a link: one fiber (counter) or an opposed pair (co).

        Returns the new 1-based fiber ids.  Raises CapacityError when the cap
        would be exceeded; nothing is deployed in that case.
        """
        ls = self.link_state(link)
        n = len(ls.fibers)
        cc = self.geometry.core_count
        if self.mode is Mode.COUNTER:
            if n + 1 > self.fiber_cap:
                raise CapacityError(f"link {ls.link}: fiber cap {self.fiber_cap} reached")
            ls.fibers.append(FiberState(cc))
            return (n + 1,)
        if n + 2 > self.fiber_cap:
            raise CapacityError(f"link {ls.link}: fiber cap {self.fiber_cap} reached (pair needed)")
        ls.fibers.append(FiberState(cc, fixed_direction=UP))
        ls.fibers.append(FiberState(cc, fixed_direction=DOWN))
        return (n + 1, n + 2)

    def eligible_cores(
        self, link: tuple[int, int], sw: SpectrumWindow, direction: int
    ) -> list[tuple[int, int]]:
        """(fiber, core) pairs able to carry the window in the given direction.

        A core qualifies when it is unused or already flows in `direction`
        with the window free; co mode additionally restricts the search to
        fibers fixed to `direction`.  The listing order doubles as the
        tie-break order for cost-equal candidates downstream: used cores come
        first, fullest first (exhaust started cores before opening new ones),
        then unused cores in the geometry's peripheral-first opening order so
        counter-propagating directions can interleave.
        """
        used: list[tuple[int, int, int, int]] = []  # (-fill, fiber, rank, core)
        fresh: list[tuple[int, int, int]] = []  # (fiber, rank, core)
        ls = self.link_state(link)
        co = self.mode is Mode.CO
        for fi, fiber in enumerate(ls.fibers, 1):
            if co and fiber.fixed_direction != direction:
                continue
            for rank, ci in enumerate(self.geometry.open_preference):
                core = fiber.cores[ci - 1]
                if not core.sw_free(sw):
                    continue
                if core.direction == direction:
                    used.append((-core.occupancy.bit_count(), fi, rank, ci))
                elif core.direction == UNUSED:
                    fresh.append((fi, rank, ci))
        used.sort()
        return [(fi, ci) for _, fi, _, ci in used] + [(fi, ci) for fi, _, ci in fresh]

    def link_sw_available(self, link: tuple[int, int], sw: SpectrumWindow, direction: int) -> bool:
        """True when some deployed core can carry the window in `direction`."""
        ls = self.link_state(link)
        co = self.mode is Mode.CO
        for fiber in ls.fibers:
            if co and fiber.fixed_direction != direction:
                continue
            for core in fiber.cores:
                if core.direction in (UNUSED, direction) and core.sw_free(sw):
                    return True
        return False

    def commit_lightpath(
        self,
        demand: Demand,
        route: Route,
        choices: list[tuple[int, int]] | tuple[tuple[int, int], ...],
        sw: SpectrumWindow,
    ) -> LightpathRecord:
        """Establish a lightpath; all-or-nothing.

        `choices` holds one (fiber, core) pair per route link, in route order.
        Every precondition is checked before any occupancy bit is set, so a
        failed commit leaves the state untouched.
        """
        if route.nodes[0] != demand.src or route.nodes[-1] != demand.dst:
            raise CommitError(
                f"demand {demand.id}: route {route.nodes} does not join "
                f"{demand.src} to {demand.dst}"
            )
        if sw.width != demand.fs_count:
            raise CommitError(
                f"demand {demand.id}: window width {sw.width} != required {demand.fs_count} slots"
            )
        if sw.end > self.w_slots:
            raise CommitError(
                f"demand {demand.id}: window [{sw.start}..{sw.end}] exceeds {self.w_slots} slots"
            )
        if len(choices) != len(route.links):
            raise CommitError(
                f"demand {demand.id}: {len(choices)} core choices for "
                f"{len(route.links)} route links"
            )
        planned: list[tuple[tuple[int, int], int, int, CoreState, int]] = []
        for link, (fi, ci) in zip(route.links, choices):
            dl = link_direction(route, link)
            ls = self.link_state(link)
            if not 1 <= fi <= len(ls.fibers):
                raise CommitError(f"demand {demand.id}: fiber {fi} not deployed on link {link}")
            fiber = ls.fiber(fi)
            if self.mode is Mode.CO and fiber.fixed_direction != dl:
                raise CommitError(
                    f"demand {demand.id}: link {link} fiber {fi} is fixed to the "
                    f"opposite direction"
                )
            if not 1 <= ci <= len(fiber.cores):
                raise CommitError(f"demand {demand.id}: core {ci} out of range on link {link}")
            core = fiber.core(ci)
            if core.direction not in (UNUSED, dl):
                raise CommitError(
                    f"demand {demand.id}: link {link} fiber {fi} core {ci} already flows "
                    f"the other way"
                )
            if not core.sw_free(sw):
                raise CommitError(
                    f"demand {demand.id}: slots [{sw.start}..{sw.end}] busy on link {link} "
                    f"fiber {fi} core {ci}"
                )
            planned.append((link, fi, ci, core, dl))
        for _, _, _, core, dl in planned:
            core.occupancy |= sw.mask
            if core.direction == UNUSED:
                core.direction = dl
        record = LightpathRecord(
            demand_id=demand.id,
            route=route,
            start_fs=sw.start,
            end_fs=sw.end,
            choices=tuple((link, fi, ci) for link, fi, ci, _, _ in planned),
        )
        self.records.append(record)
        return record

    def used_fiber_split(self, link: tuple[int, int]) -> tuple[int, int]:
        """(up, down) counts of used fibers on a link, by fixed direction (co mode)."""
        up = down = 0
        for fiber in self.link_state(link).fibers:
            if not fiber.used:
                continue
            if fiber.fixed_direction == UP:
                up += 1
            elif fiber.fixed_direction == DOWN:
                down += 1
        return up, down

    def mcf_count(self) -> int:
        """Deployed-MCF objective value.

        Counter mode counts fibers with at least one used core.  Co mode
        counts per link twice the larger per-direction used-fiber tally,
        because capacity is reserved in opposed pairs sized by the busier
        direction.  Deployed but untouched fibers are free in both modes.
        """
        total = 0
        if self.mode is Mode.COUNTER:
            for ls in self.links.values():
                total += sum(1 for fiber in ls.fibers if fiber.used)
            return total
        for link in self.links:
            up, down = self.used_fiber_split(link)
            total += 2 * max(up, down)
        return total

    def link_summary(self, link: tuple[int, int]) -> dict[str, int]:
        """Per-link deployment/usage counts for reporting."""
        ls = self.link_state(link)
        cores_up = cores_down = 0
        for fiber in ls.fibers:
            for core in fiber.cores:
                if core.direction == UP:
                    cores_up += 1
                elif core.direction == DOWN:
                    cores_down += 1
        return {
            "fibers_deployed": len(ls.fibers),
            "fibers_used": sum(1 for fiber in ls.fibers if fiber.used),
            "cores_up": cores_up,
            "cores_down": cores_down,
        }

    def clone(self) -> "NetworkState":
        new = NetworkState.__new__(NetworkState)
        new.topology = self.topology
        new.geometry = self.geometry
        new.mode = self.mode
        new.w_slots = self.w_slots
        new.fiber_cap = self.fiber_cap
        new.links = {}
        for key, ls in self.links.items():
            nls = LinkState(ls.link)
            for fiber in ls.fibers:
                nf = FiberState.__new__(FiberState)
                nf.fixed_direction = fiber.fixed_direction
                nf.cores = [CoreState(c.direction, c.occupancy) for c in fiber.cores]
                nls.fibers.append(nf)
            new.links[key] = nls
        new.records = list(self.records)
        return new


def replay_records(
    topology: Topology,
    geometry: McfGeometry,
    mode: Mode | str,
    w_slots: int,
    fiber_cap: int,
    records: list[LightpathRecord] | tuple[LightpathRecord, ...],
) -> NetworkState:
    """Rebuild a state by re-committing a solution log onto a fresh network.

    Fibers are deployed on demand up to each record's referenced ids, so a
    faithful log reproduces occupancy bitmaps and directions exactly.  Any
    invariant violation in the log surfaces as a CommitError.
    """
    state = NetworkState(topology, geometry, mode, w_slots, fiber_cap)
    for rec in records:
        for link, fi, _ in rec.choices:
            ls = state.link_state(link)
            while len(ls.fibers) < fi:
                state.add_fiber(link)
        demand = Demand(
            id=rec.demand_id,
            src=rec.route.nodes[0],
            dst=rec.route.nodes[-1],
            fs_count=rec.fs_count,
        )
        state.commit_lightpath(
            demand,
            rec.route,
            [(fi, ci) for _, fi, ci in rec.choices],
            SpectrumWindow(rec.start_fs, rec.fs_count),
        )
    return state
