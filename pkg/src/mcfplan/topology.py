"""Network topology, MCF core geometry, and candidate-route computation."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources

from .errors import ParseError, TopologyError, UnreachableError


class Level(IntEnum):
    """Crosstalk adjacency level between two cores of one fiber (L1 strongest)."""

    L1 = 1
    L2 = 2
    L3 = 3


DEFAULT_LEVEL_WEIGHTS: dict[Level, int] = {Level.L1: 100, Level.L2: 10, Level.L3: 1}

# Pitch-normalized distance thresholds separating the adjacency levels.
# Nearest neighbors sit at distance 1; pairs with one intervening core sit at
# sqrt(3) or 2 depending on where they are on the lattice; anything farther is
# L3.  The small slack absorbs floating-point noise in loaded coordinates.
L1_MAX_DIST = 1.01
L2_MAX_DIST = 2.01


def canonical_link(a: int, b: int) -> tuple[int, int]:
    """Undirected link key: endpoints ordered ascending."""
    return (a, b) if a < b else (b, a)


class Topology:
    """Undirected graph with contiguous 1-based node ids and km link lengths.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, links: list[tuple[int, int, float]]):
        if not links:
            raise TopologyError("topology has no links")
        seen: dict[tuple[int, int], float] = {}
        for a, b, length in links:
            if a == b:
                raise TopologyError(f"self-loop on node {a}")
            if length <= 0:
                raise TopologyError(f"non-positive length on link {a}-{b}")
            key = canonical_link(a, b)
            if key in seen:
                raise TopologyError(f"duplicate link {key[0]}-{key[1]}")
            seen[key] = float(length)
        nodes = sorted({n for link in seen for n in link})
        if nodes[0] != 1 or nodes[-1] != len(nodes):
            raise TopologyError(
                f"node ids must form a contiguous 1..N range, got {nodes[0]}..{nodes[-1]} "
                f"over {len(nodes)} nodes"
            )
        self.nodes: tuple[int, ...] = tuple(nodes)
        self.links: tuple[tuple[int, int], ...] = tuple(sorted(seen))
        self._lengths: dict[tuple[int, int], float] = {k: seen[k] for k in self.links}
        adj: dict[int, list[tuple[int, float]]] = {n: [] for n in self.nodes}
        for (a, b), length in self._lengths.items():
            adj[a].append((b, length))
            adj[b].append((a, length))
        self._adj: dict[int, tuple[tuple[int, float], ...]] = {
            n: tuple(sorted(nbrs)) for n, nbrs in adj.items()
        }
        self._check_connected()

    def _check_connected(self) -> None:
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            u = stack.pop()
            for v, _ in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise TopologyError(f"graph is disconnected; unreachable nodes: {missing}")

    def neighbors(self, node: int) -> tuple[tuple[int, float], ...]:
        return self._adj[node]

    def length(self, a: int, b: int) -> float:
        return self._lengths[canonical_link(a, b)]

    def has_link(self, a: int, b: int) -> bool:
        return canonical_link(a, b) in self._lengths

    def __repr__(self) -> str:
        return f"Topology(nodes={len(self.nodes)}, links={len(self.links)})"


def load_topology(text: str) -> Topology:
    """Parse an edge-list topology file.

    Each data line is "<node_a> <node_b> <length_km>"; blank lines and lines
    starting with '#' are ignored.
    """
    links: list[tuple[int, int, float]] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected '<node_a> <node_b> <length_km>', got {line!r}", line_no)
        try:
            a, b = int(parts[0]), int(parts[1])
            length = float(parts[2])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        links.append((a, b, length))
    return Topology(links)


_BUILTIN_TOPOLOGIES = {"nsfnet": "nsfnet.txt", "cost239": "cost239.txt", "n6s8": "n6s8.txt"}


def load_builtin_topology(name: str) -> Topology:
    """Load one of the shipped test networks: nsfnet, cost239 or n6s8."""
    try:
        filename = _BUILTIN_TOPOLOGIES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown built-in topology {name!r}; "
                         f"choose from {sorted(_BUILTIN_TOPOLOGIES)}") from None
    text = resources.files("mcfplan").joinpath("data", filename).read_text()
    return load_topology(text)


@dataclass(frozen=True)
class Route:
    """A loopless node sequence with its link sequence and total length."""

    nodes: tuple[int, ...]
    links: tuple[tuple[int, int], ...]
    length_km: float

    @property
    def hop_count(self) -> int:
        return len(self.links)


def route_from_nodes(t: Topology, nodes: list[int] | tuple[int, ...]) -> Route:
    """Build and validate a Route from a node sequence on the given topology."""
    nodes = tuple(nodes)
    if len(nodes) < 2:
        raise ValueError("a route needs at least two nodes")
    if len(set(nodes)) != len(nodes):
        raise ValueError(f"route revisits a node: {nodes}")
    links = []
    length = 0.0
    for u, v in zip(nodes, nodes[1:]):
        if not t.has_link(u, v):
            raise ValueError(f"nodes {u} and {v} are not adjacent")
        links.append(canonical_link(u, v))
        length += t.length(u, v)
    return Route(nodes=nodes, links=tuple(links), length_km=length)


def link_direction(route: Route, link: tuple[int, int]) -> int:
    """Traversal direction of `link` on `route`.

    1 when traversed from the smaller to the larger node id, 2 for the
    opposite direction, 0 when the link is not on the route.
    """
    a, b = canonical_link(*link)
    for u, v in zip(route.nodes, route.nodes[1:]):
        if (u, v) == (a, b):
            return 1
        if (u, v) == (b, a):
            return 2
    return 0


def _dijkstra(
    t: Topology,
    src: int,
    dst: int,
    banned_links: frozenset[tuple[int, int]] = frozenset(),
    banned_nodes: frozenset[int] = frozenset(),
) -> tuple[float, tuple[int, ...]] | None:
    """Shortest path avoiding the given links/nodes, or None if unreachable.

    Ties are broken deterministically toward smaller node ids.
    """
    dist: dict[int, float] = {src: 0.0}
    pred: dict[int, int] = {}
    heap: list[tuple[float, int]] = [(0.0, src)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            path = [u]
            while path[-1] != src:
                path.append(pred[path[-1]])
            return d, tuple(reversed(path))
        for v, w in t.neighbors(u):
            if v in done or v in banned_nodes:
                continue
            if canonical_link(u, v) in banned_links:
                continue
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def _loopless_paths(t: Topology, src: int, dst: int):
    """Yield (length, nodes) for all loopless src->dst paths, nondecreasing.

    Yen-style enumeration; ties resolve to the lexicographically smaller node
    sequence so iteration order is stable.
    """
    first = _dijkstra(t, src, dst)
    if first is None:
        return
    yield first
    yielded: list[tuple[float, tuple[int, ...]]] = [first]
    candidates: list[tuple[float, tuple[int, ...]]] = []
    in_candidates: set[tuple[int, ...]] = set()
    emitted: set[tuple[int, ...]] = {first[1]}
    while True:
        _, prev = yielded[-1]
        for i in range(len(prev) - 1):
            spur = prev[i]
            root = prev[: i + 1]
            banned_links = {
                canonical_link(p[i], p[i + 1])
                for _, p in yielded
                if len(p) > i + 1 and p[: i + 1] == root
            }
            banned_nodes = frozenset(root[:-1])
            res = _dijkstra(t, spur, dst, frozenset(banned_links), banned_nodes)
            if res is None:
                continue
            spur_len, spur_nodes = res
            total_nodes = root[:-1] + spur_nodes
            if total_nodes in emitted or total_nodes in in_candidates:
                continue
            root_len = sum(t.length(u, v) for u, v in zip(root, root[1:]))
            heapq.heappush(candidates, (root_len + spur_len, total_nodes))
            in_candidates.add(total_nodes)
        if not candidates:
            return
        best = heapq.heappop(candidates)
        in_candidates.discard(best[1])
        emitted.add(best[1])
        yielded.append(best)
        yield best


def k_shortest_paths(
    t: Topology, src: int, dst: int, k: int, link_disjoint: bool = False
) -> list[Route]:
    """Up to k loopless routes sorted by ascending length.

    With `link_disjoint`, loopless paths are accepted greedily in length order
    only when they share no link with a previously accepted route.  Fewer than
    k routes are returned when no more exist.
    """
    if src == dst:
        raise ValueError("source and destination must differ")
    if k < 1:
        raise ValueError("k must be >= 1")
    routes: list[Route] = []
    used_links: set[tuple[int, int]] = set()
    found_any = False
    for length, nodes in _loopless_paths(t, src, dst):
        found_any = True
        links = tuple(canonical_link(u, v) for u, v in zip(nodes, nodes[1:]))
        if link_disjoint and any(l in used_links for l in links):
            continue
        routes.append(Route(nodes=nodes, links=links, length_km=length))
        used_links.update(links)
        if len(routes) == k:
            break
    if not found_any:
        raise UnreachableError(f"no path from {src} to {dst}")
    return routes


class McfGeometry:
    """Core layout of a multi-core fiber on the pitch-normalized plane.

    Holds per-core (x, y) coordinates (1-based core ids) and the weight
    assigned to each crosstalk adjacency level.  Immutable after construction.
    """

    def __init__(
        self,
        coords: list[tuple[float, float]] | tuple[tuple[float, float], ...],
        level_weights: dict[Level, int] | None = None,
        name: str = "custom",
    ):
        coords = tuple((float(x), float(y)) for x, y in coords)
        if len(coords) < 2:
            raise ValueError("a geometry needs at least two cores")
        weights = dict(level_weights) if level_weights else dict(DEFAULT_LEVEL_WEIGHTS)
        if not (weights[Level.L1] > weights[Level.L2] > weights[Level.L3] > 0):
            raise ValueError(f"level weights must be strictly decreasing and positive: {weights}")
        min_dist = min(
            math.dist(coords[i], coords[j])
            for i in range(len(coords))
            for j in range(i + 1, len(coords))
        )
        if abs(min_dist - 1.0) > 1e-6:
            raise ValueError(f"minimum core distance must equal the pitch (1.0), got {min_dist}")
        self.name = name
        self.coords = coords
        self.level_weights = weights
        self.core_count = len(coords)
        self.cores = tuple(range(1, len(coords) + 1))
        # Precomputed per-pair levels and weights; these sit on the hot path
        # of every crosstalk evaluation.
        n = self.core_count
        self._level = [[Level.L3] * (n + 1) for _ in range(n + 1)]
        self._weight = [[0] * (n + 1) for _ in range(n + 1)]
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                d = math.dist(coords[i - 1], coords[j - 1])
                level = Level.L1 if d <= L1_MAX_DIST else Level.L2 if d <= L2_MAX_DIST else Level.L3
                self._level[i][j] = level
                self._weight[i][j] = weights[level]
        # Preferred opening order for fresh cores: peripheral cores (few L1
        # neighbors) before central ones, so that counter-propagating
        # directions can interleave with the least strong coupling.
        l1_degree = {
            i: sum(1 for j in self.cores if j != i and self._level[i][j] is Level.L1)
            for i in self.cores
        }
        self.open_preference: tuple[int, ...] = tuple(
            sorted(self.cores, key=lambda i: (l1_degree[i], i))
        )

    def _check_core(self, i: int) -> None:
        if not 1 <= i <= self.core_count:
            raise IndexError(f"core index {i} out of range 1..{self.core_count}")

    def distance(self, i: int, j: int) -> float:
        self._check_core(i)
        self._check_core(j)
        return math.dist(self.coords[i - 1], self.coords[j - 1])

    def level(self, i: int, j: int) -> Level:
        self._check_core(i)
        self._check_core(j)
        if i == j:
            raise ValueError("adjacency level is defined for distinct cores")
        return self._level[i][j]

    def pair_weight(self, i: int, j: int) -> int:
        """Crosstalk weight for the pair (i, j); only distinct cores are valid."""
        return self._weight[i][j]

    def __repr__(self) -> str:
        return f"McfGeometry({self.name}, cores={self.core_count})"


def adjacency_level(g: McfGeometry, i: int, j: int) -> Level:
    """Adjacency level of cores i and j: L1 nearest, L2 one core apart, L3 beyond."""
    return g.level(i, j)


def _ring(count: int, radius: float, start_deg: float = 0.0) -> list[tuple[float, float]]:
    # Clockwise from the given start angle.
    out = []
    for k in range(count):
        ang = math.radians(start_deg - 360.0 * k / count)
        out.append((radius * math.cos(ang), radius * math.sin(ang)))
    return out


def hex_geometry(core_count: int, level_weights: dict[Level, int] | None = None) -> McfGeometry:
    """Built-in hexagonal-lattice layouts.

    Core 1 is the center; ring cores are numbered clockwise starting from
    angle 0, inner ring before outer ring.  Supported sizes: 7 and 19.
    """
    if core_count == 7:
        coords = [(0.0, 0.0)] + _ring(6, 1.0)
    elif core_count == 19:
        outer: list[tuple[float, float]] = []
        # The outer ring alternates lattice vertices (distance 2, angles at
        # multiples of 60) and edge midpoints (distance sqrt(3), offset 30).
        for k in range(6):
            outer.extend(_ring(1, 2.0, -60.0 * k))
            outer.extend(_ring(1, math.sqrt(3.0), -60.0 * k - 30.0))
        coords = [(0.0, 0.0)] + _ring(6, 1.0) + outer
    else:
        raise ValueError(f"built-in geometries support 7 or 19 cores, not {core_count}")
    return McfGeometry(coords, level_weights, name=f"hex{core_count}")


def load_geometry(text: str, level_weights: dict[Level, int] | None = None) -> McfGeometry:
    """Parse a "<core_id> <x> <y>" geometry file; ids must cover 1..N."""
    entries: dict[int, tuple[float, float]] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected '<core_id> <x> <y>', got {line!r}", line_no)
        try:
            core = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        if core in entries:
            raise ParseError(f"duplicate core id {core}", line_no)
        entries[core] = (x, y)
    if not entries:
        raise ParseError("geometry file has no cores")
    ids = sorted(entries)
    if ids != list(range(1, len(ids) + 1)):
        raise ParseError(f"core ids must form a contiguous 1..N range, got {ids}")
    return McfGeometry([entries[i] for i in ids], level_weights, name="file")
