"""Directed lightpath demand sets: file loading and seeded asymmetric generation.

Generated sets are bidirectional splits: for every selected node pair a total
frequency-slot requirement is drawn uniformly and divided 1:AR between the two
directions, the larger share flowing from the higher-numbered node.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import ParseError
from .topology import Topology

GENERATOR_ID = "python-random-mt19937/v1"


@dataclass(frozen=True)
class Demand:
    """One unidirectional lightpath request."""

    id: int
    src: int
    dst: int
    fs_count: int

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"demand {self.id}: source equals destination ({self.src})")
        if self.fs_count < 1:
            raise ValueError(f"demand {self.id}: fs_count must be >= 1, got {self.fs_count}")


@dataclass(frozen=True)
class DemandSet:
    demands: tuple[Demand, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ids = [d.id for d in self.demands]
        if len(set(ids)) != len(ids):
            raise ValueError("demand ids must be unique")

    def __iter__(self):
        return iter(self.demands)

    def __len__(self):
        return len(self.demands)

    def to_text(self) -> str:
        """Serialize as a demand file with '#'-prefixed metadata headers."""
        lines = [f"# {key}={value}" for key, value in self.metadata.items()]
        lines += [f"{d.src} {d.dst} {d.fs_count}" for d in self.demands]
        return "\n".join(lines) + "\n"


def load_demands(text: str) -> DemandSet:
    """Parse "<src> <dst> <fs_count>" lines; '#' lines may carry key=value metadata."""
    demands: list[Demand] = []
    metadata: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                metadata[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected '<src> <dst> <fs_count>', got {line!r}", line_no)
        try:
            src, dst, fs = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        try:
            demands.append(Demand(id=len(demands) + 1, src=src, dst=dst, fs_count=fs))
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
    return DemandSet(demands=tuple(demands), metadata=metadata)


def split_total(total: int, ar: float) -> tuple[int, int]:
    """Split a pair's total FS requirement 1:AR into (smaller, larger) parts.

    The larger part rounds half-up; both parts are clamped to at least 1 FS.
    """
    if total < 2:
        raise ValueError(f"total must be >= 2 to give both directions a slot, got {total}")
    if ar < 1:
        raise ValueError(f"asymmetry ratio must be >= 1, got {ar}")
    larger = max(1, math.floor(total * ar / (1.0 + ar) + 0.5))
    smaller = total - larger
    if smaller < 1:
        smaller = 1
        larger = total - 1
    return smaller, larger


def _select_pairs(t: Topology, pairs: str | int, rng: random.Random) -> list[tuple[int, int]]:
    all_pairs = [(a, b) for i, a in enumerate(t.nodes) for b in t.nodes[i + 1:]]
    if pairs == "all":
        return all_pairs
    count = int(pairs)
    if count < 1:
        raise ValueError(f"pair count must be >= 1, got {count}")
    # Sample without replacement in rounds; when the requested count exceeds
    # the number of distinct pairs, whole rounds repeat before the remainder
    # is drawn, keeping coverage near-uniform.
    chosen: list[tuple[int, int]] = []
    while len(chosen) < count:
        take = min(count - len(chosen), len(all_pairs))
        chosen.extend(rng.sample(all_pairs, take))
    return chosen


def pair_totals(
    t: Topology, x_mean: int, seed: int, pairs: str | int = "all"
) -> list[tuple[tuple[int, int], int]]:
    """Draw each selected pair's total FS requirement, uniform on [5, 2*x_mean - 5].

    Splitting the totals is a separate step so asymmetry sweeps can reuse one
    draw across ratios.
    """
    if x_mean < 5:
        raise ValueError(f"x_mean must be >= 5 so the range [5, 2x-5] is nonempty, got {x_mean}")
    rng = random.Random(seed)
    selected = _select_pairs(t, pairs, rng)
    return [(pair, rng.randint(5, 2 * x_mean - 5)) for pair in selected]


def demands_from_totals(
    totals: list[tuple[tuple[int, int], int]], ar: float, metadata: dict[str, str] | None = None
) -> DemandSet:
    """Split per-pair totals 1:AR; the larger share's source is the larger node id."""
    demands: list[Demand] = []
    for (a, b), total in totals:
        smaller, larger = split_total(total, ar)
        demands.append(Demand(id=len(demands) + 1, src=a, dst=b, fs_count=smaller))
        demands.append(Demand(id=len(demands) + 1, src=b, dst=a, fs_count=larger))
    return DemandSet(demands=tuple(demands), metadata=dict(metadata or {}))


def symmetric_reservation(demands: DemandSet) -> DemandSet:
    """Equalize each bidirectional pair to its larger slot requirement.

    This is the capacity model of the conventional symmetric (co-propagating)
    design: both directions of a node pair reserve the larger of the two
    requirements, so the thinner direction over-consumes slots.  Demands are
    matched greedily in order with the first later unmatched reverse demand;
    unmatched demands keep their size.  Ids and order are preserved.
    """
    sizes = {d.id: d.fs_count for d in demands}
    unmatched: dict[tuple[int, int], list[Demand]] = {}
    for d in demands:
        reverse = unmatched.get((d.dst, d.src))
        if reverse:
            partner = reverse.pop(0)
            peak = max(d.fs_count, partner.fs_count)
            sizes[d.id] = peak
            sizes[partner.id] = peak
        else:
            unmatched.setdefault((d.src, d.dst), []).append(d)
    new = tuple(
        Demand(id=d.id, src=d.src, dst=d.dst, fs_count=sizes[d.id]) for d in demands
    )
    metadata = dict(demands.metadata)
    metadata["reservation"] = "symmetric"
    return DemandSet(demands=new, metadata=metadata)


def generate_demands(
    t: Topology, x_mean: int, ar: float, seed: int, pairs: str | int = "all"
) -> DemandSet:
    """Generate a seeded, bidirectionally asymmetric demand set.

    Deterministic for a fixed (seed, x_mean, ar, pairs) tuple; the generator
    identifier is recorded in the metadata.
    """
    totals = pair_totals(t, x_mean, seed, pairs)
    metadata = {
        "generator": GENERATOR_ID,
        "seed": str(seed),
        "x_mean": str(x_mean),
        "ar": f"{ar:g}",
        "pairs": str(pairs),
    }
    return demands_from_totals(totals, ar, metadata)
