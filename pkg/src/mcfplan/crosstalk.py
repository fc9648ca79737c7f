"""Weighted spectral-overlap crosstalk between cores sharing a fiber.

A pair of cores contributes weight * overlap, where the weight depends on the
pair's adjacency level (100/10/1 by default) and overlap counts slots occupied
in both cores.  Pairs flowing in opposite directions contribute nothing, which
is what makes counter-propagating assignments attractive.  All figures are
dimensionless weighted counts, not dB.
"""
from __future__ import annotations

from dataclasses import dataclass

from .state import CoreState, FiberState, NetworkState, SpectrumWindow, UNUSED
from .topology import Level, McfGeometry


def slot_overlap(core_a: CoreState, core_b: CoreState) -> int:
    """Number of slots occupied in both cores."""
    return (core_a.occupancy & core_b.occupancy).bit_count()


def crosstalk_factor(core_a: CoreState, core_b: CoreState, weight: int) -> int:
    """Pairwise crosstalk: weight * overlap when both cores flow the same way, else 0."""
    if core_a.direction == UNUSED or core_a.direction != core_b.direction:
        return 0
    return weight * slot_overlap(core_a, core_b)


def incremental_crosstalk(
    fiber: FiberState, core_id: int, sw: SpectrumWindow, direction: int, g: McfGeometry
) -> int:
    """Crosstalk added by placing the window on `core_id` in `direction`.

    Sums weight * overlap against every other core of the fiber already
    flowing in the same direction; opposite and unused neighbors add nothing.
    """
    mask = sw.mask
    total = 0
    weights = g._weight[core_id]
    for ci, other in enumerate(fiber.cores, 1):
        if ci == core_id or other.direction != direction:
            continue
        total += weights[ci] * (other.occupancy & mask).bit_count()
    return total


@dataclass(frozen=True)
class PairCrosstalk:
    """One contributing core pair, for per-pair reporting."""

    link: tuple[int, int]
    fiber: int
    core_i: int
    core_j: int
    level: Level
    overlap: int
    weighted: int


@dataclass(frozen=True)
class CrosstalkReport:
    total_weighted: int
    per_link: dict[tuple[int, int], int]
    pairs: tuple[PairCrosstalk, ...]
    mcf_count: int

    @property
    def average_per_mcf(self) -> float:
        return self.total_weighted / self.mcf_count if self.mcf_count else 0.0


def total_crosstalk(state: NetworkState) -> CrosstalkReport:
    """Network-wide crosstalk: every unordered core pair of every fiber, summed.

    Read-only; the report also carries the per-pair breakdown (contributing
    pairs only) and the deployed-MCF count for averaging.
    """
    g = state.geometry
    total = 0
    per_link: dict[tuple[int, int], int] = {}
    pairs: list[PairCrosstalk] = []
    for link, ls in state.links.items():
        link_total = 0
        for fi, fiber in enumerate(ls.fibers, 1):
            cores = fiber.cores
            for i in range(1, len(cores) + 1):
                core_i = cores[i - 1]
                if core_i.direction == UNUSED:
                    continue
                for j in range(i + 1, len(cores) + 1):
                    core_j = cores[j - 1]
                    if core_j.direction != core_i.direction:
                        continue
                    overlap = (core_i.occupancy & core_j.occupancy).bit_count()
                    if overlap == 0:
                        continue
                    weighted = g._weight[i][j] * overlap
                    link_total += weighted
                    pairs.append(
                        PairCrosstalk(
                            link=link,
                            fiber=fi,
                            core_i=i,
                            core_j=j,
                            level=g.level(i, j),
                            overlap=overlap,
                            weighted=weighted,
                        )
                    )
        per_link[link] = link_total
        total += link_total
    return CrosstalkReport(
        total_weighted=total,
        per_link=per_link,
        pairs=tuple(pairs),
        mcf_count=state.mcf_count(),
    )
