"""Planning engine for multi-core-fiber optical networks.

Assigns routes, spectrum windows, and fiber cores to directed lightpath
demands under co- and counter-propagating core modes, minimizing deployed
fiber count and weighted inter-core crosstalk.  Ships an auxiliary-graph
heuristic, an exact model generator/solver for micro instances, a brute-force
oracle, and a reproducible CSV experiment harness.
"""

from .crosstalk import (
    CrosstalkReport,
    crosstalk_factor,
    incremental_crosstalk,
    slot_overlap,
    total_crosstalk,
)
from .demand import (
    Demand,
    DemandSet,
    generate_demands,
    load_demands,
    split_total,
    symmetric_reservation,
)
from .errors import (
    CapacityError,
    CommitError,
    InfeasibleError,
    McfplanError,
    ParseError,
    SearchSpaceError,
    TopologyError,
    UnreachableError,
)
from .heuristic import (
    AuxGraph,
    ComboMatrix,
    RscaSolution,
    assign_one,
    build_aux_graph,
    min_combinations,
    scan_combinations,
    solve_all,
)
from .ilp import (
    ExactLimits,
    ExactResult,
    IlpInstance,
    IlpParams,
    build_ilp,
    solve_exact_small,
    write_lp,
)
from .oracle import OracleParams, OracleResult, brute_force_rsca
from .state import (
    CoreState,
    FiberState,
    LightpathRecord,
    LinkState,
    Mode,
    NetworkState,
    SpectrumWindow,
    replay_records,
    sw_free_on_core,
    sw_positions,
)
from .topology import (
    Level,
    McfGeometry,
    Route,
    Topology,
    adjacency_level,
    hex_geometry,
    k_shortest_paths,
    link_direction,
    load_builtin_topology,
    load_geometry,
    load_topology,
    route_from_nodes,
)

__version__ = "0.1.0"
