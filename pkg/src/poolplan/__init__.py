"""Grid path planning with max-pool activity maps."""

from .grid import (
    Coord,
    GridError,
    GridMap,
    SourceSet,
    build_grid,
    comb_maze,
    comb_start,
    make_sources,
    random_free_cells,
    random_maze,
)
from .oracle import (
    DistanceMap,
    ValidationReport,
    bfs_multi_source,
    check_activity,
    check_path,
    dijkstra_octile,
)
from .propagate import (
    ActivityMap,
    PropagationConfig,
    layer_bound,
    propagate,
    propagate_auto,
    propagate_layer,
    propagate_reference,
    source_map,
)
from .reconstruct import (
    Path,
    PathMetrics,
    path_metrics,
    reconstruct_euclidean,
    reconstruct_simple,
    straighten,
)

__version__ = "0.1.0"
