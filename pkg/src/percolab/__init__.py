"""Bond percolation, small-world graphs, and discrete epidemics.

The package is organized around one pipeline: sample a graph (graphs),
percolate it, explore the result (visits, local_clusters), compare against
branching-process bounds (branching) and direct epidemic simulation
(epidemic), and bracket critical thresholds (analysis).  The `percolab`
console script drives all of it reproducibly from seeds.
"""

from .analysis import (
    ModelSpec,
    critical_p_bounded_degree,
    critical_p_matching,
    critical_p_swg,
    critical_r0,
    estimate_threshold,
    nonhomogeneous_criterion,
    scaling_study,
    survival_from_single_source,
)
from .graphs import (
    GenericGraph,
    PercolationGraph,
    SmallWorldGraph,
    connected_components,
    percolate,
    sample_regular,
    sample_swg_erdos,
    sample_swg_matching,
)
from .rng import Seed, derive, entropy_seed

__version__ = "0.1.0"
