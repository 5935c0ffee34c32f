"""Min-sum loopy belief propagation with difference messages on square grids.

Exact oracles (enumeration and a row sweep), the region decomposition of
one-run boundaries, and mechanical checks of the forward/backward
convergence lemmas.
"""

from .grid import BoundaryConfig, Coord, DirectedEdge, Direction, GridInstance, make_grid, parse_boundary
from .messages import GraphInstance, LocalSolutionField, Trace, estimates, first_stable_iteration, run
from .oracle import brute_force_min_marginals, dp_min_marginals, exact_local_solutions, local_solutions
from .regions import closed_form_local_solutions, region_decomposition

__version__ = "0.1.0"

__all__ = [
    "BoundaryConfig", "Coord", "DirectedEdge", "Direction", "GridInstance", "make_grid",
    "parse_boundary", "GraphInstance", "LocalSolutionField", "Trace", "estimates",
    "first_stable_iteration", "run", "brute_force_min_marginals", "dp_min_marginals",
    "exact_local_solutions", "local_solutions", "closed_form_local_solutions",
    "region_decomposition",
]
