"""Which linear networks explain the same partial measurements.

``netid`` finds every network ``A + Delta`` whose measured outputs match
those of ``A`` exactly, picks the one most different in topology, and
bounds how far outputs drift for networks that are only close.
"""

__version__ = "0.1.0"

from .dissimilar import DissimilarResult, check_equivalence, dissimilar_network, flip_metric, \
    solve_l1, solve_l2
from .epsclose import augment, check_eps_bound, error_norm, error_norm_bounds, gramian, \
    simulate_pair, solve_fixed_gramian_l1
from .errors import EnumerationTooLargeError, GramianUndefinedError, InfeasibleError, \
    InvalidInputError, NetidError, SolverError
from .model import GraphEnsembleConfig, NetworkSystem, generate, load_system, save_system, \
    sensor_matrix, sparsity_mask
from .observability import analyze, classify_edges, count_structural_networks, \
    enumerate_column_variants, observability_matrix, verify_indistinguishable
