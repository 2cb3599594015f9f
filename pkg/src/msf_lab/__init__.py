"""Spanning forests on Cayley graphs: free minimal spanning forests, spectral radius
bounds and relative forests avoiding a cyclic subgroup's cosets."""

from .cayley import (GraphPatch, SimpleCycle, a_line_edges, a_line_mask, build_ball, build_quotient,
                     enumerate_simple_cycles, graph_from_edges)
from .errors import CapExceeded, ConfigError, MsfLabError, PatchError
from .experiment import ExperimentConfig, RunRecord, run_experiment
from .fmsf import (Labeling, corollary_scan, edge_survives, estimate_delta_fmsf, kruskal_msf, sample_forest,
                   theorem1_bound)
from .groups import (FreeAbelian, FreeGroup, FreeProduct, GeneratingMultiset, GroupElement, make_multiset,
                     power_multiset, standard_multiset, validate_multiset)
from .relative import (ThetaMap, TauSample, assign_depths, build_cycle_graph, cantor_pair,
                       estimate_relative_degree, relative_cut, tau_stats, theta_n)
from .rng import seeded_label
from .spectral import (check_path_bound, count_paths, count_rooted_cycles, cycle_sequence, lambda_exact,
                       spectral_radius_power_iteration)
from .trials import statistics

__version__ = "0.1.0"
