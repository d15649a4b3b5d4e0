"""Community-density personalized differential privacy for graph data
sharing, with correlated-noise release and per-community ledgers."""

from .community import (Community, CommunityPartition, Dendrogram,
                        assign_nodes, community_density, detect_communities,
                        edge_similarity, network_density)
from .decoupling import NoiseLadder, build_ladder, coupled_release, ladder_arrays
from .estimators import DensityEpsilonMapper, LinkCommunityDetector
from .graph import (HealthGraph, generate_synthetic, generate_synthetic_degree,
                    inclusive_neighborhood, load_edge_list, write_edge_list)
from .ledger import (Block, BlockHeader, SubChain, Transaction, merkle_root,
                     mine_block, required_hashrate, required_hashrate_ramp,
                     simulate_poisoning, validate_chain)
from .linkage import LinkageReport, LinkageScenario, simulate_linkage
from .mapping import (MappingParams, ParamGrid, PrivacyAssignment,
                      assign_epsilons, check_tradeoff, map_density_to_epsilon,
                      privacy_ratio_bound, tune_mapping)
from .mechanisms import (SanitizedRelease, SensitiveRecord, exponential_release,
                         global_sensitivity, laplace_mse_bound, laplace_release,
                         rmse)
from .pipeline import sanitize_pipeline

__version__ = "0.1.0"

__all__ = [
    "Block", "BlockHeader", "Community", "CommunityPartition",
    "Dendrogram", "DensityEpsilonMapper", "HealthGraph",
    "LinkCommunityDetector", "LinkageReport", "LinkageScenario",
    "MappingParams", "NoiseLadder", "ParamGrid", "PrivacyAssignment",
    "SanitizedRelease", "SensitiveRecord", "SubChain", "Transaction",
    "assign_epsilons", "assign_nodes", "build_ladder", "check_tradeoff",
    "community_density", "coupled_release", "detect_communities",
    "edge_similarity", "exponential_release", "generate_synthetic",
    "generate_synthetic_degree", "global_sensitivity",
    "inclusive_neighborhood", "ladder_arrays", "laplace_mse_bound",
    "laplace_release", "load_edge_list", "map_density_to_epsilon",
    "merkle_root", "mine_block", "network_density", "privacy_ratio_bound",
    "required_hashrate", "required_hashrate_ramp", "rmse",
    "sanitize_pipeline", "simulate_linkage", "simulate_poisoning",
    "tune_mapping", "validate_chain", "write_edge_list",
]
