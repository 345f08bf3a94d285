"""Cluster-state construction by fusion, plus the abstract growth walk."""
from .fusion import (
    FusionOutcome,
    FusionTag,
    add_redundancy,
    fuse,
    fusion_branch_probabilities,
    ghz_cluster,
    make_two_qubit_cluster,
    remove_redundancy,
)
from .growth import GrowthPolicy, GrowthStats, grow_abstract, validate_abstract_vs_exact
from .state import ClusterState, RedundantLogicalQubit, logical_branches, pauli_equivalent
