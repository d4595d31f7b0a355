"""Directed mixed-membership blockmodel: simulation and spectral estimation."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BiAdjacency,
    MembershipMatrix,
    ProbabilityMatrix,
    SvdFactor,
    VertexSet,
    validate_membership,
)
from .estimator import DispOptions, DispResult, disp, disp_equivalence, ideal_disp  # noqa: E402
from .linalg import SvdOptions, spectral_norm, top_k_svd  # noqa: E402
from .metrics import di_mixed_hamming, match_permutation, mixed_hamming, network_stats  # noqa: E402
from .model import (  # noqa: E402
    MixedProfileSpec,
    ModelParams,
    build_omega,
    check_identifiability,
    make_planted_memberships,
    prune_zero_degree,
    sample_adjacency,
)
from .vertexhunt import successive_projection  # noqa: E402

__all__ = [
    "BiAdjacency", "MembershipMatrix", "ProbabilityMatrix", "SvdFactor", "VertexSet",
    "validate_membership", "DispOptions", "DispResult", "disp", "disp_equivalence", "ideal_disp",
    "SvdOptions", "spectral_norm", "top_k_svd", "di_mixed_hamming", "match_permutation",
    "mixed_hamming", "network_stats", "MixedProfileSpec", "ModelParams", "build_omega",
    "check_identifiability", "make_planted_memberships", "prune_zero_degree", "sample_adjacency",
    "successive_projection",
]
