"""Jaccard-based affiliation graph (JAG) models for overlapping communities."""

__version__ = "0.1.0"

from .graph import Affiliation, Cover, Graph, community_set, jaccard, shared_communities
from .models import (
    AgmParams,
    GridSpec,
    MembershipMove,
    ModelParams,
    MoveKind,
    agm_edge_prob,
    fit_alpha,
    jag_edge_prob,
    log_likelihood,
    log_likelihood_delta,
)
from .inference import DetectionResult, McmcConfig, detect_communities
from .metrics import f1_score, omega_index, overlapping_nmi

__all__ = [
    "Affiliation", "Cover", "Graph", "community_set", "jaccard", "shared_communities",
    "AgmParams", "GridSpec", "MembershipMove", "ModelParams", "MoveKind", "agm_edge_prob",
    "fit_alpha", "jag_edge_prob", "log_likelihood", "log_likelihood_delta",
    "DetectionResult", "McmcConfig", "detect_communities",
    "f1_score", "omega_index", "overlapping_nmi",
]
