"""Co-consumption network analysis.

Listings of popular items per country are turned into a weighted country
network, filtered to its disparity backbone, scored with alpha-tuned
closeness/betweenness and a composite openness index, and related to
country covariates by OLS.
"""

__version__ = "0.1.0"

from .backbone import BackboneGraph, DisparityFilter, edge_significance, extract_backbone
from .centrality import (
    AlphaCentrality,
    alpha_distances,
    betweenness,
    centrality_scores,
    closeness,
    eigenvector_centrality,
)
from .exceptions import AnalysisError
from .inference import (
    OLSRegression,
    RegressionResult,
    UnitIntervalScaler,
    bp_score_test,
    ols_fit,
    rescale_unit,
    run_models,
    vif,
)
from .ingest import BipartiteBuilder, BipartiteGraph, ListingRecord, build_bipartite, parse_listings
from .netstats import GreedyModularity, NetworkSummary, detect_communities, summarize
from .openness import (
    CompositeOpenness,
    composite_openness,
    jaccard_dissimilarity,
    neighbor_overlaps,
    openness_table,
)
from .projection import WeightedCountryGraph, edge_weight, project
from .synthgen import PlantedConfig, generate

__all__ = [
    "AlphaCentrality", "AnalysisError", "BackboneGraph", "BipartiteBuilder", "BipartiteGraph",
    "CompositeOpenness", "DisparityFilter", "GreedyModularity", "ListingRecord", "NetworkSummary",
    "OLSRegression", "PlantedConfig", "RegressionResult", "UnitIntervalScaler", "WeightedCountryGraph",
    "alpha_distances", "betweenness", "bp_score_test", "build_bipartite", "centrality_scores", "closeness",
    "composite_openness", "detect_communities", "edge_significance", "edge_weight",
    "eigenvector_centrality", "extract_backbone", "generate", "jaccard_dissimilarity",
    "neighbor_overlaps", "ols_fit", "openness_table", "parse_listings", "project", "rescale_unit",
    "run_models", "summarize", "vif",
]
