"""Inductive knowledge-graph link prediction with path-rule scorers,
fuzzy score-set fusion, and cascaded re-ranking."""

__version__ = "0.1.0"

from .kg import (
    InductiveSplit,
    KnowledgeGraph,
    Triple,
    build_graph,
    load_graph,
    load_split,
    load_triple_file,
    serialize_triples,
    validate_split,
)
from .paths import (
    PathInstance,
    enumerate_paths,
    k_hop_reachable,
    pairwise_reachability_fraction,
)
from .fuzzy import (
    FuzzyScoreSet,
    alpha_cut,
    answer_cut,
    combine_convex,
    combine_max,
    combine_min,
)
from .rules import (
    Rule,
    RuleBase,
    RuleScorer,
    TableScorer,
    load_external_scores,
    load_rules,
    mine_rules,
    save_rules,
    score_triple,
)
from .rerank import (
    FixedThreshold,
    IdealOracle,
    KMeansCutoff,
    MaxCombine,
    MeanCombine,
    MinCombine,
    NoCutoff,
    RerankPipeline,
    ReplaceScores,
    TopK,
    apply_rerank,
    kmeans_1d,
    rerank_query,
    select_pool,
    set_difference_ratio,
    top_n_intersection_ratio,
    verify_rerank_bounds,
)
from .evaluate import (
    EvalQuery,
    EvalReport,
    evaluate,
    evaluate_strategies,
    export_prediction_subgraph,
    fit_fixed_threshold,
    intersection_ratio_table,
    rank_of_answer,
    reachability_table,
    sample_negatives,
    set_difference_table,
)
from .synthetic import SyntheticSpec, generate_split_triples, write_dataset

__all__ = [name for name in dir() if not name.startswith("_")]
