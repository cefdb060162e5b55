"""Correlation-based hierarchical taxonomy of weekly sales panels."""

from corrtax.corrnet import (
    CorrelationCensus,
    CorrelationLevel,
    CorrelationMatrix,
    DistanceMatrix,
    census,
    classify_pair,
    correlation_matrix,
    distance_matrix,
    top_pairs,
)
from corrtax.dynamics import (
    HalfLifeEstimate,
    HalfLifeScaling,
    SurvivalCurve,
    WindowPlan,
    edge_survival,
    half_life_scaling,
    mean_half_life,
    rolling_trees,
    tree_half_life,
)
from corrtax.errors import CorrtaxError
from corrtax.panel import (
    ReturnPanel,
    SalesPanel,
    log_returns,
    parse_panel,
    slice_window,
    validate_panel,
)
from corrtax.synth import (
    CompetitionConfig,
    SectorConfig,
    generate_competitive_market,
    generate_sector_market,
)
from corrtax.taxonomy import (
    Dendrogram,
    SpanningTree,
    UltrametricMatrix,
    cophenetic,
    export_dot,
    export_newick,
    minimum_spanning_tree,
    single_linkage,
    subdominant_ultrametric,
)

__version__ = "0.1.0"
