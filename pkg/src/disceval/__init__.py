"""Discourse-tree similarity metrics for machine translation evaluation.

Compares the RST discourse tree of a hypothesis translation with that of a
reference via an all-subtree kernel, learns weighted combinations of such
scores with external metric scores from human pairwise judgments, and
measures any metric's correlation with human judgments at the segment and
system level.
"""

from .analysis import (
    CohortSpec,
    DepthDistribution,
    DistributionReport,
    F1Result,
    ablation_sweep,
    cohort_report,
    depth_distribution,
    depth_rmse,
    kl_divergence,
    label_distribution,
    make_cohorts,
    simplified_f1,
)
from .errors import (
    ComputationError,
    DataWarning,
    DiscevalError,
    InputError,
    KernelOverflowError,
    TreeSyntaxError,
    TreeValidationError,
    ValidationWarning,
)
from .evaluation import (
    CorrelationReport,
    TauConfig,
    TiePolicy,
    break_ties,
    human_system_scores,
    kendall_tau,
    metric_system_scores,
    pairwise_decisions,
    pearson,
    randomization_test,
    spearman,
    system_level_report,
)
from .kernel import KernelConfig, brute_force_kernel, normalized_similarity, subtree_kernel
from .representations import (
    AblationKind,
    KernelTree,
    RepresentationKind,
    ablated_kernel_tree,
    apply_ablation,
    to_representation,
)
from .scoring import (
    MetricScoreTable,
    combine,
    load_external_scores,
    metric_name,
    minmax_normalize,
    save_scores,
    score_dr_metrics,
)
from .trees import (
    Edu,
    RstNode,
    Span,
    TreeStats,
    label_counts,
    load_tree_file,
    parse_tree,
    save_tree_file,
    serialize_tree,
    tree_stats,
)
from .tuning import (
    CombinedMetricModel,
    PairwiseComparison,
    PairwiseExample,
    RankingJudgment,
    build_examples,
    expand_rankings,
    load_judgments,
    objective_and_gradient,
    select_lambda,
    train,
    tune_model,
)

__version__ = "0.1.0"
