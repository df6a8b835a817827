//! Automatic metrics, agreement statistics and the variant comparison harness.

pub mod harness;
pub mod metrics;
pub mod stats;

pub use harness::{
    holdout_contexts, run_comparison, Backends, ComparisonReport, ContextRanking, EvalContext,
    FailureCounts, HarnessConfig, MetricRecord, VariantSummary,
};
pub use metrics::{
    auto_relatedness, auto_usefulness, auto_validity, FixtureSearch, SearchClient, SearchResult,
};
pub use stats::{cohens_kappa, exact_match_agreement, spearman};
