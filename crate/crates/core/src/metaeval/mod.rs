//! Agreement statistics between metric scores and human judgments.

mod kendall;
mod krippendorff;
mod permutation;
mod report;

pub use kendall::kendall_tau_b;
pub use krippendorff::{krippendorff_alpha, AnnotationTable, MeasurementLevel};
pub use permutation::{
    exhaustive_pvalue, monte_carlo_pvalue, permutation_pvalue, DEFAULT_ITERATIONS, EXHAUSTIVE_MAX_N,
};
pub use report::{
    aggregate_system_level, at_granularity, correlate, correlation_report, significance_stars,
    CorrelationCell, CorrelationGroup, CorrelationReport, Granularity, GranularityChoice,
    ReportConfig, ScoreMatrix, ScoreRow, AUTO_SYSTEM_MIN,
};
