//! Linking human reaction times to surprisal: the RT regression, predicted
//! and observed slowdowns, residual analyses and provider comparisons.

mod compare;
mod fit;
mod residuals;
mod slowdown;
mod sweep;

pub use compare::{compare_providers, lmaze_gmaze_contrast, write_comparisons, PairwiseComparison};
pub use fit::{fit_rt_model, predicted_slowdown, FitOptions, LinearFit, RegionScope, TrialFilter};
pub use residuals::{
    read_residuals, residual_analysis, write_residual_summary, write_residuals, RegionType, ResidualRecord, ResidualSummary,
};
pub use slowdown::{
    observed_slowdown, read_slowdown_reports, slowdown_reports, write_slowdown_plot_data, write_slowdown_reports,
    ObservedSlowdown, ProviderPrediction, SlowdownOptions, SlowdownReport,
};
pub use sweep::{parse_scalar_grid, read_sweep, scalar_sweep, within_ci, write_sweep, SweepCurve};
