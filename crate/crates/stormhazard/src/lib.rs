//! Occurrence-intensity estimation for extreme geomagnetic storms.
//!
//! `stormhazard` estimates how often extreme geomagnetic storms occur from a
//! 3-hourly planetary activity index (the ap index). The index series is
//! reduced to a storm catalog by runs declustering, storms are mapped onto a
//! common cycle clock, and storm occurrence within a solar cycle is modeled as
//! a non-homogeneous Poisson process with a proportional-hazard structure:
//!
//! ```text
//! lambda_j(t) = lambda0(t) * D_j * exp(beta * X_j),   t in [-0.5, 0.5]
//! ```
//!
//! where `D_j` is the duration of cycle `j` in years, `X_j` its centered peak
//! solar activity, `beta` the activity effect and `lambda0` a shared base
//! intensity over the warped cycle clock. The crate provides:
//!
//! - [`ingest`](mod@ingest): parsing and validation of the index series and cycle table;
//! - [`decluster`](mod@decluster): runs declustering into a storm catalog (level or
//!   gradient storm strength);
//! - [`hazard`](mod@hazard): time warping, the per-cycle Poisson reduction and the
//!   maximum-likelihood estimator of `beta` with Fisher confidence interval
//!   and likelihood-ratio test, plus the extreme-level fraction estimate;
//! - [`kernel`](mod@kernel): periodized Gaussian-kernel estimation of `lambda0` with
//!   cross-validated bandwidth, pointwise confidence band and the
//!   ongoing-storm correction;
//! - [`risk`](mod@risk): extrapolation to the extreme level, relative risks, the
//!   chi-square independence check, frequency summaries and forward
//!   prediction for a new cycle;
//! - [`simulate`](mod@simulate): model-faithful synthetic data generation used as the
//!   independent oracle in the test suite.
//!
//! All estimation routines are pure functions over immutable inputs and are
//! deterministic; simulation is deterministic given a seed.

pub mod decluster;
pub mod error;
pub mod hazard;
pub mod ingest;
pub mod kernel;
pub mod risk;
pub mod simulate;
pub mod time;

pub use decluster::{decluster, gradient_series, DeclusterConfig, Storm, StrengthKind};
pub use error::{Diagnostic, Error, Result, Severity, WithWarnings};
pub use hazard::{
    count_by_cycle, estimate_p400, fit_beta, warp, CycleCounts, HazardFit, P400Estimate,
    WarpedStorm,
};
pub use ingest::{
    center_covariates, parse_ap_series, parse_cycles, ApSeries, CycleRecord, Dataset, ParseMode,
};
pub use kernel::{
    cv_bandwidth, estimate_lambda0, ongoing_correction, to_per_year, Bandwidth, CurveUnit,
    IntensityCurve, KernelConfig,
};
pub use risk::{
    chi_square_independence, extrapolate, frequency_table, predict_cycle, relative_risk,
    ChiSquareReport, CyclePrediction, FrequencyRow, RiskCurve,
};
pub use simulate::{simulate_events, simulate_series, ClusterProfile, Lambda0, SimCycle, SimSpec};
