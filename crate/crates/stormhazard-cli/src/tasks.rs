//! Argument structures shared between the command line and the serialized
//! run configuration.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use stormhazard::StrengthKind;

/// A resolved, replayable run: the subcommand plus everything it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Task {
    Decluster(DeclusterArgs),
    Fit(FitArgs),
    Intensity(IntensityArgs),
    Validate(ValidateArgs),
    Predict(PredictArgs),
    Simulate(SimulateArgs),
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Level,
    Gradient,
}

impl From<Strength> for StrengthKind {
    fn from(s: Strength) -> StrengthKind {
        match s {
            Strength::Level => StrengthKind::Level,
            Strength::Gradient => StrengthKind::Gradient,
        }
    }
}

/// Input files common to the estimation commands.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InputArgs {
    /// ap series CSV (`timestamp,ap`).
    #[arg(long)]
    pub ap: PathBuf,
    /// Cycle table CSV (`cycle,start,end,ssn_max`).
    #[arg(long)]
    pub cycles: PathBuf,
    /// Keep out-of-scale values with a warning instead of failing.
    #[arg(long, default_value_t = false)]
    pub lenient: bool,
}

/// Declustering parameters common to the estimation commands.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CatalogArgs {
    /// Threshold above which a storm begins (a legal ap value in level
    /// mode; 35 is the usual gradient choice).
    #[arg(long, default_value_t = 111)]
    pub low_level: i32,
    /// Below-threshold observations separating independent events.
    #[arg(long, default_value_t = 8)]
    pub run_length: u32,
    /// Storm strength definition.
    #[arg(long, value_enum, default_value_t = Strength::Level)]
    pub strength: Strength,
    /// Extreme level extrapolated to (default 400 in level mode, 100 in
    /// gradient mode).
    #[arg(long)]
    pub extreme_level: Option<i32>,
}

impl CatalogArgs {
    pub fn extreme(&self) -> i32 {
        self.extreme_level.unwrap_or(match self.strength {
            Strength::Level => 400,
            Strength::Gradient => 100,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DeclusterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub catalog: CatalogArgs,
    /// Also write a per-level frequency summary to this file name.
    #[arg(long)]
    pub frequency_table: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub catalog: CatalogArgs,
    /// Output file name; `-` writes the report to standard output.
    #[arg(long, default_value = "fit.json")]
    pub out: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    /// Fixed bandwidth, or `auto` for cross-validation.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    /// Evaluation grid size over the warped interval.
    #[arg(long, default_value_t = 512)]
    pub grid_size: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IntensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Low level(s) to run; repeat the flag for a stability sweep.
    #[arg(long = "low-level", default_values_t = vec![111])]
    pub low_levels: Vec<i32>,
    #[arg(long, default_value_t = 8)]
    pub run_length: u32,
    #[arg(long, value_enum, default_value_t = Strength::Level)]
    pub strength: Strength,
    #[arg(long)]
    pub extreme_level: Option<i32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub catalog: CatalogArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    /// Intensity threshold(s) splitting the warped interval; repeatable.
    /// Defaults to the empirical extreme frequency.
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub catalog: CatalogArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    /// Start date of the predicted cycle (ISO-8601).
    #[arg(long)]
    pub start: String,
    /// Assumed duration of the predicted cycle in years.
    #[arg(long, default_value_t = 11.08)]
    pub duration_years: f64,
    /// Predicted peak monthly smoothed sunspot number.
    #[arg(long)]
    pub ssn_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    /// Storm catalog CSV with warped dates mapped onto the cycle calendar.
    Events,
    /// Full painted 3-hourly series.
    Series,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Activity effect of the generating model.
    #[arg(long, default_value_t = 0.006)]
    pub beta: f64,
    /// Constant base intensity over the warped interval.
    #[arg(long, default_value_t = 9.0)]
    pub intensity: f64,
    /// Seed; falls back to `STORMHAZARD_SEED`, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cycle table CSV; a built-in seven-cycle table is used when omitted.
    #[arg(long)]
    pub cycles: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Emit::Events)]
    pub emit: Emit,
    /// Strength recorded for planted storms (and painted peak level).
    #[arg(long, default_value_t = 400)]
    pub peak_level: i32,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub catalog: CatalogArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    /// Chi-square threshold(s); defaults to the empirical extreme frequency.
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
}
