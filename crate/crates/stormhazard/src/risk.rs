//! Extreme-level extrapolation, validation and forward prediction.
//!
//! Extreme storms are too rare to model directly, so the intensity fitted on
//! all high-level storms is extrapolated by the extreme fraction estimate:
//! the extrapolated curve is the corrected per-year base intensity times
//! `p400_hat`, with a band combining both interval endpoints. The
//! extrapolation rests on the assumption that the level a high storm reaches
//! does not depend on its position in the cycle, checked a posteriori by a
//! chi-square independence test on a high/low-intensity partition of the
//! warped interval.

use std::io::Write;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::decluster::Storm;
use crate::error::{Diagnostic, Error, Result, WithWarnings};
use crate::hazard::{HazardFit, P400Estimate, WarpedStorm};
use crate::kernel::{CurveUnit, IntensityCurve};
use crate::time;

/// The extrapolated extreme-level intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    /// Corrected per-year base intensity the extrapolation started from.
    pub base: IntensityCurve,
    /// `base * p400_hat`, band endpoints multiplied by the `p400` interval
    /// endpoints.
    pub curve: IntensityCurve,
    pub p400: P400Estimate,
    /// Observed extreme storms per covered cycle-year; the horizontal
    /// reference line in intensity plots.
    pub empirical_frequency: f64,
}

/// Extrapolate a corrected per-year base curve to the extreme level.
pub fn extrapolate(
    base: &IntensityCurve,
    p400: &P400Estimate,
    extreme_count: u64,
    cycle_years: f64,
) -> Result<RiskCurve> {
    if base.unit != CurveUnit::PerYear {
        return Err(Error::Config("extrapolation needs a per-year base curve".into()));
    }
    if !base.corrected {
        return Err(Error::Config(
            "extrapolation needs the ongoing-storm corrected curve".into(),
        ));
    }
    let curve = IntensityCurve {
        grid: base.grid.clone(),
        values: base.values.iter().map(|v| v * p400.p_hat).collect(),
        ci_low: base.ci_low.iter().map(|v| v * p400.ci.0).collect(),
        ci_high: base.ci_high.iter().map(|v| v * p400.ci.1).collect(),
        ..base.clone()
    };
    Ok(RiskCurve {
        base: base.clone(),
        curve,
        p400: p400.clone(),
        empirical_frequency: extreme_count as f64 / cycle_years,
    })
}

/// Relative risk `exp(beta_hat * x)` of a cycle with centered activity `x`
/// against the mean-activity cycle.
pub fn relative_risk(fit: &HazardFit, x: f64) -> f64 {
    (fit.beta_hat * x).exp()
}

/// Pearson chi-square report for the level-versus-position independence
/// check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub threshold: f64,
    /// Rows: high-intensity region, low-intensity region; columns: extreme
    /// storms, non-extreme storms.
    pub table: [[u64; 2]; 2],
    pub statistic: f64,
    pub pvalue: f64,
}

/// Pearson statistic of a 2x2 table, one degree of freedom, no continuity
/// correction. Warns when an expected cell count falls below 5.
pub fn chi_square_2x2(table: [[u64; 2]; 2]) -> Result<WithWarnings<(f64, f64)>> {
    let row: [f64; 2] = [
        (table[0][0] + table[0][1]) as f64,
        (table[1][0] + table[1][1]) as f64,
    ];
    let col: [f64; 2] = [
        (table[0][0] + table[1][0]) as f64,
        (table[0][1] + table[1][1]) as f64,
    ];
    let n = row[0] + row[1];
    if row.contains(&0.0) || col.contains(&0.0) {
        return Err(Error::EmptyRegion("a margin of the 2x2 table is empty".into()));
    }
    let mut statistic = 0.0;
    let mut min_expected = f64::INFINITY;
    for (i, r) in row.iter().enumerate() {
        for (j, c) in col.iter().enumerate() {
            let expected = r * c / n;
            min_expected = min_expected.min(expected);
            let diff = table[i][j] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let pvalue = ChiSquared::new(1.0).expect("df = 1").sf(statistic);
    let mut warnings = Vec::new();
    if min_expected < 5.0 {
        warnings.push(Diagnostic::warning(
            "chi-square",
            None,
            format!("smallest expected cell count {min_expected:.2} is below 5"),
        ));
    }
    Ok(WithWarnings::new((statistic, pvalue), warnings))
}

/// Test whether reaching the extreme level is independent of cycle position.
///
/// The warped interval is split into the regions where `curve` is at least /
/// below `threshold` (a per-year intensity); storms are cross-classified by
/// region and by reaching `extreme_level`.
pub fn chi_square_independence(
    storms: &[WarpedStorm],
    curve: &IntensityCurve,
    threshold: f64,
    extreme_level: i32,
) -> Result<WithWarnings<ChiSquareReport>> {
    let mut table = [[0u64; 2]; 2];
    for s in storms {
        let region = if curve.value_at(s.t) >= threshold { 0 } else { 1 };
        let kind = if s.storm.strength >= extreme_level { 0 } else { 1 };
        table[region][kind] += 1;
    }
    if table[0][0] + table[0][1] == 0 {
        return Err(Error::EmptyRegion(format!(
            "no storms in the high-intensity region (threshold {threshold})"
        )));
    }
    if table[1][0] + table[1][1] == 0 {
        return Err(Error::EmptyRegion(format!(
            "no storms in the low-intensity region (threshold {threshold})"
        )));
    }
    let (value, warnings) = chi_square_2x2(table)?.into_parts();
    Ok(WithWarnings::new(
        ChiSquareReport {
            threshold,
            table,
            statistic: value.0,
            pvalue: value.1,
        },
        warnings,
    ))
}

/// One row of the per-level frequency summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub level: i32,
    pub count: u64,
    /// Fraction of observations hosting a storm of this level.
    pub per_observation: f64,
    /// Storms of this level per (365-day) year.
    pub per_year: f64,
}

/// Summarize a level-mode catalog by storm level.
pub fn frequency_table(storms: &[Storm], span_years: f64, obs_count: u64) -> Vec<FrequencyRow> {
    let mut levels: Vec<i32> = storms.iter().map(|s| s.strength).collect();
    levels.sort_unstable();
    levels.dedup();
    levels
        .into_iter()
        .map(|level| {
            let count = storms.iter().filter(|s| s.strength == level).count() as u64;
            FrequencyRow {
                level,
                count,
                per_observation: count as f64 / obs_count as f64,
                per_year: count as f64 / span_years,
            }
        })
        .collect()
}

/// A forward prediction for one cycle on calendar dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclePrediction {
    pub start: DateTime<Utc>,
    pub predicted_end: DateTime<Utc>,
    pub predicted_ssn_max: f64,
    /// Centered covariate of the predicted cycle.
    pub covariate: f64,
    pub points: Vec<PredictionPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionPoint {
    pub date: DateTime<Utc>,
    pub intensity: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Map the extrapolated intensity onto a future cycle's calendar.
///
/// The grid is pushed through the inverse warp of the new cycle and every
/// value is scaled by the relative risk `exp(beta_hat * X)` of its predicted
/// activity.
pub fn predict_cycle(
    fit: &HazardFit,
    risk: &RiskCurve,
    start: DateTime<Utc>,
    duration_years: f64,
    ssn_max: f64,
    centering: f64,
) -> Result<CyclePrediction> {
    if !fit.converged {
        return Err(Error::Config("prediction needs a converged fit".into()));
    }
    if duration_years.is_nan() || duration_years <= 0.0 {
        return Err(Error::Config("prediction needs a positive duration".into()));
    }
    let covariate = ssn_max - centering;
    let scale = relative_risk(fit, covariate);
    let curve = &risk.curve;
    let points = curve
        .grid
        .iter()
        .enumerate()
        .map(|(i, &t)| PredictionPoint {
            date: time::add_years(start, (t + 0.5) * duration_years),
            intensity: curve.values[i] * scale,
            ci_low: curve.ci_low[i] * scale,
            ci_high: curve.ci_high[i] * scale,
        })
        .collect();
    Ok(CyclePrediction {
        start,
        predicted_end: time::add_years(start, duration_years),
        predicted_ssn_max: ssn_max,
        covariate,
        points,
    })
}

/// Sidecar metadata for the extrapolated curve CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskMeta {
    pub p400: f64,
    pub empirical_frequency: f64,
    pub low_level: i32,
}

/// Write the extrapolated curve as `t,intensity,ci_low,ci_high`.
pub fn write_risk_curve<W: Write>(mut w: W, risk: &RiskCurve) -> Result<()> {
    writeln!(w, "t,intensity,ci_low,ci_high")?;
    let c = &risk.curve;
    for i in 0..c.grid.len() {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            c.grid[i], c.values[i], c.ci_low[i], c.ci_high[i]
        )?;
    }
    Ok(())
}

/// Write a prediction as `date,intensity,ci_low,ci_high`.
pub fn write_prediction<W: Write>(mut w: W, prediction: &CyclePrediction) -> Result<()> {
    writeln!(w, "date,intensity,ci_low,ci_high")?;
    for p in &prediction.points {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            time::format_instant(p.date),
            p.intensity,
            p.ci_low,
            p.ci_high
        )?;
    }
    Ok(())
}

/// Write the per-level frequency summary as CSV.
pub fn write_frequency_table<W: Write>(mut w: W, rows: &[FrequencyRow]) -> Result<()> {
    writeln!(w, "level,count,per_observation,per_year")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e}",
            r.level, r.count, r.per_observation, r.per_year
        )?;
    }
    Ok(())
}
