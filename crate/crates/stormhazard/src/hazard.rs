//! The proportional-hazard model on the warped cycle clock.
//!
//! Each cycle is linearly mapped onto `[-0.5, 0.5]` (start, end; 0 is the
//! middle of the cycle). Storm counts per cycle follow
//!
//! ```text
//! N_j ~ Poisson( alpha * D_j * exp(beta * X_j) ),   alpha = integral of lambda0
//! ```
//!
//! The per-cycle totals are sufficient for `beta`: the within-cycle placement
//! of storms enters the likelihood only through `N_j`. Maximizing the Poisson
//! log-likelihood in `(alpha, beta)` and substituting the closed-form `alpha`
//! leaves one implicit equation in `beta`,
//!
//! ```text
//! sum_j D_j X_j e^{beta X_j} * sum_j N_j  =  sum_j D_j e^{beta X_j} * sum_j N_j X_j
//! ```
//!
//! solved here by the secant method. The Fisher information at the optimum
//! provides the confidence interval for `beta`; a likelihood-ratio test
//! against `beta = 0` measures the significance of the activity effect.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::decluster::Storm;
use crate::error::{Error, Result};
use crate::ingest::CycleRecord;
use crate::time;

/// 95% two-sided normal quantile used for every confidence interval.
pub const Z_95: f64 = 1.96;

/// A storm with its warped position in its cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedStorm {
    pub storm: Storm,
    /// Position in `[-0.5, 0.5]`: -0.5 the cycle start, 0.5 its end.
    pub t: f64,
}

/// Map a storm date onto the warped cycle clock.
pub fn warp(storm: &Storm, cycle: &CycleRecord) -> Result<WarpedStorm> {
    if storm.date < cycle.start || storm.date > cycle.end {
        return Err(Error::DateOutsideCycle {
            date: time::format_instant(storm.date),
            cycle: cycle.index,
        });
    }
    let t = time::years_between(cycle.start, storm.date) / cycle.duration_years - 0.5;
    Ok(WarpedStorm {
        storm: storm.clone(),
        t,
    })
}

/// Warp a whole catalog against its cycle table.
pub fn warp_catalog(storms: &[Storm], cycles: &[CycleRecord]) -> Result<Vec<WarpedStorm>> {
    storms
        .iter()
        .map(|s| {
            let cycle = cycles
                .iter()
                .find(|c| c.index == s.cycle)
                .ok_or(Error::Cycles(format!("storm references unknown cycle {}", s.cycle)))?;
            warp(s, cycle)
        })
        .collect()
}

/// Per-cycle event totals with the cycle design (duration, covariate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub rows: Vec<CycleCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCount {
    pub cycle: u32,
    pub events: u64,
    pub duration_years: f64,
    pub covariate: f64,
}

impl CycleCounts {
    pub fn total_events(&self) -> u64 {
        self.rows.iter().map(|r| r.events).sum()
    }

    /// `sum_j D_j exp(beta X_j)`.
    pub fn weighted_exposure(&self, beta: f64) -> f64 {
        self.rows
            .iter()
            .map(|r| r.duration_years * (beta * r.covariate).exp())
            .sum()
    }

    /// Fix `beta`, yielding the exposures `Q_j = D_j exp(beta X_j)` the
    /// kernel estimator normalizes by.
    pub fn with_beta(&self, beta: f64) -> CycleExposures {
        let q: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.duration_years * (beta * r.covariate).exp())
            .collect();
        let sum_q = q.iter().sum();
        CycleExposures { beta, q, sum_q }
    }
}

/// Exposures `Q_j = D_j exp(beta X_j)` at a fixed `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleExposures {
    pub beta: f64,
    pub q: Vec<f64>,
    pub sum_q: f64,
}

/// Count warped storms per cycle and pair the totals with the cycle design.
pub fn count_by_cycle(storms: &[WarpedStorm], cycles: &[CycleRecord]) -> CycleCounts {
    let rows = cycles
        .iter()
        .map(|c| CycleCount {
            cycle: c.index,
            events: storms.iter().filter(|s| s.storm.cycle == c.index).count() as u64,
            duration_years: c.duration_years,
            covariate: c.covariate,
        })
        .collect();
    CycleCounts { rows }
}

/// Result of the maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardFit {
    pub beta_hat: f64,
    /// `integral of lambda0 over [-0.5, 0.5]` at the optimum.
    pub alpha_hat: f64,
    /// 95% confidence interval for `beta`, symmetric about `beta_hat`.
    pub beta_ci: (f64, f64),
    /// Fisher information in `(alpha, beta)` at the optimum.
    pub fisher: [[f64; 2]; 2],
    /// Likelihood-ratio test of `beta = 0`, chi-square with one degree of
    /// freedom.
    pub lrt_pvalue: f64,
    pub converged: bool,
    /// Largest normalized score-equation residual at the optimum.
    pub residual: f64,
}

/// Poisson log-likelihood of the per-cycle totals at `(alpha, beta)`.
fn log_likelihood(counts: &CycleCounts, alpha: f64, beta: f64) -> f64 {
    counts
        .rows
        .iter()
        .map(|r| {
            let mean = alpha * r.duration_years * (beta * r.covariate).exp();
            let events = r.events as f64;
            -mean + if r.events > 0 { events * mean.ln() } else { 0.0 }
        })
        .sum()
}

/// Profile score in `beta` (alpha substituted by its closed form):
/// `sum N_j X_j - sum N_j * weighted mean of X under D_j e^{beta X_j}`.
fn profile_score(counts: &CycleCounts, beta: f64) -> f64 {
    let total: f64 = counts.total_events() as f64;
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut snx = 0.0;
    for r in &counts.rows {
        let w = r.duration_years * (beta * r.covariate).exp();
        sw += w;
        swx += w * r.covariate;
        snx += r.events as f64 * r.covariate;
    }
    snx - total * swx / sw
}

fn covariate_sd(counts: &CycleCounts) -> f64 {
    let n = counts.rows.len() as f64;
    let mean = counts.rows.iter().map(|r| r.covariate).sum::<f64>() / n;
    (counts
        .rows
        .iter()
        .map(|r| (r.covariate - mean).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Fit `beta` by maximum likelihood.
///
/// The secant iteration starts from `beta = 0` and `beta = 1e-3` and stops
/// when the profile score, normalized by `sum N_j * sd(X)`, falls below
/// `tol`. Fails on a degenerate covariate (all `X_j` equal), an empty
/// catalog, or non-convergence within `max_iter`.
pub fn fit_beta(counts: &CycleCounts, tol: f64, max_iter: u32) -> Result<HazardFit> {
    let total = counts.total_events();
    if total == 0 {
        return Err(Error::EmptyCatalog("no events to fit".into()));
    }
    let sd = covariate_sd(counts);
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::DegenerateCovariate);
    }
    let scale = total as f64 * sd;

    let mut b0 = 0.0;
    let mut b1 = 1e-3;
    let mut f0 = profile_score(counts, b0);
    let mut f1 = profile_score(counts, b1);
    let mut best = if f0.abs() <= f1.abs() { (b0, f0) } else { (b1, f1) };
    let mut iterations = 0;
    while best.1.abs() / scale >= tol {
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::NonConvergence {
                iterations: max_iter,
                residual: best.1.abs() / scale,
            });
        }
        if f1 == f0 {
            // Flat secant: the score is monotone, so this only happens at
            // floating-point resolution. Accept the better endpoint.
            break;
        }
        let b2 = b1 - f1 * (b1 - b0) / (f1 - f0);
        if !b2.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual: best.1.abs() / scale,
            });
        }
        let f2 = profile_score(counts, b2);
        b0 = b1;
        f0 = f1;
        b1 = b2;
        f1 = f2;
        if f2.abs() < best.1.abs() {
            best = (b2, f2);
        }
        if b1 == b0 {
            break;
        }
    }
    let (beta_hat, score_beta) = best;
    let residual_beta = score_beta.abs() / scale;
    let converged = residual_beta < tol;

    let exposure = counts.weighted_exposure(beta_hat);
    let alpha_hat = total as f64 / exposure;
    // alpha score: total/alpha - sum D e^{beta X}; relative to total.
    let residual_alpha = (total as f64 / alpha_hat - exposure).abs() * alpha_hat / total as f64;
    let residual = residual_beta.max(residual_alpha);

    let mut swx = 0.0;
    let mut swxx = 0.0;
    for r in &counts.rows {
        let w = r.duration_years * (beta_hat * r.covariate).exp();
        swx += w * r.covariate;
        swxx += w * r.covariate * r.covariate;
    }
    let fisher = [
        [exposure / alpha_hat, swx],
        [swx, alpha_hat * swxx],
    ];
    let det = fisher[0][0] * fisher[1][1] - fisher[0][1] * fisher[1][0];
    if det.is_nan() || det <= 0.0 {
        return Err(Error::DegenerateCovariate);
    }
    let var_beta = fisher[0][0] / det;
    let half = Z_95 * var_beta.sqrt();

    let alpha_null = total as f64 / counts.weighted_exposure(0.0);
    let stat =
        (2.0 * (log_likelihood(counts, alpha_hat, beta_hat) - log_likelihood(counts, alpha_null, 0.0)))
            .max(0.0);
    let lrt_pvalue = ChiSquared::new(1.0).expect("df = 1").sf(stat);

    Ok(HazardFit {
        beta_hat,
        alpha_hat,
        beta_ci: (beta_hat - half, beta_hat + half),
        fisher,
        lrt_pvalue,
        converged,
        residual,
    })
}

/// Empirical fraction of catalog storms reaching the extreme level, with its
/// binomial (Wald) 95% confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P400Estimate {
    pub p_hat: f64,
    /// Catalog size (storms at or above the low level).
    pub m: u64,
    /// Wald interval clipped to `[0, 1]`.
    pub ci: (f64, f64),
}

/// Estimate the probability that a catalog storm reaches `extreme_level`.
pub fn estimate_p400(storms: &[Storm], extreme_level: i32) -> Result<P400Estimate> {
    if storms.is_empty() {
        return Err(Error::EmptyCatalog("cannot estimate an extreme fraction".into()));
    }
    let m = storms.len() as u64;
    let extreme = storms.iter().filter(|s| s.strength >= extreme_level).count() as f64;
    let p_hat = extreme / m as f64;
    let half = Z_95 * (p_hat * (1.0 - p_hat) / m as f64).sqrt();
    Ok(P400Estimate {
        p_hat,
        m,
        ci: ((p_hat - half).max(0.0), (p_hat + half).min(1.0)),
    })
}

/// Flat key-value fit report, the document emitted by the fitting pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub beta_hat: f64,
    pub beta_ci_low: f64,
    pub beta_ci_high: f64,
    pub alpha_hat: f64,
    pub lrt_pvalue: f64,
    pub p400_hat: f64,
    pub p400_ci_low: f64,
    pub p400_ci_high: f64,
    pub m: u64,
    pub converged: bool,
    pub residual: f64,
}

impl FitReport {
    pub fn new(fit: &HazardFit, p400: &P400Estimate) -> Self {
        FitReport {
            beta_hat: fit.beta_hat,
            beta_ci_low: fit.beta_ci.0,
            beta_ci_high: fit.beta_ci.1,
            alpha_hat: fit.alpha_hat,
            lrt_pvalue: fit.lrt_pvalue,
            p400_hat: p400.p_hat,
            p400_ci_low: p400.ci.0,
            p400_ci_high: p400.ci.1,
            m: p400.m,
            converged: fit.converged,
            residual: fit.residual,
        }
    }
}

/// Whether two count reductions produce bit-identical `beta` estimates.
///
/// Storm placements within a cycle do not enter the per-cycle totals, so any
/// two catalogs with the same `N_j` fit identically; this helper makes that
/// sufficiency argument executable.
pub fn sufficiency_check(counts_a: &CycleCounts, counts_b: &CycleCounts) -> Result<bool> {
    let a = fit_beta(counts_a, 1e-10, 64)?;
    let b = fit_beta(counts_b, 1e-10, 64)?;
    Ok(a.beta_hat.to_bits() == b.beta_hat.to_bits())
}
