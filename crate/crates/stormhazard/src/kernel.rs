//! Kernel estimation of the base intensity `lambda0` on the warped clock.
//!
//! The estimator convolves the pooled warped event times with a Gaussian
//! kernel of bandwidth `h` and normalizes by the total exposure:
//!
//! ```text
//! lambda0_hat(t) = K * sum_i phi_per(t - t_i),    K = 1 / sum_j Q_j
//! ```
//!
//! with `Q_j = D_j exp(beta X_j)`. Edge effects are avoided by periodizing
//! the kernel on the unit circle (events replicated at `t +/- 1`), which
//! keeps the kernel mass exact: the estimate integrates to
//! `(#events) / sum Q_j` for every bandwidth and is exactly equal at the two
//! endpoints of the warped interval.
//!
//! The pointwise band uses the small-`h` variance approximation
//! `Var lambda0_hat(t) ~ K * lambda0(t) / (2 sqrt(pi) h)`; the bandwidth is
//! selected by leave-one-out least-squares cross-validation adapted to the
//! periodic intensity.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::{CycleExposures, WarpedStorm, Z_95};

/// Unit of an intensity curve's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveUnit {
    /// Events per unit of warped time, per cycle at mean activity.
    Warped,
    /// Events per calendar year at a given activity level.
    PerYear,
}

/// Bandwidth choice: fixed or cross-validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

/// Cross-validation scheme for the bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvFolds {
    LeaveOneOut,
    /// Events are dealt round-robin into `k` folds.
    KFold(u32),
}

/// Kernel estimation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
    /// Evaluation grid size over `[-0.5, 0.5]`, endpoints included.
    pub grid_size: usize,
    pub cv_folds: CvFolds,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            bandwidth: Bandwidth::Auto,
            grid_size: 512,
            cv_folds: CvFolds::LeaveOneOut,
        }
    }
}

/// Default cross-validation candidate grid: 40 log-spaced bandwidths in
/// `[0.01, 0.15]`.
pub fn default_bandwidth_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.01f64, 0.15f64, 40);
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The estimated base intensity on its evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub bandwidth: f64,
    /// The normalization `K = 1 / sum_j Q_j`.
    pub normalization: f64,
    /// Whether the ongoing-storm correction has been applied.
    pub corrected: bool,
    pub unit: CurveUnit,
}

impl IntensityCurve {
    /// Trapezoidal integral of the curve over its grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    /// Linear interpolation of the curve at `t` (clamped to the grid span).
    pub fn value_at(&self, t: f64) -> f64 {
        let first = *self.grid.first().expect("nonempty grid");
        let last = *self.grid.last().expect("nonempty grid");
        if t <= first {
            return self.values[0];
        }
        if t >= last {
            return *self.values.last().unwrap();
        }
        let step = (last - first) / (self.grid.len() - 1) as f64;
        let pos = (t - first) / step;
        let i = (pos.floor() as usize).min(self.grid.len() - 2);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Scale values and band by a positive factor.
    fn scaled(&self, factor: f64) -> IntensityCurve {
        IntensityCurve {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            ci_low: self.ci_low.iter().map(|v| v * factor).collect(),
            ci_high: self.ci_high.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| (g[1] - g[0]) * (v[0] + v[1]) / 2.0)
        .sum()
}

/// Wrap a time difference onto the circle, canonically into `[-0.5, 0.5)`.
fn wrap(d: f64) -> f64 {
    let mut w = d - d.round();
    if w >= 0.5 {
        w -= 1.0;
    }
    w
}

/// Periodized Gaussian kernel. Replicas at `+/- 1` are exact to better than
/// 1e-12 for `h <= 0.15`; wider kernels add replicas as needed.
fn phi_per(d: f64, h: f64) -> f64 {
    let w = wrap(d);
    let reach = if h <= 0.15 { 1 } else { (12.0 * h).ceil() as i32 };
    let norm = 1.0 / (h * (2.0 * PI).sqrt());
    let mut sum = 0.0;
    for m in -reach..=reach {
        let z = (w + m as f64) / h;
        sum += (-0.5 * z * z).exp();
    }
    sum * norm
}

fn validate_bandwidth(h: f64) -> Result<()> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Config(format!("bandwidth {h} must be positive")));
    }
    if h > 0.5 {
        return Err(Error::Config(format!(
            "bandwidth {h} exceeds the half-period 0.5"
        )));
    }
    Ok(())
}

/// Estimate the base intensity from warped storms at fixed exposures.
///
/// `Bandwidth::Auto` selects `h` by cross-validation over
/// [`default_bandwidth_grid`] first.
pub fn estimate_lambda0(
    storms: &[WarpedStorm],
    exposures: &CycleExposures,
    config: &KernelConfig,
) -> Result<IntensityCurve> {
    if storms.is_empty() {
        return Err(Error::EmptyCatalog("kernel estimation needs events".into()));
    }
    if config.grid_size < 64 {
        return Err(Error::Config("grid size must be at least 64".into()));
    }
    let h = match config.bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Auto => cv_bandwidth_with(
            storms,
            exposures,
            &default_bandwidth_grid(),
            config.cv_folds,
            config.grid_size,
        )?,
    };
    validate_bandwidth(h)?;

    let events: Vec<f64> = storms.iter().map(|s| s.t).collect();
    let k = 1.0 / exposures.sum_q;
    let g = config.grid_size;
    let mut grid = Vec::with_capacity(g);
    let mut values = Vec::with_capacity(g);
    let mut ci_low = Vec::with_capacity(g);
    let mut ci_high = Vec::with_capacity(g);
    let var_factor = k / (2.0 * PI.sqrt() * h);
    for i in 0..g {
        let t = -0.5 + i as f64 / (g - 1) as f64;
        // Folding the grid point itself makes the two endpoints evaluate on
        // bit-identical distances.
        let tf = wrap(t);
        let value = k * events.iter().map(|&e| phi_per(tf - e, h)).sum::<f64>();
        let half = Z_95 * (var_factor * value).sqrt();
        grid.push(t);
        values.push(value);
        ci_low.push((value - half).max(0.0));
        ci_high.push(value + half);
    }
    Ok(IntensityCurve {
        grid,
        values,
        ci_low,
        ci_high,
        bandwidth: h,
        normalization: k,
        corrected: false,
        unit: CurveUnit::Warped,
    })
}

/// Select the bandwidth minimizing the least-squares cross-validation
/// criterion
///
/// ```text
/// CV(h) = integral lambda_hat^2 - (2 / sum Q_j) * sum_i lambda_hat^{(-i)}(t_i)
/// ```
///
/// the second term being the leave-one-out (or leave-fold-out) estimate of
/// the cross moment with the true intensity. Ties break toward the larger
/// bandwidth.
pub fn cv_bandwidth(
    storms: &[WarpedStorm],
    exposures: &CycleExposures,
    candidates: &[f64],
) -> Result<f64> {
    cv_bandwidth_with(storms, exposures, candidates, CvFolds::LeaveOneOut, 512)
}

/// [`cv_bandwidth`] with an explicit fold scheme and quadrature grid size.
pub fn cv_bandwidth_with(
    storms: &[WarpedStorm],
    exposures: &CycleExposures,
    candidates: &[f64],
    folds: CvFolds,
    grid_size: usize,
) -> Result<f64> {
    if storms.len() < 2 {
        return Err(Error::EmptyCatalog(
            "cross-validation needs at least two events".into(),
        ));
    }
    if candidates.is_empty() {
        return Err(Error::Config("no candidate bandwidths".into()));
    }
    for &h in candidates {
        validate_bandwidth(h)?;
    }
    let events: Vec<f64> = storms.iter().map(|s| s.t).collect();
    let n = events.len();
    let k = 1.0 / exposures.sum_q;
    // Event-to-fold assignment, round-robin over the catalog order.
    let fold_of: Vec<usize> = match folds {
        CvFolds::LeaveOneOut => (0..n).collect(),
        CvFolds::KFold(f) => {
            if f < 2 {
                return Err(Error::Config("k-fold needs k >= 2".into()));
            }
            (0..n).map(|i| i % f as usize).collect()
        }
    };

    let mut best: Option<(f64, f64)> = None;
    for &h in candidates {
        // integral of lambda_hat^2 by the trapezoid rule on the usual grid
        let square_integral = {
            let mut grid = Vec::with_capacity(grid_size);
            let mut sq = Vec::with_capacity(grid_size);
            for i in 0..grid_size {
                let t = -0.5 + i as f64 / (grid_size - 1) as f64;
                let v = k * events.iter().map(|&e| phi_per(t - e, h)).sum::<f64>();
                grid.push(t);
                sq.push(v * v);
            }
            trapezoid(&grid, &sq)
        };
        // leave-out sums: lambda_hat^{(-fold(i))}(t_i)
        let mut loo_sum = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if fold_of[j] != fold_of[i] {
                    s += phi_per(events[i] - events[j], h);
                }
            }
            loo_sum += k * s;
        }
        let cv = square_integral - 2.0 * k * loo_sum;
        match best {
            // `<=` prefers the later (larger) candidate on ties.
            Some((score, _)) if cv > score => {}
            _ => best = Some((cv, h)),
        }
    }
    Ok(best.expect("candidates nonempty").1)
}

/// Apply the ongoing-storm correction.
///
/// The kernel estimate tracks the intensity of storms *beginning* at `t`;
/// storms holding their maximum for consecutive observations make the
/// *ongoing* intensity larger by the factor `1 + staying / count` (29/23 on
/// the historical extreme catalog).
pub fn ongoing_correction(
    curve: &IntensityCurve,
    stats: (u64, u64),
) -> Result<IntensityCurve> {
    let (count_at_extreme, count_staying_twice) = stats;
    if count_at_extreme == 0 {
        return Err(Error::EmptyCatalog(
            "ongoing correction needs at least one extreme storm".into(),
        ));
    }
    let factor = 1.0 + count_staying_twice as f64 / count_at_extreme as f64;
    let mut out = curve.scaled(factor);
    out.corrected = true;
    Ok(out)
}

/// Convert a warped-units curve to a calendar rate (per year) at centered
/// activity `x`.
///
/// The per-year rate at warped time `t` is `lambda0(t) * exp(beta x)`: the
/// cycle-duration factor cancels against the warp Jacobian, so only the
/// relative-risk factor remains.
pub fn to_per_year(curve: &IntensityCurve, x: f64, fit: &crate::hazard::HazardFit) -> IntensityCurve {
    let mut out = curve.scaled((fit.beta_hat * x).exp());
    out.unit = CurveUnit::PerYear;
    out
}

/// Sidecar metadata written next to a curve CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveMeta {
    pub h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub corrected: bool,
    pub unit: CurveUnit,
    pub low_level: i32,
}

/// Write a curve as `t,lambda,ci_low,ci_high` rows (17 significant digits).
pub fn write_curve<W: Write>(mut w: W, curve: &IntensityCurve) -> Result<()> {
    writeln!(w, "t,lambda,ci_low,ci_high")?;
    for i in 0..curve.grid.len() {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            curve.grid[i], curve.values[i], curve.ci_low[i], curve.ci_high[i]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decluster::Storm;
    use crate::hazard::{CycleCount, CycleCounts};
    use crate::time::parse_instant;
    use approx::assert_relative_eq;

    fn warped(ts: &[f64]) -> Vec<WarpedStorm> {
        ts.iter()
            .map(|&t| WarpedStorm {
                storm: Storm {
                    cycle: 1,
                    strength: 132,
                    date: parse_instant("1937-01-01").unwrap(),
                    length: 1,
                    max_multiplicity: 1,
                },
                t,
            })
            .collect()
    }

    fn unit_exposure() -> CycleExposures {
        CycleCounts {
            rows: vec![CycleCount {
                cycle: 1,
                events: 1,
                duration_years: 1.0,
                covariate: 0.0,
            }],
        }
        .with_beta(0.0)
    }

    fn fixed(h: f64) -> KernelConfig {
        KernelConfig {
            bandwidth: Bandwidth::Fixed(h),
            ..KernelConfig::default()
        }
    }

    #[test]
    fn single_event_peak_matches_gaussian_maximum() {
        let config = KernelConfig {
            bandwidth: Bandwidth::Fixed(0.05),
            grid_size: 513, // odd, so t = 0 is a grid point
            ..KernelConfig::default()
        };
        let curve = estimate_lambda0(&warped(&[0.0]), &unit_exposure(), &config).unwrap();
        // 1 / (sqrt(2 pi) * 0.05); periodized tails are negligible at h = 0.05.
        let mid = curve.grid.len() / 2;
        assert!((curve.grid[mid]).abs() < 1e-12, "grid mid {}", curve.grid[mid]);
        assert_relative_eq!(curve.values[mid], 7.978845608028654, max_relative = 1e-9);

        // CI band per the variance approximation, clipped at zero below.
        let half = 1.96 * (curve.values[mid] / (2.0 * PI.sqrt() * 0.05)).sqrt();
        assert_relative_eq!(curve.ci_high[mid], curve.values[mid] + half, max_relative = 1e-12);
        assert!(curve.ci_low.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn mass_is_conserved_for_any_bandwidth() {
        let events = warped(&[-0.41, -0.1, 0.03, 0.2, 0.21, 0.47]);
        for h in [0.01, 0.035, 0.08, 0.15, 0.3] {
            let curve = estimate_lambda0(&events, &unit_exposure(), &fixed(h)).unwrap();
            let expect = events.len() as f64 / 1.0;
            assert_relative_eq!(curve.integral(), expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn endpoints_are_exactly_equal() {
        let events = warped(&[-0.37, 0.11, 0.44]);
        let curve = estimate_lambda0(&events, &unit_exposure(), &fixed(0.06)).unwrap();
        assert_eq!(
            curve.values.first().unwrap().to_bits(),
            curve.values.last().unwrap().to_bits()
        );
    }

    #[test]
    fn estimator_is_linear_in_the_catalog() {
        let a = warped(&[-0.3, -0.1]);
        let b = warped(&[0.2, 0.35, 0.41]);
        let both = warped(&[-0.3, -0.1, 0.2, 0.35, 0.41]);
        let exposures = unit_exposure();
        let ca = estimate_lambda0(&a, &exposures, &fixed(0.05)).unwrap();
        let cb = estimate_lambda0(&b, &exposures, &fixed(0.05)).unwrap();
        let cu = estimate_lambda0(&both, &exposures, &fixed(0.05)).unwrap();
        for i in 0..cu.grid.len() {
            assert_relative_eq!(cu.values[i], ca.values[i] + cb.values[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn correction_factor_is_one_plus_ratio() {
        let curve = estimate_lambda0(&warped(&[0.0, 0.2]), &unit_exposure(), &fixed(0.05)).unwrap();

        let historical = ongoing_correction(&curve, (23, 6)).unwrap();
        assert!(historical.corrected);
        for i in 0..curve.values.len() {
            assert_relative_eq!(
                historical.values[i],
                curve.values[i] * 29.0 / 23.0,
                max_relative = 1e-15
            );
        }

        let unchanged = ongoing_correction(&curve, (10, 0)).unwrap();
        assert_eq!(unchanged.values, curve.values);

        let half_again = ongoing_correction(&curve, (10, 5)).unwrap();
        assert_relative_eq!(half_again.values[10], curve.values[10] * 1.5, max_relative = 1e-15);

        assert!(ongoing_correction(&curve, (0, 0)).is_err());
    }

    #[test]
    fn per_year_conversion_scales_by_relative_risk() {
        let curve = estimate_lambda0(&warped(&[0.1]), &unit_exposure(), &fixed(0.05)).unwrap();
        let fit = crate::hazard::HazardFit {
            beta_hat: 0.0059651,
            alpha_hat: 1.0,
            beta_ci: (0.0, 0.01),
            fisher: [[1.0, 0.0], [0.0, 1.0]],
            lrt_pvalue: 0.0,
            converged: true,
            residual: 0.0,
        };
        let at_mean = to_per_year(&curve, 0.0, &fit);
        assert_eq!(at_mean.values, curve.values);
        assert_eq!(at_mean.unit, CurveUnit::PerYear);

        let high = to_per_year(&curve, 33.3, &fit);
        let ratio = high.values[100] / curve.values[100];
        assert!((ratio - 1.22).abs() < 5e-3, "ratio {ratio}");

        let low = to_per_year(&curve, -33.3, &fit);
        assert_relative_eq!(low.values[100] * ratio, curve.values[100], max_relative = 1e-12);
    }

    #[test]
    fn ci_half_width_shrinks_with_root_exposure() {
        let events = warped(&[-0.2, 0.0, 0.1, 0.3]);
        let single = unit_exposure();
        let doubled = CycleCounts {
            rows: vec![CycleCount {
                cycle: 1,
                events: 4,
                duration_years: 2.0,
                covariate: 0.0,
            }],
        }
        .with_beta(0.0);
        // Duplicate the events so the curve value itself is unchanged.
        let events_doubled = warped(&[-0.2, -0.2, 0.0, 0.0, 0.1, 0.1, 0.3, 0.3]);
        let c1 = estimate_lambda0(&events, &single, &fixed(0.05)).unwrap();
        let c2 = estimate_lambda0(&events_doubled, &doubled, &fixed(0.05)).unwrap();
        let mid = c1.grid.len() / 2;
        assert_relative_eq!(c1.values[mid], c2.values[mid], max_relative = 1e-12);
        let hw1 = c1.ci_high[mid] - c1.values[mid];
        let hw2 = c2.ci_high[mid] - c2.values[mid];
        assert_relative_eq!(hw1 / hw2, 2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn cv_requires_two_events_and_returns_a_candidate() {
        let exposures = unit_exposure();
        assert!(cv_bandwidth(&warped(&[0.0]), &exposures, &[0.05]).is_err());
        let events = warped(&[-0.3, -0.1, 0.0, 0.2, 0.25]);
        let h = cv_bandwidth(&events, &exposures, &default_bandwidth_grid()).unwrap();
        assert!(default_bandwidth_grid().contains(&h));
    }

    #[test]
    fn invalid_bandwidths_rejected() {
        let events = warped(&[0.0, 0.1]);
        let exposures = unit_exposure();
        assert!(estimate_lambda0(&events, &exposures, &fixed(0.0)).is_err());
        assert!(estimate_lambda0(&events, &exposures, &fixed(-1.0)).is_err());
        assert!(estimate_lambda0(&events, &exposures, &fixed(0.6)).is_err());
        assert!(estimate_lambda0(&[], &exposures, &fixed(0.05)).is_err());
    }
}
