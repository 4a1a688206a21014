//! Synthetic data generation from known model parameters.
//!
//! Events are drawn per cycle from a non-homogeneous Poisson process with
//! intensity `lambda0(t) * D_j * exp(beta X_j)` on the warped interval by
//! thinning: propose from a homogeneous process at the supremum of
//! `lambda0`, keep each proposal with probability `lambda0(t) / sup`.
//! Thinning needs no quadrature inversion, so tabulated intensities (for
//! instance a previously fitted curve) work directly.
//!
//! Everything is deterministic given the spec seed. The generator is
//! ChaCha8; per-cycle (and per-replicate) streams derive their seeds through
//! [`derive_seed`], a splitmix64 step of `master + (stream + 1) * GOLDEN`,
//! so results reproduce across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::ingest::{ApSeries, CycleRecord};
use crate::time;

/// A base intensity over the warped interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda0 {
    Constant(f64),
    /// Values on a uniform grid over `[-0.5, 0.5]`, endpoints included;
    /// evaluation interpolates linearly and wraps periodically.
    Tabulated(Vec<f64>),
}

impl Lambda0 {
    /// Sample a function onto a 1025-point table.
    pub fn from_fn(f: impl Fn(f64) -> f64) -> Lambda0 {
        let n = 1025;
        Lambda0::Tabulated(
            (0..n)
                .map(|i| f(-0.5 + i as f64 / (n - 1) as f64))
                .collect(),
        )
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Lambda0::Constant(c) => *c,
            Lambda0::Tabulated(values) => {
                let n = values.len();
                let mut u = (t + 0.5).rem_euclid(1.0);
                if !(0.0..1.0).contains(&u) {
                    u = 0.0;
                }
                let pos = u * (n - 1) as f64;
                let i = (pos.floor() as usize).min(n - 2);
                let frac = pos - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    pub fn supremum(&self) -> f64 {
        match self {
            Lambda0::Constant(c) => *c,
            Lambda0::Tabulated(values) => values.iter().cloned().fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Lambda0::Constant(c) => c.is_finite() && *c >= 0.0,
            Lambda0::Tabulated(values) => {
                values.len() >= 2 && values.iter().all(|v| v.is_finite() && *v >= 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("lambda0 must be nonnegative and finite".into()))
        }
    }
}

/// Design of one simulated cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimCycle {
    pub duration_years: f64,
    pub covariate: f64,
}

/// Simulation specification.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub lambda0: Lambda0,
    pub cycles: Vec<SimCycle>,
    pub beta: f64,
    pub seed: u64,
}

/// Derive a stream seed from a master seed (documented splitmix64 rule).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add((stream.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw warped event times per cycle by thinning.
///
/// Cycle `j` uses its own ChaCha8 stream seeded by
/// `derive_seed(spec.seed, j)`, so per-cycle draws are independent and the
/// whole result is reproducible from the spec alone. Event times per cycle
/// are sorted. An identically-zero intensity yields empty cycles.
pub fn simulate_events(spec: &SimSpec) -> Result<Vec<Vec<f64>>> {
    spec.lambda0.validate()?;
    let sup = spec.lambda0.supremum();
    let mut out = Vec::with_capacity(spec.cycles.len());
    for (j, cycle) in spec.cycles.iter().enumerate() {
        if cycle.duration_years.is_nan() || cycle.duration_years <= 0.0 {
            return Err(Error::Config("cycle durations must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, j as u64));
        let rate = sup * cycle.duration_years * (spec.beta * cycle.covariate).exp();
        let mut times = Vec::new();
        if rate > 0.0 {
            let proposals = Poisson::new(rate)
                .map_err(|_| Error::Config(format!("invalid thinning rate {rate}")))?
                .sample(&mut rng) as usize;
            for _ in 0..proposals {
                let t: f64 = rng.gen_range(-0.5..0.5);
                let keep: f64 = rng.gen_range(0.0..1.0);
                if keep * sup <= spec.lambda0.value_at(t) {
                    times.push(t);
                }
            }
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        out.push(times);
    }
    Ok(out)
}

/// Above-threshold cluster template painted around each simulated event.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterProfile {
    /// Quiet-background level of the series.
    pub base_level: i32,
    /// Values leading up to the peak, painted immediately before it.
    pub rise: Vec<i32>,
    pub peak_level: i32,
    /// Consecutive observations held at the peak.
    pub hold: u32,
    /// Values painted immediately after the peak.
    pub fall: Vec<i32>,
}

impl Default for ClusterProfile {
    fn default() -> Self {
        ClusterProfile {
            base_level: 7,
            rise: vec![27, 111],
            peak_level: 400,
            hold: 1,
            fall: vec![154, 48],
        }
    }
}

impl ClusterProfile {
    fn width(&self) -> usize {
        self.rise.len() + self.hold as usize + self.fall.len()
    }
}

/// Paint simulated events onto a 3-hourly grid covering the given cycles.
///
/// Each event becomes one above-threshold cluster per `profile`, its peak on
/// the grid slot nearest the event date; declustering the result with a
/// matching configuration recovers the planted storms (dates to within one
/// step). Events must be sparse enough that painted clusters stay disjoint;
/// overlapping paints are an error.
pub fn simulate_series(
    spec: &SimSpec,
    cycles: &[CycleRecord],
    profile: &ClusterProfile,
) -> Result<ApSeries> {
    if cycles.len() != spec.cycles.len() {
        return Err(Error::Config(
            "calendar cycle table and sim cycles differ in length".into(),
        ));
    }
    let events = simulate_events(spec)?;
    let start = cycles.first().ok_or(Error::Cycles("no cycles".into()))?.start;
    let end = cycles.last().unwrap().end;
    let slots = ((end - start).num_seconds() / time::STEP_SECONDS) as usize;
    let mut values = vec![profile.base_level; slots];
    let mut last_painted: Option<usize> = None;
    let width = profile.width();
    for (cycle, times) in cycles.iter().zip(&events) {
        let cycle_first = ((cycle.start - start).num_seconds() / time::STEP_SECONDS) as usize;
        let cycle_last = ((cycle.end - start).num_seconds() / time::STEP_SECONDS) as usize;
        for &t in times {
            let date = time::add_years(cycle.start, (t + 0.5) * cycle.duration_years);
            let slot = ((date - start).num_seconds() as f64 / time::STEP_SECONDS as f64).round()
                as usize;
            // Keep the full paint inside the cycle.
            let peak = slot
                .max(cycle_first + profile.rise.len())
                .min(cycle_last.saturating_sub(profile.hold as usize + profile.fall.len() + 1));
            let first = peak - profile.rise.len();
            if let Some(last) = last_painted {
                if first <= last {
                    return Err(Error::ClusterOverlap(format!(
                        "cluster at slot {peak} collides with a previous paint (width {width})"
                    )));
                }
            }
            let mut i = first;
            for &v in &profile.rise {
                values[i] = v;
                i += 1;
            }
            for _ in 0..profile.hold {
                values[i] = profile.peak_level;
                i += 1;
            }
            for &v in &profile.fall {
                values[i] = v;
                i += 1;
            }
            last_painted = Some(i - 1);
        }
    }
    ApSeries::new(start, values)
}
