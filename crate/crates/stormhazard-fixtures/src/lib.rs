//! Deterministic demo dataset for tests, examples and the guide.
//!
//! The generator plants a storm catalog onto a quiet 3-hourly grid spanning
//! 1932-01-01 to 2010-01-01, covering the seven complete solar cycles 17-23.
//! Counts and shapes are calibrated to the published statistics of the
//! historical ap record over those cycles:
//!
//! - per-level storm counts 182/158/103/84/51/57/44/23 for levels 111..400;
//! - the extreme level 400 is reached 29 times raw, 23 times after
//!   declustering, six storms holding the level two consecutive steps;
//! - per-cycle totals consistent with an activity effect near 6e-3 per
//!   sunspot-number unit, and a base intensity concentrated in the second
//!   half of the cycle;
//! - additional fast-rise storms below level 111 so the gradient-strength
//!   variant has its own, slightly different activity effect.
//!
//! Everything is a pure function of the frozen constants below: two runs
//! produce byte-identical files. The real archive can be substituted at
//! any time; see [`historical_inputs`].

use chrono::{DateTime, Utc};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stormhazard::time::{self, parse_instant};
use stormhazard::{ApSeries, CycleRecord, ParseMode};

/// Master seed of the generator.
pub const DEMO_SEED: u64 = 0x5354_4f52_4d48_415a;

/// Cycle table: general-list number, boundaries, peak monthly smoothed
/// sunspot number.
pub const CYCLE_TABLE: [(u32, &str, &str, f64); 7] = [
    (17, "1933-09-01", "1944-02-01", 119.2),
    (18, "1944-02-01", "1954-04-01", 151.8),
    (19, "1954-04-01", "1964-10-01", 201.3),
    (20, "1964-10-01", "1976-06-01", 110.6),
    (21, "1976-06-01", "1986-09-01", 164.5),
    (22, "1986-09-01", "1996-05-01", 158.5),
    (23, "1996-05-01", "2008-12-01", 120.8),
];

/// Storm counts by level (levels at or above 111).
pub const LEVEL_COUNTS: [(i32, u64); 8] = [
    (111, 182),
    (132, 158),
    (154, 103),
    (179, 84),
    (207, 51),
    (236, 57),
    (300, 44),
    (400, 23),
];

/// Storms at or above level 111 per cycle.
pub const STORMS_PER_CYCLE: [u64; 7] = [80, 97, 135, 87, 104, 97, 102];

/// Extra fast-rise storms below level 111 per cycle (gradient catalog only).
pub const EXTRA_STORMS_PER_CYCLE: [u64; 7] = [22, 22, 25, 23, 24, 20, 22];

/// Levels of the extra fast-rise storms.
pub const EXTRA_LEVEL_COUNTS: [(i32, u64); 4] = [(56, 40), (67, 40), (80, 40), (94, 38)];

/// Number of extreme storms holding their maximum two consecutive steps.
pub const EXTREMES_STAYING_TWICE: usize = 6;

const SERIES_START: &str = "1932-01-01T00:00:00Z";
const SERIES_END: &str = "2010-01-01T00:00:00Z";
const BACKGROUND: i32 = 7;
/// Background slots kept between painted clusters; storms stay separate for
/// every run length up to this gap.
const MIN_GAP: usize = 20;

/// The warped-time density of storm dates, common to all cycles: a low first
/// half, a sharp rise past the cycle middle and a secondary late bump.
fn shape(t: f64) -> f64 {
    let vm = |mu: f64, kappa: f64| (kappa * ((2.0 * std::f64::consts::PI * (t - mu)).cos() - 1.0)).exp();
    0.40 + 1.05 * vm(0.18, 7.0) + 0.45 * vm(0.38, 13.0) + 0.16 * vm(-0.28, 11.0)
}

/// Cluster waveform per level: values rising to the peak and falling off it.
/// Rises step by at most one legal level so the one-step gradient stays in a
/// known band per level (extreme gradients only from level 236 up).
fn waveform(level: i32) -> (Vec<i32>, Vec<i32>) {
    match level {
        56 => (vec![], vec![22]),
        67 => (vec![], vec![27]),
        80 => (vec![22], vec![32, 12]),
        94 => (vec![27], vec![39, 15]),
        111 => (vec![27, 56], vec![56, 22]),
        132 => (vec![27, 67], vec![111, 27]),
        154 => (vec![32, 80], vec![111, 48]),
        179 => (vec![39, 94], vec![132, 56, 22]),
        207 => (vec![39, 111], vec![154, 67]),
        236 => (vec![48, 132], vec![179, 80]),
        300 => (vec![56, 154], vec![236, 111, 32]),
        400 => (vec![27, 111, 300], vec![207, 94]),
        other => panic!("no waveform for level {other}"),
    }
}

/// A planted storm before painting.
#[derive(Debug, Clone)]
struct Plant {
    /// Index into [`CYCLE_TABLE`].
    cycle: usize,
    /// Drawn warped time.
    t: f64,
    level: i32,
    hold: u32,
}

/// The generated dataset.
pub struct DemoData {
    pub series: ApSeries,
    /// Cycle records with covariates not yet centered.
    pub cycles: Vec<CycleRecord>,
}

/// Maximally even interleave of a level multiset, largest-remainder style.
fn balanced_sequence(counts: &[(i32, u64)]) -> Vec<i32> {
    let total: u64 = counts.iter().map(|&(_, c)| c).sum();
    let mut placed = vec![0u64; counts.len()];
    let mut out = Vec::with_capacity(total as usize);
    for step in 0..total {
        let mut best = usize::MAX;
        let mut best_score = i128::MIN;
        for (i, &(_, c)) in counts.iter().enumerate() {
            if placed[i] >= c {
                continue;
            }
            let score = c as i128 * (step as i128 + 1) - placed[i] as i128 * total as i128;
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        out.push(counts[best].0);
        placed[best] += 1;
    }
    out
}

/// Inverse-CDF table of [`shape`] for quantile sampling.
fn shape_cdf() -> (Vec<f64>, Vec<f64>) {
    let n = 4096;
    let mut ts = Vec::with_capacity(n + 1);
    let mut cdf = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    let mut prev = shape(-0.5);
    ts.push(-0.5);
    cdf.push(0.0);
    for i in 1..=n {
        let t = -0.5 + i as f64 / n as f64;
        let v = shape(t);
        acc += (v + prev) / 2.0 / n as f64;
        prev = v;
        ts.push(t);
        cdf.push(acc);
    }
    for c in cdf.iter_mut() {
        *c /= acc;
    }
    (cdf, ts)
}

fn sample_times(cdf: &(Vec<f64>, Vec<f64>), n: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (cs, ts) = cdf;
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(0.0..1.0);
            let i = cs.partition_point(|&c| c < u).clamp(1, cs.len() - 1);
            let frac = (u - cs[i - 1]) / (cs[i] - cs[i - 1]);
            ts[i - 1] + frac * (ts[i] - ts[i - 1])
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Build the demo dataset. Deterministic; roughly 228k observations.
pub fn demo_data() -> DemoData {
    let cycles: Vec<CycleRecord> = CYCLE_TABLE
        .iter()
        .map(|&(index, start, end, ssn)| {
            CycleRecord::new(
                index,
                parse_instant(start).unwrap(),
                parse_instant(end).unwrap(),
                ssn,
            )
            .unwrap()
        })
        .collect();

    let cdf = shape_cdf();

    // Storm times at or above level 111, per cycle.
    let mut main_times: Vec<Vec<f64>> = Vec::new();
    for (j, &n) in STORMS_PER_CYCLE.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(10 + j as u64));
        main_times.push(sample_times(&cdf, n, &mut rng));
    }

    // Pool in warped-time order; extreme storms take evenly spaced ranks so
    // the level reached stays independent of cycle position.
    let mut pooled: Vec<(usize, usize, f64)> = Vec::new();
    for (j, times) in main_times.iter().enumerate() {
        for (i, &t) in times.iter().enumerate() {
            pooled.push((j, i, t));
        }
    }
    pooled.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let total: u64 = STORMS_PER_CYCLE.iter().sum();
    let n_extreme = LEVEL_COUNTS.last().unwrap().1;
    let extreme_ranks: Vec<usize> = (0..n_extreme)
        .map(|k| ((k as f64 + 0.5) * total as f64 / n_extreme as f64).floor() as usize)
        .collect();

    let mut level_of = vec![0i32; pooled.len()];
    let mut hold_of = vec![1u32; pooled.len()];
    for (order, &rank) in extreme_ranks.iter().enumerate() {
        level_of[rank] = 400;
        // Six of the 23 hold the maximum twice: 29 raw level-400 readings.
        if order % 4 == 1 && order < 22 {
            hold_of[rank] = 2;
        }
    }
    debug_assert_eq!(hold_of.iter().filter(|&&h| h == 2).count(), EXTREMES_STAYING_TWICE);

    let deck = balanced_sequence(&LEVEL_COUNTS[..LEVEL_COUNTS.len() - 1]);
    let mut deal = deck.into_iter();
    for level in level_of.iter_mut() {
        if *level == 0 {
            *level = deal.next().expect("deck covers all non-extreme storms");
        }
    }

    let mut plants: Vec<Plant> = pooled
        .iter()
        .zip(level_of.iter().zip(&hold_of))
        .map(|(&(cycle, _, t), (&level, &hold))| Plant {
            cycle,
            t,
            level,
            hold,
        })
        .collect();

    // Fast-rise storms below level 111 (gradient catalog only).
    let extra_deck = balanced_sequence(&EXTRA_LEVEL_COUNTS);
    let mut extra_deal = extra_deck.into_iter();
    for (j, &n) in EXTRA_STORMS_PER_CYCLE.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(20 + j as u64));
        for t in sample_times(&cdf, n, &mut rng) {
            plants.push(Plant {
                cycle: j,
                t,
                level: extra_deal.next().expect("extra deck sized to extras"),
                hold: 1,
            });
        }
    }

    // Paint onto the quiet grid.
    let start = parse_instant(SERIES_START).unwrap();
    let end = parse_instant(SERIES_END).unwrap();
    let slots = ((end - start).num_seconds() / time::STEP_SECONDS) as usize;
    let mut values = vec![BACKGROUND; slots];

    let slot_of = |instant: DateTime<Utc>| -> usize {
        ((instant - start).num_seconds() as f64 / time::STEP_SECONDS as f64).round() as usize
    };

    plants.sort_by(|a, b| {
        (a.cycle, a.t)
            .partial_cmp(&(b.cycle, b.t))
            .unwrap()
    });
    let mut painted_end = 0usize;
    for plant in &plants {
        let cycle = &cycles[plant.cycle];
        let (rise, fall) = waveform(plant.level);
        let cycle_first = slot_of(cycle.start);
        let cycle_last = slot_of(cycle.end);
        let desired = slot_of(time::add_years(
            cycle.start,
            (plant.t + 0.5) * cycle.duration_years,
        ));
        let mut peak = desired
            .max(cycle_first + rise.len() + 2)
            .min(cycle_last - plant.hold as usize - fall.len() - 2);
        let min_peak = painted_end + MIN_GAP + rise.len();
        if peak < min_peak {
            peak = min_peak;
        }
        assert!(
            peak + plant.hold as usize + fall.len() + 2 <= cycle_last,
            "cycle {} too crowded",
            cycle.index
        );
        let mut i = peak - rise.len();
        let hold = vec![plant.level; plant.hold as usize];
        for &v in rise.iter().chain(hold.iter()).chain(fall.iter()) {
            values[i] = v;
            i += 1;
        }
        painted_end = i - 1;
    }

    // Two storms in the partial-cycle padding outside the seven cycles;
    // declustering drops them with a warning.
    for (when, level) in [("1932-06-01T00:00:00Z", 154), ("2009-06-01T00:00:00Z", 154)] {
        let (rise, fall) = waveform(level);
        let peak = slot_of(parse_instant(when).unwrap());
        let first = peak - rise.len();
        for (i, &v) in rise.iter().chain([level].iter()).chain(fall.iter()).enumerate() {
            values[first + i] = v;
        }
    }

    DemoData {
        series: ApSeries::new(start, values).unwrap(),
        cycles,
    }
}

fn stream_seed(stream: u64) -> u64 {
    stormhazard::simulate::derive_seed(DEMO_SEED, stream)
}

/// Inputs for the historical-reproduction tests: the paths in
/// `STORMHAZARD_HISTORICAL_AP` / `STORMHAZARD_HISTORICAL_CYCLES` when both
/// are set (a real archive conversion), the bundled demo dataset otherwise.
pub fn historical_inputs() -> (ApSeries, Vec<CycleRecord>) {
    use std::env;
    if let (Ok(ap), Ok(cy)) = (
        env::var("STORMHAZARD_HISTORICAL_AP"),
        env::var("STORMHAZARD_HISTORICAL_CYCLES"),
    ) {
        let series = stormhazard::parse_ap_series(std::path::Path::new(&ap), ParseMode::Lenient)
            .expect("historical ap file parses")
            .value;
        let cycles =
            stormhazard::parse_cycles(std::path::Path::new(&cy), &series).expect("cycle table parses");
        (series, cycles)
    } else {
        let demo = demo_data();
        (demo.series, demo.cycles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_sequence_respects_counts() {
        let seq = balanced_sequence(&[(1, 3), (2, 6), (3, 1)]);
        assert_eq!(seq.len(), 10);
        assert_eq!(seq.iter().filter(|&&l| l == 1).count(), 3);
        assert_eq!(seq.iter().filter(|&&l| l == 2).count(), 6);
        assert_eq!(seq.iter().filter(|&&l| l == 3).count(), 1);
    }

    #[test]
    fn demo_data_is_deterministic() {
        let a = demo_data();
        let b = demo_data();
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn raw_extreme_reading_count() {
        let demo = demo_data();
        let raw_400 = demo.series.values().iter().filter(|&&v| v == 400).count();
        assert_eq!(raw_400, 29);
    }
}
