//! Runs declustering of the observation series into a storm catalog.
//!
//! Two parameters drive the clustering: the *low level*, the threshold above
//! which a storm begins, and the *run length* `r`, the minimum number of
//! below-threshold observations separating independent events. Two
//! exceedances separated by fewer than `r` below-level observations belong
//! to the same cluster. Each cluster becomes one [`Storm`] carrying the
//! maximal level reached, the first instant that maximum is attained (the
//! storm date), and the observation count between the first up-crossing and
//! the last down-crossing.
//!
//! Storm strength is either the ap level itself or, in gradient mode, the
//! maximal one-step increase of the index; see [`gradient_series`].

use std::io::{BufRead, BufReader, Read, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result, WithWarnings};
use crate::ingest::{is_legal_ap, ApSeries, CycleRecord};
use crate::time;

/// Which quantity defines a storm's strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrengthKind {
    /// Maximal index level in the cluster.
    Level,
    /// Maximal one-step (3-hour) increase in the cluster; the declustering
    /// then runs on the derived difference series.
    Gradient,
}

/// Declustering parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclusterConfig {
    /// Threshold above which a storm begins (inclusive). Must be a legal ap
    /// value in level mode; gradient thresholds are free positive integers.
    pub low_level: i32,
    /// Minimum number of below-threshold observations separating independent
    /// events.
    pub run_length: u32,
    pub strength_kind: StrengthKind,
}

impl DeclusterConfig {
    pub fn new(low_level: i32, run_length: u32, strength_kind: StrengthKind) -> Result<Self> {
        if low_level <= 0 {
            return Err(Error::Config(format!("low level {low_level} must be positive")));
        }
        if strength_kind == StrengthKind::Level && !is_legal_ap(low_level) {
            return Err(Error::Config(format!(
                "low level {low_level} is not on the ap scale"
            )));
        }
        if run_length == 0 {
            return Err(Error::Config("run length must be at least 1".into()));
        }
        Ok(DeclusterConfig {
            low_level,
            run_length,
            strength_kind,
        })
    }
}

/// A declustered event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Storm {
    /// General-list number of the cycle containing the storm date.
    pub cycle: u32,
    /// Maximal level (or one-step gradient) reached in the cluster.
    pub strength: i32,
    /// First instant the maximum is attained.
    pub date: DateTime<Utc>,
    /// Observations between the first up-crossing and the last down-crossing.
    pub length: u32,
    /// Longest run of consecutive observations at the cluster maximum.
    pub max_multiplicity: u32,
}

/// Decluster `series` into a storm catalog.
///
/// Returns storms sorted by date. Clusters whose date falls outside every
/// cycle (partial cycles at the series edges) are dropped with a warning.
pub fn decluster(
    series: &ApSeries,
    cycles: &[CycleRecord],
    config: &DeclusterConfig,
) -> WithWarnings<Vec<Storm>> {
    let mut storms = Vec::new();
    let mut warnings = Vec::new();
    for cluster in clusters(series.values(), config.low_level, config.run_length) {
        let storm = describe_cluster(series, &cluster);
        match cycles.iter().find(|c| c.contains(storm.0)) {
            Some(cycle) => storms.push(Storm {
                cycle: cycle.index,
                strength: storm.1,
                date: storm.0,
                length: storm.2,
                max_multiplicity: storm.3,
            }),
            None => warnings.push(Diagnostic::warning(
                "decluster",
                None,
                format!(
                    "storm of strength {} at {} falls outside every cycle; dropped",
                    storm.1,
                    time::format_instant(storm.0)
                ),
            )),
        }
    }
    WithWarnings::new(storms, warnings)
}

/// Index ranges `[first, last]` of exceedance clusters.
///
/// Exposed for property tests; `first`/`last` are the first and last
/// exceedance indices of each cluster.
pub fn clusters(values: &[i32], low_level: i32, run_length: u32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v < low_level {
            continue;
        }
        match current {
            Some((first, last)) if (i - last - 1) < run_length as usize => {
                current = Some((first, i));
            }
            Some(done) => {
                out.push(done);
                current = Some((i, i));
            }
            None => current = Some((i, i)),
        }
    }
    if let Some(done) = current {
        out.push(done);
    }
    out
}

fn describe_cluster(series: &ApSeries, cluster: &(usize, usize)) -> (DateTime<Utc>, i32, u32, u32) {
    let (first, last) = *cluster;
    let window = &series.values()[first..=last];
    let strength = *window.iter().max().expect("cluster is nonempty");
    let peak_offset = window.iter().position(|&v| v == strength).unwrap();
    let mut multiplicity = 0u32;
    let mut run = 0u32;
    for &v in window {
        if v == strength {
            run += 1;
            multiplicity = multiplicity.max(run);
        } else {
            run = 0;
        }
    }
    (
        series.timestamp(first + peak_offset),
        strength,
        (last - first + 1) as u32,
        multiplicity,
    )
}

/// One-step difference series: value `i` is `ap[i] - ap[i-1]`, signed.
///
/// The first observation has no gradient and is dropped, so the derived
/// series starts one step later and is one observation shorter. Gradient-mode
/// declustering runs on this series with its own thresholds.
pub fn gradient_series(series: &ApSeries) -> Result<ApSeries> {
    if series.len() < 2 {
        return Err(Error::Series(
            "gradient needs at least two observations".into(),
        ));
    }
    let values = series
        .values()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect::<Vec<_>>();
    ApSeries::new(series.start() + time::step(), values)
}

/// Counts feeding the ongoing-storm correction: storms reaching
/// `extreme_level`, and those staying at their maximum at least two
/// consecutive observations.
pub fn max_multiplicity_stats(storms: &[Storm], extreme_level: i32) -> (u64, u64) {
    let extreme = storms.iter().filter(|s| s.strength >= extreme_level);
    let mut count = 0;
    let mut staying = 0;
    for s in extreme {
        count += 1;
        if s.max_multiplicity >= 2 {
            staying += 1;
        }
    }
    (count, staying)
}

/// Write a storm catalog (`cycle,strength,date,length,max_multiplicity`).
pub fn write_catalog<W: Write>(mut w: W, storms: &[Storm]) -> Result<()> {
    writeln!(w, "cycle,strength,date,length,max_multiplicity")?;
    for s in storms {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.cycle,
            s.strength,
            time::format_instant(s.date),
            s.length,
            s.max_multiplicity
        )?;
    }
    Ok(())
}

/// Read a storm catalog written by [`write_catalog`].
pub fn read_catalog<R: Read>(reader: R, source: &str) -> Result<Vec<Storm>> {
    let mut lines = BufReader::new(reader).lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == "cycle,strength,date,length,max_multiplicity" => {}
        _ => {
            return Err(Error::Format {
                file: source.into(),
                line: 1,
                message: "expected header `cycle,strength,date,length,max_multiplicity`".into(),
            })
        }
    }
    let mut storms = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Format {
                file: source.into(),
                line: line_no,
                message: "expected 5 fields".into(),
            });
        }
        let parse_err = |message: String| Error::Format {
            file: source.into(),
            line: line_no,
            message,
        };
        storms.push(Storm {
            cycle: fields[0]
                .trim()
                .parse()
                .map_err(|_| parse_err("unparseable cycle".into()))?,
            strength: fields[1]
                .trim()
                .parse()
                .map_err(|_| parse_err("unparseable strength".into()))?,
            date: time::parse_instant(fields[2].trim())?,
            length: fields[3]
                .trim()
                .parse()
                .map_err(|_| parse_err("unparseable length".into()))?,
            max_multiplicity: fields[4]
                .trim()
                .parse()
                .map_err(|_| parse_err("unparseable multiplicity".into()))?,
        });
    }
    Ok(storms)
}
