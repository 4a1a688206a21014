//! Parsing and validation of the index series and the cycle table.
//!
//! Input layouts are plain CSV:
//!
//! - ap series: header `timestamp,ap`; one row per 3-hour step, timestamps
//!   ISO-8601 UTC, values base-10 integers, rows ascending with no gaps;
//! - cycle table: header `cycle,start,end,ssn_max`; boundaries ISO-8601
//!   dates (or instants), `ssn_max` the cycle's peak monthly smoothed
//!   sunspot number.
//!
//! Parsing is total: a file either yields a value or an error naming the
//! offending line; lenient mode downgrades out-of-scale values to warnings.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result, WithWarnings};
use crate::time;

/// The legal ap scale. The index is a bounded, non-consecutive integer
/// scale; any other value indicates a conversion or transcription problem.
pub const LEGAL_AP_VALUES: [i32; 28] = [
    0, 2, 3, 4, 5, 6, 7, 9, 12, 15, 18, 22, 27, 32, 39, 48, 56, 67, 80, 94, 111, 132, 154, 179,
    207, 236, 300, 400,
];

/// Whether `value` belongs to the legal ap scale.
pub fn is_legal_ap(value: i32) -> bool {
    LEGAL_AP_VALUES.binary_search(&value).is_ok()
}

/// How to treat values outside the legal scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Out-of-scale values are errors.
    Strict,
    /// Out-of-scale values are kept and reported as warnings. Historical
    /// archives occasionally carry provisional values.
    Lenient,
}

/// A gap-free series of 3-hourly observations.
///
/// Only the first timestamp is stored; the uniform grid makes every other
/// timestamp derivable. Values are `i32` so that derived (signed) gradient
/// series can share the container; legal-scale validation applies when
/// parsing an ap file, not to derived series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApSeries {
    start: DateTime<Utc>,
    values: Vec<i32>,
}

impl ApSeries {
    /// Build a series from a grid-aligned start instant and values.
    pub fn new(start: DateTime<Utc>, values: Vec<i32>) -> Result<Self> {
        if !time::on_grid(start) {
            return Err(Error::Series(format!(
                "start {} is not aligned to the 3-hour grid",
                time::format_instant(start)
            )));
        }
        Ok(ApSeries { start, values })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    /// Instant one step past the last observation.
    pub fn end(&self) -> DateTime<Utc> {
        self.start + time::step() * self.values.len() as i32
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + time::step() * index as i32
    }

    /// Index of the grid slot containing `t`, if within the series.
    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        let offset = (t - self.start).num_seconds();
        if offset < 0 {
            return None;
        }
        let idx = (offset / time::STEP_SECONDS) as usize;
        (idx < self.values.len()).then_some(idx)
    }

    /// Observations per (365-day) year covered, for frequency summaries.
    pub fn span_years(&self) -> f64 {
        self.values.len() as f64 / time::OBS_PER_YEAR
    }
}

/// Parse an ap series file. See the module docs for the layout.
pub fn parse_ap_series(path: &Path, mode: ParseMode) -> Result<WithWarnings<ApSeries>> {
    let file = File::open(path).map_err(|e| {
        Error::Series(format!("cannot open {}: {e}", path.display()))
    })?;
    parse_ap_series_reader(file, &path.display().to_string(), mode)
}

/// Reader-based variant of [`parse_ap_series`]; `source` names the input in
/// diagnostics.
pub fn parse_ap_series_reader<R: Read>(
    reader: R,
    source: &str,
    mode: ParseMode,
) -> Result<WithWarnings<ApSeries>> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(format_err(source, 1, "empty file, expected `timestamp,ap` header")),
    };
    if header.trim() != "timestamp,ap" {
        return Err(format_err(source, 1, "expected header `timestamp,ap`"));
    }

    let mut warnings = Vec::new();
    let mut start: Option<DateTime<Utc>> = None;
    let mut prev: Option<DateTime<Utc>> = None;
    let mut values: Vec<i32> = Vec::new();

    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (ts_text, value_text) = line
            .split_once(',')
            .ok_or_else(|| format_err(source, line_no, "expected `timestamp,ap`"))?;
        let t = time::parse_instant(ts_text.trim())
            .map_err(|_| format_err(source, line_no, &format!("unparseable timestamp `{ts_text}`")))?;
        if !time::on_grid(t) {
            return Err(Error::Series(format!(
                "{source}:{line_no}: timestamp {ts_text} is off the 3-hour grid"
            )));
        }
        if let Some(p) = prev {
            if t <= p {
                return Err(Error::Series(format!(
                    "{source}:{line_no}: timestamps not strictly increasing"
                )));
            }
            if t - p != time::step() {
                return Err(Error::Series(format!(
                    "{source}:{line_no}: gap in series ({} missing steps)",
                    ((t - p).num_seconds() / time::STEP_SECONDS) - 1
                )));
            }
        }
        let value: i64 = value_text
            .trim()
            .parse()
            .map_err(|_| format_err(source, line_no, &format!("unparseable ap value `{value_text}`")))?;
        let value_i32 = i32::try_from(value)
            .map_err(|_| format_err(source, line_no, &format!("ap value {value} out of range")))?;
        if value_i32 < 0 {
            return Err(format_err(source, line_no, &format!("negative ap value {value}")));
        }
        if !is_legal_ap(value_i32) {
            match mode {
                ParseMode::Strict => {
                    return Err(Error::IllegalValue {
                        file: source.to_string(),
                        line: line_no,
                        value,
                    })
                }
                ParseMode::Lenient => warnings.push(Diagnostic::warning(
                    source,
                    Some(line_no),
                    format!("value {value} is not on the ap scale; kept"),
                )),
            }
        }
        start.get_or_insert(t);
        prev = Some(t);
        values.push(value_i32);
    }

    let start = start.ok_or_else(|| format_err(source, 1, "file contains no observations"))?;
    Ok(WithWarnings::new(ApSeries::new(start, values)?, warnings))
}

/// Write a series in the canonical layout. Re-parsing the output yields an
/// identical series.
pub fn write_ap_series<W: Write>(mut w: W, series: &ApSeries) -> Result<()> {
    writeln!(w, "timestamp,ap")?;
    for (i, v) in series.values().iter().enumerate() {
        writeln!(w, "{},{v}", time::format_instant(series.timestamp(i)))?;
    }
    Ok(())
}

fn format_err(file: &str, line: u64, message: &str) -> Error {
    Error::Format {
        file: file.to_string(),
        line,
        message: message.to_string(),
    }
}

/// One solar cycle: boundaries, duration and activity covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// General-list cycle number.
    pub index: u32,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    /// `(end - start)` in Julian years.
    pub duration_years: f64,
    /// Peak monthly smoothed sunspot number of the cycle.
    pub ssn_max: f64,
    /// Centered activity covariate; zero until [`center_covariates`] runs.
    pub covariate: f64,
}

impl CycleRecord {
    pub fn new(index: u32, start: DateTime<Utc>, end: DateTime<Utc>, ssn_max: f64) -> Result<Self> {
        if end <= start {
            return Err(Error::Cycles(format!(
                "cycle {index} ends on or before its start"
            )));
        }
        if ssn_max <= 0.0 || !ssn_max.is_finite() {
            return Err(Error::Cycles(format!(
                "cycle {index} has non-positive ssn_max {ssn_max}"
            )));
        }
        Ok(CycleRecord {
            index,
            start,
            end,
            duration_years: time::years_between(start, end),
            ssn_max,
            covariate: 0.0,
        })
    }

    /// Whether `t` belongs to this cycle. Intervals are half-open so that a
    /// shared boundary instant belongs to the later cycle.
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

/// Parse a cycle table and check it against the series span.
///
/// Returned covariates are not yet centered; see [`center_covariates`].
pub fn parse_cycles(path: &Path, series: &ApSeries) -> Result<Vec<CycleRecord>> {
    let file = File::open(path)
        .map_err(|e| Error::Cycles(format!("cannot open {}: {e}", path.display())))?;
    parse_cycles_reader(file, &path.display().to_string(), series)
}

/// Reader-based variant of [`parse_cycles`].
pub fn parse_cycles_reader<R: Read>(
    reader: R,
    source: &str,
    series: &ApSeries,
) -> Result<Vec<CycleRecord>> {
    let mut lines = BufReader::new(reader).lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == "cycle,start,end,ssn_max" => {}
        _ => return Err(format_err(source, 1, "expected header `cycle,start,end,ssn_max`")),
    }
    let mut cycles = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format_err(source, line_no, "expected 4 fields"));
        }
        let index: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| format_err(source, line_no, "unparseable cycle number"))?;
        let start = time::parse_instant(fields[1].trim())
            .map_err(|_| format_err(source, line_no, "unparseable start date"))?;
        let end = time::parse_instant(fields[2].trim())
            .map_err(|_| format_err(source, line_no, "unparseable end date"))?;
        let ssn_max: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| format_err(source, line_no, "unparseable ssn_max"))?;
        cycles.push(CycleRecord::new(index, start, end, ssn_max)?);
    }
    validate_cycles(&cycles, series)?;
    Ok(cycles)
}

/// Write a cycle table in the canonical layout.
pub fn write_cycles<W: Write>(mut w: W, cycles: &[CycleRecord]) -> Result<()> {
    writeln!(w, "cycle,start,end,ssn_max")?;
    for c in cycles {
        writeln!(
            w,
            "{},{},{},{}",
            c.index,
            time::format_date_or_instant(c.start),
            time::format_date_or_instant(c.end),
            c.ssn_max
        )?;
    }
    Ok(())
}

fn validate_cycles(cycles: &[CycleRecord], series: &ApSeries) -> Result<()> {
    if cycles.is_empty() {
        return Err(Error::Cycles("no cycles".into()));
    }
    for pair in cycles.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::Cycles(format!(
                "cycles {} and {} overlap",
                pair[0].index, pair[1].index
            )));
        }
        if pair[1].index <= pair[0].index {
            return Err(Error::Cycles("cycle numbers must increase".into()));
        }
    }
    for c in cycles {
        if c.start < series.start() || c.end > series.end() {
            return Err(Error::Cycles(format!(
                "cycle {} is not fully covered by the series ({} .. {})",
                c.index,
                time::format_instant(series.start()),
                time::format_instant(series.end())
            )));
        }
    }
    Ok(())
}

/// Center the activity covariate: `X_j = ssn_max_j - mean(ssn_max)`.
///
/// Returns the cycles with covariates filled in and the centering constant.
/// Centered covariates sum to zero up to rounding.
pub fn center_covariates(mut cycles: Vec<CycleRecord>) -> Result<(Vec<CycleRecord>, f64)> {
    if cycles.is_empty() {
        return Err(Error::Cycles("cannot center an empty cycle list".into()));
    }
    let centering = cycles.iter().map(|c| c.ssn_max).sum::<f64>() / cycles.len() as f64;
    for c in &mut cycles {
        c.covariate = c.ssn_max - centering;
    }
    Ok((cycles, centering))
}

/// The canonical in-memory dataset: a validated series plus centered cycles.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub series: ApSeries,
    pub cycles: Vec<CycleRecord>,
    pub centering_constant: f64,
}

impl Dataset {
    /// Validate coverage and ordering, center the covariates.
    pub fn new(series: ApSeries, cycles: Vec<CycleRecord>) -> Result<Self> {
        validate_cycles(&cycles, &series)?;
        let (cycles, centering_constant) = center_covariates(cycles)?;
        Ok(Dataset {
            series,
            cycles,
            centering_constant,
        })
    }

    /// Total covered cycle time in Julian years.
    pub fn cycle_years(&self) -> f64 {
        self.cycles.iter().map(|c| c.duration_years).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_instant;

    fn series_csv(start: &str, values: &[i32]) -> String {
        let mut out = String::from("timestamp,ap\n");
        let mut t = parse_instant(start).unwrap();
        for v in values {
            out.push_str(&format!("{},{v}\n", time::format_instant(t)));
            t += time::step();
        }
        out
    }

    #[test]
    fn parses_valid_series() {
        let csv = series_csv("1933-09-01T00:00:00Z", &[0, 2, 300, 400, 7]);
        let parsed = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict)
            .unwrap()
            .expect_clean();
        assert_eq!(parsed.len(), 5);
        assert_eq!(parsed.values(), &[0, 2, 300, 400, 7]);
        assert_eq!(parsed.timestamp(1), parse_instant("1933-09-01T03:00:00Z").unwrap());
    }

    #[test]
    fn strict_mode_rejects_off_scale_value() {
        let csv = series_csv("1933-09-01T00:00:00Z", &[0, 401, 7]);
        let err = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict).unwrap_err();
        match err {
            Error::IllegalValue { line, value, .. } => {
                assert_eq!(line, 3);
                assert_eq!(value, 401);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn lenient_mode_keeps_off_scale_value_with_warning() {
        let csv = series_csv("1933-09-01T00:00:00Z", &[0, 401, 7]);
        let parsed = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Lenient).unwrap();
        assert_eq!(parsed.value.values(), &[0, 401, 7]);
        assert_eq!(parsed.warnings.len(), 1);
        let rendered = parsed.warnings[0].to_string();
        assert!(rendered.starts_with("WARN: mem:3:"), "{rendered}");
    }

    #[test]
    fn gap_detected_with_line_number() {
        let mut csv = series_csv("1933-09-01T00:00:00Z", &[0, 2]);
        csv.push_str("1933-09-01T09:00:00Z,4\n"); // skips the 06:00 slot
        let err = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict).unwrap_err();
        assert!(err.to_string().contains("mem:4"), "{err}");
        assert!(err.to_string().contains("gap"), "{err}");
    }

    #[test]
    fn malformed_row_names_line() {
        let csv = "timestamp,ap\n1933-09-01T00:00:00Z\n";
        let err = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict).unwrap_err();
        assert!(err.to_string().contains("mem:2"), "{err}");
    }

    #[test]
    fn series_round_trips() {
        let csv = series_csv("1996-05-01T00:00:00Z", &[0, 9, 400, 400, 132, 7]);
        let parsed = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict)
            .unwrap()
            .expect_clean();
        let mut out = Vec::new();
        write_ap_series(&mut out, &parsed).unwrap();
        let reparsed = parse_ap_series_reader(out.as_slice(), "mem", ParseMode::Strict)
            .unwrap()
            .expect_clean();
        assert_eq!(parsed, reparsed);
    }

    #[test]
    fn cycle_ending_before_start_is_rejected() {
        let start = parse_instant("1944-02-01").unwrap();
        let end = parse_instant("1933-09-01").unwrap();
        assert!(CycleRecord::new(17, start, end, 119.2).is_err());
    }

    #[test]
    fn single_cycle_duration_matches_span() {
        let csv = series_csv("1933-09-01T00:00:00Z", &vec![7; 2920 * 2]);
        let series = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict)
            .unwrap()
            .expect_clean();
        let table = format!(
            "cycle,start,end,ssn_max\n17,1933-09-01,{},100.0\n",
            time::format_date_or_instant(series.end())
        );
        let cycles = parse_cycles_reader(table.as_bytes(), "mem", &series).unwrap();
        assert_eq!(cycles.len(), 1);
        let expect = time::years_between(series.start(), series.end());
        assert!((cycles[0].duration_years - expect).abs() < 1e-12);
    }

    #[test]
    fn overlapping_cycles_rejected() {
        let csv = series_csv("1933-09-01T00:00:00Z", &vec![7; 8 * 400]);
        let series = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict)
            .unwrap()
            .expect_clean();
        let table = "cycle,start,end,ssn_max\n\
                     17,1933-09-01,1933-10-01,100.0\n\
                     18,1933-09-20,1933-10-20,120.0\n";
        let err = parse_cycles_reader(table.as_bytes(), "mem", &series).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn cycle_outside_span_rejected() {
        let csv = series_csv("1933-09-01T00:00:00Z", &[7; 16]);
        let series = parse_ap_series_reader(csv.as_bytes(), "mem", ParseMode::Strict)
            .unwrap()
            .expect_clean();
        let table = "cycle,start,end,ssn_max\n17,1933-08-01,1933-09-02,100.0\n";
        assert!(parse_cycles_reader(table.as_bytes(), "mem", &series).is_err());
    }

    #[test]
    fn centering_two_cycles_is_symmetric() {
        let start = parse_instant("1933-09-01").unwrap();
        let mid = parse_instant("1944-02-01").unwrap();
        let end = parse_instant("1954-04-01").unwrap();
        let cycles = vec![
            CycleRecord::new(17, start, mid, 100.0).unwrap(),
            CycleRecord::new(18, mid, end, 200.0).unwrap(),
        ];
        let (centered, c) = center_covariates(cycles).unwrap();
        assert_eq!(c, 150.0);
        assert_eq!(centered[0].covariate, -50.0);
        assert_eq!(centered[1].covariate, 50.0);
    }

    #[test]
    fn centering_single_cycle_is_zero() {
        let start = parse_instant("1933-09-01").unwrap();
        let end = parse_instant("1944-02-01").unwrap();
        let (centered, c) = center_covariates(vec![CycleRecord::new(17, start, end, 146.7).unwrap()]).unwrap();
        assert_eq!(c, 146.7);
        assert_eq!(centered[0].covariate, 0.0);
    }
}
