//! Time conventions shared across the crate.
//!
//! The observation grid is fixed at 3 hours (eight observations per day).
//! Durations expressed "in years" use the Julian year of 365.25 days, so a
//! cycle's duration in years is exactly `(end - start).num_seconds() / 31_557_600`.

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, TimeZone, Utc};

use crate::error::{Error, Result};

/// Seconds in one observation step (3 hours).
pub const STEP_SECONDS: i64 = 3 * 3600;

/// Seconds in a Julian year (365.25 days).
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Observations per 365-day year; used by per-observation frequency columns.
pub const OBS_PER_YEAR: f64 = 8.0 * 365.0;

/// One observation step as a `chrono` duration.
pub fn step() -> Duration {
    Duration::seconds(STEP_SECONDS)
}

/// Signed span between two instants, in Julian years.
pub fn years_between(start: DateTime<Utc>, end: DateTime<Utc>) -> f64 {
    (end - start).num_seconds() as f64 / SECONDS_PER_YEAR
}

/// Add a fractional number of Julian years to an instant.
pub fn add_years(start: DateTime<Utc>, years: f64) -> DateTime<Utc> {
    start + Duration::seconds((years * SECONDS_PER_YEAR).round() as i64)
}

/// Whether an instant sits on the 3-hour observation grid (minutes, seconds
/// and sub-hour parts zero, hour divisible by three).
pub fn on_grid(t: DateTime<Utc>) -> bool {
    let secs = t.timestamp();
    secs.rem_euclid(STEP_SECONDS) == 0
}

/// Parse an ISO-8601 instant, also accepting a bare `YYYY-MM-DD` date
/// (midnight UTC).
pub fn parse_instant(text: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S") {
        return Ok(Utc.from_utc_datetime(&t));
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Ok(Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap()));
    }
    Err(Error::Series(format!("unparseable timestamp `{text}`")))
}

/// Render an instant as an ISO-8601 UTC string (`1933-09-01T00:00:00Z`).
pub fn format_instant(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Render a date-only boundary when it falls on midnight, else the full
/// instant. Cycle tables conventionally carry bare dates.
pub fn format_date_or_instant(t: DateTime<Utc>) -> String {
    if t.timestamp().rem_euclid(86_400) == 0 {
        t.format("%Y-%m-%d").to_string()
    } else {
        format_instant(t)
    }
}
