//! Task execution: the glue between parsed arguments and the library.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use stormhazard::decluster::write_catalog;
use stormhazard::hazard::{warp_catalog, FitReport};
use stormhazard::kernel::{
    cv_bandwidth, default_bandwidth_grid, estimate_lambda0, ongoing_correction, to_per_year,
    Bandwidth, CurveMeta, KernelConfig,
};
use stormhazard::risk::{
    chi_square_independence, extrapolate, frequency_table, predict_cycle, write_frequency_table,
    write_prediction, write_risk_curve, RiskCurve, RiskMeta,
};
use stormhazard::simulate::{simulate_events, simulate_series, ClusterProfile, Lambda0, SimCycle, SimSpec};
use stormhazard::time;
use stormhazard::{
    count_by_cycle, decluster, estimate_p400, fit_beta, gradient_series, ApSeries, CycleRecord,
    Dataset, DeclusterConfig, Diagnostic, Error, HazardFit, ParseMode, Result, Storm, WarpedStorm,
};

use crate::tasks::{
    CatalogArgs, Emit, InputArgs, KernelArgs, SimulateArgs, Strength, Task,
};

/// Built-in seven-cycle table (cycles 17-23) used by `simulate` when no
/// cycle file is given.
const DEFAULT_CYCLES: [(u32, &str, &str, f64); 7] = [
    (17, "1933-09-01", "1944-02-01", 119.2),
    (18, "1944-02-01", "1954-04-01", 151.8),
    (19, "1954-04-01", "1964-10-01", 201.3),
    (20, "1964-10-01", "1976-06-01", 110.6),
    (21, "1976-06-01", "1986-09-01", 164.5),
    (22, "1986-09-01", "1996-05-01", 158.5),
    (23, "1996-05-01", "2008-12-01", 120.8),
];

pub fn load_task(path: &Path) -> Result<Task> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(file)?)
}

pub fn execute(task: &Task, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let task = resolve(task.clone());
    write_json(out_dir, "run_config.json", &task)?;
    match &task {
        Task::Decluster(args) => {
            let dataset = load_dataset(&args.input)?;
            let storms = build_catalog(&dataset, &args.catalog)?;
            write_with(out_dir, "storms.csv", |w| write_catalog(w, &storms))?;
            if let Some(name) = &args.frequency_table {
                let rows = frequency_table(
                    &storms,
                    dataset.series.span_years(),
                    dataset.series.len() as u64,
                );
                write_with(out_dir, name, |w| write_frequency_table(w, &rows))?;
            }
            Ok(())
        }
        Task::Fit(args) => {
            let dataset = load_dataset(&args.input)?;
            let storms = build_catalog(&dataset, &args.catalog)?;
            let analysis = fit_catalog(&dataset, &storms, args.catalog.extreme())?;
            let report = FitReport::new(&analysis.fit, &analysis.p400);
            if args.out == "-" {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                serde_json::to_writer_pretty(&mut lock, &report)?;
                writeln!(lock)?;
            } else {
                write_json(out_dir, &args.out, &report)?;
            }
            Ok(())
        }
        Task::Intensity(args) => {
            let dataset = load_dataset(&args.input)?;
            for &low in &args.low_levels {
                let catalog = CatalogArgs {
                    low_level: low,
                    run_length: args.run_length,
                    strength: args.strength,
                    extreme_level: args.extreme_level,
                };
                let storms = build_catalog(&dataset, &catalog)?;
                let curves = estimate_curves(&dataset, &storms, &catalog, &args.kernel)?;
                write_curve_set(out_dir, low, &curves)?;
            }
            Ok(())
        }
        Task::Validate(args) => {
            let dataset = load_dataset(&args.input)?;
            let storms = build_catalog(&dataset, &args.catalog)?;
            let curves = estimate_curves(&dataset, &storms, &args.catalog, &args.kernel)?;
            run_validation(out_dir, &curves, &args.thresholds, args.catalog.extreme())
        }
        Task::Predict(args) => {
            let dataset = load_dataset(&args.input)?;
            let storms = build_catalog(&dataset, &args.catalog)?;
            let curves = estimate_curves(&dataset, &storms, &args.catalog, &args.kernel)?;
            let start = time::parse_instant(&args.start)?;
            let prediction = predict_cycle(
                &curves.fit,
                &curves.risk,
                start,
                args.duration_years,
                args.ssn_max,
                dataset.centering_constant,
            )?;
            write_with(out_dir, "prediction.csv", |w| write_prediction(w, &prediction))?;
            write_json(
                out_dir,
                "prediction.json",
                &serde_json::json!({
                    "start": time::format_instant(prediction.start),
                    "predicted_end": time::format_instant(prediction.predicted_end),
                    "predicted_ssn_max": prediction.predicted_ssn_max,
                    "covariate": prediction.covariate,
                }),
            )?;
            Ok(())
        }
        Task::Simulate(args) => run_simulate(out_dir, args),
        Task::Pipeline(args) => {
            let dataset = load_dataset(&args.input)?;
            let storms = build_catalog(&dataset, &args.catalog)?;
            write_with(out_dir, "storms.csv", |w| write_catalog(w, &storms))?;
            let rows = frequency_table(
                &storms,
                dataset.series.span_years(),
                dataset.series.len() as u64,
            );
            write_with(out_dir, "frequency.csv", |w| write_frequency_table(w, &rows))?;
            let curves = estimate_curves(&dataset, &storms, &args.catalog, &args.kernel)?;
            let report = FitReport::new(&curves.fit, &curves.p400);
            write_json(out_dir, "fit.json", &report)?;
            write_curve_set(out_dir, args.catalog.low_level, &curves)?;
            run_validation(out_dir, &curves, &args.thresholds, args.catalog.extreme())
        }
    }
}

/// Fill in anything the run resolved outside its flags (the simulation seed
/// falls back to `STORMHAZARD_SEED`, then 0), so the serialized config
/// replays identically.
fn resolve(mut task: Task) -> Task {
    if let Task::Simulate(args) = &mut task {
        if args.seed.is_none() {
            args.seed = Some(
                std::env::var("STORMHAZARD_SEED")
                    .ok()
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0),
            );
        }
    }
    task
}

fn report(warnings: &[Diagnostic]) {
    for w in warnings {
        eprintln!("{w}");
    }
}

fn load_dataset(input: &InputArgs) -> Result<Dataset> {
    let mode = if input.lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let (series, warnings) = stormhazard::parse_ap_series(&input.ap, mode)?.into_parts();
    report(&warnings);
    let cycles = stormhazard::parse_cycles(&input.cycles, &series)?;
    Dataset::new(series, cycles)
}

fn build_catalog(dataset: &Dataset, catalog: &CatalogArgs) -> Result<Vec<Storm>> {
    let config = DeclusterConfig::new(
        catalog.low_level,
        catalog.run_length,
        catalog.strength.into(),
    )?;
    let (storms, warnings) = match catalog.strength {
        Strength::Level => decluster(&dataset.series, &dataset.cycles, &config),
        Strength::Gradient => {
            let derived = gradient_series(&dataset.series)?;
            decluster(&derived, &dataset.cycles, &config)
        }
    }
    .into_parts();
    report(&warnings);
    Ok(storms)
}

struct FitOutcome {
    fit: HazardFit,
    p400: stormhazard::P400Estimate,
    warped: Vec<WarpedStorm>,
    counts: stormhazard::CycleCounts,
}

fn fit_catalog(dataset: &Dataset, storms: &[Storm], extreme_level: i32) -> Result<FitOutcome> {
    let warped = warp_catalog(storms, &dataset.cycles)?;
    let counts = count_by_cycle(&warped, &dataset.cycles);
    let fit = fit_beta(&counts, 1e-10, 64)?;
    let p400 = estimate_p400(storms, extreme_level)?;
    Ok(FitOutcome {
        fit,
        p400,
        warped,
        counts,
    })
}

struct CurveSet {
    fit: HazardFit,
    p400: stormhazard::P400Estimate,
    warped: Vec<WarpedStorm>,
    base: stormhazard::IntensityCurve,
    risk: RiskCurve,
}

fn estimate_curves(
    dataset: &Dataset,
    storms: &[Storm],
    catalog: &CatalogArgs,
    kernel: &KernelArgs,
) -> Result<CurveSet> {
    let outcome = fit_catalog(dataset, storms, catalog.extreme())?;
    let exposures = outcome.counts.with_beta(outcome.fit.beta_hat);
    let bandwidth = parse_bandwidth(&kernel.bandwidth)?;
    let h = match bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Auto => cv_bandwidth(&outcome.warped, &exposures, &default_bandwidth_grid())?,
    };
    let config = KernelConfig {
        bandwidth: Bandwidth::Fixed(h),
        grid_size: kernel.grid_size,
        ..KernelConfig::default()
    };
    let raw = estimate_lambda0(&outcome.warped, &exposures, &config)?;
    let stats = stormhazard::decluster::max_multiplicity_stats(storms, catalog.extreme());
    let corrected = ongoing_correction(&raw, stats)?;
    let per_year = to_per_year(&corrected, 0.0, &outcome.fit);
    let extreme_count = storms
        .iter()
        .filter(|s| s.strength >= catalog.extreme())
        .count() as u64;
    let cycle_years = dataset.cycle_years();
    let risk = extrapolate(&per_year, &outcome.p400, extreme_count, cycle_years)?;
    Ok(CurveSet {
        fit: outcome.fit,
        p400: outcome.p400,
        warped: outcome.warped,
        base: per_year,
        risk,
    })
}

fn parse_bandwidth(text: &str) -> Result<Bandwidth> {
    if text == "auto" {
        return Ok(Bandwidth::Auto);
    }
    text.parse::<f64>()
        .map(Bandwidth::Fixed)
        .map_err(|_| Error::Config(format!("bandwidth must be `auto` or a number, got `{text}`")))
}

fn write_curve_set(out_dir: &Path, low: i32, curves: &CurveSet) -> Result<()> {
    write_with(out_dir, &format!("lambda0_{low}.csv"), |w| {
        stormhazard::kernel::write_curve(w, &curves.base)
    })?;
    write_json(
        out_dir,
        &format!("lambda0_{low}.json"),
        &CurveMeta {
            h: curves.base.bandwidth,
            k: curves.base.normalization,
            corrected: curves.base.corrected,
            unit: curves.base.unit,
            low_level: low,
        },
    )?;
    write_with(out_dir, &format!("risk_{low}.csv"), |w| {
        write_risk_curve(w, &curves.risk)
    })?;
    write_json(
        out_dir,
        &format!("risk_{low}.json"),
        &RiskMeta {
            p400: curves.risk.p400.p_hat,
            empirical_frequency: curves.risk.empirical_frequency,
            low_level: low,
        },
    )?;
    Ok(())
}

fn run_validation(
    out_dir: &Path,
    curves: &CurveSet,
    thresholds: &[f64],
    extreme_level: i32,
) -> Result<()> {
    let thresholds: Vec<f64> = if thresholds.is_empty() {
        vec![curves.risk.empirical_frequency]
    } else {
        thresholds.to_vec()
    };
    for thr in thresholds {
        let (reportv, warnings) =
            chi_square_independence(&curves.warped, &curves.risk.curve, thr, extreme_level)?
                .into_parts();
        report(&warnings);
        write_json(out_dir, &format!("chi2_{thr:.2}.json"), &reportv)?;
    }
    Ok(())
}

fn run_simulate(out_dir: &Path, args: &SimulateArgs) -> Result<()> {
    let cycles: Vec<CycleRecord> = match &args.cycles {
        Some(path) => {
            // The table is validated against a synthetic series covering it.
            let probe = probe_series_for(path)?;
            stormhazard::parse_cycles(path, &probe)?
        }
        None => DEFAULT_CYCLES
            .iter()
            .map(|&(index, start, end, ssn)| {
                CycleRecord::new(
                    index,
                    time::parse_instant(start).unwrap(),
                    time::parse_instant(end).unwrap(),
                    ssn,
                )
                .unwrap()
            })
            .collect(),
    };
    let (cycles, _centering) = stormhazard::center_covariates(cycles)?;
    let spec = SimSpec {
        lambda0: Lambda0::Constant(args.intensity),
        cycles: cycles
            .iter()
            .map(|c| SimCycle {
                duration_years: c.duration_years,
                covariate: c.covariate,
            })
            .collect(),
        beta: args.beta,
        seed: args.seed.expect("seed resolved before execution"),
    };
    match args.emit {
        Emit::Events => {
            let events = simulate_events(&spec)?;
            let mut storms = Vec::new();
            for (cycle, times) in cycles.iter().zip(&events) {
                for &t in times {
                    storms.push(Storm {
                        cycle: cycle.index,
                        strength: args.peak_level,
                        date: snap_to_grid(time::add_years(
                            cycle.start,
                            (t + 0.5) * cycle.duration_years,
                        )),
                        length: 1,
                        max_multiplicity: 1,
                    });
                }
            }
            write_with(out_dir, "sim_storms.csv", |w| write_catalog(w, &storms))
        }
        Emit::Series => {
            let profile = ClusterProfile {
                peak_level: args.peak_level,
                ..ClusterProfile::default()
            };
            let series = simulate_series(&spec, &cycles, &profile)?;
            write_with(out_dir, "sim_ap.csv", |w| {
                stormhazard::ingest::write_ap_series(w, &series)
            })
        }
    }
}

/// A minimal gap-free series spanning a cycle file, so the file can be
/// validated without observation data.
fn probe_series_for(path: &Path) -> Result<ApSeries> {
    // Parse boundaries only: find min start / max end.
    let text = fs::read_to_string(path)?;
    let mut min: Option<chrono::DateTime<chrono::Utc>> = None;
    let mut max: Option<chrono::DateTime<chrono::Utc>> = None;
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() == 4 {
            if let (Ok(s), Ok(e)) = (
                time::parse_instant(fields[1].trim()),
                time::parse_instant(fields[2].trim()),
            ) {
                min = Some(min.map_or(s, |m| m.min(s)));
                max = Some(max.map_or(e, |m| m.max(e)));
            }
        }
    }
    let (min, max) = match (min, max) {
        (Some(a), Some(b)) if a < b => (a, b),
        _ => return Err(Error::Cycles(format!("no usable cycles in {}", path.display()))),
    };
    let slots = ((max - min).num_seconds() / time::STEP_SECONDS + 1) as usize;
    ApSeries::new(snap_to_grid(min), vec![0; slots])
}

fn snap_to_grid(t: chrono::DateTime<chrono::Utc>) -> chrono::DateTime<chrono::Utc> {
    let secs = t.timestamp();
    let snapped = (secs as f64 / time::STEP_SECONDS as f64).round() as i64 * time::STEP_SECONDS;
    chrono::DateTime::from_timestamp(snapped, 0).unwrap()
}

fn write_with<F>(out_dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut File) -> Result<()>,
{
    let mut file = File::create(out_path(out_dir, name)?)?;
    f(&mut file)
}

fn write_json<T: serde::Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut file = File::create(out_path(out_dir, name)?)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    Ok(())
}

/// All outputs stay inside the declared output directory.
fn out_path(out_dir: &Path, name: &str) -> Result<PathBuf> {
    let name = Path::new(name);
    if name.components().count() != 1 || name.is_absolute() {
        return Err(Error::Config(format!(
            "output name `{}` must be a bare file name",
            name.display()
        )));
    }
    Ok(out_dir.join(name))
}
