//! Write the bundled demo dataset as `ap.csv` and `cycles.csv`.
//!
//! Usage: `make-demo-data [OUT_DIR]` (default `demo-data/`).

use std::fs::{self, File};
use std::path::PathBuf;

use stormhazard::ingest::{write_ap_series, write_cycles};
use stormhazard_fixtures::demo_data;

fn main() -> std::io::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "demo-data".into()).into();
    fs::create_dir_all(&out)?;
    let demo = demo_data();
    write_ap_series(File::create(out.join("ap.csv"))?, &demo.series).expect("write series");
    write_cycles(File::create(out.join("cycles.csv"))?, &demo.cycles).expect("write cycles");
    eprintln!(
        "wrote {} observations and {} cycles to {}",
        demo.series.len(),
        demo.cycles.len(),
        out.display()
    );
    Ok(())
}
