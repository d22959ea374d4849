//! Reads a BDS establishment-age CSV and assembles every complete cohort.
//!
//! Usage: `cargo run --example ingest_bds [path.csv]`

use std::fs::File;

use cohort_survival::ingestion::{available_birth_years, build_cohort, cohort_to_json, parse_bds_csv};
use cohort_survival::nonparametric::compute_w_prime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/bds_2011.csv").to_string());
    let rows = parse_bds_csv(File::open(&path)?)?;
    println!("{} rows", rows.len());
    for year in available_birth_years(&rows) {
        let cohort = build_cohort(&rows, year)?;
        println!("cohort {year}: W' = {:?}", compute_w_prime(&cohort));
        println!("{}", cohort_to_json(&cohort));
    }
    Ok(())
}
