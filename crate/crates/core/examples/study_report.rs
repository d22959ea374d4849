//! Builds the cross-cohort report and writes its JSON, CSV and SVG files.
//!
//! Usage: `cargo run --example study_report [out_dir]`

use std::fs;
use std::path::PathBuf;

use cohort_survival::hazard_analysis::{analyze_cohort_detailed, AnalysisOptions};
use cohort_survival::ingestion::parse_cohort_json;
use cohort_survival::report::{EstimateTable, FitTable, StudyReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "study_report_out".into()));
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/cohort_2011.json"))?;
    let cohorts = parse_cohort_json(&text)?;
    let options = AnalysisOptions::default();
    let analyses = cohorts
        .iter()
        .map(|c| analyze_cohort_detailed(c, &options))
        .collect::<Result<Vec<_>, _>>()?;

    fs::create_dir_all(&out)?;
    for (c, a) in cohorts.iter().zip(&analyses) {
        fs::write(out.join(format!("estimate_{}.csv", c.birth_year())), EstimateTable::new(c)?.to_csv()?)?;
        for &s in &options.strategies {
            fs::write(out.join(format!("fit_{}_{}.json", c.birth_year(), s.tag())), FitTable::new(a, s)?.to_json())?;
        }
    }
    let report = StudyReport::new(&cohorts, &analyses)?;
    fs::write(out.join("report.json"), report.to_json())?;
    fs::write(out.join("survival.csv"), report.survival_csv()?)?;
    fs::write(out.join("support.csv"), report.support_csv()?)?;
    fs::write(out.join("survival.svg"), report.survival_svg())?;
    fs::write(out.join("support.svg"), report.support_svg())?;
    println!("wrote {}", out.display());
    Ok(())
}
