//! Command execution behind the `cohort-survival` binary.
//!
//! Every command renders all of its outputs in memory before anything is
//! written, so a failing run leaves the output directory untouched.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 input error,
//! 4 schema or parse error, 5 fit failure, 70 internal error.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::distributions::{ModelFamily, DEFAULT_HORIZON_YEARS};
use crate::error::SurvivalError;
use crate::fitting::{FitOptions, FitStrategy};
use crate::hazard_analysis::{analyze_cohorts, AnalysisOptions, CohortAnalysis};
use crate::ingestion::{available_birth_years, build_cohort, parse_bds_csv, parse_cohort_json, BdsRow};
use crate::nonparametric::Cohort;
use crate::report::{EstimateTable, FitTable, StudyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_FIT: i32 = 5;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn exit_code(err: &SurvivalError) -> i32 {
    use SurvivalError::*;
    match err {
        Io(_) | InvalidCohort(_) | DegenerateCohort { .. } | IncompleteCohort { .. } => EXIT_INPUT,
        Schema(_) | Parse { .. } | DuplicateRow { .. } => EXIT_SCHEMA,
        FitFailure { .. } | RankingImpossible(_) | Convergence { .. } | NoChangePoint { .. } => EXIT_FIT,
        Domain { .. } | ParameterDomain { .. } => EXIT_INTERNAL,
    }
}

impl From<SurvivalError> for CliError {
    fn from(err: SurvivalError) -> Self {
        CliError {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Fit,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "svg" | "svg-plot-data" => Ok(OutputFormat::Svg),
            other => Err(CliError::usage(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CohortSelection {
    All,
    Years(Vec<i32>),
}

impl FromStr for CohortSelection {
    type Err = CliError;

    /// `all`, a comma list such as `1977,2011`, or ranges like `1977-1980`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(CohortSelection::All);
        }
        let bad = || CliError::usage(format!("invalid cohort selection '{s}'"));
        let mut years = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b): (i32, i32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                    if a > b {
                        return Err(bad());
                    }
                    years.extend(a..=b);
                }
                None => years.push(part.parse().map_err(|_| bad())?),
            }
        }
        Ok(CohortSelection::Years(years))
    }
}

pub fn parse_strategies(s: &str) -> Result<Vec<FitStrategy>, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "lt" => Ok(vec![FitStrategy::LifeTablePseudoCounts]),
        "pt" => Ok(vec![FitStrategy::PetoTurnbullCounts]),
        "both" => Ok(FitStrategy::BOTH.to_vec()),
        other => Err(CliError::usage(format!("unknown strategy '{other}' (expected lt, pt or both)"))),
    }
}

pub fn parse_families(s: &str) -> Result<Vec<ModelFamily>, CliError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelFamily::ALL.to_vec());
    }
    let mut out: Vec<ModelFamily> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f: ModelFamily = part.parse().map_err(|e: SurvivalError| CliError::usage(e.to_string()))?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

pub fn parse_formats(s: &str) -> Result<Vec<OutputFormat>, CliError> {
    let mut out = Vec::new();
    for f in s.split(',').filter(|p| !p.trim().is_empty()) {
        let f: OutputFormat = f.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub cohorts: CohortSelection,
    pub strategies: Vec<FitStrategy>,
    pub families: Vec<ModelFamily>,
    pub fit: FitOptions,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            cohorts: CohortSelection::All,
            strategies: FitStrategy::BOTH.to_vec(),
            families: ModelFamily::ALL.to_vec(),
            fit: FitOptions::default(),
            out_dir: PathBuf::from("."),
            formats: vec![OutputFormat::Json, OutputFormat::Csv],
        }
    }
}

/// Settings given on the command line or in a TOML config file; unset
/// values fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    pub input: Option<Vec<PathBuf>>,
    pub cohort: Option<String>,
    pub strategy: Option<String>,
    pub families: Option<String>,
    pub restarts: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub horizon_years: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut o = Self::from_toml(&text)?;
        // Relative input and output paths are taken relative to the config file.
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(inputs) = &mut o.input {
            for p in inputs.iter_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = o.out.as_mut().filter(|p| p.is_relative()) {
            *out = base.join(&*out);
        }
        Ok(o)
    }

    /// `self` wins over `lower` field by field.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            input: self.input.or(lower.input),
            cohort: self.cohort.or(lower.cohort),
            strategy: self.strategy.or(lower.strategy),
            families: self.families.or(lower.families),
            restarts: self.restarts.or(lower.restarts),
            tol: self.tol.or(lower.tol),
            max_iter: self.max_iter.or(lower.max_iter),
            horizon_years: self.horizon_years.or(lower.horizon_years),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(i) = self.input {
            c.inputs = i;
        }
        if let Some(s) = self.cohort {
            c.cohorts = s.parse()?;
        }
        if let Some(s) = self.strategy {
            c.strategies = parse_strategies(&s)?;
        }
        if let Some(s) = self.families {
            c.families = parse_families(&s)?;
        }
        if let Some(r) = self.restarts {
            c.fit.restarts = r;
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::usage("--tol must be positive"));
            }
            c.fit.tolerance = t;
        }
        if let Some(m) = self.max_iter {
            c.fit.max_iter = m;
        }
        c.fit.horizon_years = self.horizon_years.unwrap_or(DEFAULT_HORIZON_YEARS);
        if !(c.fit.horizon_years.is_finite() && c.fit.horizon_years > 0.0) {
            return Err(CliError::usage("--horizon-years must be positive"));
        }
        if let Some(o) = self.out {
            c.out_dir = o;
        }
        if let Some(f) = self.format {
            c.formats = parse_formats(&f)?;
        }
        c.validate()?;
        Ok(c)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.inputs.is_empty() {
            return Err(CliError::usage("no --input given"));
        }
        if self.strategies.is_empty() || self.families.is_empty() || self.formats.is_empty() {
            return Err(CliError::usage("at least one strategy, family and output format is required"));
        }
        if self.cohorts == CohortSelection::Years(vec![]) {
            return Err(CliError::usage("empty cohort selection"));
        }
        Ok(())
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            families: self.families.clone(),
            strategies: self.strategies.clone(),
            fit: self.fit,
        }
    }
}

/// Reads every input and assembles the selected cohorts in birth-year order.
pub fn load_cohorts(config: &RunConfig) -> Result<Vec<Cohort>, CliError> {
    let mut rows: Vec<BdsRow> = Vec::new();
    let mut direct: Vec<Cohort> = Vec::new();
    for path in &config.inputs {
        let bytes = fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let at = |e: SurvivalError| CliError {
            code: exit_code(&e),
            message: format!("{}: {e}", path.display()),
        };
        if is_json {
            let text = String::from_utf8(bytes).map_err(|_| CliError::input(format!("{} is not UTF-8", path.display())))?;
            direct.extend(parse_cohort_json(&text).map_err(at)?);
        } else {
            rows.extend(parse_bds_csv(bytes.as_slice()).map_err(at)?);
        }
    }
    let mut seen = HashSet::new();
    for r in &rows {
        if let Some(a) = r.single_age() {
            if !seen.insert((r.year, a)) {
                return Err(SurvivalError::DuplicateRow { year: r.year, age: a, line: r.line }.into());
            }
        }
    }

    let mut cohorts: Vec<Cohort> = Vec::new();
    match &config.cohorts {
        CohortSelection::All => {
            cohorts.extend(direct);
            for year in available_birth_years(&rows) {
                cohorts.push(build_cohort(&rows, year)?);
            }
        }
        CohortSelection::Years(years) => {
            for &year in years {
                match direct.iter().find(|c| c.birth_year() == year) {
                    Some(c) => cohorts.push(c.clone()),
                    None if rows.is_empty() => {
                        return Err(CliError::input(format!("cohort {year} is not present in the input")));
                    }
                    None => cohorts.push(build_cohort(&rows, year)?),
                }
            }
        }
    }
    cohorts.sort_by_key(|c| c.birth_year());
    for pair in cohorts.windows(2) {
        if pair[0].birth_year() == pair[1].birth_year() {
            return Err(CliError::input(format!("cohort {} is supplied more than once", pair[0].birth_year())));
        }
    }
    if cohorts.is_empty() {
        return Err(CliError::input("no complete cohort found in the input"));
    }
    Ok(cohorts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

fn file(name: String, contents: String) -> OutputFile {
    OutputFile { name, contents }
}

fn analyse(config: &RunConfig, cohorts: &[Cohort]) -> Result<Vec<CohortAnalysis>, CliError> {
    analyze_cohorts(cohorts, &config.analysis_options())
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

/// Renders the outputs of `command` without touching the file system
/// beyond reading inputs.
pub fn render(command: Command, config: &RunConfig) -> Result<Vec<OutputFile>, CliError> {
    config.validate()?;
    let cohorts = load_cohorts(config)?;
    let mut out = Vec::new();
    match command {
        Command::Estimate => {
            for c in &cohorts {
                let t = EstimateTable::new(c)?;
                let by = c.birth_year();
                if config.wants(OutputFormat::Json) {
                    out.push(file(format!("estimate_{by}.json"), t.to_json()));
                }
                if config.wants(OutputFormat::Csv) {
                    out.push(file(format!("estimate_{by}.csv"), t.to_csv()?));
                }
            }
        }
        Command::Fit => {
            for a in analyse(config, &cohorts)? {
                for &s in &config.strategies {
                    let t = FitTable::new(&a, s)?;
                    let stem = format!("fit_{}_{}", a.report.birth_year, s.tag());
                    if config.wants(OutputFormat::Json) {
                        out.push(file(format!("{stem}.json"), t.to_json()));
                    }
                    if config.wants(OutputFormat::Csv) {
                        out.push(file(format!("{stem}.csv"), t.to_csv()?));
                    }
                }
            }
        }
        Command::Report => {
            let analyses = analyse(config, &cohorts)?;
            let r = StudyReport::new(&cohorts, &analyses)?;
            if config.wants(OutputFormat::Json) {
                out.push(file("report.json".into(), r.to_json()));
            }
            if config.wants(OutputFormat::Csv) {
                out.push(file("survival.csv".into(), r.survival_csv()?));
                out.push(file("support.csv".into(), r.support_csv()?));
                out.push(file("shape_parameters.csv".into(), r.shape_parameter_csv()?));
            }
            if config.wants(OutputFormat::Svg) {
                out.push(file("survival.svg".into(), r.survival_svg()));
                out.push(file("support.svg".into(), r.support_svg()));
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("the selected formats produce no output for this command"));
    }
    Ok(out)
}

/// Writes `files` into `dir`. Each file is staged under a temporary name and
/// renamed into place; on failure the files already written are removed.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let result = (|| -> std::io::Result<()> {
        for f in files {
            let target = dir.join(&f.name);
            let staged = dir.join(format!(".{}.tmp", f.name));
            fs::write(&staged, &f.contents)?;
            fs::rename(&staged, &target)?;
            written.push(target);
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created_dir {
            let _ = fs::remove_dir(dir);
        }
        return Err(CliError {
            code: EXIT_INPUT,
            message: format!("cannot write outputs to {}: {e}", dir.display()),
        });
    }
    Ok(written)
}

pub fn run(command: Command, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let files = render(command, config)?;
    write_outputs(&config.out_dir, &files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohort_selection_forms() {
        assert_eq!("all".parse::<CohortSelection>().unwrap(), CohortSelection::All);
        assert_eq!("2011".parse::<CohortSelection>().unwrap(), CohortSelection::Years(vec![2011]));
        assert_eq!(
            "1977-1979, 2011".parse::<CohortSelection>().unwrap(),
            CohortSelection::Years(vec![1977, 1978, 1979, 2011])
        );
        assert!("2011-2010".parse::<CohortSelection>().is_err());
        assert!("abc".parse::<CohortSelection>().is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let file = Overrides::from_toml("input = [\"a.csv\"]\nstrategy = \"lt\"\nrestarts = 3\nformat = \"json\"\n").unwrap();
        let flags = Overrides {
            strategy: Some("pt".into()),
            ..Overrides::default()
        };
        let c = flags.over(file).resolve().unwrap();
        assert_eq!(c.strategies, vec![FitStrategy::PetoTurnbullCounts]);
        assert_eq!(c.fit.restarts, 3);
        assert_eq!(c.formats, vec![OutputFormat::Json]);
        assert_eq!(c.inputs, vec![PathBuf::from("a.csv")]);
    }

    #[test]
    fn invalid_settings_are_usage_errors() {
        assert!(Overrides::from_toml("colour = 1").is_err());
        let base = || Overrides {
            input: Some(vec!["x.csv".into()]),
            ..Overrides::default()
        };
        for o in [
            Overrides { families: Some("XYZ".into()), ..base() },
            Overrides { strategy: Some("km".into()), ..base() },
            Overrides { format: Some("".into()), ..base() },
            Overrides { tol: Some(-1.0), ..base() },
            Overrides::default(),
        ] {
            assert_eq!(o.resolve().unwrap_err().code, EXIT_USAGE);
        }
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&SurvivalError::Schema("x".into())), EXIT_SCHEMA);
        assert_eq!(exit_code(&SurvivalError::Io("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&SurvivalError::RankingImpossible("x".into())), EXIT_FIT);
    }
}
