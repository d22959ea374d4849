//! Establishment-age tables (BDS layout) and cohort documents.
//!
//! A BDS table has one row per `(year, estab_age)` with the number of active
//! establishments and the entries and exits of the preceding 12 months. A
//! birth cohort `b` follows the diagonal `(b + a, a)` for `a = 0..=5`.
//!
//! Header names are matched case-insensitively after trimming and mapping
//! spaces and hyphens to underscores, so `Estab Age` and `estab-age` both
//! resolve to `estab_age`. `year2` is accepted for `year` and `age` for
//! `estab_age`.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SurvivalError};
use crate::nonparametric::Cohort;

/// Oldest single-year age used for cohorts; older ages come in bands.
pub const MAX_SINGLE_AGE: u32 = 5;

pub const COHORT_SCHEMA_VERSION: u32 = 1;

const REQUIRED: [&str; 5] = ["year", "estab_age", "estabs", "estabs_entry", "estabs_exit"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstabAge {
    Years(u32),
    /// Multi-year band or other non-numeric label, kept verbatim.
    Banded(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BdsRow {
    pub year: i32,
    pub age: EstabAge,
    pub estabs: u64,
    pub estabs_entry: u64,
    pub estabs_exit: u64,
    /// 1-based source line, 0 for rows built in memory.
    pub line: u64,
}

impl BdsRow {
    pub fn new(year: i32, age: u32, estabs: u64, estabs_entry: u64, estabs_exit: u64) -> Self {
        BdsRow {
            year,
            age: EstabAge::Years(age),
            estabs,
            estabs_entry,
            estabs_exit,
            line: 0,
        }
    }

    /// Single-year age in `0..=5`, `None` for bands and older ages.
    pub fn single_age(&self) -> Option<u32> {
        match self.age {
            EstabAge::Years(a) if a <= MAX_SINGLE_AGE => Some(a),
            _ => None,
        }
    }
}

fn normalize_header(h: &str) -> String {
    let n: String = h
        .trim()
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect();
    match n.as_str() {
        "year2" => "year".into(),
        "age" => "estab_age".into(),
        _ => n,
    }
}

fn parse_age(cell: &str) -> EstabAge {
    let cell = cell.trim();
    if let Ok(a) = cell.parse::<u32>() {
        return EstabAge::Years(a);
    }
    // Labels such as "a) 0" from the public release.
    if let Some((prefix, rest)) = cell.split_once(')') {
        if prefix.len() == 1 && prefix.chars().all(|c| c.is_ascii_alphabetic()) {
            if let Ok(a) = rest.trim().parse::<u32>() {
                return EstabAge::Years(a);
            }
        }
    }
    EstabAge::Banded(cell.to_string())
}

/// Parses a BDS establishment-age CSV.
pub fn parse_bds_csv<R: Read>(source: R) -> Result<Vec<BdsRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(source);
    let headers = reader.headers().map_err(|e| SurvivalError::Schema(format!("cannot read header: {e}")))?.clone();
    let names: Vec<String> = headers.iter().map(normalize_header).collect();
    let mut index = [0usize; 5];
    for (slot, want) in index.iter_mut().zip(REQUIRED) {
        *slot = names
            .iter()
            .position(|n| n == want)
            .ok_or_else(|| SurvivalError::Schema(format!("missing required column '{want}'")))?;
    }
    let [i_year, i_age, i_estabs, i_entry, i_exit] = index;

    let mut rows = Vec::new();
    let mut seen: HashMap<(i32, u32), u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            SurvivalError::Parse {
                line,
                column: String::new(),
                detail: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(i).unwrap_or("");
        let number = |i: usize| -> Result<u64> {
            cell(i).parse::<u64>().map_err(|_| SurvivalError::Parse {
                line,
                column: REQUIRED[index.iter().position(|&k| k == i).unwrap_or(0)].into(),
                detail: format!("expected a non-negative integer, got '{}'", cell(i)),
            })
        };
        let year = cell(i_year).parse::<i32>().map_err(|_| SurvivalError::Parse {
            line,
            column: "year".into(),
            detail: format!("expected an integer year, got '{}'", cell(i_year)),
        })?;
        let row = BdsRow {
            year,
            age: parse_age(cell(i_age)),
            estabs: number(i_estabs)?,
            estabs_entry: number(i_entry)?,
            estabs_exit: number(i_exit)?,
            line,
        };
        if let EstabAge::Years(a) = row.age {
            if seen.insert((year, a), line).is_some() {
                return Err(SurvivalError::DuplicateRow { year, age: a, line });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn index_rows(rows: &[BdsRow]) -> HashMap<(i32, u32), &BdsRow> {
    rows.iter().filter_map(|r| r.single_age().map(|a| ((r.year, a), r))).collect()
}

/// Assembles the birth cohort of `birth_year` over ages `0..=5`.
pub fn build_cohort(rows: &[BdsRow], birth_year: i32) -> Result<Cohort> {
    let index = index_rows(rows);
    let get = |age: u32| {
        let year = birth_year + age as i32;
        index.get(&(year, age)).copied().ok_or(SurvivalError::IncompleteCohort { birth_year, year, age })
    };
    let intervals = MAX_SINGLE_AGE as usize + 1;
    let mut active = Vec::with_capacity(intervals);
    let mut entrants = Vec::with_capacity(intervals - 1);
    let mut deaths = Vec::with_capacity(intervals);
    for age in 0..=MAX_SINGLE_AGE {
        active.push(get(age)?.estabs);
    }
    for j in 1..=MAX_SINGLE_AGE {
        let row = get(j)?;
        deaths.push(row.estabs_exit);
        // Entrants recorded at age 0 (and in the first interval) are births,
        // not late entries into the cohort.
        entrants.push(if j == 1 { 0 } else { row.estabs_entry });
    }
    deaths.push(active[intervals - 1]);
    Cohort::new(birth_year, Cohort::annual_boundaries(intervals), active, entrants, deaths)
}

/// Birth years whose full diagonal `(b + a, a)`, `a = 0..=5`, is present.
pub fn available_birth_years(rows: &[BdsRow]) -> Vec<i32> {
    let index = index_rows(rows);
    let candidates: BTreeSet<i32> = index.keys().filter(|(_, a)| *a == 0).map(|(y, _)| *y).collect();
    candidates
        .into_iter()
        .filter(|&b| (0..=MAX_SINGLE_AGE).all(|a| index.contains_key(&(b + a as i32, a))))
        .collect()
}

/// Rows that [`build_cohort`] maps back onto `cohort` (annual layout only).
pub fn cohort_to_bds_rows(cohort: &Cohort) -> Vec<BdsRow> {
    let n = cohort.n_intervals();
    (0..n)
        .map(|age| {
            let (entry, exit) = if age == 0 {
                (cohort.active()[0], 0)
            } else {
                (cohort.entrants()[age - 1], cohort.deaths()[age - 1])
            };
            BdsRow::new(cohort.birth_year() + age as i32, age as u32, cohort.active()[age], entry, exit)
        })
        .collect()
}

pub fn write_bds_csv<W: Write>(rows: &[BdsRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| SurvivalError::Io(e.to_string());
    w.write_record(REQUIRED).map_err(io)?;
    for r in rows {
        let age = match &r.age {
            EstabAge::Years(a) => a.to_string(),
            EstabAge::Banded(s) => s.clone(),
        };
        w.write_record([
            r.year.to_string(),
            age,
            r.estabs.to_string(),
            r.estabs_entry.to_string(),
            r.estabs_exit.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Boundary value in a cohort document: a number or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum BoundaryValue {
    Number(f64),
    Text(String),
}

/// JSON form of a cohort:
/// `{"schema_version": 1, "birth_year": ..., "boundaries": [0, 1, ..., "inf"], "N": [...], "E": [...], "D": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortDocument {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub birth_year: i32,
    boundaries: Vec<Option<BoundaryValue>>,
    #[serde(rename = "N")]
    pub active: Vec<u64>,
    #[serde(rename = "E", default)]
    pub entrants: Vec<Option<u64>>,
    #[serde(rename = "D")]
    pub deaths: Vec<u64>,
}

fn default_schema_version() -> u32 {
    COHORT_SCHEMA_VERSION
}

impl CohortDocument {
    pub fn from_cohort(cohort: &Cohort) -> Self {
        let n = cohort.n_intervals();
        CohortDocument {
            schema_version: COHORT_SCHEMA_VERSION,
            birth_year: cohort.birth_year(),
            boundaries: cohort
                .boundaries()
                .iter()
                .map(|&b| Some(if b.is_finite() { BoundaryValue::Number(b) } else { BoundaryValue::Text("inf".into()) }))
                .collect(),
            active: cohort.active().to_vec(),
            entrants: cohort.entrants()[..n - 1].iter().map(|&e| Some(e)).collect(),
            deaths: cohort.deaths().to_vec(),
        }
    }

    pub fn into_cohort(self) -> Result<Cohort> {
        if self.schema_version != COHORT_SCHEMA_VERSION {
            return Err(SurvivalError::Schema(format!("unsupported cohort schema_version {}", self.schema_version)));
        }
        let boundaries = self
            .boundaries
            .iter()
            .map(|b| match b {
                None => Ok(f64::INFINITY),
                Some(BoundaryValue::Number(v)) => Ok(*v),
                Some(BoundaryValue::Text(s)) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") => {
                    Ok(f64::INFINITY)
                }
                Some(BoundaryValue::Text(s)) => Err(SurvivalError::Schema(format!("invalid boundary '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut entrants = self.entrants;
        // A trailing null stands for the unused entrant count of the last interval.
        if entrants.len() == self.deaths.len() && entrants.last() == Some(&None) {
            entrants.pop();
        }
        let entrants = entrants
            .into_iter()
            .map(|e| e.ok_or_else(|| SurvivalError::Schema("entrant counts may only be null in the last interval".into())))
            .collect::<Result<Vec<_>>>()?;
        Cohort::new(self.birth_year, boundaries, self.active, entrants, self.deaths)
    }
}

/// Parses one cohort object or an array of them.
pub fn parse_cohort_json(text: &str) -> Result<Vec<Cohort>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(CohortDocument),
        Many(Vec<CohortDocument>),
    }
    let docs = match serde_json::from_str::<OneOrMany>(text) {
        Ok(OneOrMany::One(d)) => vec![d],
        Ok(OneOrMany::Many(v)) => v,
        Err(e) => return Err(SurvivalError::Schema(format!("invalid cohort document: {e}"))),
    };
    docs.into_iter().map(CohortDocument::into_cohort).collect()
}

pub fn cohort_to_json(cohort: &Cohort) -> String {
    serde_json::to_string_pretty(&CohortDocument::from_cohort(cohort)).expect("cohort documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "year,estab_age,estabs,estabs_entry,estabs_exit\n";

    #[test]
    fn header_synonyms_and_case() {
        let text = "Year2, Estab Age ,ESTABS,estabs-entry,Estabs_Exit\n2011,0,5,5,0\n";
        let rows = parse_bds_csv(text.as_bytes()).unwrap();
        assert_eq!(rows[0].year, 2011);
        assert_eq!(rows[0].single_age(), Some(0));
    }

    #[test]
    fn empty_body() {
        assert!(parse_bds_csv(HEADER.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn missing_column_is_schema_error() {
        let err = parse_bds_csv("year,estab_age,estabs,estabs_entry\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SurvivalError::Schema(m) if m.contains("estabs_exit")));
    }

    #[test]
    fn bad_number_reports_location() {
        let text = format!("{HEADER}2011,0,5,5,0\n2012,1,x,0,1\n");
        match parse_bds_csv(text.as_bytes()).unwrap_err() {
            SurvivalError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "estabs");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bands_are_kept_but_excluded() {
        let text = format!("{HEADER}2011,6 to 10,100,3,4\n2011,a) 0,7,7,0\n2011,12,1,1,1\n");
        let rows = parse_bds_csv(text.as_bytes()).unwrap();
        assert_eq!(rows[0].age, EstabAge::Banded("6 to 10".into()));
        assert_eq!(rows[0].single_age(), None);
        assert_eq!(rows[1].single_age(), Some(0));
        assert_eq!(rows[2].single_age(), None);
    }

    #[test]
    fn duplicate_rows_are_rejected() {
        let text = format!("{HEADER}2011,0,5,5,0\n2011,0,6,6,0\n");
        assert!(matches!(parse_bds_csv(text.as_bytes()), Err(SurvivalError::DuplicateRow { year: 2011, age: 0, .. })));
    }

    #[test]
    fn incomplete_cohort_names_missing_row() {
        let rows = vec![BdsRow::new(2011, 0, 10, 10, 0), BdsRow::new(2012, 1, 8, 0, 2)];
        let err = build_cohort(&rows, 2011).unwrap_err();
        assert_eq!(err, SurvivalError::IncompleteCohort { birth_year: 2011, year: 2013, age: 2 });
    }

    #[test]
    fn closed_population_has_zero_withdrawals() {
        let c = Cohort::closed(1990, Cohort::annual_boundaries(6), vec![30, 20, 10, 8, 6, 26]).unwrap();
        let rebuilt = build_cohort(&cohort_to_bds_rows(&c), 1990).unwrap();
        assert_eq!(crate::nonparametric::compute_w_prime(&rebuilt), vec![0; 6]);
    }

    #[test]
    fn json_document_round_trip() {
        let c = Cohort::new(2001, vec![0.0, 1.0, f64::INFINITY], vec![100, 75], vec![0], vec![25, 75]).unwrap();
        let text = cohort_to_json(&c);
        assert!(text.contains("\"inf\""));
        assert_eq!(parse_cohort_json(&text).unwrap(), vec![c]);
    }

    #[test]
    fn json_accepts_null_infinity_and_trailing_null_entrant() {
        let text = r#"[{"birth_year": 5, "boundaries": [0, 1, null], "N": [4, 3], "E": [0, null], "D": [1, 3]}]"#;
        let c = &parse_cohort_json(text).unwrap()[0];
        assert_eq!(c.boundaries()[2], f64::INFINITY);
        assert!(parse_cohort_json(r#"{"birth_year": 5, "boundaries": [0, "x"], "N": [1], "D": [1]}"#).is_err());
        assert!(parse_cohort_json(r#"{"schema_version": 9, "birth_year": 5, "boundaries": [0, "inf"], "N": [1], "D": [1]}"#).is_err());
    }
}
