//! Serialized outputs: survival-estimate tables, per-strategy model
//! rankings and the cross-cohort study report, as JSON, CSV and SVG.
//!
//! JSON numbers carry 10 significant digits and infinite values are written
//! as the string `"inf"`. CSV survival columns use 4 decimals and
//! change-points 1 decimal.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::distributions::{ModelFamily, ParamVector, ShapeClass};
use crate::error::{Result, SurvivalError};
use crate::fitting::FitStrategy;
use crate::hazard_analysis::{summarize_shapes, CohortAnalysis, ShapeSummary};
use crate::nonparametric::{compute_w_prime, life_table_estimate, peto_turnbull_closed_form, Cohort};
use crate::selection::SupportClass;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Rounds to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x.is_infinite() {
        Value::from(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        json!(round_significant(x, 10))
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| SurvivalError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| SurvivalError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => round_significant(v, 10).to_string(),
        Some(v) if v.is_infinite() => if v > 0.0 { "inf" } else { "-inf" }.into(),
        _ => String::new(),
    }
}

fn fixed(x: Option<f64>, decimals: usize) -> String {
    x.map_or(String::new(), |v| format!("{v:.decimals$}"))
}

fn boundary_label(b: f64) -> String {
    if b.is_finite() {
        round_significant(b, 10).to_string()
    } else {
        "inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub j: usize,
    pub lower: f64,
    pub upper: f64,
    /// `None` for the open last interval.
    pub entrants: Option<u64>,
    pub deaths: u64,
    pub active: u64,
    pub w_prime: i64,
    pub s_life_table: f64,
    pub s_peto_turnbull: f64,
}

/// Life-table and Peto-Turnbull estimates of one cohort, one row per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTable {
    pub birth_year: i32,
    pub rows: Vec<EstimateRow>,
}

impl EstimateTable {
    pub fn new(cohort: &Cohort) -> Result<Self> {
        let lt = life_table_estimate(cohort)?.values();
        let pt = peto_turnbull_closed_form(cohort)?.values();
        let w = compute_w_prime(cohort);
        let b = cohort.boundaries();
        let k = cohort.n_intervals();
        let rows = (0..k)
            .map(|i| EstimateRow {
                j: i + 1,
                lower: b[i],
                upper: b[i + 1],
                entrants: (i + 1 < k).then(|| cohort.entrants()[i]),
                deaths: cohort.deaths()[i],
                active: cohort.active()[i],
                w_prime: w[i],
                s_life_table: lt[i],
                s_peto_turnbull: pt[i],
            })
            .collect();
        Ok(EstimateTable {
            birth_year: cohort.birth_year(),
            rows,
        })
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "j": r.j,
                    "lower": num(r.lower),
                    "upper": num(r.upper),
                    "E": r.entrants,
                    "D": r.deaths,
                    "N": r.active,
                    "W_prime": r.w_prime,
                    "S_LT": num(r.s_life_table),
                    "S_PT": num(r.s_peto_turnbull),
                })
            })
            .collect();
        json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": "estimate",
            "birth_year": self.birth_year,
            "rows": rows,
        })
    }

    pub fn to_json(&self) -> String {
        to_pretty(&self.to_json_value())
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.j.to_string(),
                    format!("[{},{})", boundary_label(r.lower), boundary_label(r.upper)),
                    r.entrants.map_or(String::new(), |e| e.to_string()),
                    r.deaths.to_string(),
                    r.active.to_string(),
                    r.w_prime.to_string(),
                    format!("{:.4}", r.s_life_table),
                    format!("{:.4}", r.s_peto_turnbull),
                ]
            })
            .collect();
        csv_string(&["j", "interval", "E", "D", "N", "W_prime", "S_LT", "S_PT"], &rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub family: ModelFamily,
    pub n_params: usize,
    pub log_lik: Option<f64>,
    pub aic: Option<f64>,
    pub delta: Option<f64>,
    pub support: Option<SupportClass>,
    pub theta: Option<ParamVector>,
    pub std_errors: Option<Vec<f64>>,
    /// Present for families with `delta <= 20`.
    pub shape: Option<ShapeClass>,
    pub change_point_months: Option<f64>,
    pub beyond_horizon: bool,
    pub converged: bool,
    /// Failure reason; `None` for ranked fits.
    pub failure: Option<String>,
}

/// Ranking of every attempted family for one cohort and strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTable {
    pub birth_year: i32,
    pub strategy: FitStrategy,
    pub rows: Vec<FitRow>,
}

impl FitTable {
    pub fn new(analysis: &CohortAnalysis, strategy: FitStrategy) -> Result<Self> {
        let report = analysis
            .report
            .strategy(strategy)
            .ok_or_else(|| SurvivalError::RankingImpossible(format!("strategy {strategy} was not analysed")))?;
        let mut rows = Vec::new();
        if let Some(ranking) = analysis.ranking(strategy) {
            for ranked in &ranking.entries {
                let fit = analysis.fit(strategy, ranked.family).expect("ranked families have fits");
                let entry = report.get(ranked.family);
                if entry.is_none() && ranked.support != SupportClass::NoSupport {
                    continue; // listed under failures (shape step)
                }
                rows.push(FitRow {
                    family: ranked.family,
                    n_params: fit.n_params,
                    log_lik: Some(fit.log_lik),
                    aic: Some(ranked.aic),
                    delta: Some(ranked.delta),
                    support: Some(ranked.support),
                    theta: Some(fit.theta_hat),
                    std_errors: fit.std_errors.clone(),
                    shape: entry.map(|e| e.shape),
                    change_point_months: entry.and_then(|e| e.change_point_months),
                    beyond_horizon: entry.is_some_and(|e| e.beyond_horizon),
                    converged: fit.converged,
                    failure: None,
                });
            }
        }
        for failure in &report.failed {
            let fit = analysis.fit(strategy, failure.family);
            rows.push(FitRow {
                family: failure.family,
                n_params: failure.family.n_params(),
                log_lik: fit.map(|f| f.log_lik),
                aic: fit.map(|f| f.aic),
                delta: None,
                support: None,
                theta: fit.map(|f| f.theta_hat),
                std_errors: fit.and_then(|f| f.std_errors.clone()),
                shape: None,
                change_point_months: None,
                beyond_horizon: false,
                converged: fit.is_some_and(|f| f.converged),
                failure: Some(failure.reason.clone()),
            });
        }
        Ok(FitTable {
            birth_year: analysis.report.birth_year,
            strategy,
            rows,
        })
    }

    pub fn get(&self, family: ModelFamily) -> Option<&FitRow> {
        self.rows.iter().find(|r| r.family == family)
    }

    pub fn to_json_value(&self) -> Value {
        let models: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let names = r.family.param_names();
                let theta = r.theta.map_or(Value::Null, |t| named(&names, &t.to_vec()));
                let se = r.std_errors.as_ref().map_or(Value::Null, |s| named(&names, s));
                json!({
                    "family": r.family,
                    "K": r.n_params,
                    "log_lik": opt_num(r.log_lik),
                    "aic": opt_num(r.aic),
                    "delta": opt_num(r.delta),
                    "support": r.support,
                    "theta": theta,
                    "std_errors": se,
                    "shape": r.shape,
                    "change_point_months": opt_num(r.change_point_months),
                    "beyond_horizon": r.beyond_horizon,
                    "converged": r.converged,
                    "status": if r.failure.is_some() { "failed" } else { "ok" },
                    "reason": r.failure,
                })
            })
            .collect();
        json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": "fit",
            "birth_year": self.birth_year,
            "strategy": self.strategy,
            "models": models,
        })
    }

    pub fn to_json(&self) -> String {
        to_pretty(&self.to_json_value())
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let value = |name: &str, values: Option<Vec<f64>>| {
                    let names = r.family.param_names();
                    cell(values.and_then(|v| names.iter().position(|n| *n == name).map(|i| v[i])))
                };
                let theta = r.theta.map(|t| t.to_vec());
                vec![
                    r.family.tag().to_string(),
                    r.n_params.to_string(),
                    cell(r.log_lik),
                    cell(r.aic),
                    cell(r.delta),
                    r.support.map_or(String::new(), |s| s.label().to_string()),
                    value("alpha", theta.clone()),
                    value("beta", theta.clone()),
                    value("sigma", theta),
                    value("alpha", r.std_errors.clone()),
                    value("beta", r.std_errors.clone()),
                    value("sigma", r.std_errors.clone()),
                    r.shape.map_or(String::new(), |s| s.label().to_string()),
                    fixed(r.change_point_months, 1),
                    if r.failure.is_some() { "failed" } else { "ok" }.to_string(),
                    r.failure.clone().unwrap_or_default(),
                ]
            })
            .collect();
        csv_string(
            &[
                "family", "K", "log_lik", "aic", "delta", "support", "alpha", "beta", "sigma", "se_alpha", "se_beta",
                "se_sigma", "shape", "change_point_months", "status", "reason",
            ],
            &rows,
        )
    }
}

fn named(names: &[&str], values: &[f64]) -> Value {
    let mut m = Map::new();
    for (n, v) in names.iter().zip(values) {
        m.insert((*n).to_string(), num(*v));
    }
    Value::Object(m)
}

/// One cohort's nonparametric survival at the finite boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries {
    pub birth_year: i32,
    pub strategy: FitStrategy,
    pub ages: Vec<f64>,
    pub survival: Vec<f64>,
}

/// A shape parameter of one fit with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeParameterPoint {
    pub birth_year: i32,
    pub strategy: FitStrategy,
    pub family: ModelFamily,
    pub parameter: &'static str,
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Cross-cohort outputs: survival by cohort, support-class frequencies and
/// the WEI/GAM shape parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub survival: Vec<SurvivalSeries>,
    pub summary: ShapeSummary,
    pub shape_parameters: Vec<ShapeParameterPoint>,
}

impl StudyReport {
    /// `cohorts[i]` must be the cohort behind `analyses[i]`.
    pub fn new(cohorts: &[Cohort], analyses: &[CohortAnalysis]) -> Result<Self> {
        if cohorts.is_empty() || cohorts.len() != analyses.len() {
            return Err(SurvivalError::RankingImpossible("nothing to report".into()));
        }
        let strategies: Vec<FitStrategy> = analyses[0].report.strategies.iter().map(|s| s.strategy).collect();
        let mut survival = Vec::new();
        for cohort in cohorts {
            let finite = cohort.n_intervals() - 1;
            let ages = cohort.boundaries()[1..=finite].to_vec();
            for &strategy in &strategies {
                let est = match strategy {
                    FitStrategy::LifeTablePseudoCounts => life_table_estimate(cohort)?,
                    FitStrategy::PetoTurnbullCounts => peto_turnbull_closed_form(cohort)?,
                };
                survival.push(SurvivalSeries {
                    birth_year: cohort.birth_year(),
                    strategy,
                    ages: ages.clone(),
                    survival: est.values()[..finite].to_vec(),
                });
            }
        }
        let mut shape_parameters = Vec::new();
        for analysis in analyses {
            for &strategy in &strategies {
                for (family, parameter) in [(ModelFamily::Weibull, "alpha"), (ModelFamily::Gamma, "beta")] {
                    let Some(fit) = analysis.fit(strategy, family) else { continue };
                    let names = family.param_names();
                    let i = names.iter().position(|n| *n == parameter).expect("shape parameter exists");
                    shape_parameters.push(ShapeParameterPoint {
                        birth_year: analysis.report.birth_year,
                        strategy,
                        family,
                        parameter,
                        value: fit.theta_hat.to_vec()[i],
                        std_error: fit.std_errors.as_ref().map(|s| s[i]),
                    });
                }
            }
        }
        let reports: Vec<_> = analyses.iter().map(|a| a.report.clone()).collect();
        Ok(StudyReport {
            survival,
            summary: summarize_shapes(&reports),
            shape_parameters,
        })
    }

    pub fn to_json_value(&self) -> Value {
        let survival: Vec<Value> = self
            .survival
            .iter()
            .map(|s| {
                json!({
                    "birth_year": s.birth_year,
                    "strategy": s.strategy,
                    "ages": s.ages.iter().map(|&a| num(a)).collect::<Vec<_>>(),
                    "survival": s.survival.iter().map(|&v| num(v)).collect::<Vec<_>>(),
                })
            })
            .collect();
        let params: Vec<Value> = self
            .shape_parameters
            .iter()
            .map(|p| {
                json!({
                    "birth_year": p.birth_year,
                    "strategy": p.strategy,
                    "family": p.family,
                    "parameter": p.parameter,
                    "value": num(p.value),
                    "std_error": opt_num(p.std_error),
                })
            })
            .collect();
        json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": "report",
            "survival_series": survival,
            "support_frequencies": serde_json::to_value(&self.summary.strategies).expect("summary serializes"),
            "shape_parameters": params,
        })
    }

    pub fn to_json(&self) -> String {
        to_pretty(&self.to_json_value())
    }

    pub fn survival_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .survival
            .iter()
            .flat_map(|s| {
                s.ages.iter().zip(&s.survival).map(move |(a, v)| {
                    vec![s.birth_year.to_string(), s.strategy.tag().into(), boundary_label(*a), format!("{v:.4}")]
                })
            })
            .collect();
        csv_string(&["birth_year", "strategy", "age_years", "survival"], &rows)
    }

    pub fn support_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .summary
            .strategies
            .iter()
            .flat_map(|s| {
                s.families.iter().map(move |t| {
                    vec![
                        s.strategy.tag().into(),
                        t.family.tag().into(),
                        t.best.to_string(),
                        t.best_alone.to_string(),
                        t.little_support.to_string(),
                        t.no_support.to_string(),
                        t.failed.to_string(),
                    ]
                })
            })
            .collect();
        csv_string(&["strategy", "family", "best", "best_alone", "little_support", "no_support", "failed"], &rows)
    }

    pub fn shape_parameter_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .shape_parameters
            .iter()
            .map(|p| {
                vec![
                    p.birth_year.to_string(),
                    p.strategy.tag().into(),
                    p.family.tag().into(),
                    p.parameter.into(),
                    cell(Some(p.value)),
                    cell(p.std_error),
                ]
            })
            .collect();
        csv_string(&["birth_year", "strategy", "family", "parameter", "value", "std_error"], &rows)
    }

    /// Line chart of survival against age, one line per cohort and strategy.
    pub fn survival_svg(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 50.0);
        let max_age = self.survival.iter().flat_map(|s| s.ages.iter().copied()).fold(1.0, f64::max);
        let x = |a: f64| pad + a / max_age * (w - 2.0 * pad);
        let y = |s: f64| h - pad - s * (h - 2.0 * pad);
        let mut svg = svg_frame(w, h, "Survival by birth cohort");
        axes(&mut svg, w, h, pad);
        for (i, s) in self.survival.iter().enumerate() {
            let colour = if s.strategy == FitStrategy::PetoTurnbullCounts { "#1f77b4" } else { "#d62728" };
            let points: Vec<String> = std::iter::once((0.0, 1.0))
                .chain(s.ages.iter().copied().zip(s.survival.iter().copied()))
                .map(|(a, v)| format!("{:.2},{:.2}", x(a), y(v)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline id="s{i}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"><title>{} {}</title></polyline>"#,
                points.join(" "),
                s.birth_year,
                s.strategy.tag()
            );
        }
        for k in 0..=(max_age as usize) {
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{k}</text>"#, x(k as f64), h - pad + 16.0);
        }
        for k in 0..=4 {
            let v = k as f64 / 4.0;
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v:.2}</text>"#, pad - 6.0, y(v) + 4.0);
        }
        svg.push_str("</svg>\n");
        svg
    }

    /// Bar chart of the number of cohorts in which each family is Best.
    pub fn support_svg(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 50.0);
        let groups = &self.summary.strategies;
        let max = groups.iter().flat_map(|s| s.families.iter().map(|t| t.best)).max().unwrap_or(0).max(1) as f64;
        let slot = (w - 2.0 * pad) / ModelFamily::ALL.len() as f64;
        let bar = slot * 0.8 / groups.len().max(1) as f64;
        let mut svg = svg_frame(w, h, "Cohorts with Best support per family");
        axes(&mut svg, w, h, pad);
        for (gi, s) in groups.iter().enumerate() {
            let colour = if s.strategy == FitStrategy::PetoTurnbullCounts { "#1f77b4" } else { "#d62728" };
            for (fi, t) in s.families.iter().enumerate() {
                let height = t.best as f64 / max * (h - 2.0 * pad);
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.2}" y="{:.2}" width="{bar:.2}" height="{height:.2}" fill="{colour}"><title>{} {} {}</title></rect>"#,
                    pad + fi as f64 * slot + slot * 0.1 + gi as f64 * bar,
                    h - pad - height,
                    t.family.tag(),
                    s.strategy.tag(),
                    t.best
                );
            }
        }
        for (fi, f) in ModelFamily::ALL.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                pad + (fi as f64 + 0.5) * slot,
                h - pad + 16.0,
                f.tag()
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn svg_frame(w: f64, h: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{title}</title>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn axes(svg: &mut String, w: f64, h: f64, pad: f64) {
    let _ = writeln!(
        svg,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
}
