//! Per-cohort hazard shape study: fit every family under each strategy,
//! rank by AIC and classify the hazard of every supported model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{classify_shape_with_horizon, ModelFamily, ShapeClass};
use crate::error::{Result, SurvivalError};
use crate::fitting::{fit_mle, FitOptions, FitResult, FitStrategy};
use crate::nonparametric::Cohort;
use crate::selection::{rank_aics, ModelRanking, SupportClass};

/// Families compared together in the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyGroup {
    /// EXP, WEI, GAM and GGD, nested in the generalized gamma.
    GeneralizedGamma,
    /// PA2, FSK and BUR, nested in the Burr.
    Burr,
    /// The three-parameter families GGD, BUR, GPL and DAG.
    ThreeParameter,
    All,
}

impl FamilyGroup {
    pub fn families(self) -> &'static [ModelFamily] {
        use ModelFamily::*;
        match self {
            FamilyGroup::GeneralizedGamma => &[Exponential, Weibull, Gamma, GeneralizedGamma],
            FamilyGroup::Burr => &[Lomax, Fisk, BurrXII],
            FamilyGroup::ThreeParameter => &[GeneralizedGamma, BurrXII, GeneralizedPowerLaw, Dagum],
            FamilyGroup::All => &ModelFamily::ALL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub families: Vec<ModelFamily>,
    pub strategies: Vec<FitStrategy>,
    pub fit: FitOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            families: ModelFamily::ALL.to_vec(),
            strategies: FitStrategy::BOTH.to_vec(),
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub family: ModelFamily,
    pub aic: f64,
    pub delta: f64,
    pub support: SupportClass,
    pub shape: ShapeClass,
    /// Present exactly when `shape` is UBT or BT.
    pub change_point_months: Option<f64>,
    pub beyond_horizon: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyFailure {
    pub family: ModelFamily,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: FitStrategy,
    /// Families with `delta <= 20`, by ascending delta.
    pub entries: Vec<ShapeEntry>,
    pub no_support: Vec<ModelFamily>,
    pub failed: Vec<FamilyFailure>,
}

impl StrategyReport {
    pub fn get(&self, family: ModelFamily) -> Option<&ShapeEntry> {
        self.entries.iter().find(|e| e.family == family)
    }

    pub fn best(&self) -> impl Iterator<Item = &ShapeEntry> {
        self.entries.iter().filter(|e| e.support == SupportClass::Best)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortShapeReport {
    pub birth_year: i32,
    pub strategies: Vec<StrategyReport>,
}

impl CohortShapeReport {
    pub fn strategy(&self, strategy: FitStrategy) -> Option<&StrategyReport> {
        self.strategies.iter().find(|s| s.strategy == strategy)
    }
}

/// Report plus the fits and rankings it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortAnalysis {
    pub report: CohortShapeReport,
    /// Fits that returned a result, in strategy-then-family order.
    pub fits: Vec<FitResult>,
    pub rankings: Vec<(FitStrategy, ModelRanking)>,
}

impl CohortAnalysis {
    pub fn fit(&self, strategy: FitStrategy, family: ModelFamily) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.strategy == strategy && f.family == family)
    }

    pub fn ranking(&self, strategy: FitStrategy) -> Option<&ModelRanking> {
        self.rankings.iter().find(|(s, _)| *s == strategy).map(|(_, r)| r)
    }

    /// AIC ranking restricted to the families of `group`.
    pub fn group_ranking(&self, strategy: FitStrategy, group: FamilyGroup) -> Result<ModelRanking> {
        let aics: Vec<_> = group
            .families()
            .iter()
            .filter_map(|&family| {
                let fit = self.fit(strategy, family);
                let attempted = fit.is_some() || self.report.strategy(strategy)?.failed.iter().any(|f| f.family == family);
                attempted.then(|| (family, fit.filter(|f| f.converged).map(|f| f.aic)))
            })
            .collect();
        rank_aics(&aics)
    }
}

pub fn analyze_cohort(cohort: &Cohort, options: &AnalysisOptions) -> Result<CohortShapeReport> {
    analyze_cohort_detailed(cohort, options).map(|a| a.report)
}

pub fn analyze_cohort_detailed(cohort: &Cohort, options: &AnalysisOptions) -> Result<CohortAnalysis> {
    if options.families.is_empty() || options.strategies.is_empty() {
        return Err(SurvivalError::RankingImpossible("no families or strategies selected".into()));
    }
    let jobs: Vec<(FitStrategy, ModelFamily)> = options
        .strategies
        .iter()
        .flat_map(|&s| options.families.iter().map(move |&f| (s, f)))
        .collect();
    // Indexed collection keeps the output order independent of scheduling.
    let outcomes: Vec<Result<FitResult>> = jobs.par_iter().map(|&(s, f)| fit_mle(f, cohort, s, &options.fit)).collect();

    let mut fits = Vec::new();
    let mut strategies = Vec::new();
    let mut rankings = Vec::new();
    for &strategy in &options.strategies {
        let mut failed = Vec::new();
        let mut aics = Vec::new();
        for (&(s, family), outcome) in jobs.iter().zip(&outcomes) {
            if s != strategy {
                continue;
            }
            match outcome {
                Ok(fit) if fit.converged => {
                    aics.push((family, Some(fit.aic)));
                    fits.push(fit.clone());
                }
                Ok(fit) => {
                    failed.push(FamilyFailure {
                        family,
                        reason: "optimizer did not converge".into(),
                    });
                    aics.push((family, None));
                    fits.push(fit.clone());
                }
                Err(e) => {
                    failed.push(FamilyFailure {
                        family,
                        reason: e.to_string(),
                    });
                    aics.push((family, None));
                }
            }
        }
        let mut entries = Vec::new();
        let mut no_support = Vec::new();
        if let Ok(ranking) = rank_aics(&aics) {
            for ranked in &ranking.entries {
                if ranked.support == SupportClass::NoSupport {
                    no_support.push(ranked.family);
                    continue;
                }
                let fit = fits
                    .iter()
                    .find(|f| f.strategy == strategy && f.family == ranked.family)
                    .expect("ranked families have fits");
                match classify_shape_with_horizon(fit.family, &fit.theta_hat, options.fit.horizon_years) {
                    Ok(shape) => entries.push(ShapeEntry {
                        family: ranked.family,
                        aic: ranked.aic,
                        delta: ranked.delta,
                        support: ranked.support,
                        shape: shape.shape,
                        change_point_months: shape.change_point_months,
                        beyond_horizon: shape.beyond_horizon,
                    }),
                    Err(e) => failed.push(FamilyFailure {
                        family: ranked.family,
                        reason: format!("shape classification failed: {e}"),
                    }),
                }
            }
            rankings.push((strategy, ranking));
        }
        failed.sort_by_key(|f| f.family);
        strategies.push(StrategyReport {
            strategy,
            entries,
            no_support,
            failed,
        });
    }
    if rankings.is_empty() {
        return Err(SurvivalError::RankingImpossible(format!(
            "no family could be fitted to cohort {}",
            cohort.birth_year()
        )));
    }
    Ok(CohortAnalysis {
        report: CohortShapeReport {
            birth_year: cohort.birth_year(),
            strategies,
        },
        fits,
        rankings,
    })
}

/// Analyses several cohorts in parallel; results keep the input order.
pub fn analyze_cohorts(cohorts: &[Cohort], options: &AnalysisOptions) -> Vec<Result<CohortAnalysis>> {
    cohorts.par_iter().map(|c| analyze_cohort_detailed(c, options)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTally {
    pub family: ModelFamily,
    pub best: usize,
    /// Cohorts where this family was the only Best model.
    pub best_alone: usize,
    pub little_support: usize,
    pub no_support: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeCount {
    pub shape: ShapeClass,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: FitStrategy,
    pub cohorts: usize,
    pub families: Vec<FamilyTally>,
    /// Shape classes among Best entries.
    pub best_shapes: Vec<ShapeCount>,
}

impl StrategySummary {
    pub fn tally(&self, family: ModelFamily) -> Option<&FamilyTally> {
        self.families.iter().find(|t| t.family == family)
    }

    pub fn shape_count(&self, shape: ShapeClass) -> usize {
        self.best_shapes.iter().find(|c| c.shape == shape).map_or(0, |c| c.count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub strategies: Vec<StrategySummary>,
}

impl ShapeSummary {
    pub fn strategy(&self, strategy: FitStrategy) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == strategy)
    }
}

const SHAPE_ORDER: [ShapeClass; 6] = [
    ShapeClass::Decreasing,
    ShapeClass::Constant,
    ShapeClass::Increasing,
    ShapeClass::UpsideDownBathtub,
    ShapeClass::Bathtub,
    ShapeClass::BathtubThenUpsideDown,
];

/// Frequency of support classes per family and of hazard shapes among Best
/// models, per strategy.
pub fn summarize_shapes(reports: &[CohortShapeReport]) -> ShapeSummary {
    let mut order: Vec<FitStrategy> = Vec::new();
    for s in reports.iter().flat_map(|r| &r.strategies) {
        if !order.contains(&s.strategy) {
            order.push(s.strategy);
        }
    }
    let strategies = order
        .into_iter()
        .map(|strategy| {
            let mut families: Vec<FamilyTally> = ModelFamily::ALL
                .iter()
                .map(|&family| FamilyTally {
                    family,
                    best: 0,
                    best_alone: 0,
                    little_support: 0,
                    no_support: 0,
                    failed: 0,
                })
                .collect();
            let mut shapes = [0usize; 6];
            let mut cohorts = 0;
            for report in reports.iter().filter_map(|r| r.strategy(strategy)) {
                cohorts += 1;
                let best: Vec<_> = report.best().collect();
                for e in &report.entries {
                    let t = &mut families[e.family as usize];
                    match e.support {
                        SupportClass::Best => {
                            t.best += 1;
                            if best.len() == 1 {
                                t.best_alone += 1;
                            }
                        }
                        _ => t.little_support += 1,
                    }
                }
                for &f in &report.no_support {
                    families[f as usize].no_support += 1;
                }
                for f in &report.failed {
                    families[f.family as usize].failed += 1;
                }
                for e in best {
                    shapes[SHAPE_ORDER.iter().position(|&s| s == e.shape).expect("known shape")] += 1;
                }
            }
            StrategySummary {
                strategy,
                cohorts,
                families,
                best_shapes: SHAPE_ORDER
                    .iter()
                    .zip(shapes)
                    .filter(|(_, n)| *n > 0)
                    .map(|(&shape, count)| ShapeCount { shape, count })
                    .collect(),
            }
        })
        .collect();
    ShapeSummary { strategies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModelFamily::*;

    fn entry(family: ModelFamily, delta: f64) -> ShapeEntry {
        ShapeEntry {
            family,
            aic: 100.0 + delta,
            delta,
            support: SupportClass::from_delta(delta),
            shape: ShapeClass::Decreasing,
            change_point_months: None,
            beyond_horizon: false,
        }
    }

    fn report(year: i32, entries: Vec<ShapeEntry>) -> CohortShapeReport {
        CohortShapeReport {
            birth_year: year,
            strategies: vec![StrategyReport {
                strategy: FitStrategy::PetoTurnbullCounts,
                entries,
                no_support: vec![Exponential],
                failed: vec![],
            }],
        }
    }

    #[test]
    fn single_report_tally() {
        let s = summarize_shapes(&[report(2011, vec![entry(GeneralizedGamma, 0.0)])]);
        let pt = s.strategy(FitStrategy::PetoTurnbullCounts).unwrap();
        assert_eq!(pt.tally(GeneralizedGamma).unwrap().best, 1);
        assert_eq!(pt.tally(GeneralizedGamma).unwrap().best_alone, 1);
        for f in ModelFamily::ALL.into_iter().filter(|&f| f != GeneralizedGamma) {
            assert_eq!(pt.tally(f).unwrap().best, 0);
        }
        assert_eq!(pt.tally(Exponential).unwrap().no_support, 1);
        assert_eq!(pt.shape_count(ShapeClass::Decreasing), 1);
    }

    #[test]
    fn two_report_tally() {
        let s = summarize_shapes(&[
            report(1, vec![entry(GeneralizedGamma, 0.0)]),
            report(2, vec![entry(Dagum, 0.0), entry(GeneralizedPowerLaw, 1.0), entry(Weibull, 9.0)]),
        ]);
        let pt = s.strategy(FitStrategy::PetoTurnbullCounts).unwrap();
        assert_eq!(pt.cohorts, 2);
        for f in [GeneralizedGamma, Dagum, GeneralizedPowerLaw] {
            assert_eq!(pt.tally(f).unwrap().best, 1, "{f}");
        }
        assert_eq!(pt.tally(Dagum).unwrap().best_alone, 0);
        assert_eq!(pt.tally(Weibull).unwrap().little_support, 1);
        assert_eq!(pt.shape_count(ShapeClass::Decreasing), 3);
    }

    #[test]
    fn empty_selection_is_an_error() {
        let c = Cohort::closed(2000, vec![0.0, 1.0, f64::INFINITY], vec![25, 75]).unwrap();
        let opts = AnalysisOptions {
            families: vec![],
            ..AnalysisOptions::default()
        };
        assert!(analyze_cohort(&c, &opts).is_err());
    }

    #[test]
    fn exponential_only_ranks_at_zero() {
        let c = Cohort::closed(2000, vec![0.0, 1.0, f64::INFINITY], vec![50, 50]).unwrap();
        let opts = AnalysisOptions {
            families: vec![Exponential],
            ..AnalysisOptions::default()
        };
        let r = analyze_cohort(&c, &opts).unwrap();
        for s in &r.strategies {
            assert_eq!(s.entries.len(), 1);
            assert_eq!(s.entries[0].delta, 0.0);
            assert_eq!(s.entries[0].shape, ShapeClass::Constant);
        }
    }
}
