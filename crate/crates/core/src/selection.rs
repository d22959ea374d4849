//! AIC ranking with the three support classes
//! `delta <= 2`, `2 < delta <= 20` and `delta > 20`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::ModelFamily;
use crate::error::{Result, SurvivalError};
use crate::fitting::FitResult;

pub const BEST_DELTA: f64 = 2.0;
pub const LITTLE_SUPPORT_DELTA: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SupportClass {
    Best,
    LittleSupport,
    NoSupport,
}

impl SupportClass {
    pub fn from_delta(delta: f64) -> Self {
        if delta <= BEST_DELTA {
            SupportClass::Best
        } else if delta <= LITTLE_SUPPORT_DELTA {
            SupportClass::LittleSupport
        } else {
            SupportClass::NoSupport
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SupportClass::Best => "Best",
            SupportClass::LittleSupport => "LittleSupport",
            SupportClass::NoSupport => "NoSupport",
        }
    }
}

impl fmt::Display for SupportClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub family: ModelFamily,
    pub aic: f64,
    pub delta: f64,
    pub support: SupportClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRanking {
    /// Sorted by ascending delta, ties by family order.
    pub entries: Vec<RankedModel>,
    /// Families whose fit failed; excluded from `AIC_min`.
    pub failed: Vec<ModelFamily>,
}

impl ModelRanking {
    pub fn get(&self, family: ModelFamily) -> Option<&RankedModel> {
        self.entries.iter().find(|e| e.family == family)
    }

    pub fn with_support(&self, class: SupportClass) -> impl Iterator<Item = &RankedModel> {
        self.entries.iter().filter(move |e| e.support == class)
    }

    pub fn best_families(&self) -> Vec<ModelFamily> {
        self.with_support(SupportClass::Best).map(|e| e.family).collect()
    }
}

/// Ranks `(family, aic)` pairs; `None` AIC marks a failed fit.
pub fn rank_aics(aics: &[(ModelFamily, Option<f64>)]) -> Result<ModelRanking> {
    if aics.is_empty() {
        return Err(SurvivalError::RankingImpossible("no fits supplied".into()));
    }
    let mut failed = Vec::new();
    let mut ok = Vec::new();
    for &(family, aic) in aics {
        match aic {
            Some(a) if a.is_finite() => ok.push((family, a)),
            _ => failed.push(family),
        }
    }
    let min = ok
        .iter()
        .map(|&(_, a)| a)
        .min_by(f64::total_cmp)
        .ok_or_else(|| SurvivalError::RankingImpossible("every fit failed".into()))?;
    let mut entries: Vec<RankedModel> = ok
        .into_iter()
        .map(|(family, aic)| {
            let delta = aic - min;
            RankedModel {
                family,
                aic,
                delta,
                support: SupportClass::from_delta(delta),
            }
        })
        .collect();
    entries.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.family.cmp(&b.family)));
    failed.sort();
    Ok(ModelRanking { entries, failed })
}

/// Ranks fits of one cohort and strategy. Fits that did not converge are
/// reported as failed.
pub fn rank_models(fits: &[FitResult]) -> Result<ModelRanking> {
    let aics: Vec<_> = fits.iter().map(|f| (f.family, f.converged.then_some(f.aic))).collect();
    rank_aics(&aics)
}
