//! Interval-censored maximum likelihood for the parametric families.
//!
//! The log-likelihood of a cohort is `sum_j w_j log[S(a_{j-1}) - S(a_j)]`
//! with weights `w_j = D_j` (Peto-Turnbull counts) or the life-table
//! pseudo-counts `N [S_LT(a_{j-1}) - S_LT(a_j)]`. Fits run Nelder-Mead in an
//! unconstrained space (`ln` of positive parameters, `ln(1 + beta)` for GPL)
//! from a fixed grid of starting points.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::distributions::{survival, ModelFamily, ParamVector, DEFAULT_HORIZON_YEARS};
use crate::error::{Result, SurvivalError};
use crate::nonparametric::{life_table_estimate, peto_turnbull_closed_form, Cohort};
use crate::optim::NelderMead;

/// Objective value used for parameter points with zero-probability intervals.
pub const REJECTED_OBJECTIVE: f64 = 1e30;

/// Starting values for each shape parameter.
pub const SHAPE_START_GRID: [f64; 5] = [0.3, 0.7, 1.0, 1.5, 3.0];

/// Relative step of the finite-difference Hessian.
pub const HESSIAN_REL_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FitStrategy {
    #[serde(rename = "LT")]
    LifeTablePseudoCounts,
    #[serde(rename = "PT")]
    PetoTurnbullCounts,
}

impl FitStrategy {
    pub const BOTH: [FitStrategy; 2] = [FitStrategy::LifeTablePseudoCounts, FitStrategy::PetoTurnbullCounts];

    pub fn tag(self) -> &'static str {
        match self {
            FitStrategy::LifeTablePseudoCounts => "LT",
            FitStrategy::PetoTurnbullCounts => "PT",
        }
    }
}

impl fmt::Display for FitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Maximum number of simplex re-launches from each start's optimum.
    pub restarts: usize,
    /// Simplex size tolerance in the unconstrained parameter space.
    pub tolerance: f64,
    /// Iteration cap per simplex run.
    pub max_iter: usize,
    /// Change-point search horizon used by shape analysis, in years.
    pub horizon_years: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 20,
            tolerance: 1e-9,
            max_iter: 10_000,
            horizon_years: DEFAULT_HORIZON_YEARS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: ModelFamily,
    pub strategy: FitStrategy,
    pub theta_hat: ParamVector,
    /// Per-parameter standard errors in `ParamVector::to_vec` order.
    pub std_errors: Option<Vec<f64>>,
    pub log_lik: f64,
    pub aic: f64,
    pub n_params: usize,
    pub converged: bool,
    pub n_restarts_used: usize,
}

/// `AIC = -2 log L + 2K`
pub fn aic(log_lik: f64, n_params: usize) -> f64 {
    -2.0 * log_lik + 2.0 * n_params as f64
}

/// Per-interval weights of the log-likelihood under `strategy`.
pub fn strategy_weights(cohort: &Cohort, strategy: FitStrategy) -> Result<Vec<f64>> {
    match strategy {
        FitStrategy::PetoTurnbullCounts => Ok(cohort.deaths().iter().map(|&d| d as f64).collect()),
        FitStrategy::LifeTablePseudoCounts => {
            let est = life_table_estimate(cohort)?;
            let n = cohort.sample_size() as f64;
            Ok(est.interval_masses().into_iter().map(|m| n * m).collect())
        }
    }
}

/// `sum_j w_j log[S(a_{j-1}) - S(a_j)]`; `-inf` if a weighted interval has
/// no probability mass.
pub fn weighted_log_likelihood(family: ModelFamily, theta: &ParamVector, boundaries: &[f64], weights: &[f64]) -> Result<f64> {
    theta.validate(family)?;
    let surv = boundaries.iter().map(|&a| survival(family, theta, a)).collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for (w, s) in weights.iter().zip(surv.windows(2)) {
        if *w == 0.0 {
            continue;
        }
        let p = s[0] - s[1];
        if !(p > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        total += w * p.ln();
    }
    Ok(total)
}

pub fn interval_log_likelihood(family: ModelFamily, theta: &ParamVector, cohort: &Cohort, strategy: FitStrategy) -> Result<f64> {
    let weights = strategy_weights(cohort, strategy)?;
    weighted_log_likelihood(family, theta, cohort.boundaries(), &weights)
}

fn to_unconstrained(family: ModelFamily, theta: &ParamVector) -> Vec<f64> {
    let mut u = Vec::with_capacity(3);
    if let Some(a) = theta.alpha {
        u.push(a.ln());
    }
    if let Some(b) = theta.beta {
        u.push((b - family.beta_lower_bound()).ln());
    }
    u.push(theta.sigma.ln());
    u
}

fn from_unconstrained(family: ModelFamily, u: &[f64]) -> Option<ParamVector> {
    let mut values: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    if family.has_beta() {
        let idx = usize::from(family.has_alpha());
        values[idx] += family.beta_lower_bound();
    }
    let theta = ParamVector::from_slice(family, &values).ok()?;
    theta.validate(family).ok()?;
    Some(theta)
}

/// Scale start: the first boundary where the Peto-Turnbull survival drops
/// below one half, or the last finite boundary.
fn median_scale(cohort: &Cohort) -> f64 {
    let bounds = cohort.boundaries();
    let last_finite = bounds[bounds.len() - 2].max(1.0);
    peto_turnbull_closed_form(cohort)
        .ok()
        .and_then(|est| est.points.iter().find(|p| p.survival < 0.5).map(|p| p.time))
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(last_finite)
}

/// Deterministic multi-start grid: every shape parameter takes each value of
/// [`SHAPE_START_GRID`] (shifted by the lower bound for GPL's `beta`).
pub fn starting_points(family: ModelFamily, sigma0: f64) -> Vec<ParamVector> {
    let alphas: Vec<Option<f64>> = if family.has_alpha() {
        SHAPE_START_GRID.iter().map(|&g| Some(g)).collect()
    } else {
        vec![None]
    };
    let betas: Vec<Option<f64>> = if family.has_beta() {
        SHAPE_START_GRID.iter().map(|&g| Some(g + family.beta_lower_bound())).collect()
    } else {
        vec![None]
    };
    alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| ParamVector::new(a, b, sigma0)))
        .collect()
}

struct Candidate {
    u: Vec<f64>,
    value: f64,
    converged: bool,
    relaunches: usize,
}

/// Maximum likelihood fit of `family` to `cohort`.
pub fn fit_mle(family: ModelFamily, cohort: &Cohort, strategy: FitStrategy, options: &FitOptions) -> Result<FitResult> {
    let weights = strategy_weights(cohort, strategy)?;
    let boundaries = cohort.boundaries();
    let objective = |u: &[f64]| -> f64 {
        match from_unconstrained(family, u) {
            Some(theta) => match weighted_log_likelihood(family, &theta, boundaries, &weights) {
                Ok(ll) if ll.is_finite() => -ll,
                _ => REJECTED_OBJECTIVE,
            },
            None => REJECTED_OBJECTIVE,
        }
    };
    let nm = NelderMead {
        x_tol: options.tolerance,
        max_iter: options.max_iter,
        ..NelderMead::default()
    };

    let mut best: Option<Candidate> = None;
    for start in starting_points(family, median_scale(cohort)) {
        let mut run = nm.minimize(objective, &to_unconstrained(family, &start));
        let mut relaunches = 0;
        while relaunches < options.restarts && run.value < REJECTED_OBJECTIVE {
            let again = nm.minimize(objective, &run.x);
            relaunches += 1;
            let improvement = run.value - again.value;
            let settled = improvement <= nm.f_rel * (1.0 + run.value.abs());
            if again.value <= run.value {
                run = again;
            }
            if settled {
                break;
            }
        }
        if run.value < best.as_ref().map_or(f64::INFINITY, |b| b.value) {
            best = Some(Candidate {
                u: run.x,
                value: run.value,
                converged: run.converged,
                relaunches,
            });
        }
    }

    let best = match best {
        Some(b) if b.value < REJECTED_OBJECTIVE => b,
        other => {
            return Err(SurvivalError::FitFailure {
                family,
                detail: "no starting point produced a finite likelihood".into(),
                best_log_lik: other.map(|b| -b.value).filter(|v| v.is_finite()),
            })
        }
    };
    let theta_hat = from_unconstrained(family, &best.u).ok_or_else(|| SurvivalError::FitFailure {
        family,
        detail: "optimum left the parameter domain".into(),
        best_log_lik: Some(-best.value),
    })?;
    let log_lik = weighted_log_likelihood(family, &theta_hat, boundaries, &weights)?;
    let n_params = family.n_params();
    let mut fit = FitResult {
        family,
        strategy,
        theta_hat,
        std_errors: None,
        log_lik,
        aic: aic(log_lik, n_params),
        n_params,
        converged: best.converged,
        n_restarts_used: best.relaunches,
    };
    fit.std_errors = standard_errors(&fit, cohort, strategy);
    Ok(fit)
}

/// Observed-information standard errors at `fit.theta_hat`; `None` when the
/// fit did not converge or the Hessian is not positive definite.
pub fn standard_errors(fit: &FitResult, cohort: &Cohort, strategy: FitStrategy) -> Option<Vec<f64>> {
    if !fit.converged {
        return None;
    }
    let weights = strategy_weights(cohort, strategy).ok()?;
    let family = fit.family;
    let neg_ll = |x: &[f64]| -> f64 {
        ParamVector::from_slice(family, x)
            .and_then(|theta| weighted_log_likelihood(family, &theta, cohort.boundaries(), &weights))
            .map(|ll| -ll)
            .unwrap_or(f64::NAN)
    };
    hessian_standard_errors(neg_ll, &fit.theta_hat.to_vec(), HESSIAN_REL_STEP)
}

/// Central-difference Hessian of `objective` (a negative log-likelihood).
pub fn numerical_hessian<F>(objective: F, x: &[f64], rel_step: f64) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let steps: Vec<f64> = x.iter().map(|v| rel_step * v.abs().max(1e-3)).collect();
    let at = |shifts: &[(usize, f64)]| -> f64 {
        let mut p = x.to_vec();
        for &(i, d) in shifts {
            p[i] += d;
        }
        objective(&p)
    };
    let f0 = objective(x);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let hi = steps[i];
        let v = (at(&[(i, hi)]) - 2.0 * f0 + at(&[(i, -hi)])) / (hi * hi);
        h[(i, i)] = v;
        for j in 0..i {
            let hj = steps[j];
            let v = (at(&[(i, hi), (j, hj)]) - at(&[(i, hi), (j, -hj)]) - at(&[(i, -hi), (j, hj)]) + at(&[(i, -hi), (j, -hj)]))
                / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h.iter().all(|v| v.is_finite()).then_some(h)
}

/// Square roots of the diagonal of the inverse Hessian of `objective` at `x`.
pub fn hessian_standard_errors<F>(objective: F, x: &[f64], rel_step: f64) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let h = numerical_hessian(objective, x, rel_step)?;
    let chol = h.cholesky()?;
    let inv = chol.inverse();
    (0..x.len())
        .map(|i| {
            let v = inv[(i, i)];
            (v.is_finite() && v > 0.0).then(|| v.sqrt())
        })
        .collect()
}
