//! Fits data generated from a known model and compares the estimates with
//! the truth, including the change-point of a unimodal hazard.

use cohort_survival::distributions::{classify_shape, survival, ModelFamily, ParamVector};
use cohort_survival::fitting::{fit_mle, FitOptions, FitStrategy};
use cohort_survival::nonparametric::Cohort;

/// Expected interval counts of `n` lifetimes drawn from `family`.
fn expected_cohort(family: ModelFamily, theta: &ParamVector, n: f64, boundaries: Vec<f64>) -> Result<Cohort, Box<dyn std::error::Error>> {
    let mut deaths = Vec::new();
    for w in boundaries.windows(2) {
        let mass = survival(family, theta, w[0])? - survival(family, theta, w[1])?;
        deaths.push((n * mass).round() as u64);
    }
    Ok(Cohort::closed(0, boundaries, deaths)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let boundaries = Cohort::annual_boundaries(6);
    for (family, truth) in [
        (ModelFamily::Weibull, ParamVector::alpha_scale(0.8, 4.0)),
        (ModelFamily::Fisk, ParamVector::beta_scale(2.0, 1.0)),
    ] {
        let cohort = expected_cohort(family, &truth, 1e6, boundaries.clone())?;
        let fit = fit_mle(family, &cohort, FitStrategy::PetoTurnbullCounts, &FitOptions::default())?;
        println!("{family}: truth {:?}, estimate {:?}", truth.to_vec(), fit.theta_hat.to_vec());
        let shape = classify_shape(family, &fit.theta_hat)?;
        println!("  hazard {} change-point {:?} months", shape.shape, shape.change_point_months);
    }
    Ok(())
}
