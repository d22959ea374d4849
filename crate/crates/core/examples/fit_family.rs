//! Maximum likelihood fit of one family with standard errors and AIC.

use cohort_survival::distributions::ModelFamily;
use cohort_survival::fitting::{fit_mle, FitOptions, FitStrategy};
use cohort_survival::nonparametric::Cohort;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let family: ModelFamily = std::env::args().nth(1).as_deref().unwrap_or("GGD").parse()?;
    let cohort = Cohort::new(
        2011,
        Cohort::annual_boundaries(6),
        vec![522626, 416101, 368585, 329142, 299830, 277495],
        vec![0, 10739, 9604, 8475, 7541],
        vec![100616, 59673, 44888, 37860, 30658, 277495],
    )?;
    for strategy in FitStrategy::BOTH {
        let fit = fit_mle(family, &cohort, strategy, &FitOptions::default())?;
        println!("{family} under {strategy}: logL = {:.4}, AIC = {:.4}", fit.log_lik, fit.aic);
        let se = fit.std_errors.clone().unwrap_or_default();
        for (i, (name, value)) in family.param_names().iter().zip(fit.theta_hat.to_vec()).enumerate() {
            println!("  {name:<5} = {value:.6}  (se {:.6})", se.get(i).copied().unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
