//! Survival and hazard curves of the nine families and their shape classes.

use cohort_survival::distributions::{classify_shape, hazard, survival, ModelFamily, ParamVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let examples = [
        (ModelFamily::Exponential, ParamVector::scale(2.0)),
        (ModelFamily::Weibull, ParamVector::alpha_scale(1.5, 2.0)),
        (ModelFamily::Gamma, ParamVector::beta_scale(0.7, 2.0)),
        (ModelFamily::GeneralizedGamma, ParamVector::full(3.0, 0.5, 2.0)),
        (ModelFamily::Lomax, ParamVector::alpha_scale(2.0, 2.0)),
        (ModelFamily::Fisk, ParamVector::beta_scale(2.0, 1.0)),
        (ModelFamily::BurrXII, ParamVector::full(1.0, 3.0, 1.0)),
        (ModelFamily::GeneralizedPowerLaw, ParamVector::full(1.0, 0.5, 1.0)),
        (ModelFamily::Dagum, ParamVector::full(0.5, 2.0, 1.0)),
    ];
    for (family, theta) in examples {
        let shape = classify_shape(family, &theta)?;
        print!("{:<3} {:<6}", family.tag(), shape.shape.label());
        if let Some(m) = shape.change_point_months {
            print!(" change-point {m:>7.1} months");
        }
        println!();
        for x in [0.25, 1.0, 2.0, 5.0] {
            println!("      x={x:<4} S={:.4} h={:.4}", survival(family, &theta, x)?, hazard(family, &theta, x)?);
        }
    }
    Ok(())
}
