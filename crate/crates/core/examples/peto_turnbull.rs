//! Closed-form Peto-Turnbull estimate next to the life-table estimate.

use cohort_survival::nonparametric::{life_table_estimate, peto_turnbull_closed_form, Cohort};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cohort = Cohort::new(
        2011,
        Cohort::annual_boundaries(6),
        vec![522626, 416101, 368585, 329142, 299830, 277495],
        vec![0, 10739, 9604, 8475, 7541],
        vec![100616, 59673, 44888, 37860, 30658, 277495],
    )?;
    let pt = peto_turnbull_closed_form(&cohort)?;
    let lt = life_table_estimate(&cohort)?;
    println!("effective sample size {}", pt.sample_size);
    println!("age  LT      PT");
    for (a, b) in lt.points.iter().zip(&pt.points) {
        println!("{:>3}  {:.4}  {:.4}", a.time, a.survival, b.survival);
    }
    Ok(())
}
