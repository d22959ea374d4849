//! Modified life-table estimate of the 2011 cohort, with net withdrawals.

use cohort_survival::nonparametric::{compute_w_prime, life_table_estimate, Cohort};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cohort = Cohort::new(
        2011,
        Cohort::annual_boundaries(6),
        vec![522626, 416101, 368585, 329142, 299830, 277495],
        vec![0, 10739, 9604, 8475, 7541],
        vec![100616, 59673, 44888, 37860, 30658, 277495],
    )?;
    let w = compute_w_prime(&cohort);
    let s = life_table_estimate(&cohort)?;
    println!(" j  W'       S(a_j)");
    for (j, (w, p)) in w.iter().zip(&s.points).enumerate() {
        println!("{:>2}  {:>6}  {:.4}", j + 1, w, p.survival);
    }
    Ok(())
}
