//! Turnbull's self-consistency algorithm on general interval-censored data,
//! and its agreement with the closed form on a cohort.

use cohort_survival::nonparametric::{peto_turnbull_closed_form, turnbull_em, turnbull_intervals, CensoredInterval, Cohort, DEFAULT_EM_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Overlapping observation windows.
    let data = [
        CensoredInterval::new(0.0, 2.0),
        CensoredInterval::new(1.0, 3.0),
        CensoredInterval::new(2.5, f64::INFINITY),
        CensoredInterval::new(0.5, 1.5),
    ];
    let counts = [40, 25, 20, 15];
    println!("innermost intervals: {:?}", turnbull_intervals(&data));
    let em = turnbull_em(&data, &counts, DEFAULT_EM_TOL)?;
    for p in &em.points {
        println!("  S({}) = {:.6}", p.time, p.survival);
    }

    let cohort = Cohort::closed(1990, Cohort::annual_boundaries(4), vec![300, 150, 90, 460])?;
    let (intervals, freqs) = cohort.censored_intervals();
    let em = turnbull_em(&intervals, &freqs, DEFAULT_EM_TOL)?;
    let closed = peto_turnbull_closed_form(&cohort)?;
    let gap = em.values().iter().zip(closed.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |EM - closed form| on a cohort: {gap:.2e}");
    Ok(())
}
