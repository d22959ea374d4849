#![allow(dead_code)]

use cohort_survival::distributions::{ln_hazard, survival, ModelFamily, ParamVector, ShapeClass};
use cohort_survival::nonparametric::Cohort;
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

pub fn data_path(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn cohort_2011() -> Cohort {
    Cohort::new(
        2011,
        Cohort::annual_boundaries(6),
        vec![522626, 416101, 368585, 329142, 299830, 277495],
        vec![0, 10739, 9604, 8475, 7541],
        vec![100616, 59673, 44888, 37860, 30658, 277495],
    )
    .unwrap()
}

/// Random increasing boundaries starting at 0 and ending at infinity.
pub fn random_boundaries(rng: &mut StdRng, intervals: usize) -> Vec<f64> {
    let mut b = vec![0.0];
    for _ in 1..intervals {
        let next = b.last().unwrap() + rng.random_range(0.1..3.0);
        b.push(next);
    }
    b.push(f64::INFINITY);
    b
}

/// Valid open cohort with late entrants and two-sided net withdrawals.
pub fn random_open_cohort(rng: &mut StdRng, intervals: usize, max_n: u64) -> Cohort {
    let boundaries = random_boundaries(rng, intervals);
    let mut active = vec![rng.random_range(1..=max_n)];
    let mut entrants = Vec::new();
    let mut deaths = Vec::new();
    for j in 0..intervals - 1 {
        let n = active[j];
        let e = if j == 0 { 0 } else { rng.random_range(0..=n / 20) };
        let d = rng.random_range(0..=n);
        let remaining = n + e - d;
        // W' between -e/2 and remaining/10 keeps the next interval non-empty.
        let w = rng.random_range(-((e / 2) as i64)..=(remaining / 10) as i64);
        let next = (remaining as i64 - w).max(1) as u64;
        entrants.push(e);
        deaths.push(d);
        active.push(next);
    }
    deaths.push(*active.last().unwrap());
    Cohort::new(1980, boundaries, active, entrants, deaths).unwrap()
}

/// Closed cohort of `n` lifetimes from `family`, drawn by sequential binomials.
pub fn sample_cohort(rng: &mut StdRng, family: ModelFamily, theta: &ParamVector, n: u64, boundaries: Vec<f64>) -> Cohort {
    let mut remaining = n;
    let mut mass_left = 1.0;
    let mut deaths = Vec::new();
    for w in boundaries.windows(2) {
        let mass = survival(family, theta, w[0]).unwrap() - survival(family, theta, w[1]).unwrap();
        let d = if w[1].is_infinite() || mass_left <= 0.0 {
            remaining
        } else {
            let p = (mass / mass_left).clamp(0.0, 1.0);
            Binomial::new(remaining, p).unwrap().sample(rng)
        };
        deaths.push(d);
        remaining -= d;
        mass_left -= mass;
    }
    Cohort::closed(0, boundaries, deaths).unwrap()
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random valid parameters; shape parameters stay at least `gap` (relative)
/// away from the values where the hazard shape changes class.
pub fn random_theta(rng: &mut StdRng, family: ModelFamily) -> ParamVector {
    let shape = |rng: &mut StdRng| loop {
        let v = log_uniform(rng, 0.2, 5.0);
        if (v - 1.0).abs() > 0.1 {
            return v;
        }
    };
    let sigma = log_uniform(rng, 0.3, 30.0);
    let alpha = family.has_alpha().then(|| shape(rng));
    let beta = family.has_beta().then(|| {
        if family == ModelFamily::GeneralizedPowerLaw {
            loop {
                let b: f64 = rng.random_range(-0.9..3.0);
                if b.abs() > 0.1 {
                    return b;
                }
            }
        } else {
            shape(rng)
        }
    });
    ParamVector::new(alpha, beta, sigma)
}

/// Shape from the sign runs of log-hazard differences on an `n`-point log
/// grid over `[lo, hi]` years.
pub fn scanned_shape(family: ModelFamily, theta: &ParamVector, lo: f64, hi: f64, n: usize) -> Option<ShapeClass> {
    let (lo, hi) = (lo.ln(), hi.ln());
    let h: Vec<f64> = (0..n)
        .map(|i| ln_hazard(family, theta, (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).unwrap())
        .collect();
    let mut runs: Vec<i8> = Vec::new();
    for w in h.windows(2) {
        let d = w[1] - w[0];
        let s = if d > 1e-10 {
            1
        } else if d < -1e-10 {
            -1
        } else {
            0
        };
        if s != 0 && runs.last() != Some(&s) {
            runs.push(s);
        }
    }
    match runs.as_slice() {
        [] => Some(ShapeClass::Constant),
        [-1] => Some(ShapeClass::Decreasing),
        [1] => Some(ShapeClass::Increasing),
        [1, -1] => Some(ShapeClass::UpsideDownBathtub),
        [-1, 1] => Some(ShapeClass::Bathtub),
        [-1, 1, -1] => Some(ShapeClass::BathtubThenUpsideDown),
        _ => None,
    }
}

/// Parameters from raw shape draws; GPL's `beta` is shifted by -1 so that a
/// draw in `(0, inf)` covers `(-1, inf)`.
pub fn theta_for(family: ModelFamily, a: f64, b: f64, s: f64) -> ParamVector {
    let beta = if family == ModelFamily::GeneralizedPowerLaw { b - 1.0 } else { b };
    ParamVector::new(family.has_alpha().then_some(a), family.has_beta().then_some(beta), s)
}

