//! Non-parametric survival estimates for one birth cohort.
//!
//! Intervals are `I_j = [a_{j-1}, a_j)` for `j = 1..=k+1` with `a_{k+1} = inf`.
//! Counts per interval: `N_j` active at the start, `E_j` entrants during the
//! interval and `D_j` deaths. The last interval is closed by `D_{k+1} = N_{k+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SurvivalError};

/// Default iteration cap for [`turnbull_em`].
pub const DEFAULT_EM_MAX_SWEEPS: usize = 100_000;
pub const DEFAULT_EM_TOL: f64 = 1e-10;

/// One birth-year cohort as a sequence of annual intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    birth_year: i32,
    boundaries: Vec<f64>,
    active: Vec<u64>,
    entrants: Vec<u64>,
    deaths: Vec<u64>,
}

impl Cohort {
    /// Validates and builds a cohort.
    ///
    /// `boundaries` holds `a_0 < ... < a_k < inf` (length `k + 2`). `active`
    /// and `deaths` have one entry per interval. `entrants` may omit the last
    /// interval; if present, that entry is ignored and stored as zero.
    pub fn new(birth_year: i32, boundaries: Vec<f64>, active: Vec<u64>, entrants: Vec<u64>, deaths: Vec<u64>) -> Result<Self> {
        let invalid = |m: String| Err(SurvivalError::InvalidCohort(m));
        if boundaries.len() < 2 {
            return invalid("at least two boundaries are required".into());
        }
        let intervals = boundaries.len() - 1;
        if boundaries[0].is_nan() || boundaries[0] < 0.0 || !boundaries[0].is_finite() {
            return invalid(format!("first boundary must be finite and >= 0, got {}", boundaries[0]));
        }
        if *boundaries.last().unwrap() != f64::INFINITY {
            return invalid("last boundary must be infinite".into());
        }
        for w in boundaries.windows(2) {
            if !(w[0] < w[1]) {
                return invalid(format!("boundaries must be strictly increasing ({} then {})", w[0], w[1]));
            }
        }
        if boundaries[..intervals].iter().any(|b| !b.is_finite()) {
            return invalid("only the last boundary may be infinite".into());
        }
        if active.len() != intervals || deaths.len() != intervals {
            return invalid(format!(
                "{intervals} intervals need {intervals} active and death counts, got {} and {}",
                active.len(),
                deaths.len()
            ));
        }
        let mut entrants = entrants;
        match entrants.len() {
            n if n == intervals => *entrants.last_mut().unwrap() = 0,
            n if n + 1 == intervals => entrants.push(0),
            n => return invalid(format!("expected {} or {intervals} entrant counts, got {n}", intervals - 1)),
        }
        if active[0] == 0 {
            return invalid("N_1 must be positive".into());
        }
        if deaths[intervals - 1] != active[intervals - 1] {
            return invalid(format!(
                "last interval must close with D = N ({} != {})",
                deaths[intervals - 1],
                active[intervals - 1]
            ));
        }
        Ok(Cohort {
            birth_year,
            boundaries,
            active,
            entrants,
            deaths,
        })
    }

    /// Closed cohort without entrants or withdrawals: `N_{j+1} = N_j - D_j`.
    pub fn closed(birth_year: i32, boundaries: Vec<f64>, deaths: Vec<u64>) -> Result<Self> {
        let total: u64 = deaths.iter().sum();
        let mut active = Vec::with_capacity(deaths.len());
        let mut at_risk = total;
        for d in &deaths {
            active.push(at_risk);
            at_risk -= d;
        }
        let n = deaths.len();
        Cohort::new(birth_year, boundaries, active, vec![0; n], deaths)
    }

    /// Default annual layout `{0, 1, ..., k, inf}` for `intervals` intervals.
    pub fn annual_boundaries(intervals: usize) -> Vec<f64> {
        (0..intervals).map(|i| i as f64).chain(std::iter::once(f64::INFINITY)).collect()
    }

    pub fn birth_year(&self) -> i32 {
        self.birth_year
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// `N_j`
    pub fn active(&self) -> &[u64] {
        &self.active
    }

    /// `E_j`, with the final interval fixed at zero.
    pub fn entrants(&self) -> &[u64] {
        &self.entrants
    }

    /// `D_j`
    pub fn deaths(&self) -> &[u64] {
        &self.deaths
    }

    pub fn n_intervals(&self) -> usize {
        self.deaths.len()
    }

    /// `N = sum D_j`, the sample size of the interval-censored sample.
    pub fn sample_size(&self) -> u64 {
        self.deaths.iter().sum()
    }

    /// Interval-censored observations `(a_{j-1}, a_j]` with frequency `D_j`,
    /// skipping intervals without deaths.
    pub fn censored_intervals(&self) -> (Vec<CensoredInterval>, Vec<u64>) {
        self.boundaries
            .windows(2)
            .zip(&self.deaths)
            .filter(|(_, &d)| d > 0)
            .map(|(w, &d)| (CensoredInterval::new(w[0], w[1]), d))
            .unzip()
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> Cohort {
        let mul = |v: &[u64]| v.iter().map(|x| x * factor).collect();
        Cohort {
            birth_year: self.birth_year,
            boundaries: self.boundaries.clone(),
            active: mul(&self.active),
            entrants: mul(&self.entrants),
            deaths: mul(&self.deaths),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMethod {
    LifeTable,
    PetoTurnbull,
    TurnbullEm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalPoint {
    /// Right end-point of the interval, in years.
    pub time: f64,
    pub survival: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalEstimate {
    pub method: EstimatorMethod,
    pub points: Vec<SurvivalPoint>,
    pub sample_size: f64,
}

impl SurvivalEstimate {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.survival).collect()
    }

    /// `S` at the start of each interval: `1, S(a_1), ..., S(a_k)`.
    fn starts(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(1.0).chain(self.points.iter().map(|p| p.survival))
    }

    /// Probability mass per interval, `S(a_{j-1}) - S(a_j)`.
    pub fn interval_masses(&self) -> Vec<f64> {
        self.starts().zip(&self.points).map(|(s0, p)| s0 - p.survival).collect()
    }
}

/// Net withdrawals `W'_j = N_j + E_j - D_j - N_{j+1}` (zero for the last
/// interval). Values may be negative.
pub fn compute_w_prime(cohort: &Cohort) -> Vec<i64> {
    let n = cohort.n_intervals();
    (0..n)
        .map(|j| {
            if j + 1 == n {
                0
            } else {
                cohort.active[j] as i64 + cohort.entrants[j] as i64 - cohort.deaths[j] as i64 - cohort.active[j + 1] as i64
            }
        })
        .collect()
}

/// Life-table estimate with entrants and net withdrawals:
/// `S(a_j) = prod_{i<=j} (1 - D_i / (N_i + E_i - W'_i / 2))`.
pub fn life_table_estimate(cohort: &Cohort) -> Result<SurvivalEstimate> {
    let w_prime = compute_w_prime(cohort);
    let mut s = 1.0;
    let mut points = Vec::with_capacity(cohort.n_intervals());
    for j in 0..cohort.n_intervals() {
        let denom = cohort.active[j] as f64 + cohort.entrants[j] as f64 - w_prime[j] as f64 / 2.0;
        let deaths = cohort.deaths[j] as f64;
        if denom <= 0.0 {
            return Err(SurvivalError::DegenerateCohort {
                interval: j + 1,
                detail: format!("life-table denominator {denom} is not positive"),
            });
        }
        let q = deaths / denom;
        if !(0.0..=1.0).contains(&q) {
            return Err(SurvivalError::DegenerateCohort {
                interval: j + 1,
                detail: format!("conditional death probability {q} outside [0, 1] ({deaths} deaths, {denom} at risk)"),
            });
        }
        s *= 1.0 - q;
        points.push(SurvivalPoint {
            time: cohort.boundaries[j + 1],
            survival: s,
        });
    }
    Ok(SurvivalEstimate {
        method: EstimatorMethod::LifeTable,
        points,
        sample_size: cohort.sample_size() as f64,
    })
}

/// Closed-form Peto-Turnbull NPMLE for a partition into non-overlapping
/// intervals: `S(a_j) = 1 - (D_1 + ... + D_j) / N`.
pub fn peto_turnbull_closed_form(cohort: &Cohort) -> Result<SurvivalEstimate> {
    let total = cohort.sample_size();
    if total == 0 {
        return Err(SurvivalError::DegenerateCohort {
            interval: 1,
            detail: "no deaths are recorded in any interval".into(),
        });
    }
    let mut cumulative = 0u64;
    let points = cohort
        .deaths
        .iter()
        .zip(&cohort.boundaries[1..])
        .map(|(&d, &time)| {
            cumulative += d;
            SurvivalPoint {
                time,
                survival: 1.0 - cumulative as f64 / total as f64,
            }
        })
        .collect();
    Ok(SurvivalEstimate {
        method: EstimatorMethod::PetoTurnbull,
        points,
        sample_size: total as f64,
    })
}

/// Observation known only to lie in `(lower, upper]`; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredInterval {
    pub lower: f64,
    pub upper: f64,
}

impl CensoredInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        CensoredInterval { lower, upper }
    }

    fn contains(&self, inner: &CensoredInterval) -> bool {
        self.lower <= inner.lower && inner.upper <= self.upper
    }
}

/// Turnbull's innermost intervals: a left end-point immediately followed by
/// a right end-point in the sorted end-point sequence.
pub fn turnbull_intervals(intervals: &[CensoredInterval]) -> Vec<CensoredInterval> {
    // Right ends sort before left ends at ties: (., t] holds t, (t, .] does not.
    let mut ends: Vec<(f64, u8)> = intervals.iter().flat_map(|iv| [(iv.lower, 1u8), (iv.upper, 0u8)]).collect();
    ends.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<CensoredInterval> = Vec::new();
    for w in ends.windows(2) {
        if w[0].1 == 1 && w[1].1 == 0 {
            let iv = CensoredInterval::new(w[0].0, w[1].0);
            if out.last() != Some(&iv) {
                out.push(iv);
            }
        }
    }
    out
}

/// General NPMLE by EM self-consistency iteration over Turnbull's intervals.
pub fn turnbull_em(intervals: &[CensoredInterval], freqs: &[u64], tol: f64) -> Result<SurvivalEstimate> {
    turnbull_em_with_cap(intervals, freqs, tol, DEFAULT_EM_MAX_SWEEPS)
}

pub fn turnbull_em_with_cap(intervals: &[CensoredInterval], freqs: &[u64], tol: f64, max_sweeps: usize) -> Result<SurvivalEstimate> {
    let invalid = |m: String| Err(SurvivalError::InvalidCohort(m));
    if intervals.is_empty() || intervals.len() != freqs.len() {
        return invalid(format!("{} intervals with {} frequencies", intervals.len(), freqs.len()));
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    for (iv, &f) in intervals.iter().zip(freqs) {
        if !iv.lower.is_finite() || iv.upper.is_nan() || !(iv.lower < iv.upper) {
            return invalid(format!("invalid interval ({}, {}]", iv.lower, iv.upper));
        }
        if f == 0 {
            return invalid("frequencies must be positive".into());
        }
    }
    let atoms = turnbull_intervals(intervals);
    let m = atoms.len();
    let cover: Vec<Vec<usize>> = intervals
        .iter()
        .map(|iv| (0..m).filter(|&j| iv.contains(&atoms[j])).collect())
        .collect();
    let weights: Vec<f64> = freqs.iter().map(|&f| f as f64).collect();
    let total: f64 = weights.iter().sum();

    let mut s = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_sweeps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (obs, w) in cover.iter().zip(&weights) {
            let denom: f64 = obs.iter().map(|&j| s[j]).sum();
            if denom > 0.0 {
                for &j in obs {
                    next[j] += w * s[j] / denom;
                }
            }
        }
        residual = 0.0;
        for (old, new) in s.iter_mut().zip(&next) {
            let v = new / total;
            residual = residual.max((v - *old).abs());
            *old = v;
        }
        if residual < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SurvivalError::Convergence {
            method: "turnbull_em",
            iterations: max_sweeps,
            residual,
        });
    }
    let mut cumulative = 0.0;
    let points = atoms
        .iter()
        .zip(&s)
        .map(|(iv, &mass)| {
            cumulative += mass;
            SurvivalPoint {
                time: iv.upper,
                survival: if iv.upper.is_infinite() { 0.0 } else { (1.0 - cumulative).max(0.0) },
            }
        })
        .collect();
    Ok(SurvivalEstimate {
        method: EstimatorMethod::TurnbullEm,
        points,
        sample_size: total,
    })
}
