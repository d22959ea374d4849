//! The nine lifetime families: survival and hazard evaluation, parameter
//! validation and hazard-shape classification.
//!
//! All families are parameterized with a scale `sigma` (years) and up to two
//! shape parameters. Hazards are evaluated on the log scale so that deep
//! tails stay finite where `S(x)` underflows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SurvivalError};
use crate::special_fn::{ln_gamma_unchecked, ln_scaled_upper_gamma, regularized_upper_gamma};

/// Default upper end of the change-point search, in years.
pub const DEFAULT_HORIZON_YEARS: f64 = 50.0;

/// Log-grid used by the numeric hazard scan, in years.
pub const SCAN_LOWER_YEARS: f64 = 1e-4;
pub const SCAN_UPPER_YEARS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "EXP")]
    Exponential,
    #[serde(rename = "WEI")]
    Weibull,
    #[serde(rename = "GAM")]
    Gamma,
    #[serde(rename = "GGD")]
    GeneralizedGamma,
    #[serde(rename = "PA2")]
    Lomax,
    #[serde(rename = "FSK")]
    Fisk,
    #[serde(rename = "BUR")]
    BurrXII,
    #[serde(rename = "GPL")]
    GeneralizedPowerLaw,
    #[serde(rename = "DAG")]
    Dagum,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 9] = [
        ModelFamily::Exponential,
        ModelFamily::Weibull,
        ModelFamily::Gamma,
        ModelFamily::GeneralizedGamma,
        ModelFamily::Lomax,
        ModelFamily::Fisk,
        ModelFamily::BurrXII,
        ModelFamily::GeneralizedPowerLaw,
        ModelFamily::Dagum,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelFamily::Exponential => "EXP",
            ModelFamily::Weibull => "WEI",
            ModelFamily::Gamma => "GAM",
            ModelFamily::GeneralizedGamma => "GGD",
            ModelFamily::Lomax => "PA2",
            ModelFamily::Fisk => "FSK",
            ModelFamily::BurrXII => "BUR",
            ModelFamily::GeneralizedPowerLaw => "GPL",
            ModelFamily::Dagum => "DAG",
        }
    }

    pub fn has_alpha(self) -> bool {
        matches!(
            self,
            ModelFamily::Weibull
                | ModelFamily::GeneralizedGamma
                | ModelFamily::Lomax
                | ModelFamily::BurrXII
                | ModelFamily::GeneralizedPowerLaw
                | ModelFamily::Dagum
        )
    }

    pub fn has_beta(self) -> bool {
        matches!(
            self,
            ModelFamily::Gamma
                | ModelFamily::GeneralizedGamma
                | ModelFamily::Fisk
                | ModelFamily::BurrXII
                | ModelFamily::GeneralizedPowerLaw
                | ModelFamily::Dagum
        )
    }

    /// Number of free parameters `K`.
    pub fn n_params(self) -> usize {
        1 + usize::from(self.has_alpha()) + usize::from(self.has_beta())
    }

    /// Parameter names in the order used by [`ParamVector::to_vec`].
    pub fn param_names(self) -> Vec<&'static str> {
        let mut names = Vec::with_capacity(3);
        if self.has_alpha() {
            names.push("alpha");
        }
        if self.has_beta() {
            names.push("beta");
        }
        names.push("sigma");
        names
    }

    /// Lower bound of `beta`: the power-law family admits `beta > -1`.
    pub fn beta_lower_bound(self) -> f64 {
        if self == ModelFamily::GeneralizedPowerLaw {
            -1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelFamily {
    type Err = SurvivalError;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        ModelFamily::ALL
            .into_iter()
            .find(|f| f.tag() == upper)
            .ok_or_else(|| SurvivalError::Schema(format!("unknown model family '{s}'")))
    }
}

/// Parameters of one family. Shape parameters absent from a family are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: f64,
}

impl ParamVector {
    pub fn new(alpha: Option<f64>, beta: Option<f64>, sigma: f64) -> Self {
        ParamVector { alpha, beta, sigma }
    }

    pub fn scale(sigma: f64) -> Self {
        ParamVector::new(None, None, sigma)
    }

    pub fn alpha_scale(alpha: f64, sigma: f64) -> Self {
        ParamVector::new(Some(alpha), None, sigma)
    }

    pub fn beta_scale(beta: f64, sigma: f64) -> Self {
        ParamVector::new(None, Some(beta), sigma)
    }

    pub fn full(alpha: f64, beta: f64, sigma: f64) -> Self {
        ParamVector::new(Some(alpha), Some(beta), sigma)
    }

    /// Builds a vector from `[alpha?, beta?, sigma]` in family order.
    pub fn from_slice(family: ModelFamily, values: &[f64]) -> Result<Self> {
        if values.len() != family.n_params() {
            return Err(SurvivalError::ParameterDomain {
                family,
                detail: format!("expected {} parameters, got {}", family.n_params(), values.len()),
            });
        }
        let mut it = values.iter().copied();
        let alpha = if family.has_alpha() { it.next() } else { None };
        let beta = if family.has_beta() { it.next() } else { None };
        let sigma = it.next().unwrap_or(f64::NAN);
        Ok(ParamVector { alpha, beta, sigma })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.alpha.into_iter().chain(self.beta).chain(std::iter::once(self.sigma)).collect()
    }

    fn a(&self) -> f64 {
        self.alpha.unwrap_or(f64::NAN)
    }

    fn b(&self) -> f64 {
        self.beta.unwrap_or(f64::NAN)
    }

    pub fn validate(&self, family: ModelFamily) -> Result<()> {
        let bad = |detail: String| Err(SurvivalError::ParameterDomain { family, detail });
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be finite and > 0, got {}", self.sigma));
        }
        match (family.has_alpha(), self.alpha) {
            (true, None) => return bad("alpha is required".into()),
            (false, Some(_)) => return bad("alpha is not a parameter of this family".into()),
            (true, Some(a)) if !(a.is_finite() && a > 0.0) => {
                return bad(format!("alpha must be finite and > 0, got {a}"))
            }
            _ => {}
        }
        match (family.has_beta(), self.beta) {
            (true, None) => return bad("beta is required".into()),
            (false, Some(_)) => return bad("beta is not a parameter of this family".into()),
            (true, Some(b)) if !(b.is_finite() && b > family.beta_lower_bound()) => {
                return bad(format!("beta must be finite and > {}, got {b}", family.beta_lower_bound()))
            }
            _ => {}
        }
        Ok(())
    }
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y == f64::INFINITY {
        return y;
    }
    y.max(0.0) + (-y.abs()).exp().ln_1p()
}

/// Survival function `S(x) = P(X > x)`; `x = +inf` gives exactly 0.
pub fn survival(family: ModelFamily, theta: &ParamVector, x: f64) -> Result<f64> {
    theta.validate(family)?;
    if x.is_nan() || x < 0.0 {
        return Err(SurvivalError::Domain {
            function: "survival",
            detail: format!("x must be >= 0, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let t = x / theta.sigma;
    let lt = t.ln();
    let s = match family {
        ModelFamily::Exponential => (-t).exp(),
        ModelFamily::Weibull => (-(theta.a() * lt).exp()).exp(),
        ModelFamily::Gamma => regularized_upper_gamma(theta.b(), t)?,
        ModelFamily::GeneralizedGamma => {
            let (a, b) = (theta.a(), theta.b());
            regularized_upper_gamma(b / a, (a * lt).exp())?
        }
        ModelFamily::Lomax => (-theta.a() * t.ln_1p()).exp(),
        ModelFamily::Fisk => (-softplus(theta.b() * lt)).exp(),
        ModelFamily::BurrXII => (-theta.a() * softplus(theta.b() * lt)).exp(),
        ModelFamily::GeneralizedPowerLaw => {
            let (a, b) = (theta.a(), theta.b());
            let l = t.ln_1p();
            (-a * (l.powf(b + 1.0) / (1.0 + l).powf(b))).exp()
        }
        ModelFamily::Dagum => -(-theta.a() * softplus(-theta.b() * lt)).exp_m1(),
    };
    Ok(s.clamp(0.0, 1.0))
}

/// Natural log of the hazard at `x > 0`.
pub fn ln_hazard(family: ModelFamily, theta: &ParamVector, x: f64) -> Result<f64> {
    theta.validate(family)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(SurvivalError::Domain {
            function: "hazard",
            detail: format!("hazard is defined for finite x > 0, got {x}"),
        });
    }
    let sigma = theta.sigma;
    let t = x / sigma;
    let lt = t.ln();
    let v = match family {
        ModelFamily::Exponential => -sigma.ln(),
        ModelFamily::Weibull => {
            let a = theta.a();
            (a / sigma).ln() + (a - 1.0) * lt
        }
        ModelFamily::Gamma => ggd_ln_hazard(1.0, theta.b(), sigma, t)?,
        ModelFamily::GeneralizedGamma => ggd_ln_hazard(theta.a(), theta.b(), sigma, t)?,
        ModelFamily::Lomax => (theta.a() / sigma).ln() - t.ln_1p(),
        ModelFamily::Fisk => {
            let b = theta.b();
            (b / sigma).ln() + (b - 1.0) * lt - softplus(b * lt)
        }
        ModelFamily::BurrXII => {
            let (a, b) = (theta.a(), theta.b());
            (a * b / sigma).ln() + (b - 1.0) * lt - softplus(b * lt)
        }
        ModelFamily::GeneralizedPowerLaw => {
            let (a, b) = (theta.a(), theta.b());
            let l = t.ln_1p();
            (a / sigma).ln() + (b + 1.0 + l).ln() + b * l.ln() - t.ln_1p() - (b + 1.0) * l.ln_1p()
        }
        ModelFamily::Dagum => {
            let (a, b) = (theta.a(), theta.b());
            let sp = softplus(-b * lt);
            let ln_s = (-(-a * sp).exp_m1()).ln();
            (a * b / sigma).ln() - (b + 1.0) * lt - (a + 1.0) * sp - ln_s
        }
    };
    Ok(v)
}

fn ggd_ln_hazard(a: f64, b: f64, sigma: f64, t: f64) -> Result<f64> {
    let shape = b / a;
    let lt = t.ln();
    let z = (a * lt).exp();
    Ok((a / sigma).ln() + (b - 1.0) * lt - ln_gamma_unchecked(shape) - ln_scaled_upper_gamma(shape, z)?)
}

/// Hazard rate per year at `x > 0`.
pub fn hazard(family: ModelFamily, theta: &ParamVector, x: f64) -> Result<f64> {
    ln_hazard(family, theta, x).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeClass {
    #[serde(rename = "DFR")]
    Decreasing,
    #[serde(rename = "CFR")]
    Constant,
    #[serde(rename = "IFR")]
    Increasing,
    #[serde(rename = "UBT")]
    UpsideDownBathtub,
    #[serde(rename = "BT")]
    Bathtub,
    #[serde(rename = "BT+UBT")]
    BathtubThenUpsideDown,
}

impl ShapeClass {
    pub fn label(self) -> &'static str {
        match self {
            ShapeClass::Decreasing => "DFR",
            ShapeClass::Constant => "CFR",
            ShapeClass::Increasing => "IFR",
            ShapeClass::UpsideDownBathtub => "UBT",
            ShapeClass::Bathtub => "BT",
            ShapeClass::BathtubThenUpsideDown => "BT+UBT",
        }
    }

    pub fn has_change_point(self) -> bool {
        matches!(self, ShapeClass::UpsideDownBathtub | ShapeClass::Bathtub)
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub shape: ShapeClass,
    /// Hazard extremum in months, present for UBT and BT.
    pub change_point_months: Option<f64>,
    /// The extremum was not reached inside the search horizon; the reported
    /// value is the horizon itself.
    pub beyond_horizon: bool,
}

/// Shape implied by the parameter rules of each family; `None` for the
/// Dagum family, which is classified numerically.
pub fn rule_shape(family: ModelFamily, theta: &ParamVector) -> Result<Option<ShapeClass>> {
    use ShapeClass::*;
    theta.validate(family)?;
    let by_one = |p: f64| {
        if p < 1.0 {
            Decreasing
        } else if p == 1.0 {
            Constant
        } else {
            Increasing
        }
    };
    let class = match family {
        ModelFamily::Exponential => Constant,
        ModelFamily::Weibull => by_one(theta.a()),
        ModelFamily::Gamma => by_one(theta.b()),
        ModelFamily::GeneralizedGamma => {
            let (a, b) = (theta.a(), theta.b());
            if b < 1.0 {
                if a <= 1.0 {
                    Decreasing
                } else {
                    Bathtub
                }
            } else if b == 1.0 {
                by_one(a)
            } else if a < 1.0 {
                UpsideDownBathtub
            } else {
                Increasing
            }
        }
        ModelFamily::Lomax => Decreasing,
        ModelFamily::Fisk | ModelFamily::BurrXII => {
            if theta.b() <= 1.0 {
                Decreasing
            } else {
                UpsideDownBathtub
            }
        }
        ModelFamily::GeneralizedPowerLaw => {
            if theta.b() <= 0.0 {
                Decreasing
            } else {
                UpsideDownBathtub
            }
        }
        ModelFamily::Dagum => return Ok(None),
    };
    Ok(Some(class))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
}

/// Classifies the hazard by the sign pattern of successive log-hazard
/// differences on a log grid. Returns `None` for patterns outside the six
/// known shapes.
pub fn scan_shape(family: ModelFamily, theta: &ParamVector, lo: f64, hi: f64, n: usize) -> Result<Option<ShapeClass>> {
    let values = log_grid(lo, hi, n)
        .map(|x| ln_hazard(family, theta, x))
        .collect::<Result<Vec<_>>>()?;
    let mut runs: Vec<i8> = Vec::new();
    for w in values.windows(2) {
        let d = w[1] - w[0];
        let sign = if d > 1e-12 {
            1
        } else if d < -1e-12 {
            -1
        } else {
            0
        };
        if sign != 0 && runs.last() != Some(&sign) {
            runs.push(sign);
        }
    }
    Ok(match runs.as_slice() {
        [] => Some(ShapeClass::Constant),
        [-1] => Some(ShapeClass::Decreasing),
        [1] => Some(ShapeClass::Increasing),
        [1, -1] => Some(ShapeClass::UpsideDownBathtub),
        [-1, 1] => Some(ShapeClass::Bathtub),
        [-1, 1, -1] => Some(ShapeClass::BathtubThenUpsideDown),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Extremum {
    Max,
    Min,
}

const CHANGE_POINT_GRID: usize = 1000;
const CHANGE_POINT_LOWER_YEARS: f64 = 1e-6;

/// Golden-section refinement of the hazard extremum inside `(lo, hi)`.
fn golden_section(family: ModelFamily, theta: &ParamVector, kind: Extremum, mut lo: f64, mut hi: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let score = |x: f64| -> Result<f64> {
        let v = ln_hazard(family, theta, x)?;
        Ok(if kind == Extremum::Max { v } else { -v })
    };
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = score(c)?;
    let mut fd = score(d)?;
    for _ in 0..200 {
        if hi - lo < 1e-10 * (1.0 + c.abs()) {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = score(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = score(d)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn locate_extremum(family: ModelFamily, theta: &ParamVector, kind: Extremum, horizon_years: f64) -> Result<ShapeReport> {
    let shape = match kind {
        Extremum::Max => ShapeClass::UpsideDownBathtub,
        Extremum::Min => ShapeClass::Bathtub,
    };
    let lo = CHANGE_POINT_LOWER_YEARS.min(horizon_years / 10.0);
    let grid: Vec<f64> = log_grid(lo, horizon_years, CHANGE_POINT_GRID).collect();
    let mut best = 0;
    let mut best_val = f64::NAN;
    for (i, &x) in grid.iter().enumerate() {
        let v = ln_hazard(family, theta, x)?;
        let v = if kind == Extremum::Max { v } else { -v };
        if best_val.is_nan() || v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best == grid.len() - 1 {
        return Ok(ShapeReport {
            shape,
            change_point_months: Some(horizon_years * 12.0),
            beyond_horizon: true,
        });
    }
    let left = if best == 0 { grid[0] * 1e-6 } else { grid[best - 1] };
    let x = golden_section(family, theta, kind, left, grid[best + 1])?;
    Ok(ShapeReport {
        shape,
        change_point_months: Some(x * 12.0),
        beyond_horizon: false,
    })
}

/// Location of the hazard maximum (UBT) or minimum (BT) in months.
///
/// The kind of extremum comes from the parameter rules; for the Dagum family
/// it is read off a numeric scan of `(0, horizon]`. If the extremum lies past
/// the horizon the horizon is returned with `beyond_horizon` set.
pub fn find_change_point(family: ModelFamily, theta: &ParamVector, search_horizon_years: f64) -> Result<ShapeReport> {
    if !(search_horizon_years.is_finite() && search_horizon_years > 0.0) {
        return Err(SurvivalError::Domain {
            function: "find_change_point",
            detail: format!("horizon must be finite and > 0, got {search_horizon_years}"),
        });
    }
    let class = match rule_shape(family, theta)? {
        Some(c) => Some(c),
        None => scan_shape(family, theta, CHANGE_POINT_LOWER_YEARS, search_horizon_years, CHANGE_POINT_GRID)?,
    };
    match class {
        Some(ShapeClass::UpsideDownBathtub) => locate_extremum(family, theta, Extremum::Max, search_horizon_years),
        Some(ShapeClass::Bathtub) => locate_extremum(family, theta, Extremum::Min, search_horizon_years),
        other => Err(SurvivalError::NoChangePoint {
            family,
            detail: match other {
                Some(c) => format!("hazard is {c} on (0, {search_horizon_years}] years"),
                None => "irregular hazard pattern".into(),
            },
        }),
    }
}

/// Hazard shape with the default change-point horizon.
pub fn classify_shape(family: ModelFamily, theta: &ParamVector) -> Result<ShapeReport> {
    classify_shape_with_horizon(family, theta, DEFAULT_HORIZON_YEARS)
}

pub fn classify_shape_with_horizon(family: ModelFamily, theta: &ParamVector, horizon_years: f64) -> Result<ShapeReport> {
    let shape = match rule_shape(family, theta)? {
        Some(c) => c,
        None => scan_shape(family, theta, SCAN_LOWER_YEARS, SCAN_UPPER_YEARS, 4 * CHANGE_POINT_GRID)?.ok_or_else(|| {
            SurvivalError::NoChangePoint {
                family,
                detail: "hazard scan produced an unrecognized pattern".into(),
            }
        })?,
    };
    match shape {
        ShapeClass::UpsideDownBathtub => locate_extremum(family, theta, Extremum::Max, horizon_years),
        ShapeClass::Bathtub => locate_extremum(family, theta, Extremum::Min, horizon_years),
        other => Ok(ShapeReport {
            shape: other,
            change_point_months: None,
            beyond_horizon: false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModelFamily::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn survival_examples() {
        let s = survival(Exponential, &ParamVector::scale(2.0), 2.0).unwrap();
        assert!(close(s, (-1f64).exp(), 1e-14));
        let s = survival(Lomax, &ParamVector::alpha_scale(2.0, 1.0), 1.0).unwrap();
        assert!(close(s, 0.25, 1e-14));
        let s = survival(GeneralizedPowerLaw, &ParamVector::full(1.5, 0.0, 2.0), 4.0).unwrap();
        let lomax = survival(Lomax, &ParamVector::alpha_scale(1.5, 2.0), 4.0).unwrap();
        assert!(close(s, 3f64.powf(-1.5), 1e-14));
        assert!(close(s, lomax, 1e-14));
    }

    #[test]
    fn survival_endpoints() {
        let theta = ParamVector::full(0.7, 1.3, 2.0);
        for fam in [GeneralizedGamma, BurrXII, GeneralizedPowerLaw, Dagum] {
            assert_eq!(survival(fam, &theta, 0.0).unwrap(), 1.0);
            assert_eq!(survival(fam, &theta, f64::INFINITY).unwrap(), 0.0);
        }
        assert!(survival(Weibull, &ParamVector::alpha_scale(1.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn hazard_examples() {
        assert!(close(hazard(Exponential, &ParamVector::scale(2.0), 7.3).unwrap(), 0.5, 1e-14));
        assert!(close(hazard(Fisk, &ParamVector::beta_scale(2.0, 1.0), 1.0).unwrap(), 1.0, 1e-14));
        let theta = ParamVector::alpha_scale(0.8, 4.0);
        let eps = 1e-6;
        let fd = -((survival(Weibull, &theta, 1.0 + eps).unwrap().ln()) - survival(Weibull, &theta, 1.0 - eps).unwrap().ln()) / (2.0 * eps);
        assert!(close(hazard(Weibull, &theta, 1.0).unwrap(), fd, 1e-6));
    }

    #[test]
    fn hazard_domain() {
        assert!(hazard(Weibull, &ParamVector::alpha_scale(0.5, 1.0), 0.0).is_err());
        assert!(hazard(Weibull, &ParamVector::alpha_scale(0.5, 1.0), f64::INFINITY).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(ParamVector::scale(0.0).validate(Exponential).is_err());
        assert!(ParamVector::alpha_scale(-1.0, 1.0).validate(Weibull).is_err());
        assert!(ParamVector::scale(1.0).validate(Weibull).is_err());
        assert!(ParamVector::full(1.0, 1.0, 1.0).validate(Weibull).is_err());
        assert!(ParamVector::full(1.0, -0.5, 1.0).validate(GeneralizedPowerLaw).is_ok());
        assert!(ParamVector::full(1.0, -1.0, 1.0).validate(GeneralizedPowerLaw).is_err());
        assert!(ParamVector::full(1.0, -0.5, 1.0).validate(BurrXII).is_err());
        assert!(ParamVector::full(1.0, f64::NAN, 1.0).validate(Dagum).is_err());
    }

    #[test]
    fn tags_round_trip() {
        for f in ModelFamily::ALL {
            assert_eq!(f.tag().parse::<ModelFamily>().unwrap(), f);
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{}\"", f.tag()));
        }
        assert!("XYZ".parse::<ModelFamily>().is_err());
        assert_eq!(ModelFamily::ALL.map(|f| f.n_params()), [1, 2, 2, 3, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn slice_round_trip() {
        let theta = ParamVector::full(0.3, 1.2, 4.0);
        assert_eq!(ParamVector::from_slice(Dagum, &theta.to_vec()).unwrap(), theta);
        let theta = ParamVector::beta_scale(1.2, 4.0);
        assert_eq!(ParamVector::from_slice(Gamma, &theta.to_vec()).unwrap(), theta);
        assert!(ParamVector::from_slice(Gamma, &[1.0]).is_err());
    }

    #[test]
    fn rule_shapes() {
        let cls = |f, t: ParamVector| classify_shape(f, &t).unwrap().shape;
        assert_eq!(cls(Weibull, ParamVector::alpha_scale(0.8, 3.0)), ShapeClass::Decreasing);
        assert_eq!(cls(Weibull, ParamVector::alpha_scale(1.0, 3.0)), ShapeClass::Constant);
        assert_eq!(cls(Weibull, ParamVector::alpha_scale(1.4, 3.0)), ShapeClass::Increasing);
        assert_eq!(cls(GeneralizedGamma, ParamVector::full(0.7, 1.4, 1.0)), ShapeClass::UpsideDownBathtub);
        assert_eq!(cls(GeneralizedGamma, ParamVector::full(1.18, 0.74, 1.0)), ShapeClass::Bathtub);
        assert_eq!(cls(GeneralizedGamma, ParamVector::full(1.0, 1.0, 1.0)), ShapeClass::Constant);
        assert_eq!(cls(Fisk, ParamVector::beta_scale(1.0, 1.0)), ShapeClass::Decreasing);
        assert_eq!(cls(GeneralizedPowerLaw, ParamVector::full(2.0, -0.2, 3.0)), ShapeClass::Decreasing);
        assert_eq!(cls(Exponential, ParamVector::scale(3.0)), ShapeClass::Constant);
    }

    #[test]
    fn fisk_change_point() {
        let rep = find_change_point(Fisk, &ParamVector::beta_scale(2.0, 1.0), DEFAULT_HORIZON_YEARS).unwrap();
        assert_eq!(rep.shape, ShapeClass::UpsideDownBathtub);
        assert!((rep.change_point_months.unwrap() - 12.0).abs() < 0.01);
        assert!(!rep.beyond_horizon);
    }

    #[test]
    fn monotone_hazard_has_no_change_point() {
        let err = find_change_point(Exponential, &ParamVector::scale(1.0), DEFAULT_HORIZON_YEARS).unwrap_err();
        assert!(matches!(err, SurvivalError::NoChangePoint { .. }));
        let err = find_change_point(Weibull, &ParamVector::alpha_scale(0.6, 1.0), DEFAULT_HORIZON_YEARS).unwrap_err();
        assert!(matches!(err, SurvivalError::NoChangePoint { .. }));
    }

    #[test]
    fn change_point_beyond_horizon_is_flagged() {
        // Bathtub whose minimum sits well past one year.
        let theta = ParamVector::full(1.18, 0.74, 6.0);
        let full = find_change_point(GeneralizedGamma, &theta, DEFAULT_HORIZON_YEARS).unwrap();
        assert!(!full.beyond_horizon);
        let cp_years = full.change_point_months.unwrap() / 12.0;
        assert!(cp_years > 1.0);
        let short = find_change_point(GeneralizedGamma, &theta, cp_years / 2.0).unwrap();
        assert!(short.beyond_horizon);
        assert!((short.change_point_months.unwrap() - cp_years * 6.0).abs() < 1e-9);
    }

    #[test]
    fn dagum_numeric_classification() {
        // alpha * beta > 1: hazard starts at zero and rises to a single peak.
        let rep = classify_shape(Dagum, &ParamVector::full(2.0, 3.0, 1.0)).unwrap();
        assert_eq!(rep.shape, ShapeClass::UpsideDownBathtub);
        assert!(rep.change_point_months.is_some());
        let rep = classify_shape(Dagum, &ParamVector::full(0.5, 0.7, 1.0)).unwrap();
        let scan = scan_shape(Dagum, &ParamVector::full(0.5, 0.7, 1.0), 1e-4, 1e3, 20_000).unwrap().unwrap();
        assert_eq!(rep.shape, scan);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
        assert!(close(softplus(0.0), 2f64.ln(), 1e-15));
    }
}
