//! Closed-form scaling regimes and empirical scaling fits.
//!
//! Three piecewise laws are tabulated here: the broadcast time as a function
//! of the power-law exponent, and two light-cone lower bounds on the time to
//! spread an operator a distance `r`. Only the regime structure and the
//! exponents are represented; the hidden constants are not known and are not
//! invented.

use std::fmt;
use std::ops::Bound;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// Broadcast (GHZ preparation) time versus qubit count.
    BroadcastTime,
    /// Lieb-Robinson light cone, any dimension.
    LiebRobinson,
    /// Frobenius light cone, one dimension.
    FrobeniusLightCone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Constant,
    Logarithmic,
    /// `x^exponent`, divided by `log x` when `log_divisor` is set.
    Power { exponent: Rational64, log_divisor: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRegime {
    pub kind: RegimeKind,
    pub lower: Bound<Rational64>,
    pub upper: Bound<Rational64>,
    pub source: BoundSource,
}

impl ScalingRegime {
    pub fn exponent(&self) -> Option<Rational64> {
        match self.kind {
            RegimeKind::Power { exponent, .. } => Some(exponent),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, RegimeKind::Power { exponent, log_divisor: false } if exponent == Rational64::from(1))
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            RegimeKind::Constant => "constant",
            RegimeKind::Logarithmic => "logarithmic",
            RegimeKind::Power { .. } => "power",
        }
    }

    pub fn contains(&self, alpha: Rational64) -> bool {
        contains(&(self.lower, self.upper), alpha)
    }
}

impl fmt::Display for ScalingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RegimeKind::Constant => f.write_str("constant"),
            RegimeKind::Logarithmic => f.write_str("logarithmic"),
            RegimeKind::Power { exponent, log_divisor: false } => write!(f, "power {exponent}"),
            RegimeKind::Power { exponent, log_divisor: true } => {
                write!(f, "power {exponent} / log")
            }
        }
    }
}

type Interval = (Bound<Rational64>, Bound<Rational64>);

fn contains(iv: &Interval, a: Rational64) -> bool {
    let lo = match iv.0 {
        Bound::Included(x) => a >= x,
        Bound::Excluded(x) => a > x,
        Bound::Unbounded => true,
    };
    let hi = match iv.1 {
        Bound::Included(x) => a <= x,
        Bound::Excluded(x) => a < x,
        Bound::Unbounded => true,
    };
    lo && hi
}

fn r(n: i64) -> Rational64 {
    Rational64::from(n)
}

/// Converts a float exponent to the nearest simple rational.
pub fn rational_alpha(alpha: f64) -> Result<Rational64> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Parameter(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    Rational64::approximate_float(alpha)
        .ok_or_else(|| Error::Parameter(format!("alpha {alpha} has no rational approximation")))
}

fn check_dimension(d: usize) -> Result<i64> {
    if (1..=3).contains(&d) {
        Ok(d as i64)
    } else {
        Err(Error::Parameter(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

/// The case intervals of each law, in order. For every source they
/// partition its domain of alpha.
pub fn case_intervals(source: BoundSource, dimension: usize) -> Result<Vec<Interval>> {
    use Bound::*;
    let d = r(check_dimension(dimension)?);
    Ok(match source {
        BoundSource::BroadcastTime => vec![
            (Included(r(0)), Excluded(d)),
            (Included(d), Included(d)),
            (Excluded(d), Included(d + 1)),
            (Excluded(d + 1), Unbounded),
        ],
        BoundSource::LiebRobinson => vec![
            (Included(d), Included(d)),
            (Excluded(d), Included(d * 2)),
            (Excluded(d * 2), Included(d * 2 + 1)),
            (Excluded(d * 2 + 1), Unbounded),
        ],
        BoundSource::FrobeniusLightCone => {
            if dimension != 1 {
                return Err(Error::Parameter("the Frobenius light cone is tabulated for D = 1 only".into()));
            }
            vec![
                (Excluded(Rational64::new(3, 2)), Included(Rational64::new(5, 2))),
                (Excluded(Rational64::new(5, 2)), Unbounded),
            ]
        }
    })
}

fn pick(source: BoundSource, dimension: usize, alpha: Rational64) -> Result<(usize, Interval)> {
    let cases = case_intervals(source, dimension)?;
    cases
        .into_iter()
        .enumerate()
        .find(|(_, iv)| contains(iv, alpha))
        .ok_or_else(|| Error::OutOfDomain {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
            reason: format!("{source:?} is not defined there"),
        })
}

/// Broadcast-time regime for an exact exponent.
pub fn t_ghz_regime_exact(alpha: Rational64, dimension: usize) -> Result<ScalingRegime> {
    if alpha < Rational64::zero() {
        return Err(Error::Parameter("alpha must be >= 0".into()));
    }
    let d = r(check_dimension(dimension)?);
    let (case, (lower, upper)) = pick(BoundSource::BroadcastTime, dimension, alpha)?;
    let kind = match case {
        0 => RegimeKind::Constant,
        1 => RegimeKind::Logarithmic,
        2 => RegimeKind::Power { exponent: (alpha - d) / d, log_divisor: false },
        _ => RegimeKind::Power { exponent: r(1) / d, log_divisor: false },
    };
    Ok(ScalingRegime { kind, lower, upper, source: BoundSource::BroadcastTime })
}

pub fn t_ghz_regime(alpha: f64, dimension: usize) -> Result<ScalingRegime> {
    t_ghz_regime_exact(rational_alpha(alpha)?, dimension)
}

/// Lieb-Robinson lower bound on the operator-spreading time, as a function
/// of the distance `r`. Defined for alpha >= D.
pub fn lr_lower_bound_exact(alpha: Rational64, dimension: usize) -> Result<ScalingRegime> {
    let d = r(check_dimension(dimension)?);
    if alpha < d {
        return Err(Error::OutOfDomain {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
            reason: format!("the Lieb-Robinson bound starts at alpha = D = {d}"),
        });
    }
    let (case, (lower, upper)) = pick(BoundSource::LiebRobinson, dimension, alpha)?;
    let kind = match case {
        0 => RegimeKind::Constant,
        1 => RegimeKind::Logarithmic,
        2 => RegimeKind::Power {
            exponent: (alpha - d * 2) / (alpha - d),
            log_divisor: false,
        },
        _ => RegimeKind::Power { exponent: r(1), log_divisor: false },
    };
    Ok(ScalingRegime { kind, lower, upper, source: BoundSource::LiebRobinson })
}

pub fn lr_lower_bound(alpha: f64, dimension: usize) -> Result<ScalingRegime> {
    lr_lower_bound_exact(rational_alpha(alpha)?, dimension)
}

/// Frobenius light-cone lower bound in one dimension, alpha > 3/2.
pub fn frob_lower_bound_1d_exact(alpha: Rational64) -> Result<ScalingRegime> {
    if alpha <= Rational64::new(3, 2) {
        return Err(Error::OutOfDomain {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
            reason: "the Frobenius bound needs alpha > 3/2".into(),
        });
    }
    let (case, (lower, upper)) = pick(BoundSource::FrobeniusLightCone, 1, alpha)?;
    let kind = match case {
        0 => RegimeKind::Power {
            exponent: alpha - Rational64::new(3, 2),
            log_divisor: true,
        },
        _ => RegimeKind::Power { exponent: r(1), log_divisor: false },
    };
    Ok(ScalingRegime { kind, lower, upper, source: BoundSource::FrobeniusLightCone })
}

pub fn frob_lower_bound_1d(alpha: f64) -> Result<ScalingRegime> {
    frob_lower_bound_1d_exact(rational_alpha(alpha)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Constant,
    Logarithmic,
    Power,
}

impl FitModel {
    pub fn for_regime(regime: &ScalingRegime) -> Self {
        match regime.kind {
            RegimeKind::Constant => FitModel::Constant,
            RegimeKind::Logarithmic => FitModel::Logarithmic,
            RegimeKind::Power { .. } => FitModel::Power,
        }
    }
}

/// Result of [`fit_scaling`].
///
/// `value` is the max/min ratio for the constant model, the slope against
/// `ln n` for the logarithmic model, and the log-log slope for the power
/// model. `residual` is the RMS deviation in the fitted coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: FitModel,
    pub value: f64,
    pub intercept: f64,
    pub residual: f64,
    pub samples_used: usize,
    pub discarded: usize,
}

/// Number of smallest-n samples dropped before fitting.
pub const FIT_DISCARD: usize = 2;

pub fn fit_scaling(samples: &[(f64, f64)], model: FitModel) -> Result<FitReport> {
    if samples.len() < 4 {
        return Err(Error::Parameter(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Parameter("sample sizes must be strictly increasing".into()));
    }
    if samples.iter().any(|&(n, t)| n <= 0.0 || t <= 0.0 || !t.is_finite()) {
        return Err(Error::Parameter("samples must be positive".into()));
    }
    let window = &samples[FIT_DISCARD..];
    let (value, intercept, residual) = match model {
        FitModel::Constant => {
            let max = window.iter().map(|s| s.1).fold(f64::MIN, f64::max);
            let min = window.iter().map(|s| s.1).fold(f64::MAX, f64::min);
            let mean = window.iter().map(|s| s.1).sum::<f64>() / window.len() as f64;
            let rms = (window.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>()
                / window.len() as f64)
                .sqrt();
            (max / min, mean, rms)
        }
        FitModel::Logarithmic => {
            let xs: Vec<f64> = window.iter().map(|s| s.0.ln()).collect();
            let ys: Vec<f64> = window.iter().map(|s| s.1).collect();
            linear_fit(&xs, &ys)
        }
        FitModel::Power => {
            let xs: Vec<f64> = window.iter().map(|s| s.0.ln()).collect();
            let ys: Vec<f64> = window.iter().map(|s| s.1.ln()).collect();
            linear_fit(&xs, &ys)
        }
    };
    Ok(FitReport {
        model,
        value,
        intercept,
        residual,
        samples_used: window.len(),
        discarded: FIT_DISCARD,
    })
}

/// Largest max/min makespan ratio accepted as bounded.
pub const CONSTANT_RATIO_LIMIT: f64 = 3.0;
/// Largest logarithmic-fit residual, as a fraction of the slope.
pub const LOG_RESIDUAL_FRACTION: f64 = 0.05;
/// Largest deviation of a fitted power-law exponent.
pub const EXPONENT_TOLERANCE: f64 = 0.1;

/// Whether a fit of the model chosen by [`FitModel::for_regime`] reproduces
/// `regime`.
pub fn regime_matches(regime: &ScalingRegime, fit: &FitReport) -> bool {
    match (regime.kind, fit.model) {
        (RegimeKind::Constant, FitModel::Constant) => fit.value <= CONSTANT_RATIO_LIMIT,
        (RegimeKind::Logarithmic, FitModel::Logarithmic) => {
            fit.value > 0.0 && fit.residual <= LOG_RESIDUAL_FRACTION * fit.value
        }
        (RegimeKind::Power { exponent, .. }, FitModel::Power) => {
            let expected = exponent.to_f64().unwrap_or(f64::NAN);
            (fit.value - expected).abs() <= EXPONENT_TOLERANCE
        }
        _ => false,
    }
}
