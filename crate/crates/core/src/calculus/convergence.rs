use serde::Serialize;

use crate::error::{Result, WlabError};

/// Residuals at or below this level are treated as converged to roundoff.
/// Spectral third derivatives amplify rounding error roughly like n^3, so
/// fully resolved spectral residuals sit between 1e-14 and 1e-8 and grow with n.
pub const ROUNDOFF_FLOOR: f64 = 1e-8;

/// Slopes steeper than this are reported as faster than any algebraic order.
const SUPERALGEBRAIC_SLOPE: f64 = -10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConvergenceClass {
    Algebraic { order: f64 },
    Superalgebraic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceFit {
    pub sizes: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of log(residual) against log(size).
    pub slope: f64,
    pub class: ConvergenceClass,
    /// All residuals sit at the roundoff floor; the slope then carries no information.
    pub at_roundoff_floor: bool,
    pub warning: Option<String>,
}

impl ConvergenceFit {
    /// Observed algebraic order, infinite for superalgebraic convergence.
    pub fn order(&self) -> f64 {
        match self.class {
            ConvergenceClass::Algebraic { order } => order,
            ConvergenceClass::Superalgebraic => f64::INFINITY,
        }
    }
}

pub fn fit_convergence(sizes: &[usize], residuals: &[f64]) -> Result<ConvergenceFit> {
    if sizes.len() < 3 {
        return Err(WlabError::InvalidParameter {
            name: "sizes".into(),
            reason: format!("need at least 3 sizes, got {}", sizes.len()),
        });
    }
    if residuals.len() != sizes.len() {
        return Err(WlabError::DimensionMismatch {
            expected: sizes.len(),
            got: residuals.len(),
        });
    }
    let at_floor = residuals.iter().all(|&r| r <= ROUNDOFF_FLOOR);
    // zero residuals would break the log fit; clamp to a tiny positive value
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|&r| r.max(1e-300).ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;

    let class = if at_floor || slope < SUPERALGEBRAIC_SLOPE {
        ConvergenceClass::Superalgebraic
    } else {
        ConvergenceClass::Algebraic { order: -slope }
    };
    let increasing = residuals.windows(2).any(|w| w[1] > w[0]);
    let warning = (increasing && !at_floor).then(|| "residuals do not decrease monotonically".to_string());
    Ok(ConvergenceFit {
        sizes: sizes.to_vec(),
        residuals: residuals.to_vec(),
        slope,
        class,
        at_roundoff_floor: at_floor,
        warning,
    })
}

/// Evaluates `residual` at each size and fits the empirical order.
pub fn convergence_order(sizes: &[usize], mut residual: impl FnMut(usize) -> Result<f64>) -> Result<ConvergenceFit> {
    let values = sizes.iter().map(|&n| residual(n)).collect::<Result<Vec<_>>>()?;
    fit_convergence(sizes, &values)
}
