//! Least-squares line fits used by the scaling-law diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when the fit is exact or has no
    /// residual degrees of freedom.
    pub slope_stderr: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Usage(format!(
            "linear fit needs >= 2 matching points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("degenerate abscissa in linear fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = x.len().saturating_sub(2);
    let slope_stderr = if dof > 0 && ss_res > 0.0 {
        (ss_res / dof as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinFit {
        slope,
        intercept,
        slope_stderr,
        r2,
        n: x.len(),
    })
}

/// Fit `ln y = intercept + slope ln x`; points with non-positive `y` are
/// dropped, non-positive `x` is an error.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LinFit> {
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Usage("log-log fit needs positive abscissae".into()));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    let lx: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|&v| 2.5 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-12);
        assert!((f.intercept + 1.0).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_recovered() {
        let x = [1e-8, 1e-7, 1e-6, 1e-5];
        let y: Vec<f64> = x.iter().map(|&v: &f64| 3.0 * v.powf(0.25)).collect();
        let f = log_log_fit(&x, &y).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-10);
        assert!((f.intercept.exp() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(log_log_fit(&[-1.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_entries_dropped_in_log_fit() {
        let x = [1e-6, 1e-5, 1e-4, 1e-3];
        let y = [0.0, 1e-2, 1e-1, 1.0];
        let f = log_log_fit(&x, &y).unwrap();
        assert_eq!(f.n, 3);
        assert!((f.slope - 1.0).abs() < 1e-10);
    }
}
