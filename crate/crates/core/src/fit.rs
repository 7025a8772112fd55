//! Least-squares exponent fits `y ≈ C x^s` on log-log data.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
    pub r_squared: f64,
}

impl SlopeFit {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.slope >= lo && self.slope <= hi
    }
}

/// Fits `log y = intercept + slope · log x`. Needs at least three points.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x and y lengths differ".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidParameter(format!("{} points; a slope fit needs 3", x.len())));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        ci_low: slope - t * se,
        ci_high: slope + t * se,
        points: x.len(),
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [0.2, 0.15, 0.1, 0.075, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        let f = fit_loglog(&x, &y).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.ci_high - f.ci_low < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_matches_textbook_t_quantile() {
        // Residuals ±e about slope 2; with 4 points the t quantile at 2 dof is 4.302653.
        let x = [1.0f64, 2.0, 4.0, 8.0];
        let e = [0.01, -0.01, -0.01, 0.01];
        let y: Vec<f64> = x.iter().zip(e).map(|(a, d)| (2.0 * a.ln() + d).exp()).collect();
        let f = fit_loglog(&x, &y).unwrap();
        let lx: Vec<f64> = x.iter().map(|a| a.ln()).collect();
        let mx = lx.iter().sum::<f64>() / 4.0;
        let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        let sse: f64 = {
            let ly: Vec<f64> = y.iter().map(|b| b.ln()).collect();
            ly.iter().zip(&lx).map(|(b, a)| (b - f.intercept - f.slope * a).powi(2)).sum()
        };
        let half = 4.302_652_729_911_275 * (sse / 2.0 / sxx).sqrt();
        assert!((f.ci_high - f.slope - half).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn slope_is_scale_invariant(s in -3.0f64..3.0, c in 0.1f64..10.0, k in 0.1f64..10.0) {
            let x = [0.3, 0.2, 0.1, 0.05];
            let y: Vec<f64> = x.iter().map(|v: &f64| c * v.powf(s) * (1.0 + 0.01 * v.sin())).collect();
            let ky: Vec<f64> = y.iter().map(|v| k * v).collect();
            let a = fit_loglog(&x, &y).unwrap();
            let b = fit_loglog(&x, &ky).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-10);
        }
    }
}
