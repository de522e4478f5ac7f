use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_ROWS: usize = 4;

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Pearson correlation of `x` and `y`.
    pub correlation: f64,
    pub rows: usize,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    let n = pts.len();
    if n < MIN_ROWS {
        return Err(Error::FitRefused {
            valid: n,
            need: MIN_ROWS,
        });
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Consistency("degenerate abscissae in fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / nf).sqrt();
    let correlation = if syy == 0.0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
    Ok(LineFit {
        slope,
        intercept,
        residual,
        correlation,
        rows: n,
    })
}

/// `log y = log C + rate log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub constant: f64,
    pub residual: f64,
    pub rows: usize,
    /// Largest change of `rate` when one row is left out.
    pub leave_one_out: f64,
}

pub fn rate_fit(x: &[f64], y: &[f64]) -> Result<RateFit> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let full = line_fit(&lx, &ly)?;
    let mut leave_one_out = 0.0f64;
    if full.rows > MIN_ROWS {
        for skip in 0..lx.len() {
            let (sx, sy): (Vec<f64>, Vec<f64>) = lx
                .iter()
                .zip(&ly)
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, (&a, &b))| (a, b))
                .unzip();
            if let Ok(f) = line_fit(&sx, &sy) {
                leave_one_out = leave_one_out.max((f.slope - full.slope).abs());
            }
        }
    }
    Ok(RateFit {
        rate: full.slope,
        constant: full.intercept.exp(),
        residual: full.residual,
        rows: full.rows,
        leave_one_out,
    })
}

/// `log y = c - M / eps`, fitted against `1 / eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub decay: f64,
    pub constant: f64,
    pub correlation: f64,
    pub rows: usize,
}

pub fn exp_fit(eps: &[f64], y: &[f64]) -> Result<ExpFit> {
    let ix: Vec<f64> = eps.iter().map(|e| 1.0 / e).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let f = line_fit(&ix, &ly)?;
    Ok(ExpFit {
        decay: -f.slope,
        constant: f.intercept.exp(),
        correlation: f.correlation,
        rows: f.rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x: Vec<f64> = (1..8).map(|k| 0.1 / k as f64).collect();
        let y: Vec<f64> = x.iter().map(|e| 3.0 * e.powi(3)).collect();
        let f = rate_fit(&x, &y).unwrap();
        assert!((f.rate - 3.0).abs() < 1e-12);
        assert!((f.constant - 3.0).abs() < 1e-10);
        assert!(f.leave_one_out < 1e-12);
    }

    #[test]
    fn recovers_exponential_decay() {
        let eps: Vec<f64> = (3..10).map(|l| 1.0 / l as f64).collect();
        let y: Vec<f64> = eps.iter().map(|e| 2.0 * (-1.5 / e).exp()).collect();
        let f = exp_fit(&eps, &y).unwrap();
        assert!((f.decay - 1.5).abs() < 1e-12);
        assert!(f.correlation < -0.999999);
    }

    #[test]
    fn refuses_short_input() {
        assert!(matches!(
            rate_fit(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0]),
            Err(Error::FitRefused { valid: 3, need: 4 })
        ));
    }
}
