//! Dense univariate polynomials in ascending-power form.

use serde::{Deserialize, Serialize};

/// A polynomial `c[0] + c[1] x + c[2] x^2 + ...`.
///
/// An empty coefficient list is the zero polynomial.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree ignoring trailing zeros; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Value of the `order`-th derivative at `x`.
    pub fn eval_derivative(&self, x: f64, order: usize) -> f64 {
        // sum_k c_k k!/(k-order)! x^(k-order), Horner over the shifted list
        let n = self.coeffs.len();
        if order >= n {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in (order..n).rev() {
            acc = acc * x + self.coeffs[k] * falling_factorial(k, order);
        }
        acc
    }

    /// Taylor coefficients `p^(j)(x0)/j!` for `j = 0..=order`.
    ///
    /// Exact up to rounding: the result is the coefficient list of `p(x0 + t)`.
    pub fn taylor_at(&self, x0: f64, order: usize) -> Vec<f64> {
        (0..=order)
            .map(|j| {
                let n = self.coeffs.len();
                if j >= n {
                    return 0.0;
                }
                let mut acc = 0.0;
                for k in (j..n).rev() {
                    acc = acc * x0 + self.coeffs[k] * binomial(k, j);
                }
                acc
            })
            .collect()
    }
}

impl From<Vec<f64>> for Poly {
    fn from(coeffs: Vec<f64>) -> Self {
        Poly::new(coeffs)
    }
}

fn falling_factorial(k: usize, m: usize) -> f64 {
    ((k - m + 1)..=k).fold(1.0, |acc, v| acc * v as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Taylor coefficients at zero, `k^(j)(0)/j!` for `j = 0..=order`.
pub fn taylor_at_zero(coeff: &Poly, order: usize) -> Vec<f64> {
    (0..=order)
        .map(|j| coeff.coeffs().get(j).copied().unwrap_or(0.0))
        .collect()
}

/// Value of the `derivative_order`-th derivative of `coeff` at `x`.
pub fn eval_coefficient(coeff: &Poly, x: f64, derivative_order: usize) -> f64 {
    coeff.eval_derivative(x, derivative_order)
}

/// Truncated product of two power series given by coefficient lists.
pub fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Derivative of a power series in coefficient form.
pub fn series_diff(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_at_zero_examples() {
        assert_eq!(taylor_at_zero(&Poly::constant(1.0), 3), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(taylor_at_zero(&Poly::new(vec![1.0, 2.0]), 2), vec![1.0, 2.0, 0.0]);
        assert_eq!(taylor_at_zero(&Poly::new(vec![2.0, 0.0, 1.0]), 2), vec![2.0, 0.0, 1.0]);
    }

    #[test]
    fn eval_coefficient_examples() {
        assert_eq!(eval_coefficient(&Poly::constant(1.0), 0.5, 0), 1.0);
        assert_eq!(eval_coefficient(&Poly::new(vec![1.0, 2.0]), 0.0, 1), 2.0);
        assert_eq!(eval_coefficient(&Poly::new(vec![2.0, 0.0, 1.0]), -1.0, 0), 3.0);
    }

    #[test]
    fn shifted_taylor_matches_derivatives() {
        let p = Poly::new(vec![0.3, -1.0, 2.5, 0.7, -0.2]);
        let x0 = 0.4;
        let t = p.taylor_at(x0, 6);
        let mut fact = 1.0;
        for (j, &tj) in t.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            let d = p.eval_derivative(x0, j);
            assert!((tj * fact - d).abs() < 1e-12 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn series_product_and_derivative() {
        // (1 + t)(1 - t) = 1 - t^2
        assert_eq!(series_mul(&[1.0, 1.0], &[1.0, -1.0], 3), vec![1.0, 0.0, -1.0]);
        assert_eq!(series_diff(&[5.0, 1.0, 3.0]), vec![1.0, 6.0]);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn taylor_reproduces_derivatives_at_zero(
                coeffs in prop::collection::vec(-5.0f64..5.0, 0..7),
                order in 0usize..8,
            ) {
                let p = Poly::new(coeffs);
                let t = taylor_at_zero(&p, order);
                let mut fact = 1.0;
                for (j, tj) in t.iter().enumerate().take(order + 1) {
                    if j > 0 { fact *= j as f64; }
                    let d = eval_coefficient(&p, 0.0, j);
                    prop_assert!((tj * fact - d).abs() <= 1e-9 * (1.0 + d.abs()));
                }
            }
        }
    }
}
