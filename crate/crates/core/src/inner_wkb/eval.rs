use nalgebra::Vector4;

use crate::cheb::{ChebFn, ChebVec4, Chebyshev};

use super::phase::PhaseData;
use super::tcalc::n_vec;
use super::transport::InnerCoefficient;

/// Continuous evaluation of the truncated inner series
/// `U(xi) = eps^4 sum_k eps^k <f_k(xi), N(xi, S / eps)>`.
#[derive(Debug, Clone)]
pub struct InnerEvaluator {
    s: ChebFn,
    s1: f64,
    f: Vec<ChebVec4>,
}

impl InnerEvaluator {
    pub fn new(cheb: &Chebyshev, phase: &PhaseData, coeffs: &[InnerCoefficient]) -> Self {
        Self {
            s: cheb.interpolant(&phase.s),
            s1: phase.s1,
            f: coeffs.iter().map(|c| ChebVec4::new(cheb, &c.f)).collect(),
        }
    }

    pub fn orders(&self) -> usize {
        self.f.len()
    }

    /// `N(xi, S(xi) / eps)` with the exponentials shifted to stay bounded.
    pub fn basis(&self, xi: f64, eps: f64) -> Vector4<f64> {
        n_vec(self.s.eval(xi) / eps, 0.0, self.s1 / eps)
    }

    /// Truncation `k <= n`.
    pub fn eval(&self, xi: f64, eps: f64, n: usize) -> f64 {
        let nv = self.basis(xi, eps);
        let mut acc = 0.0;
        let mut pow = eps.powi(4);
        for fk in self.f.iter().take(n + 1) {
            acc += pow * fk.eval(xi).dot(&nv);
            pow *= eps;
        }
        acc
    }

    pub fn coefficient(&self, k: usize, xi: f64) -> Option<Vector4<f64>> {
        self.f.get(k).map(|f| f.eval(xi))
    }
}
