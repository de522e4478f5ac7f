use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::cheb::Chebyshev;
use crate::error::{Error, Result};
use crate::model::CoefficientSet;
use crate::poly::Poly;
use crate::quad::GaussLegendre;

use super::tcalc::t_pow;

const PANEL_POINTS: usize = 24;

/// Phase, tilt and transport data on the Chebyshev grid over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseData {
    pub lambda0: f64,
    pub lambda1: f64,
    pub k0_0: f64,
    pub k0_1: f64,
    pub q: Poly,
    pub nodes: Vec<f64>,
    pub s: Vec<f64>,
    pub sprime: Vec<f64>,
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
    pub s1: f64,
    pub alpha1: f64,
}

impl PhaseData {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn scale(&self) -> f64 {
        (self.lambda0 / self.k0_0).powf(0.25)
    }

    pub fn sprime_at(&self, xi: f64) -> f64 {
        self.scale() * self.q.eval(xi).powf(0.25)
    }

    pub fn sdd_at(&self, xi: f64) -> f64 {
        self.sprime_at(xi) * self.q.eval_derivative(xi, 1) / (4.0 * self.q.eval(xi))
    }

    pub fn eta_at(&self, xi: f64) -> f64 {
        -3.0 * self.q.eval_derivative(xi, 1) / (8.0 * self.q.eval(xi))
    }

    pub fn theta_at(&self, xi: f64) -> f64 {
        let (l0, l1, k0, k1) = (self.lambda0, self.lambda1, self.k0_0, self.k0_1);
        0.25 * (self.q.eval(xi) / (l0.powi(3) * k0.powi(5))).powf(0.25) * (l1 * k0 - l0 * k1 * xi)
    }

    pub fn a_matrix(&self, xi: f64) -> Matrix4<f64> {
        Matrix4::identity() * self.eta_at(xi) + t_pow(3) * self.theta_at(xi)
    }

    /// Fundamental matrix given `alpha(xi)` and `q(xi)`.
    pub fn phi_from(&self, alpha: f64, q: f64) -> Matrix4<f64> {
        let (s, c) = alpha.sin_cos();
        let m = Matrix4::new(
            c,
            s,
            0.0,
            0.0, //
            -s,
            c,
            0.0,
            0.0, //
            0.0,
            0.0,
            (-alpha).exp(),
            0.0, //
            0.0,
            0.0,
            0.0,
            (alpha - self.alpha1).exp(),
        );
        m * q.powf(-0.375)
    }

    pub fn phi_inv_from(&self, alpha: f64, q: f64) -> Matrix4<f64> {
        let (s, c) = alpha.sin_cos();
        let m = Matrix4::new(
            c,
            -s,
            0.0,
            0.0, //
            s,
            c,
            0.0,
            0.0, //
            0.0,
            0.0,
            alpha.exp(),
            0.0, //
            0.0,
            0.0,
            0.0,
            (self.alpha1 - alpha).exp(),
        );
        m * q.powf(0.375)
    }

    pub fn phi(&self, k: usize) -> Matrix4<f64> {
        self.phi_from(self.alpha[k], self.q.eval(self.nodes[k]))
    }

    pub fn phi_inv(&self, k: usize) -> Matrix4<f64> {
        self.phi_inv_from(self.alpha[k], self.q.eval(self.nodes[k]))
    }

    /// `Phi^{-1}` at the endpoints, where `alpha(-1) = 0`, `alpha(1) = alpha1`.
    pub fn phi_inv_end(&self, plus: bool) -> Matrix4<f64> {
        if plus {
            self.phi_inv_from(self.alpha1, self.q.eval(1.0))
        } else {
            self.phi_inv_from(0.0, self.q.eval(-1.0))
        }
    }

    pub fn gamma_at_1(&self, eps: f64) -> f64 {
        self.s1 / eps + self.alpha1
    }

    /// `q^{3/8}(+-1)`.
    pub fn m_weight(&self, plus: bool) -> f64 {
        self.q.eval(if plus { 1.0 } else { -1.0 }).powf(0.375)
    }

    pub fn max_eikonal_residual(&self) -> f64 {
        self.nodes
            .iter()
            .zip(&self.sprime)
            .map(|(&xi, &sp)| {
                let lq = self.lambda0 * self.q.eval(xi);
                (self.k0_0 * sp.powi(4) - lq).abs() / lq
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `Phi' - A Phi` over the grid, `Phi'` differentiated
    /// spectrally.
    pub fn phi_residual(&self, cheb: &Chebyshev) -> f64 {
        let n = self.len();
        let phis: Vec<Matrix4<f64>> = (0..n).map(|k| self.phi(k)).collect();
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                let entry: Vec<f64> = phis.iter().map(|p| p[(r, c)]).collect();
                let d = cheb.diff(&entry);
                for k in 0..n {
                    let ap = self.a_matrix(self.nodes[k]) * phis[k];
                    worst = worst.max((d[k] - ap[(r, c)]).abs());
                }
            }
        }
        worst
    }

    /// `Phi^t N(xi, S/eps)` against `q^{-3/8} N(xi, gamma_eps)` at every node.
    pub fn phi_n_identity_error(&self, eps: f64) -> f64 {
        use super::tcalc::n_vec;
        let tau_hi = self.s1 / eps;
        let g_hi = self.gamma_at_1(eps);
        (0..self.len())
            .map(|k| {
                let lhs = self.phi(k).transpose() * n_vec(self.s[k] / eps, 0.0, tau_hi);
                let g = self.s[k] / eps + self.alpha[k];
                let rhs: Vector4<f64> = n_vec(g, 0.0, g_hi) * self.q.eval(self.nodes[k]).powf(-0.375);
                (lhs - rhs).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Build `S`, `S'`, `alpha`, `eta`, `theta` on the grid.
pub fn compute_phase(coeffs: &CoefficientSet, lambda0: f64, lambda1: f64, cheb: &Chebyshev) -> Result<PhaseData> {
    if lambda0 <= 0.0 {
        return Err(Error::InvalidConfig(format!("lambda0 must be positive, got {lambda0}")));
    }
    let k0_0 = coeffs.k0.eval(0.0);
    let k0_1 = coeffs.k0.eval_derivative(0.0, 1);
    let q = coeffs.q.clone();
    let scale = (lambda0 / k0_0).powf(0.25);
    let rate = 0.25 / (lambda0.powi(3) * k0_0.powi(5)).powf(0.25);
    let s_integrand = |t: f64| scale * q.eval(t).powf(0.25);
    let a_integrand = |t: f64| rate * q.eval(t).powf(0.25) * (lambda1 * k0_0 - lambda0 * k0_1 * t);

    let gl = GaussLegendre::new(PANEL_POINTS);
    let nodes = cheb.nodes().to_vec();
    let cumulative = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0; nodes.len()];
        for k in 1..nodes.len() {
            acc += gl.integrate(nodes[k - 1], nodes[k], f);
            out[k] = acc;
        }
        out
    };
    let s = cumulative(&s_integrand);
    let alpha = cumulative(&a_integrand);
    let (s1, alpha1) = (*s.last().unwrap(), *alpha.last().unwrap());

    let mut phase = PhaseData {
        lambda0,
        lambda1,
        k0_0,
        k0_1,
        q,
        sprime: Vec::new(),
        eta: Vec::new(),
        theta: Vec::new(),
        nodes,
        s,
        alpha,
        s1,
        alpha1,
    };
    phase.sprime = phase.nodes.iter().map(|&x| phase.sprime_at(x)).collect();
    phase.eta = phase.nodes.iter().map(|&x| phase.eta_at(x)).collect();
    phase.theta = phase.nodes.iter().map(|&x| phase.theta_at(x)).collect();
    if phase.s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Consistency("phase S is not strictly increasing".into()));
    }
    Ok(phase)
}
