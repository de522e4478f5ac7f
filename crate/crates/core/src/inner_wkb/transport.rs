use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outer_spectral::{OuterMode, OuterTerm};

use super::phase::PhaseData;
use super::series::{is_zero, InnerCtx, VecFn};
use super::tcalc::{det_g_delta_closed, g_delta, g_matrix, n_minus, n_plus, t_pow};

/// The discrete family `eps_l = S(1) / (delta + 2 pi l - alpha(1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedSequence {
    pub delta: f64,
    pub l0: i64,
    /// `(l, eps_l)` in increasing `l`.
    pub epsilons: Vec<(i64, f64)>,
    pub g_delta: Matrix4<f64>,
    pub det_g_delta: f64,
}

impl QuantizedSequence {
    pub fn epsilon(&self, l: i64) -> Option<f64> {
        self.epsilons.iter().find(|e| e.0 == l).map(|e| e.1)
    }
}

/// Smallest natural `l` with a positive denominator.
pub fn first_index(phase: &PhaseData, delta: f64) -> i64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut l = ((phase.alpha1 - delta) / tau).floor() as i64;
    l = l.max(1);
    while delta + tau * l as f64 - phase.alpha1 <= 0.0 {
        l += 1;
    }
    while l > 1 && delta + tau * (l - 1) as f64 - phase.alpha1 > 0.0 {
        l -= 1;
    }
    l
}

pub fn epsilon_l(phase: &PhaseData, delta: f64, l: i64) -> f64 {
    phase.s1 / (delta + 2.0 * std::f64::consts::PI * l as f64 - phase.alpha1)
}

pub fn quantize(phase: &PhaseData, delta: f64, l_range: (i64, i64)) -> Result<QuantizedSequence> {
    let l0 = first_index(phase, delta);
    let lo = l_range.0.max(l0);
    if lo > l_range.1 {
        return Err(Error::EmptyRange {
            lo: l_range.0,
            hi: l_range.1,
            l0,
        });
    }
    Ok(QuantizedSequence {
        delta,
        l0,
        epsilons: (lo..=l_range.1).map(|l| (l, epsilon_l(phase, delta, l))).collect(),
        g_delta: g_delta(delta),
        det_g_delta: det_g_delta_closed(delta),
    })
}

/// `D_i`, `E_i` at `xi = -1, 1` and `F_i(-0), F_i(+0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InterfaceQuantities {
    pub d_minus: Vector4<f64>,
    pub d_plus: Vector4<f64>,
    pub e_minus: Vector4<f64>,
    pub e_plus: Vector4<f64>,
    pub f_minus: f64,
    pub f_plus: f64,
}

/// A coefficient `f_i = Phi (beta + h)` of the inner expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerCoefficient {
    pub order: usize,
    pub f: VecFn,
    pub beta: Vector4<f64>,
    pub h: VecFn,
    pub chi_next: VecFn,
    pub sigma: Vector4<f64>,
    pub interface: InterfaceQuantities,
    /// `max |f' - A f - w|` on the grid.
    pub transport_residual: f64,
    /// `max |f - Phi (beta + h)|`.
    pub representation_residual: f64,
}

impl<'a> InnerCtx<'a> {
    fn end(&self, f: &[Vector4<f64>], plus: bool) -> Vector4<f64> {
        if plus {
            f[f.len() - 1]
        } else {
            f[0]
        }
    }

    /// `q^{-3/8} <Phi^{-1} g, N_{+-1}>` at the endpoint.
    pub fn project(&self, g: Vector4<f64>, plus: bool) -> f64 {
        let n = if plus { n_plus(self.delta) } else { n_minus() };
        (self.phase.phi_inv_end(plus) * g).dot(&n) / self.phase.m_weight(plus)
    }

    /// Inner projections entering `V_i(+-0)` and `W_i(+-0)`.
    pub fn interface_projections(&self, i: usize, fs: &[VecFn]) -> ([f64; 2], [f64; 2]) {
        let mut value = [0.0; 2];
        let mut slope = [0.0; 2];
        if i < 2 {
            return (value, slope);
        }
        let series = self.padded(fs, i - 1, i - 1);
        let pf = self.apply_p(&series);
        for (s, plus) in [false, true].into_iter().enumerate() {
            if i >= 4 && i - 4 < series.len() {
                value[s] = self.project(self.end(&series[i - 4], plus), plus);
            }
            slope[s] = self.project(self.end(&pf[i - 2], plus), plus);
        }
        (value, slope)
    }

    /// `D_i`, `E_i`, `F_i` from `f_0 .. f_{i-1}` and `v_0 .. v_{i-2}`.
    pub fn interface_quantities(&self, i: usize, fs: &[VecFn], outer: &[&OuterTerm]) -> Result<InterfaceQuantities> {
        let series = self.padded(fs, i, i + 1);
        let p2 = self.apply_p_pow(&series, 2);
        let p3 = self.apply_p(&p2);
        let f_sum = |plus: bool| -> Result<f64> {
            let sign: f64 = if plus { 1.0 } else { -1.0 };
            let mut acc = 0.0;
            let mut fact = 1.0;
            for j in 0..=i.saturating_sub(2) {
                if i < 2 {
                    break;
                }
                if j > 0 {
                    fact *= j as f64;
                }
                let term = outer
                    .get(i - j - 2)
                    .ok_or_else(|| Error::MissingTerm(format!("v_{} for F_{i}", i - j - 2)))?;
                acc += sign.powi(j as i32) / fact * term.deriv(plus, j + 3)?;
            }
            Ok(acc)
        };
        Ok(InterfaceQuantities {
            d_minus: self.end(&p2[i], false),
            d_plus: self.end(&p2[i], true),
            e_minus: self.end(&p3[i], false),
            e_plus: self.end(&p3[i], true),
            f_minus: f_sum(false)?,
            f_plus: f_sum(true)?,
        })
    }

    /// Boundary values `sigma` of the transport problem for `f_i`.
    pub fn boundary_sigma(&self, i: usize, iq: &InterfaceQuantities, outer: &[&OuterTerm]) -> Result<Vector4<f64>> {
        let mut sigma = Vector4::zeros();
        for (s, plus) in [false, true].into_iter().enumerate() {
            let sign: f64 = if plus { 1.0 } else { -1.0 };
            let sp = self.phase.sprime_at(sign);
            let mut shift = 0.0;
            let mut fact = 1.0;
            for j in 0..=i {
                if j > 0 {
                    fact *= j as f64;
                }
                let term = outer
                    .get(i - j)
                    .ok_or_else(|| Error::MissingTerm(format!("v_{} for f_{i}", i - j)))?;
                shift += sign.powi(j as i32) / fact * term.deriv(plus, j + 2)?;
            }
            let (d, e, f) = if plus {
                (iq.d_plus, iq.e_plus, iq.f_plus)
            } else {
                (iq.d_minus, iq.e_minus, iq.f_minus)
            };
            sigma[2 * s] = (shift - self.project(d, plus)) / (sp * sp);
            sigma[2 * s + 1] = (f - self.project(e, plus)) / sp.powi(3);
        }
        Ok(sigma)
    }

    /// Right-hand side `w = k0(0)^{-1} S'^{-3} T^3 chi / 4` of the transport system.
    pub fn transport_rhs(&self, chi: &[Vector4<f64>]) -> VecFn {
        let t3 = t_pow(3);
        let k0 = self.phase.k0_0;
        chi.iter()
            .zip(&self.phase.sprime)
            .map(|(c, sp)| t3 * c * (0.25 / (k0 * sp.powi(3))))
            .collect()
    }

    /// `h(xi) = int_{-1}^xi Phi^{-1} w`.
    pub fn particular(&self, w: &[Vector4<f64>]) -> VecFn {
        if is_zero(w) {
            return self.zero();
        }
        let integrand: VecFn = (0..self.len()).map(|k| self.phase.phi_inv(k) * w[k]).collect();
        self.cheb.cumint_vec(&integrand)
    }

    /// Right-hand side of `G_delta beta = g`.
    pub fn g_vector(&self, sigma: &Vector4<f64>, h1: &Vector4<f64>) -> Vector4<f64> {
        let mm = self.phase.m_weight(false);
        let mp = self.phase.m_weight(true);
        let n1 = n_plus(self.delta);
        Vector4::new(
            mm * sigma[0],
            mm * sigma[1],
            mp * sigma[2] - h1.dot(&(t_pow(2) * n1)),
            mp * sigma[3] - h1.dot(&(t_pow(3) * n1)),
        )
    }

    /// Principal solution of `y' = A y + w` with boundary data `sigma`.
    pub fn transport_solve(
        &self,
        order: usize,
        chi_next: VecFn,
        sigma: Vector4<f64>,
        interface: InterfaceQuantities,
    ) -> Result<InnerCoefficient> {
        let w = self.transport_rhs(&chi_next);
        let h = self.particular(&w);
        let g = self.g_vector(&sigma, &h[h.len() - 1]);
        let beta = g_delta(self.delta)
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::Consistency(format!("G_delta singular at delta = {}", self.delta)))?;
        let f: VecFn = (0..self.len()).map(|k| self.phase.phi(k) * (beta + h[k])).collect();
        let mut coef = InnerCoefficient {
            order,
            f,
            beta,
            h,
            chi_next,
            sigma,
            interface,
            transport_residual: 0.0,
            representation_residual: 0.0,
        };
        coef.transport_residual = self.transport_residual(&coef.f, &w);
        coef.representation_residual = self.representation_residual(&coef);
        Ok(coef)
    }

    pub fn transport_residual(&self, f: &[Vector4<f64>], w: &[Vector4<f64>]) -> f64 {
        let df = self.cheb.diff_vec(f);
        (0..self.len())
            .map(|k| (df[k] - self.phase.a_matrix(self.nodes()[k]) * f[k] - w[k]).amax())
            .fold(0.0, f64::max)
    }

    fn representation_residual(&self, c: &InnerCoefficient) -> f64 {
        (0..self.len())
            .map(|k| (c.f[k] - self.phase.phi(k) * (c.beta + c.h[k])).amax())
            .fold(0.0, f64::max)
    }

    /// Closed-form `beta_0`.
    pub fn beta0(&self, v0pp: f64) -> Vector4<f64> {
        let (tan, cos) = (self.delta.tan(), self.delta.cos());
        let sp = self.phase.sprime_at(-1.0);
        let scale = 0.5 * self.phase.m_weight(false) * v0pp / (sp * sp);
        Vector4::new(tan - 1.0, -tan - 1.0, tan + 1.0, -1.0 / cos) * scale
    }

    /// Leading coefficient `f_0 = Phi beta_0`, checked against the linear
    /// solve of `G_delta beta = g`.
    pub fn solve_f0(&self, mode: &OuterMode) -> Result<InnerCoefficient> {
        let v0pp = mode.v0pp_minus0;
        let sp = self.phase.sprime_at(-1.0);
        let sigma = Vector4::new(v0pp / (sp * sp), 0.0, 0.0, 0.0);
        let beta = self.beta0(v0pp);
        let g = self.g_vector(&sigma, &Vector4::zeros());
        let solved = g_delta(self.delta)
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::Consistency("G_delta singular".into()))?;
        let mismatch = (solved - beta).amax();
        if mismatch > 1e-12 * beta.amax().max(f64::MIN_POSITIVE) {
            return Err(Error::Consistency(format!(
                "closed-form beta_0 differs from the G_delta solve by {mismatch:.3e}"
            )));
        }
        let f: VecFn = (0..self.len()).map(|k| self.phase.phi(k) * beta).collect();
        let zero = self.zero();
        let mut coef = InnerCoefficient {
            order: 0,
            f,
            beta,
            h: zero.clone(),
            chi_next: zero.clone(),
            sigma,
            interface: InterfaceQuantities::default(),
            transport_residual: 0.0,
            representation_residual: 0.0,
        };
        coef.transport_residual = self.transport_residual(&coef.f, &zero);
        Ok(coef)
    }

    /// `C^1` distance between the solution with the full `eps`-dependent
    /// boundary rows and the principal solution, at `gamma = gamma_eps(1)`.
    /// Uses `G(gamma) d_beta = d_g - E beta_*` to avoid cancellation.
    pub fn principal_gap(&self, w: &[Vector4<f64>], sigma: &Vector4<f64>, gamma: f64) -> Result<f64> {
        let h = self.particular(w);
        let h1 = h[h.len() - 1];
        let beta_star = g_delta(self.delta)
            .lu()
            .solve(&self.g_vector(sigma, &h1))
            .ok_or_else(|| Error::Consistency("G_delta singular".into()))?;
        let e = (-gamma).exp();
        let mut pert = Matrix4::zeros();
        pert[(0, 3)] = e;
        pert[(1, 3)] = e;
        pert[(2, 2)] = e;
        pert[(3, 2)] = -e;
        let dg = Vector4::new(0.0, 0.0, -h1[2] * e, h1[2] * e);
        let dbeta = g_matrix(gamma)
            .lu()
            .solve(&(dg - pert * beta_star))
            .ok_or_else(|| Error::Consistency(format!("G singular at gamma = {gamma}")))?;
        Ok((0..self.len())
            .map(|k| {
                let dy = self.phase.phi(k) * dbeta;
                let ddy = self.phase.a_matrix(self.nodes()[k]) * dy;
                dy.amax() + ddy.amax()
            })
            .fold(0.0, f64::max))
    }

    /// The same distance computed naively from the two solutions.
    pub fn principal_gap_direct(&self, w: &[Vector4<f64>], sigma: &Vector4<f64>, gamma: f64) -> Result<f64> {
        let h = self.particular(w);
        let h1 = h[h.len() - 1];
        let singular = || Error::Consistency("boundary matrix singular".into());
        let beta_star = g_delta(self.delta)
            .lu()
            .solve(&self.g_vector(sigma, &h1))
            .ok_or_else(singular)?;
        let (s, c) = gamma.sin_cos();
        let n1 = Vector4::new(c, s, (-gamma).exp(), 1.0);
        let mm = self.phase.m_weight(false);
        let mp = self.phase.m_weight(true);
        let g = Vector4::new(
            mm * sigma[0],
            mm * sigma[1],
            mp * sigma[2] - h1.dot(&(t_pow(2) * n1)),
            mp * sigma[3] - h1.dot(&(t_pow(3) * n1)),
        );
        let beta = g_matrix(gamma).lu().solve(&g).ok_or_else(singular)?;
        let dbeta = beta - beta_star;
        Ok((0..self.len())
            .map(|k| {
                let dy = self.phase.phi(k) * dbeta;
                dy.amax() + (self.phase.a_matrix(self.nodes()[k]) * dy).amax()
            })
            .fold(0.0, f64::max))
    }
}
