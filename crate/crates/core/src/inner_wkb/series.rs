//! Power-series calculus in `eps` for vector functions on the inner grid.
//!
//! A series `F = sum eps^k f_k` is a slice of grid functions. The operator
//! `P = S' T^3 + eps d/dxi` is the `eps`-scaled derivative of `<F, N>`, and
//! the inner equation reads
//! `P^2 (k0 P^2 F) - eps^2 P (k1 P F) + eps^4 k2 F - lambda q F = 0`
//! with the coefficients evaluated at `eps xi`.

use nalgebra::Vector4;

use crate::cheb::Chebyshev;
use crate::model::CoefficientSet;
use crate::poly::taylor_at_zero;

use super::phase::PhaseData;
use super::tcalc::t_pow;

pub type VecFn = Vec<Vector4<f64>>;

pub fn zero_fn(n: usize) -> VecFn {
    vec![Vector4::zeros(); n]
}

/// Grid, phase and coefficients shared by the inner computations.
#[derive(Debug, Clone)]
pub struct InnerCtx<'a> {
    pub cheb: &'a Chebyshev,
    pub phase: &'a PhaseData,
    pub coeffs: &'a CoefficientSet,
    pub delta: f64,
    q: Vec<f64>,
}

impl<'a> InnerCtx<'a> {
    pub fn new(cheb: &'a Chebyshev, phase: &'a PhaseData, coeffs: &'a CoefficientSet, delta: f64) -> Self {
        assert_eq!(cheb.len(), phase.len(), "phase computed on a different grid");
        let q = cheb.nodes().iter().map(|&x| coeffs.q.eval(x)).collect();
        Self {
            cheb,
            phase,
            coeffs,
            delta,
            q,
        }
    }

    pub fn len(&self) -> usize {
        self.cheb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cheb.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        self.cheb.nodes()
    }

    pub fn zero(&self) -> VecFn {
        zero_fn(self.len())
    }

    /// `(P G)_k = S' T^3 g_k + g'_{k-1}`.
    pub fn apply_p(&self, g: &[VecFn]) -> Vec<VecFn> {
        let t3 = t_pow(3);
        let sp = &self.phase.sprime;
        let mut out: Vec<VecFn> = g
            .iter()
            .map(|gk| gk.iter().zip(sp).map(|(v, s)| t3 * v * *s).collect())
            .collect();
        for k in 1..g.len() {
            if is_zero(&g[k - 1]) {
                continue;
            }
            let d = self.cheb.diff_vec(&g[k - 1]);
            for (o, dv) in out[k].iter_mut().zip(d) {
                *o += dv;
            }
        }
        out
    }

    pub fn apply_p_pow(&self, g: &[VecFn], power: usize) -> Vec<VecFn> {
        (0..power).fold(g.to_vec(), |acc, _| self.apply_p(&acc))
    }

    /// Multiply by `c(eps xi) = sum_j eps^j c_j xi^j`.
    fn mul_taylor(&self, c: &[f64], g: &[VecFn]) -> Vec<VecFn> {
        let xi = self.nodes();
        (0..g.len())
            .map(|k| {
                let mut acc = self.zero();
                for (j, &cj) in c.iter().enumerate().take(k + 1) {
                    if cj == 0.0 || is_zero(&g[k - j]) {
                        continue;
                    }
                    for (a, (v, &x)) in acc.iter_mut().zip(g[k - j].iter().zip(xi)) {
                        *a += v * (cj * x.powi(j as i32));
                    }
                }
                acc
            })
            .collect()
    }

    /// All coefficients of the inner operator applied to `F`, with
    /// `lambda(eps) = sum eps^j lambdas[j]`; the result has `f.len()` terms.
    pub fn operator_series(&self, f: &[VecFn], lambdas: &[f64]) -> Vec<VecFn> {
        let len = f.len();
        let order = len.saturating_sub(1);
        let k0 = taylor_at_zero(&self.coeffs.k0, order);
        let k1 = taylor_at_zero(&self.coeffs.k1, order);
        let k2 = taylor_at_zero(&self.coeffs.k2, order);

        let bend = self.apply_p_pow(&self.mul_taylor(&k0, &self.apply_p_pow(f, 2)), 2);
        let tens = self.apply_p(&self.mul_taylor(&k1, &self.apply_p(f)));
        let found = self.mul_taylor(&k2, f);
        (0..len)
            .map(|k| {
                let mut out = bend[k].clone();
                if k >= 2 {
                    for (o, t) in out.iter_mut().zip(&tens[k - 2]) {
                        *o -= t;
                    }
                }
                if k >= 4 {
                    for (o, t) in out.iter_mut().zip(&found[k - 4]) {
                        *o += t;
                    }
                }
                for j in 0..=k {
                    let lam = lambdas.get(j).copied().unwrap_or(0.0);
                    if lam == 0.0 || is_zero(&f[k - j]) {
                        continue;
                    }
                    for (o, (v, q)) in out.iter_mut().zip(f[k - j].iter().zip(&self.q)) {
                        *o -= v * (lam * q);
                    }
                }
                out
            })
            .collect()
    }

    /// `chi_i = -sum_{j >= 2} O_j f_{i-j}`: the `eps^i` coefficient of the
    /// operator with `f_{i-1} = f_i = 0`. Needs `lambdas[0..=i]`.
    pub fn assemble_chi(&self, i: usize, fs: &[VecFn], lambdas: &[f64]) -> VecFn {
        if i < 2 {
            return self.zero();
        }
        let series = self.padded(fs, i - 1, i + 1);
        let op = self.operator_series(&series, lambdas);
        op[i].iter().map(|v| -v).collect()
    }

    /// `fs[..keep]` followed by zeros up to `len` terms.
    pub fn padded(&self, fs: &[VecFn], keep: usize, len: usize) -> Vec<VecFn> {
        (0..len)
            .map(|k| {
                if k < keep && k < fs.len() {
                    fs[k].clone()
                } else {
                    self.zero()
                }
            })
            .collect()
    }

    pub fn q_at_nodes(&self) -> &[f64] {
        &self.q
    }
}

pub fn is_zero(f: &[Vector4<f64>]) -> bool {
    f.iter().all(|v| v.iter().all(|&c| c == 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner_wkb::compute_phase;
    use crate::poly::Poly;

    fn smooth(ctx: &InnerCtx, a: f64) -> VecFn {
        ctx.nodes()
            .iter()
            .map(|&x| Vector4::new((a * x).cos(), (x + a).sin(), (0.3 * x).exp(), 1.0 + a * x * x))
            .collect()
    }

    fn setup(coeffs: &CoefficientSet) -> (Chebyshev, PhaseData) {
        let cheb = Chebyshev::new(48);
        let phase = compute_phase(coeffs, 120.0, 300.0, &cheb).unwrap();
        (cheb, phase)
    }

    #[test]
    fn eikonal_cancels_leading_order() {
        let mut coeffs = CoefficientSet::uniform(-1.0, 1.0);
        coeffs.q = Poly::new(vec![1.5, 0.2, 0.1]);
        coeffs.k0 = Poly::new(vec![2.0, 0.3]);
        let (cheb, phase) = setup(&coeffs);
        let ctx = InnerCtx::new(&cheb, &phase, &coeffs, 0.0);
        let f = smooth(&ctx, 1.3);
        let op = ctx.operator_series(&[f], &[phase.lambda0]);
        let worst = op[0].iter().map(|v| v.amax()).fold(0.0, f64::max);
        assert!(worst < 1e-10 * phase.lambda0, "{worst}");
        assert!(is_zero(&ctx.assemble_chi(0, &[], &[])));
        assert!(is_zero(&ctx.assemble_chi(1, &[], &[])));
    }

    #[test]
    fn first_order_operator_matches_explicit_form() {
        let mut coeffs = CoefficientSet::uniform(-1.0, 1.0);
        coeffs.q = Poly::new(vec![1.5, 0.2, 0.1]);
        coeffs.k0 = Poly::new(vec![2.0, 0.3, 0.7]);
        coeffs.k1 = Poly::new(vec![0.4]);
        let (cheb, phase) = setup(&coeffs);
        let ctx = InnerCtx::new(&cheb, &phase, &coeffs, 0.0);
        let f = smooth(&ctx, 0.7);
        let l1 = phase.lambda1;
        let op = ctx.operator_series(&[f.clone(), ctx.zero()], &[phase.lambda0, l1]);
        let df = cheb.diff_vec(&f);
        let t = t_pow(1);
        let (k0, k0p) = (coeffs.k0.eval(0.0), coeffs.k0.eval_derivative(0.0, 1));
        for (k, &xi) in ctx.nodes().iter().enumerate() {
            let sp = phase.sprime_at(xi);
            let sdd = phase.sdd_at(xi);
            let q = coeffs.q.eval(xi);
            let explicit = f[k] * (k0p * xi * sp.powi(4) - l1 * q)
                + t * (df[k] * (4.0 * sp.powi(3)) + f[k] * (6.0 * sp * sp * sdd)) * k0;
            assert!((op[1][k] - explicit).amax() < 1e-9 * l1, "node {k}");
        }
    }

    #[test]
    fn chi3_constant_coefficients() {
        let coeffs = CoefficientSet::uniform(-1.0, 1.0);
        let (cheb, phase) = setup(&coeffs);
        let ctx = InnerCtx::new(&cheb, &phase, &coeffs, 0.0);
        let f0 = smooth(&ctx, 0.9);
        let f1 = smooth(&ctx, -0.4);
        let lambdas = [phase.lambda0, phase.lambda1, 37.0, -5.0];
        let chi = ctx.assemble_chi(3, &[f0.clone(), f1.clone()], &lambdas);
        // (c T^3 + eps d)^4 with constant c expands binomially
        let c = phase.sprime[0];
        let f1pp = cheb.diff_n_vec(&f1, 2);
        let f0ppp = cheb.diff_n_vec(&f0, 3);
        for k in [3, 11, 24, 36, 45] {
            let expect = -(t_pow(6) * f1pp[k] * (6.0 * c * c) + t_pow(3) * f0ppp[k] * (4.0 * c)
                - f1[k] * lambdas[2]
                - f0[k] * lambdas[3]);
            assert!((chi[k] - expect).amax() < 1e-8 * expect.amax().max(1.0), "node {k}");
        }
    }
}
