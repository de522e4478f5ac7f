//! Outer problem on `(a, 0) U (0, b)`: the three-point limit eigenproblem and
//! the chain of nonhomogeneous corrections.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::banded::{dot, eigs_near, pencil_residual, BandLu, BandMatrix, EigsOptions};
use crate::error::{Error, Result};
use crate::fem::{assemble, FeFunction, Mesh};
use crate::model::{CoefficientSet, Tolerances};
use crate::poly::{series_diff, series_mul, Poly};

/// Gauss points per element that integrate the weak forms exactly for the
/// polynomial coefficients of `coeffs` (mass `p N_i N_j` is the worst case).
pub fn gauss_points(coeffs: &CoefficientSet) -> usize {
    4 + coeffs.max_degree().div_ceil(2)
}

/// A term `v_i` of the outer expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterTerm {
    pub order: usize,
    pub lambda: f64,
    pub left: FeFunction,
    pub right: FeFunction,
    /// `v^(j)(-0)` for `j = 0..`.
    pub derivs_minus: Vec<f64>,
    /// `v^(j)(+0)` for `j = 0..`.
    pub derivs_plus: Vec<f64>,
}

impl OuterTerm {
    pub fn eval(&self, x: f64, derivative: usize) -> f64 {
        if x < 0.0 {
            self.left.eval(x, derivative)
        } else {
            self.right.eval(x, derivative)
        }
    }

    pub fn deriv(&self, plus: bool, j: usize) -> Result<f64> {
        let table = if plus { &self.derivs_plus } else { &self.derivs_minus };
        table.get(j).copied().ok_or_else(|| {
            Error::MissingTerm(format!(
                "derivative {j} of v_{} at {}0 (table has {})",
                self.order,
                if plus { "+" } else { "-" },
                table.len()
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterMode {
    pub term: OuterTerm,
    pub v0pp_minus0: f64,
    pub gap: f64,
    /// Lowest clamped eigenvalues on `(a, 0)` and `(0, b)`.
    pub spectrum_left: Vec<f64>,
    pub spectrum_right: Vec<f64>,
    pub residual: f64,
}

impl OuterMode {
    pub fn lambda0(&self) -> f64 {
        self.term.lambda
    }
}

/// Interface data `V_i(+-0)`, `W_i(+-0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InterfaceData {
    pub v_minus: f64,
    pub v_plus: f64,
    pub w_minus: f64,
    pub w_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTerm {
    pub term: OuterTerm,
    pub interface: InterfaceData,
    /// Multiplier of the bordering row, relative to the load.
    pub solvability_residual: f64,
    /// `lambda_i` recovered from the weak form tested against `v_0`.
    pub lambda_by_testing: f64,
    /// Pivot-ratio condition indicator of the `(0, b)` solve.
    pub right_condition: f64,
}

#[derive(Debug, Clone)]
struct Side {
    mesh: Mesh,
    k: BandMatrix,
    m: BandMatrix,
}

impl Side {
    fn new(coeffs: &CoefficientSet, lo: f64, hi: f64, density: usize) -> Self {
        let elements = ((hi - lo) * density as f64).ceil().max(4.0) as usize;
        let mesh = Mesh::uniform(lo, hi, elements);
        let (k, m) = assemble(
            &mesh,
            |x| (coeffs.k0.eval(x), coeffs.k1.eval(x), coeffs.k2.eval(x)),
            |x| coeffs.p.eval(x),
            gauss_points(coeffs),
        );
        Self { mesh, k, m }
    }

    fn dofs(&self) -> usize {
        self.mesh.dofs()
    }

    fn free(&self) -> std::ops::Range<usize> {
        2..self.dofs() - 2
    }

    fn clamped_eigs(&self, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let kf = self.k.submatrix(self.free());
        let mf = self.m.submatrix(self.free());
        // the residual floor grows like h^-4; the Rayleigh quotient is still
        // accurate to its square
        let opts = EigsOptions {
            tol: 1e-13,
            stall_tol: 1e-6,
            ..EigsOptions::default()
        };
        let mut pairs = eigs_near(&kf, &mf, 0.0, count, opts)?;
        pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
        Ok(pairs
            .into_iter()
            .map(|p| {
                let mut full = vec![0.0; 2];
                full.extend(p.vector);
                full.extend([0.0, 0.0]);
                (p.value, full)
            })
            .collect())
    }
}

/// Limit eigenpair `(lambda_0, v_0)` of the three-point problem.
///
/// `mode_index` is 1-based over the union of the clamped spectra of `(a, 0)`
/// and `(0, b)`.
pub fn solve_three_point_eigen(
    coeffs: &CoefficientSet,
    mode_index: usize,
    outer_grid: usize,
    deriv_order: usize,
    tol: &Tolerances,
) -> Result<OuterMode> {
    if mode_index == 0 {
        return Err(Error::InvalidConfig("mode_index is 1-based".into()));
    }
    let left = Side::new(coeffs, coeffs.a, 0.0, outer_grid);
    let right = Side::new(coeffs, 0.0, coeffs.b, outer_grid);
    let count = mode_index + 1;
    let lpairs = left.clamped_eigs(count)?;
    let rpairs = right.clamped_eigs(count)?;

    let mut union: Vec<(f64, bool, usize)> = lpairs
        .iter()
        .enumerate()
        .map(|(i, p)| (p.0, false, i))
        .chain(rpairs.iter().enumerate().map(|(i, p)| (p.0, true, i)))
        .collect();
    union.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lambda0, on_right, idx) = union[mode_index - 1];
    let gap = union
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != mode_index - 1)
        .map(|(_, u)| (u.0 - lambda0).abs())
        .fold(f64::INFINITY, f64::min);
    let gap_min = tol.gap_min_rel * lambda0;
    if gap < gap_min {
        return Err(Error::Multiplicity {
            lambda: lambda0,
            gap,
            gap_min,
        });
    }
    if on_right {
        return Err(Error::ModeOnRight {
            mode_index,
            lambda: lambda0,
        });
    }

    let mut x = lpairs[idx].1.clone();
    let norm = left.m.bilinear(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let zero = vec![0.0; left.dofs()];
    let mut derivs = endpoint_derivatives(coeffs, &left, &x, &zero, lambda0, true, &[], deriv_order);
    if derivs[2] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
        derivs.iter_mut().for_each(|v| *v = -*v);
    }
    let kf = left.k.submatrix(left.free());
    let mf = left.m.submatrix(left.free());
    let residual = pencil_residual(&kf, &mf, lambda0, &x[left.free()]);
    let term = OuterTerm {
        order: 0,
        lambda: lambda0,
        left: FeFunction::from_dofs(&left.mesh, &x),
        right: FeFunction::zero(&right.mesh),
        derivs_minus: derivs.clone(),
        derivs_plus: vec![0.0; deriv_order + 1],
    };
    Ok(OuterMode {
        v0pp_minus0: derivs[2],
        term,
        gap,
        spectrum_left: lpairs.iter().map(|p| p.0).collect(),
        spectrum_right: rpairs.iter().map(|p| p.0).collect(),
        residual,
    })
}

pub fn compute_lambda1(mode: &OuterMode, coeffs: &CoefficientSet) -> f64 {
    coeffs.k0.eval(0.0) * mode.v0pp_minus0.powi(2)
}

/// `lambda_i = (k0 v0'' W_i - (k0 v0'')' V_i)(-0)`.
pub fn solvability_lambda(mode: &OuterMode, coeffs: &CoefficientSet, v_minus: f64, w_minus: f64) -> f64 {
    let d = &mode.term.derivs_minus;
    let k0 = coeffs.k0.eval(0.0);
    let k0p = coeffs.k0.eval_derivative(0.0, 1);
    let flux = k0 * d[2];
    let flux_p = k0p * d[2] + k0 * d[3];
    flux * w_minus - flux_p * v_minus
}

/// Interface data for order `i`. `inner_value[s]` and `inner_slope[s]` are
/// the inner projections at `xi = -1` (`s = 0`) and `xi = 1` (`s = 1`);
/// `lower` holds `v_0 .. v_{i-1}`.
pub fn boundary_data(
    i: usize,
    inner_value: [f64; 2],
    inner_slope: [f64; 2],
    lower: &[&OuterTerm],
) -> Result<InterfaceData> {
    if lower.len() < i {
        return Err(Error::MissingTerm(format!(
            "order {i} needs v_0..v_{}, have {}",
            i as i64 - 1,
            lower.len()
        )));
    }
    let shift = |plus: bool, extra: usize| -> Result<f64> {
        let sign: f64 = if plus { 1.0 } else { -1.0 };
        let mut sum = 0.0;
        let mut fact = 1.0;
        for j in 1..=i {
            fact *= j as f64;
            sum += sign.powi(j as i32) / fact * lower[i - j].deriv(plus, j + extra)?;
        }
        Ok(sum)
    };
    Ok(InterfaceData {
        v_minus: inner_value[0] - shift(false, 0)?,
        v_plus: inner_value[1] - shift(true, 0)?,
        w_minus: inner_slope[0] - shift(false, 1)?,
        w_plus: inner_slope[1] - shift(true, 1)?,
    })
}

/// Factorizations shared by every correction order.
#[derive(Debug, Clone)]
pub struct OuterSolver {
    coeffs: CoefficientSet,
    left: Side,
    right: Side,
    lambda0: f64,
    v0: Vec<f64>,
    bordered: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    border: Vec<f64>,
    border_scale: f64,
    right_lu: BandLu,
    deriv_order: usize,
}

impl OuterSolver {
    pub fn new(coeffs: &CoefficientSet, mode: &OuterMode, outer_grid: usize) -> Result<Self> {
        let left = Side::new(coeffs, coeffs.a, 0.0, outer_grid);
        let right = Side::new(coeffs, 0.0, coeffs.b, outer_grid);
        let lambda0 = mode.lambda0();
        let v0 = mode.term.left.dofs();
        if v0.len() != left.dofs() {
            return Err(Error::Consistency("v0 was computed on a different outer grid".into()));
        }

        let free = left.free();
        let nf = free.len();
        let shifted = left.k.axpy(-lambda0, &left.m);
        let mv0 = left.m.matvec(&v0);
        // balance the bordering row against the stiffness scale
        let border_scale = shifted.max_abs() / mv0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut big = DMatrix::<f64>::zeros(nf + 1, nf + 1);
        for i in 0..nf {
            let lo = i.saturating_sub(3);
            let hi = (i + 3).min(nf - 1);
            for j in lo..=hi {
                big[(i, j)] = shifted.get(free.start + i, free.start + j);
            }
            big[(i, nf)] = border_scale * mv0[free.start + i];
            big[(nf, i)] = border_scale * mv0[free.start + i];
        }
        let bordered = big.lu();
        if !bordered.is_invertible() {
            return Err(Error::SingularMatrix(nf));
        }
        let right_lu = right.k.axpy(-lambda0, &right.m).submatrix(right.free()).lu()?;
        Ok(Self {
            coeffs: coeffs.clone(),
            lambda0,
            v0,
            bordered,
            border: mv0,
            border_scale,
            right_lu,
            deriv_order: mode.term.derivs_minus.len() - 1,
            left,
            right,
        })
    }

    pub fn left_mesh(&self) -> &Mesh {
        &self.left.mesh
    }

    pub fn right_mesh(&self) -> &Mesh {
        &self.right.mesh
    }

    /// Solve for `v_i` given `lambdas = [lambda_0, .., lambda_i]`,
    /// `lower = [v_0, .., v_{i-1}]` and the interface data.
    pub fn solve_correction(
        &self,
        i: usize,
        lambdas: &[f64],
        lower: &[&OuterTerm],
        data: InterfaceData,
        tol: &Tolerances,
    ) -> Result<CorrectionTerm> {
        if lambdas.len() < i + 1 || lower.len() < i {
            return Err(Error::MissingTerm(format!("lower-order data for v_{i}")));
        }
        let load_dofs = |side: &Side, pick: &dyn Fn(&OuterTerm) -> Vec<f64>| -> Vec<f64> {
            let mut acc = vec![0.0; side.dofs()];
            for j in 1..=i {
                let v = pick(lower[i - j]);
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += lambdas[j] * b;
                }
            }
            acc
        };

        // (a, 0): bordered singular solve
        let lload = self.left.m.matvec(&load_dofs(&self.left, &|t| t.left.dofs()));
        let nl = self.left.dofs();
        let mut xl = vec![0.0; nl];
        xl[nl - 2] = data.v_minus;
        xl[nl - 1] = data.w_minus;
        let shifted = self.left.k.axpy(-self.lambda0, &self.left.m);
        let lifted = shifted.matvec(&xl);
        let free = self.left.free();
        let nf = free.len();
        let mut rhs = DVector::<f64>::zeros(nf + 1);
        for r in 0..nf {
            rhs[r] = lload[free.start + r] - lifted[free.start + r];
        }
        rhs[nf] = -self.border_scale * (self.border[nl - 2] * xl[nl - 2] + self.border[nl - 1] * xl[nl - 1]);
        let sol = self.bordered.solve(&rhs).ok_or(Error::SingularMatrix(nf))?;
        for r in 0..nf {
            xl[free.start + r] = sol[r];
        }
        let mu = sol[nf] * self.border_scale;
        let border_norm = dot(&self.border[free.clone()], &self.border[free.clone()]).sqrt();
        let rhs_norm = rhs.rows(0, nf).norm();
        let solvability_residual = if rhs_norm > 0.0 {
            mu.abs() * border_norm / rhs_norm
        } else {
            0.0
        };
        if solvability_residual > tol.tol_solvability {
            return Err(Error::Solvability {
                order: i,
                residual: solvability_residual,
                tol: tol.tol_solvability,
            });
        }

        // (0, b): regular solve
        let rload = self.right.m.matvec(&load_dofs(&self.right, &|t| t.right.dofs()));
        let nr = self.right.dofs();
        let mut xr = vec![0.0; nr];
        xr[0] = data.v_plus;
        xr[1] = data.w_plus;
        let rshift = self.right.k.axpy(-self.lambda0, &self.right.m);
        let rlift = rshift.matvec(&xr);
        let rfree = self.right.free();
        let rrhs: Vec<f64> = rfree.clone().map(|r| rload[r] - rlift[r]).collect();
        let rsol = if rrhs.iter().all(|&v| v == 0.0) {
            vec![0.0; rrhs.len()]
        } else {
            self.right_lu.solve(&rrhs)
        };
        xr[rfree].copy_from_slice(&rsol);

        let order = self.deriv_order;
        let taylor = |plus: bool| -> Vec<Vec<f64>> {
            (1..=i)
                .map(|j| {
                    let t = lower[i - j];
                    let d = if plus { &t.derivs_plus } else { &t.derivs_minus };
                    to_taylor(d).into_iter().map(|c| lambdas[j] * c).collect()
                })
                .collect()
        };
        let sum_series = |parts: Vec<Vec<f64>>| -> Vec<f64> {
            let mut acc = vec![0.0; order + 1];
            for p in parts {
                for (a, b) in acc.iter_mut().zip(p) {
                    *a += b;
                }
            }
            acc
        };
        let derivs_minus = endpoint_derivatives(
            &self.coeffs,
            &self.left,
            &xl,
            &lload,
            self.lambda0,
            true,
            &sum_series(taylor(false)),
            order,
        );
        let derivs_plus = endpoint_derivatives(
            &self.coeffs,
            &self.right,
            &xr,
            &rload,
            self.lambda0,
            false,
            &sum_series(taylor(true)),
            order,
        );

        let kv0 = self.left.k.matvec(&self.v0);
        let mv0 = &self.border;
        let mut lambda_by_testing = dot(&xl, &kv0) - self.lambda0 * dot(&xl, mv0);
        for j in 1..i {
            lambda_by_testing -= lambdas[j] * dot(&lower[i - j].left.dofs(), mv0);
        }

        Ok(CorrectionTerm {
            term: OuterTerm {
                order: i,
                lambda: lambdas[i],
                left: FeFunction::from_dofs(&self.left.mesh, &xl),
                right: FeFunction::from_dofs(&self.right.mesh, &xr),
                derivs_minus,
                derivs_plus,
            },
            interface: data,
            solvability_residual,
            lambda_by_testing,
            right_condition: self.right_lu.pivot_ratio(),
        })
    }

    /// `int_a^0 p v w` for two left-side dof vectors.
    pub fn weighted_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.left.m.bilinear(x, y)
    }

    /// Normwise backward error of `L v - lambda0 p v = load` on `(a, 0)`:
    /// `||K x - lambda0 M x - f|| / ((|K| + lambda0 |M|) ||x|| + ||f||)` over free dofs.
    pub fn left_residual(&self, term: &OuterTerm, lambdas: &[f64], lower: &[&OuterTerm]) -> f64 {
        let x = term.left.dofs();
        let kx = self.left.k.matvec(&x);
        let mx = self.left.m.matvec(&x);
        let mut load = vec![0.0; x.len()];
        for j in 1..=term.order {
            let v = self.left.m.matvec(&lower[term.order - j].left.dofs());
            for (a, b) in load.iter_mut().zip(v) {
                *a += lambdas[j] * b;
            }
        }
        let free = self.left.free();
        let norm = |f: &dyn Fn(usize) -> f64| free.clone().map(|k| f(k).powi(2)).sum::<f64>().sqrt();
        let num = norm(&|k| kx[k] - self.lambda0 * mx[k] - load[k]);
        let scale = self.left.k.max_abs() + self.lambda0 * self.left.m.max_abs();
        let den = scale * norm(&|k| x[k]) + norm(&|k| load[k]);
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

/// Derivative table `v^(j)(x0)`, `j = 0..=order`, at the interface end of a
/// side (`at_hi`: right end of `(a, 0)`; otherwise left end of `(0, b)`).
///
/// Values and slopes are the nodal unknowns, second and third derivatives
/// come from the boundary reactions of the discrete equations, and higher
/// ones from the Taylor recursion of the ODE with `rhs` the Taylor
/// coefficients of `sum_j lambda_j v_{i-j}` at `x0`.
#[allow(clippy::too_many_arguments)]
fn endpoint_derivatives(
    coeffs: &CoefficientSet,
    side: &Side,
    x: &[f64],
    load: &[f64],
    lambda0: f64,
    at_hi: bool,
    rhs: &[f64],
    order: usize,
) -> Vec<f64> {
    let n = side.dofs();
    let r = side.k.axpy(-lambda0, &side.m).matvec(x);
    let (vi, si, x0) = if at_hi {
        (n - 2, n - 1, side.mesh.hi())
    } else {
        (0, 1, side.mesh.lo())
    };
    let r_val = r[vi] - load[vi];
    let r_slope = r[si] - load[si];
    let sign = if at_hi { 1.0 } else { -1.0 };
    let k0 = coeffs.k0.eval(x0);
    let k0p = coeffs.k0.eval_derivative(x0, 1);
    let k1 = coeffs.k1.eval(x0);
    let v1 = x[si];
    let flux = sign * r_slope;
    let flux_p = -sign * r_val + k1 * v1;
    let v2 = flux / k0;
    let v3 = (flux_p - k0p * v2) / k0;

    let mut c = vec![0.0; order + 1];
    let seed = [x[vi], v1, v2 / 2.0, v3 / 6.0];
    for (j, s) in seed.iter().enumerate().take(order + 1) {
        c[j] = *s;
    }
    let len = order + 1;
    let kt = |p: &Poly| p.taylor_at(x0, order);
    let (k0t, k1t, k2t, pt) = (kt(&coeffs.k0), kt(&coeffs.k1), kt(&coeffs.k2), kt(&coeffs.p));
    let mut rhs_full = rhs.to_vec();
    rhs_full.resize(len, 0.0);
    let r_series = series_mul(&pt, &rhs_full, len);
    for m in 0..len.saturating_sub(4) {
        c[m + 4] = 0.0;
        let lhs = ode_series(&c, &k0t, &k1t, &k2t, &pt, lambda0);
        let scale = k0 * ((m + 1) * (m + 2) * (m + 3) * (m + 4)) as f64;
        c[m + 4] = (r_series[m] - lhs[m]) / scale;
    }
    from_taylor(&c)
}

/// Taylor series of `(k0 v'')'' - (k1 v')' + k2 v - lambda0 p v`.
fn ode_series(c: &[f64], k0: &[f64], k1: &[f64], k2: &[f64], p: &[f64], lambda0: f64) -> Vec<f64> {
    let len = c.len();
    let d = |s: &[f64]| {
        let mut v = series_diff(s);
        v.resize(len, 0.0);
        v
    };
    let bend = d(&d(&series_mul(k0, &d(&d(c)), len)));
    let tens = d(&series_mul(k1, &d(c), len));
    let found = series_mul(k2, c, len);
    let mass = series_mul(p, c, len);
    (0..len)
        .map(|m| bend[m] - tens[m] + found[m] - lambda0 * mass[m])
        .collect()
}

fn to_taylor(derivs: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    derivs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            if j > 0 {
                fact *= j as f64;
            }
            d / fact
        })
        .collect()
}

fn from_taylor(c: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    c.iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as f64;
            }
            v * fact
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU1: f64 = 4.730040744862704;

    fn beam() -> CoefficientSet {
        CoefficientSet::uniform(-1.0, 0.8)
    }

    /// Clamped-clamped mode on `(-1, 0)` with `v''(0) > 0`, unnormalised.
    fn exact_mode(x: f64, d: usize) -> f64 {
        let mu = MU1;
        let t = x + 1.0;
        let s = (mu.cosh() - mu.cos()) / (mu.sinh() - mu.sin());
        let m = mu.powi(d as i32);
        let (c, ch, sn, sh) = ((mu * t).cos(), (mu * t).cosh(), (mu * t).sin(), (mu * t).sinh());
        let val = match d % 4 {
            0 => (ch - c) - s * (sh - sn),
            1 => (sh + sn) - s * (ch - c),
            2 => (ch + c) - s * (sh + sn),
            _ => (sh - sn) - s * (ch + c),
        };
        m * val
    }

    #[test]
    fn beam_limit_eigenvalue() {
        let mode = solve_three_point_eigen(&beam(), 1, 200, 8, &Tolerances::default()).unwrap();
        assert!((mode.lambda0() / MU1.powi(4) - 1.0).abs() < 1e-9);
        let v0 = &mode.term;
        assert!(v0.left.eval(0.0, 0).abs() < 1e-10);
        assert!(v0.left.eval(0.0, 1).abs() < 1e-10);
        assert!(v0.right.is_zero());
        assert!(mode.v0pp_minus0 > 0.0);
        assert!(mode.gap > 700.0);
    }

    #[test]
    fn endpoint_table_matches_closed_form() {
        let mode = solve_three_point_eigen(&beam(), 1, 200, 8, &Tolerances::default()).unwrap();
        let gl = crate::quad::GaussLegendre::new(20);
        let norm = gl
            .integrate_composite(-1.0, 0.0, 20, |x| exact_mode(x, 0).powi(2))
            .sqrt();
        for j in 2..=8 {
            let exact = exact_mode(0.0, j) / norm;
            let got = mode.term.derivs_minus[j];
            assert!(
                (got - exact).abs() < 1e-7 * exact.abs().max(MU1.powi(j as i32)),
                "j = {j}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn symmetric_beam_is_rejected_as_multiple() {
        let err = solve_three_point_eigen(&CoefficientSet::uniform(-1.0, 1.0), 1, 100, 6, &Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, Error::Multiplicity { .. }));
    }

    #[test]
    fn right_mode_is_rejected() {
        let err = solve_three_point_eigen(&CoefficientSet::uniform(-0.8, 1.0), 1, 100, 6, &Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, Error::ModeOnRight { .. }));
    }

    #[test]
    fn lambda1_examples() {
        let mut mode = solve_three_point_eigen(&beam(), 1, 100, 6, &Tolerances::default()).unwrap();
        let mut c = beam();
        mode.v0pp_minus0 = 2.0;
        assert_eq!(compute_lambda1(&mode, &c), 4.0);
        c.k0 = Poly::constant(3.0);
        mode.v0pp_minus0 = 0.0;
        assert_eq!(compute_lambda1(&mode, &c), 0.0);
    }

    #[test]
    fn first_correction() {
        let c = beam();
        let tol = Tolerances::default();
        let mode = solve_three_point_eigen(&c, 1, 200, 8, &tol).unwrap();
        let lambda1 = compute_lambda1(&mode, &c);
        let exact_pp = exact_mode(0.0, 2)
            / crate::quad::GaussLegendre::new(20)
                .integrate_composite(-1.0, 0.0, 20, |x| exact_mode(x, 0).powi(2))
                .sqrt();
        assert!((lambda1 / exact_pp.powi(2) - 1.0).abs() < 1e-8);

        let data = boundary_data(1, [0.0; 2], [0.0; 2], &[&mode.term]).unwrap();
        assert_eq!(data.v_minus, 0.0);
        assert_eq!(data.w_minus, mode.v0pp_minus0);
        assert_eq!((data.v_plus, data.w_plus), (0.0, 0.0));
        assert!((solvability_lambda(&mode, &c, data.v_minus, data.w_minus) - lambda1).abs() < 1e-9 * lambda1);

        let solver = OuterSolver::new(&c, &mode, 200).unwrap();
        let lambdas = [mode.lambda0(), lambda1];
        let v1 = solver.solve_correction(1, &lambdas, &[&mode.term], data, &tol).unwrap();
        assert!((v1.term.left.eval(0.0, 1) - mode.v0pp_minus0).abs() < 1e-10);
        assert!(v1.term.left.eval(0.0, 0).abs() < 1e-12);
        assert!(v1.term.right.is_zero());
        let orth = solver.weighted_inner(&v1.term.left.dofs(), &mode.term.left.dofs());
        assert!(orth.abs() < 1e-10, "orth {orth} mu {}", v1.solvability_residual);
        let res = solver.left_residual(&v1.term, &lambdas, &[&mode.term]);
        assert!(res < 1e-8, "residual {res}");
        assert!((v1.lambda_by_testing - lambda1).abs() < 1e-6 * lambda1);
    }

    #[test]
    fn homogeneous_correction_is_zero() {
        let c = beam();
        let tol = Tolerances::default();
        let mode = solve_three_point_eigen(&c, 1, 100, 6, &tol).unwrap();
        let solver = OuterSolver::new(&c, &mode, 100).unwrap();
        let zero = OuterTerm {
            order: 1,
            lambda: 0.0,
            left: FeFunction::zero(solver.left_mesh()),
            right: FeFunction::zero(solver.right_mesh()),
            derivs_minus: vec![0.0; 7],
            derivs_plus: vec![0.0; 7],
        };
        let lam = solvability_lambda(&mode, &c, 0.0, 0.0);
        assert_eq!(lam, 0.0);
        let v2 = solver
            .solve_correction(
                2,
                &[mode.lambda0(), 0.0, 0.0],
                &[&zero, &zero],
                InterfaceData::default(),
                &tol,
            )
            .unwrap();
        assert!(v2.term.left.is_zero() && v2.term.right.is_zero());
    }

    #[test]
    fn zero_order_boundary_data() {
        let data = boundary_data(0, [0.0; 2], [0.0; 2], &[]).unwrap();
        assert_eq!(data, InterfaceData::default());
        assert!(boundary_data(2, [0.0; 2], [0.0; 2], &[]).is_err());
    }
}
