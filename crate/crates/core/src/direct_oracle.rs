//! Direct solver for the original problem at fixed `eps`: density `p` on
//! `(a, b)` outside `(-eps, eps)` and `eps^-8 q(x / eps)` inside.

use serde::{Deserialize, Serialize};

use crate::banded::{eigs_near, BandMatrix, EigsOptions};
use crate::error::{Error, Result};
use crate::fem::{assemble, FeFunction, Mesh};
use crate::model::{CoefficientSet, Tolerances};
use crate::outer_spectral::{gauss_points, OuterTerm};
use crate::quad::GaussLegendre;

/// Element counts for the three pieces `(a, -eps)`, `(-eps, eps)`, `(eps, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Elements per unit length outside `(-eps, eps)`.
    pub outer_density: f64,
    pub inner_elements: usize,
}

impl MeshSpec {
    /// Inner elements needed to put `nodes_per_wavelength` elements on each
    /// oscillation of a mode near `lambda`.
    pub fn required_inner(coeffs: &CoefficientSet, lambda: f64, eps: f64, nodes_per_wavelength: f64) -> usize {
        let span = phase_span(coeffs, lambda);
        (nodes_per_wavelength * span / (2.0 * std::f64::consts::PI * eps)).ceil() as usize
    }

    pub fn resolving(coeffs: &CoefficientSet, lambda: f64, eps: f64, tol: &Tolerances) -> Self {
        Self {
            outer_density: tol.oracle_outer_density,
            inner_elements: Self::required_inner(coeffs, lambda, eps, tol.nodes_per_wavelength),
        }
    }

    /// Every piece refined by `factor`.
    pub fn refined(self, factor: usize) -> Self {
        Self {
            outer_density: self.outer_density * factor as f64,
            inner_elements: self.inner_elements * factor,
        }
    }
}

/// `S(1) = (lambda / k0(0))^{1/4} int_{-1}^{1} q^{1/4}`.
pub fn phase_span(coeffs: &CoefficientSet, lambda: f64) -> f64 {
    let gl = GaussLegendre::new(24);
    let integral = gl.integrate_composite(-1.0, 1.0, 8, |t| coeffs.q.eval(t).powf(0.25));
    (lambda.max(0.0) / coeffs.k0.eval(0.0)).powf(0.25) * integral
}

/// Assembled pencil `K u = lambda M u` with clamped ends removed.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub epsilon: f64,
    pub mesh: Mesh,
    /// Full matrices, boundary rows included.
    pub stiffness: BandMatrix,
    pub mass: BandMatrix,
    coeffs: CoefficientSet,
    gauss: usize,
}

impl DiscreteProblem {
    pub fn assemble(coeffs: &CoefficientSet, eps: f64, spec: &MeshSpec, need_inner: usize) -> Result<Self> {
        let max = (-coeffs.a).min(coeffs.b);
        if !(eps > 0.0 && eps < max) {
            return Err(Error::EpsilonRange { eps, max });
        }
        if spec.inner_elements < need_inner.max(2) {
            return Err(Error::Resolution {
                have: spec.inner_elements,
                need: need_inner.max(2),
            });
        }
        let q = coeffs.q.clone();
        let p = coeffs.p.clone();
        let scale = eps.powi(-(coeffs.m as i32));
        Self::build(coeffs, eps, spec, move |x| {
            if x.abs() < eps {
                scale * q.eval(x / eps)
            } else {
                p.eval(x)
            }
        })
    }

    /// Same mesh and stiffness with the outer density `p` continued through
    /// `(-eps, eps)`: the classical clamped problem on `(a, b)`.
    pub fn assemble_without_mass(coeffs: &CoefficientSet, eps: f64, spec: &MeshSpec) -> Result<Self> {
        let p = coeffs.p.clone();
        Self::build(coeffs, eps, spec, move |x| p.eval(x))
    }

    fn build(coeffs: &CoefficientSet, eps: f64, spec: &MeshSpec, density: impl Fn(f64) -> f64) -> Result<Self> {
        let pieces = |len: f64| ((len * spec.outer_density).ceil() as usize).max(4);
        let mesh = Mesh::piecewise(&[
            (coeffs.a, -eps, pieces(-eps - coeffs.a)),
            (-eps, eps, spec.inner_elements),
            (eps, coeffs.b, pieces(coeffs.b - eps)),
        ]);
        let gauss = gauss_points(coeffs);
        let (stiffness, mass) = assemble(
            &mesh,
            |x| (coeffs.k0.eval(x), coeffs.k1.eval(x), coeffs.k2.eval(x)),
            density,
            gauss,
        );
        Ok(Self {
            epsilon: eps,
            mesh,
            stiffness,
            mass,
            coeffs: coeffs.clone(),
            gauss,
        })
    }

    pub fn free(&self) -> std::ops::Range<usize> {
        2..self.mesh.dofs() - 2
    }

    pub fn inner_elements(&self) -> usize {
        self.mesh
            .nodes
            .windows(2)
            .filter(|w| w[0] >= -self.epsilon && w[1] <= self.epsilon)
            .count()
    }

    /// Free dofs padded with the clamped zeros.
    pub fn embed(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.mesh.dofs()];
        full[self.free()].copy_from_slice(free);
        full
    }

    pub fn weighted_norm(&self, full: &[f64]) -> f64 {
        self.mass.bilinear(full, full).sqrt()
    }

    /// `int_lo^hi f` element by element over the mesh pieces inside `[lo, hi]`;
    /// `lo` and `hi` should be mesh nodes.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let gl = GaussLegendre::new(self.gauss + 2);
        self.mesh
            .nodes
            .windows(2)
            .filter(|w| w[0] >= lo && w[1] <= hi)
            .map(|w| gl.integrate(w[0], w[1], &f))
            .sum()
    }

    /// `int_a^{-eps} p u v_0` for a `rho`-normalized `u`.
    pub fn correlation(&self, u: &FeFunction, v0: &OuterTerm) -> f64 {
        self.integrate(self.coeffs.a, -self.epsilon, |x| {
            self.coeffs.p.eval(x) * u.eval(x, 0) * v0.eval(x, 0)
        })
    }

    /// Eigenpair of the global family closest to `target`.
    ///
    /// Computes `cluster` eigenpairs around `target`, keeps those whose
    /// correlation with `v_0` on `(a, -eps)` is at least half the largest,
    /// picks the one closest to `target` and reports the distance to the
    /// nearest other computed eigenvalue.
    pub fn solve_near(&self, target: f64, v0: &OuterTerm, tol: &Tolerances) -> Result<SpectralResult> {
        if target <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "oracle target must be positive, got {target}"
            )));
        }
        let free = self.free();
        let k = self.stiffness.submatrix(free.clone());
        let m = self.mass.submatrix(free);
        let opts = EigsOptions {
            tol: 1e-12,
            stall_tol: tol.tol_oracle,
            ..EigsOptions::default()
        };
        let pairs = eigs_near(&k, &m, target, tol.oracle_cluster.max(3), opts)?;
        let scored: Vec<(usize, f64)> = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let u = FeFunction::from_dofs(&self.mesh, &self.embed(&p.vector));
                (i, self.correlation(&u, v0) / self.weighted_norm(&self.embed(&p.vector)))
            })
            .collect();
        let strongest = scored.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
        // near-resonant pairs share the outer profile; take the one at the target
        let &(best, _) = scored
            .iter()
            .filter(|s| s.1.abs() >= 0.5 * strongest)
            .min_by(|a, b| {
                (pairs[a.0].value - target)
                    .abs()
                    .total_cmp(&(pairs[b.0].value - target).abs())
            })
            .expect("cluster is nonempty");
        let pick = &pairs[best];
        let value = pick.value;
        let others: Vec<f64> = pairs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, p)| p.value)
            .collect();
        let lower = others
            .iter()
            .copied()
            .filter(|&v| v < value)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let upper = others
            .iter()
            .copied()
            .filter(|&v| v > value)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
        let gap = others.iter().map(|v| (v - value).abs()).fold(f64::INFINITY, f64::min);
        let mut cluster: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        cluster.sort_by(f64::total_cmp);
        let result = SpectralResult {
            epsilon: self.epsilon,
            eigenvalue: value,
            vector: self.embed(&pick.vector),
            residual: pick.residual,
            gap,
            lower,
            upper,
            correlation: 0.0,
            cluster,
        };
        if result.residual > tol.tol_oracle {
            return Err(Error::NoConvergence {
                shift: target,
                iterations: opts.max_iter,
                residual: result.residual,
            });
        }
        self.normalize_weighted(result, v0, tol)
    }

    /// Unit `rho`-norm and positive correlation with `v_0`.
    pub fn normalize_weighted(
        &self,
        mut r: SpectralResult,
        v0: &OuterTerm,
        tol: &Tolerances,
    ) -> Result<SpectralResult> {
        let norm = self.weighted_norm(&r.vector);
        if norm == 0.0 {
            return Err(Error::Consistency("zero eigenvector".into()));
        }
        r.vector.iter_mut().for_each(|v| *v /= norm);
        let corr = self.correlation(&self.function(&r), v0);
        if corr.abs() < tol.corr_min {
            return Err(Error::LocalMode { corr });
        }
        if corr < 0.0 {
            r.vector.iter_mut().for_each(|v| *v = -*v);
        }
        r.correlation = corr.abs();
        Ok(r)
    }

    pub fn function(&self, r: &SpectralResult) -> FeFunction {
        FeFunction::from_dofs(&self.mesh, &r.vector)
    }

    /// Weighted Rayleigh quotient `u^T K u / u^T M u`.
    pub fn rayleigh(&self, full: &[f64]) -> f64 {
        self.stiffness.bilinear(full, full) / self.mass.bilinear(full, full)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub epsilon: f64,
    pub eigenvalue: f64,
    /// All dofs, clamped ends included.
    pub vector: Vec<f64>,
    pub residual: f64,
    /// Distance to the nearest other computed eigenvalue.
    pub gap: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// `int_a^{-eps} p u v_0` after normalization.
    pub correlation: f64,
    /// Every eigenvalue computed around the target, ascending.
    pub cluster: Vec<f64>,
}

/// Convenience wrapper: mesh sized for `target`, assembled and solved.
pub fn oracle_solve(
    coeffs: &CoefficientSet,
    eps: f64,
    target: f64,
    v0: &OuterTerm,
    tol: &Tolerances,
    refine: usize,
) -> Result<(DiscreteProblem, SpectralResult)> {
    let need = MeshSpec::required_inner(coeffs, target, eps, tol.nodes_per_wavelength);
    let spec = MeshSpec::resolving(coeffs, target, eps, tol).refined(refine.max(1));
    let problem = DiscreteProblem::assemble(coeffs, eps, &spec, need)?;
    let result = problem.solve_near(target, v0, tol)?;
    Ok((problem, result))
}
