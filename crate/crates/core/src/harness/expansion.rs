//! The construction chain `lambda_0 -> v_0 -> lambda_1 -> v_1 -> eps_l -> f_0
//! -> ... -> lambda_i -> v_i -> f_{i-1}` and the composite approximation.

use serde::{Deserialize, Serialize};

use crate::cheb::Chebyshev;
use crate::error::{Error, Result};
use crate::inner_wkb::{
    compute_phase, quantize, InnerCoefficient, InnerCtx, InnerEvaluator, PhaseData, QuantizedSequence,
};
use crate::model::{CoefficientSet, Config, RunSpec};
use crate::outer_spectral::{
    boundary_data, compute_lambda1, solvability_lambda, solve_three_point_eigen, CorrectionTerm, OuterMode,
    OuterSolver, OuterTerm,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything produced by the construction chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionArtifact {
    pub schema_version: u32,
    pub config: Config,
    /// `lambda_0 .. lambda_{n_max}`.
    pub lambdas: Vec<f64>,
    /// `lambda_{n_max + 1}`, a by-product of the last inner step.
    pub lambda_next: f64,
    pub mode: OuterMode,
    /// `v_1 .. v_{n_max}`.
    pub corrections: Vec<CorrectionTerm>,
    /// `f_0 .. f_{n_max}`.
    pub inner: Vec<InnerCoefficient>,
    pub phase: PhaseData,
    pub sequence: QuantizedSequence,
}

impl ExpansionArtifact {
    pub fn n_max(&self) -> usize {
        self.lambdas.len() - 1
    }

    pub fn outer_terms(&self) -> Vec<&OuterTerm> {
        std::iter::once(&self.mode.term)
            .chain(self.corrections.iter().map(|c| &c.term))
            .collect()
    }

    pub fn coefficients(&self) -> CoefficientSet {
        self.config.coefficients()
    }

    /// `lambda_0 + eps lambda_1 + .. + eps^n lambda_n`.
    pub fn lambda_truncated(&self, eps: f64, n: usize) -> f64 {
        self.lambdas.iter().take(n + 1).rev().fold(0.0, |acc, l| acc * eps + l)
    }

    pub fn evaluator(&self) -> Composite<'_> {
        let cheb = Chebyshev::new(self.config.inner_grid);
        Composite {
            outer: self.outer_terms(),
            inner: InnerEvaluator::new(&cheb, &self.phase, &self.inner),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let art: Self = serde_json::from_str(text)?;
        if art.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "artifact schema_version {} (expected {SCHEMA_VERSION})",
                art.schema_version
            )));
        }
        Ok(art)
    }
}

/// Two-piece approximation `u^{n}`: outer sum off `(-eps, eps)`, inner
/// WKB series inside.
#[derive(Debug, Clone)]
pub struct Composite<'a> {
    outer: Vec<&'a OuterTerm>,
    inner: InnerEvaluator,
}

impl Composite<'_> {
    pub fn outer(&self, x: f64, eps: f64, n: usize) -> f64 {
        self.outer
            .iter()
            .take(n + 1)
            .rev()
            .fold(0.0, |acc, v| acc * eps + v.eval(x, 0))
    }

    pub fn inner(&self, xi: f64, eps: f64, n: usize) -> f64 {
        self.inner.eval(xi, eps, n)
    }

    pub fn eval(&self, x: f64, eps: f64, n: usize) -> f64 {
        if x.abs() < eps {
            self.inner(x / eps, eps, n)
        } else {
            self.outer(x, eps, n)
        }
    }
}

/// Run the chain to order `n_max` of the config.
pub fn build_expansion(config: &Config) -> Result<ExpansionArtifact> {
    let (coeffs, spec) = config.split()?;
    let tol = &spec.tolerances;
    let n_max = spec.n_max;

    let mode = solve_three_point_eigen(&coeffs, spec.mode_index, spec.outer_grid, n_max + 3, tol)
        .map_err(|e| e.at_order(0))?;
    let lambda0 = mode.lambda0();
    let lambda1 = compute_lambda1(&mode, &coeffs);
    let mut lambdas = vec![lambda0, lambda1];

    let solver = OuterSolver::new(&coeffs, &mode, spec.outer_grid)?;
    let mut corrections: Vec<CorrectionTerm> = Vec::new();
    if n_max >= 1 {
        let data = boundary_data(1, [0.0; 2], [0.0; 2], &[&mode.term]).map_err(|e| e.at_order(1))?;
        let v1 = solver
            .solve_correction(1, &lambdas, &[&mode.term], data, tol)
            .map_err(|e| e.at_order(1))?;
        corrections.push(v1);
    }

    let cheb = Chebyshev::new(spec.inner_grid);
    let phase = compute_phase(&coeffs, lambda0, lambda1, &cheb)?;
    check_phase(&phase, &cheb, &spec)?;
    let sequence = quantize(&phase, spec.delta, spec.l_range)?;
    let ctx = InnerCtx::new(&cheb, &phase, &coeffs, spec.delta);

    let f0 = ctx.solve_f0(&mode).map_err(|e| e.at_order(0))?;
    check_inner(&f0, &spec)?;
    let mut inner = vec![f0];

    for i in 2..=n_max + 1 {
        let mut step = || -> Result<()> {
            let fs: Vec<_> = inner.iter().map(|c| c.f.clone()).collect();
            let outer: Vec<&OuterTerm> = std::iter::once(&mode.term)
                .chain(corrections.iter().map(|c| &c.term))
                .collect();

            let (value, slope) = ctx.interface_projections(i, &fs);
            let data = boundary_data(i, value, slope, &outer)?;
            let lambda_i = solvability_lambda(&mode, &coeffs, data.v_minus, data.w_minus);
            lambdas.push(lambda_i);

            if i <= n_max {
                let v = solver.solve_correction(i, &lambdas, &outer, data, tol)?;
                corrections.push(v);
            }
            let outer: Vec<&OuterTerm> = std::iter::once(&mode.term)
                .chain(corrections.iter().map(|c| &c.term))
                .collect();

            let order = i - 1;
            let chi = ctx.assemble_chi(i, &fs, &lambdas);
            let iq = ctx.interface_quantities(order, &fs, &outer)?;
            let sigma = ctx.boundary_sigma(order, &iq, &outer)?;
            let f = ctx.transport_solve(order, chi, sigma, iq)?;
            check_inner(&f, &spec)?;
            inner.push(f);
            Ok(())
        };
        step().map_err(|e| e.at_order(i))?;
    }

    let lambda_next = lambdas[n_max + 1];
    lambdas.truncate(n_max + 1);
    Ok(ExpansionArtifact {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        lambdas,
        lambda_next,
        mode,
        corrections,
        inner,
        phase,
        sequence,
    })
}

fn check_phase(phase: &PhaseData, cheb: &Chebyshev, spec: &RunSpec) -> Result<()> {
    let eik = phase.max_eikonal_residual();
    if eik > 1e-12 {
        return Err(Error::Consistency(format!("eikonal residual {eik:.3e}")));
    }
    let scale = (0..phase.len()).map(|k| phase.phi(k).amax()).fold(0.0, f64::max);
    let phi = phase.phi_residual(cheb) / scale;
    if phi > spec.tolerances.tol_phi {
        return Err(Error::Consistency(format!(
            "Phi' - A Phi residual {phi:.3e} (relative)"
        )));
    }
    Ok(())
}

fn check_inner(c: &InnerCoefficient, spec: &RunSpec) -> Result<()> {
    let scale = c.f.iter().map(|v| v.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rep = c.representation_residual / scale;
    if rep > spec.tolerances.tol_rep {
        return Err(Error::Consistency(format!(
            "f_{} representation residual {rep:.3e} (relative)",
            c.order
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam(n_max: usize, delta: f64) -> Config {
        let mut c = Config::uniform_beam(-1.0, 0.8);
        c.n_max = n_max;
        c.delta = delta;
        c.outer_grid = 120;
        c.inner_grid = 64;
        c
    }

    #[test]
    fn truncation_contract() {
        let art = build_expansion(&beam(0, 0.0)).unwrap();
        assert_eq!(art.lambdas.len(), 1);
        assert!(art.corrections.is_empty());
        assert_eq!(art.inner.len(), 1);
        assert!((art.lambda_next - art.phase.lambda1).abs() == 0.0);
    }

    #[test]
    fn second_order_uniform_beam_closed_form() {
        for delta in [0.0, 0.5, 2.0] {
            let art = build_expansion(&beam(2, delta)).unwrap();
            let d0 = &art.mode.term.derivs_minus;
            let d1 = &art.corrections[0].term.derivs_minus;
            let sp = art.lambdas[0].powf(0.25);
            let expect = -d0[2] * d0[2] * (1.0 + delta.tan()) / sp + d0[2] * d1[2] - d0[2] * d0[3];
            let got = art.lambdas[2];
            assert!(
                (got - expect).abs() < 1e-7 * expect.abs().max(art.lambdas[1]),
                "{delta}: {got} vs {expect}"
            );
            let c2 = &art.corrections[1];
            assert!((c2.lambda_by_testing - got).abs() < 1e-6 * got.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let cfg = beam(1, 0.3);
        let a = build_expansion(&cfg).unwrap();
        let b = build_expansion(&cfg).unwrap();
        assert_eq!(a, b);
        let back = ExpansionArtifact::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn composite_is_continuous_at_the_interface_to_leading_order() {
        let art = build_expansion(&beam(1, 0.0)).unwrap();
        let ev = art.evaluator();
        let (_, eps) = art.sequence.epsilons[6];
        let left = ev.outer(-eps, eps, 1);
        let inside = ev.inner(-1.0, eps, 1);
        // both sides are O(eps^2) at the interface
        assert!(
            (left - inside).abs() < 5.0 * eps.powi(3) * art.mode.v0pp_minus0,
            "{left} vs {inside}"
        );
    }
}
