//! Problem data: coefficient polynomials, geometry and run parameters.
//!
//! The operator is `L v = (k0 v'')'' - (k1 v')' + k2 v` on `[a, b]`, with
//! density `p(x)` outside `(-eps, eps)` and `eps^-8 q(x/eps)` inside.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Density exponent; the expansion machinery is written for this value only.
pub const DENSITY_EXPONENT: u32 = 8;

/// Number of uniform samples used for positivity checks.
const POSITIVITY_SAMPLES: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub a: f64,
    pub b: f64,
    pub k0: Poly,
    pub k1: Poly,
    pub k2: Poly,
    pub p: Poly,
    pub q: Poly,
    pub m: u32,
}

impl CoefficientSet {
    /// Constant-coefficient beam: `k0 = p = q = 1`, no tension or foundation.
    pub fn uniform(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            k0: Poly::constant(1.0),
            k1: Poly::zero(),
            k2: Poly::zero(),
            p: Poly::constant(1.0),
            q: Poly::constant(1.0),
            m: DENSITY_EXPONENT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a < 0.0 && self.b > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need a < 0 < b, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if self.m != DENSITY_EXPONENT {
            return Err(Error::InvalidConfig(format!(
                "m must be {DENSITY_EXPONENT}, got {}",
                self.m
            )));
        }
        let (v, at) = sampled_min(&self.k0, self.a, self.b);
        if v <= 0.0 {
            return Err(Error::NotPositive {
                name: "k0",
                value: v,
                at,
            });
        }
        let (v, at) = sampled_min(&self.p, self.a, self.b);
        if v <= 0.0 {
            return Err(Error::NotPositive {
                name: "p",
                value: v,
                at,
            });
        }
        let (v, at) = sampled_min(&self.k2, self.a, self.b);
        if v < 0.0 {
            return Err(Error::Negative {
                name: "k2",
                value: v,
                at,
            });
        }
        let (v, at) = sampled_min(&self.q, -1.0, 1.0);
        if v <= 0.0 {
            return Err(Error::NotPositive {
                name: "q",
                value: v,
                at,
            });
        }
        Ok(())
    }

    /// Polynomial degree bound over all coefficients, used to size quadratures.
    pub fn max_degree(&self) -> usize {
        [&self.k0, &self.k1, &self.k2, &self.p, &self.q]
            .iter()
            .map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }
}

/// Minimum of `poly` over a uniform sample of `[lo, hi]` (endpoints included).
fn sampled_min(poly: &Poly, lo: f64, hi: f64) -> (f64, f64) {
    (0..POSITIVITY_SAMPLES)
        .map(|i| {
            let x = if i == POSITIVITY_SAMPLES - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (POSITIVITY_SAMPLES - 1) as f64
            };
            (poly.eval(x), x)
        })
        .fold((f64::INFINITY, lo), |acc, v| if v.0 < acc.0 { v } else { acc })
}

/// Numerical tolerances and resolution knobs. Every field has a default so a
/// config may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Half-width of the excluded bands around pi/2 and 3pi/2.
    pub guard: f64,
    /// Relative eigenvalue tolerance for the limit problem.
    pub tol_eig: f64,
    /// Minimal eigenvalue gap, relative to lambda0.
    pub gap_min_rel: f64,
    /// Inner representation residual `f - Phi (beta + h)`.
    pub tol_rep: f64,
    /// Fundamental matrix residual `Phi' - A Phi`.
    pub tol_phi: f64,
    /// Relative weighted residual accepted from the direct eigensolver.
    pub tol_oracle: f64,
    /// Relative multiplier size accepted from bordered (singular) solves.
    pub tol_solvability: f64,
    /// Inner elements per oscillation wavelength in the direct solver.
    pub nodes_per_wavelength: f64,
    /// Outer elements per unit length in the direct solver.
    pub oracle_outer_density: f64,
    /// Smallest accepted correlation with the limit mode.
    pub corr_min: f64,
    /// Number of eigenpairs computed around each oracle target.
    pub oracle_cluster: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            guard: 0.1,
            tol_eig: 1e-9,
            gap_min_rel: 1e-3,
            tol_rep: 1e-10,
            tol_phi: 1e-10,
            tol_oracle: 1e-8,
            tol_solvability: 1e-8,
            nodes_per_wavelength: 20.0,
            oracle_outer_density: 200.0,
            corr_min: 0.1,
            oracle_cluster: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub delta: f64,
    pub n_max: usize,
    pub l_range: (i64, i64),
    /// 1-based index into the ascending three-point spectrum.
    pub mode_index: usize,
    /// Hermite elements per unit length on `(a, 0)` and `(0, b)`.
    pub outer_grid: usize,
    /// Chebyshev nodes on `[-1, 1]`.
    pub inner_grid: usize,
    pub tolerances: Tolerances,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        let g = self.tolerances.guard;
        if g <= 0.0 {
            return Err(Error::InvalidConfig("guard must be positive".into()));
        }
        if !(0.0..2.0 * PI).contains(&self.delta) {
            return Err(Error::InvalidConfig(format!("delta = {} outside [0, 2pi)", self.delta)));
        }
        if (self.delta - PI / 2.0).abs() < g || (self.delta - 1.5 * PI).abs() < g {
            return Err(Error::DeltaGuard {
                delta: self.delta,
                guard: g,
            });
        }
        if self.l_range.0 > self.l_range.1 {
            return Err(Error::InvalidConfig(format!(
                "empty l_range [{}, {}]",
                self.l_range.0, self.l_range.1
            )));
        }
        if self.mode_index == 0 {
            return Err(Error::InvalidConfig("mode_index is 1-based".into()));
        }
        if self.outer_grid < 4 || self.inner_grid < 8 {
            return Err(Error::InvalidConfig("grids too coarse".into()));
        }
        Ok(())
    }
}

/// On-disk configuration (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub a: f64,
    pub b: f64,
    #[serde(default = "default_m")]
    pub m: u32,
    pub k0: Vec<f64>,
    #[serde(default)]
    pub k1: Vec<f64>,
    #[serde(default)]
    pub k2: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_l_range")]
    pub l_range: [i64; 2],
    #[serde(default = "default_mode_index")]
    pub mode_index: usize,
    #[serde(default = "default_outer_grid")]
    pub outer_grid: usize,
    #[serde(default = "default_inner_grid")]
    pub inner_grid: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_m() -> u32 {
    DENSITY_EXPONENT
}
fn default_n_max() -> usize {
    2
}
fn default_l_range() -> [i64; 2] {
    [6, 18]
}
fn default_mode_index() -> usize {
    1
}
fn default_outer_grid() -> usize {
    200
}
fn default_inner_grid() -> usize {
    128
}

impl Config {
    /// Uniform beam on `[a, b]` with default run parameters.
    pub fn uniform_beam(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            m: DENSITY_EXPONENT,
            k0: vec![1.0],
            k1: vec![],
            k2: vec![],
            p: vec![1.0],
            q: vec![1.0],
            delta: 0.0,
            n_max: default_n_max(),
            l_range: default_l_range(),
            mode_index: 1,
            outer_grid: default_outer_grid(),
            inner_grid: default_inner_grid(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn coefficients(&self) -> CoefficientSet {
        CoefficientSet {
            a: self.a,
            b: self.b,
            k0: Poly::new(self.k0.clone()),
            k1: Poly::new(self.k1.clone()),
            k2: Poly::new(self.k2.clone()),
            p: Poly::new(self.p.clone()),
            q: Poly::new(self.q.clone()),
            m: self.m,
        }
    }

    pub fn run_spec(&self) -> RunSpec {
        RunSpec {
            delta: self.delta,
            n_max: self.n_max,
            l_range: (self.l_range[0], self.l_range[1]),
            mode_index: self.mode_index,
            outer_grid: self.outer_grid,
            inner_grid: self.inner_grid,
            tolerances: self.tolerances.clone(),
        }
    }

    /// Validated problem data.
    pub fn split(&self) -> Result<(CoefficientSet, RunSpec)> {
        let coeffs = self.coefficients();
        coeffs.validate()?;
        let spec = self.run_spec();
        spec.validate()?;
        Ok((coeffs, spec))
    }
}

/// Read and validate a JSON config.
pub fn load_config(path: impl AsRef<Path>) -> Result<(CoefficientSet, RunSpec)> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))?;
    Config::from_json(&text)?.split()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_beam_is_valid() {
        let cfg = Config::from_json(r#"{"a": -1, "b": 1, "k0": [1], "k1": [], "k2": [], "p": [1], "q": [1], "m": 8}"#)
            .unwrap();
        let (c, s) = cfg.split().unwrap();
        assert_eq!(c, CoefficientSet::uniform(-1.0, 1.0));
        assert_eq!(s.delta, 0.0);
    }

    #[test]
    fn zero_q_rejected() {
        let mut cfg = Config::uniform_beam(-1.0, 1.0);
        cfg.q = vec![0.0];
        let err = cfg.split().unwrap_err();
        assert!(err.to_string().contains("q not positive"), "{err}");
        assert!(err.is_config());
    }

    #[test]
    fn delta_in_guard_band_rejected() {
        let mut cfg = Config::uniform_beam(-1.0, 1.0);
        cfg.delta = PI / 2.0;
        let err = cfg.split().unwrap_err();
        assert!(err.to_string().contains("delta in guard band"), "{err}");
        cfg.delta = 1.5 * PI + 0.05;
        assert!(matches!(cfg.split(), Err(Error::DeltaGuard { .. })));
        cfg.delta = 1.5 * PI + 0.2;
        assert!(cfg.split().is_ok());
    }

    #[test]
    fn other_violations() {
        let mut cfg = Config::uniform_beam(-1.0, 1.0);
        cfg.m = 6;
        assert!(matches!(cfg.split(), Err(Error::InvalidConfig(_))));

        let mut cfg = Config::uniform_beam(-1.0, 1.0);
        // k0 = 1 + 2x vanishes at x = -1/2
        cfg.k0 = vec![1.0, 2.0];
        match cfg.split() {
            Err(Error::NotPositive { name, at, .. }) => {
                assert_eq!(name, "k0");
                assert!(at <= -0.5);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut cfg = Config::uniform_beam(-1.0, 1.0);
        cfg.k2 = vec![-0.1];
        assert!(matches!(cfg.split(), Err(Error::Negative { name: "k2", .. })));

        assert!(matches!(Config::from_json("{ not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn tolerances_accept_partial_map() {
        let cfg = Config::from_json(
            r#"{"a": -1, "b": 0.8, "k0": [1], "p": [1], "q": [1],
                "tolerances": {"guard": 0.2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.tolerances.guard, 0.2);
        assert_eq!(cfg.tolerances.tol_eig, 1e-9);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn json_round_trip_is_bit_exact(
                k0 in prop::collection::vec(-1e3f64..1e3, 1..5),
                q in prop::collection::vec(-1e3f64..1e3, 1..5),
                a in -5.0f64..-0.1,
                delta in 0.0f64..1.0,
            ) {
                let mut cfg = Config::uniform_beam(a, 1.0);
                cfg.k0 = k0;
                cfg.q = q;
                cfg.delta = delta;
                let text = cfg.to_json().unwrap();
                let back = Config::from_json(&text).unwrap();
                for (x, y) in cfg.k0.iter().zip(&back.k0) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
                for (x, y) in cfg.q.iter().zip(&back.q) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
                prop_assert_eq!(cfg, back);
            }
        }
    }
}
