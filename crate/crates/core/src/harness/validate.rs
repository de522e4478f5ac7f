//! Oracle comparison along the quantized sequence and rate fits.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::direct_oracle::{oracle_solve, DiscreteProblem, SpectralResult};
use crate::error::{Error, Result};
use crate::model::CoefficientSet;

use super::expansion::{build_expansion, Composite, ExpansionArtifact, SCHEMA_VERSION};
use super::fit::{rate_fit, RateFit};
use super::par::Execution;

pub const CSV_HEADER: [&str; 10] = [
    "l",
    "epsilon",
    "lambda_asym",
    "lambda_oracle",
    "abs_err",
    "gap",
    "kappa",
    "l2_outer_left",
    "l2_outer_right",
    "l2_inner",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Truncation order of the asymptotic eigenvalue and eigenfunction.
    pub n: usize,
    pub l_range: (i64, i64),
    /// Oracle mesh refinement factor.
    pub refine: usize,
    pub execution: Execution,
}

impl ValidationOptions {
    pub fn new(n: usize, l_range: (i64, i64)) -> Self {
        Self {
            n,
            l_range,
            refine: 1,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub l: i64,
    pub epsilon: f64,
    pub lambda_asym: f64,
    pub lambda_oracle: f64,
    pub abs_err: f64,
    pub gap: f64,
    pub kappa: f64,
    pub l2_outer_left: f64,
    pub l2_outer_right: f64,
    pub l2_inner: f64,
    /// `max |u|` on `(-eps, eps)` over `max |u|` on `(a, -eps)`.
    pub amplitude_ratio: f64,
    pub residual: f64,
    pub correlation: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub inner_elements: usize,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub l: i64,
    pub epsilon: f64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub eigenvalue: Option<RateFit>,
    pub outer_left: Option<RateFit>,
    pub outer_right: Option<RateFit>,
    pub inner: Option<RateFit>,
    pub gap: Option<RateFit>,
    pub amplitude: Option<RateFit>,
    /// Fits that could not be made, with the reason.
    pub refused: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub delta: f64,
    pub n: usize,
    pub refine: usize,
    pub lambdas: Vec<f64>,
    /// Largest `eps` admitted to the fits.
    pub eps_window: f64,
    pub rows: Vec<ValidationRow>,
    pub failures: Vec<RowFailure>,
    pub fits: Fits,
}

impl ValidationReport {
    pub fn window_rows(&self) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(|r| r.in_window)
    }
}

/// Oracle solves for every `l` of the sequence in `opts.l_range`, compared
/// with the truncation of order `opts.n`.
pub fn run_convergence(art: &ExpansionArtifact, opts: &ValidationOptions) -> Result<ValidationReport> {
    if opts.n > art.n_max() {
        return Err(Error::InvalidConfig(format!(
            "truncation order {} exceeds the expansion order {}",
            opts.n,
            art.n_max()
        )));
    }
    let coeffs = art.coefficients();
    let tol = &art.config.tolerances;
    let eps_window = 0.2 * (-coeffs.a).min(coeffs.b);
    let targets: Vec<(i64, f64)> = art
        .sequence
        .epsilons
        .iter()
        .copied()
        .filter(|&(l, _)| l >= opts.l_range.0 && l <= opts.l_range.1)
        .collect();
    if targets.is_empty() {
        return Err(Error::EmptyRange {
            lo: opts.l_range.0,
            hi: opts.l_range.1,
            l0: art.sequence.l0,
        });
    }

    let ev = art.evaluator();
    let outcomes = opts.execution.map(&targets, |&(l, eps)| {
        oracle_row(art, &coeffs, &ev, l, eps, opts).map_err(|e| RowFailure {
            l,
            epsilon: eps,
            error: e.to_string(),
        })
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(mut row) => {
                row.in_window = row.epsilon <= eps_window
                    && row.gap > 10.0 * row.residual * row.lambda_oracle.abs().max(tol.tol_oracle);
                rows.push(row);
            }
            Err(f) => failures.push(f),
        }
    }
    let fits = fit_rows(&rows);
    Ok(ValidationReport {
        delta: art.config.delta,
        n: opts.n,
        refine: opts.refine,
        lambdas: art.lambdas.clone(),
        eps_window,
        rows,
        failures,
        fits,
    })
}

fn fit_rows(rows: &[ValidationRow]) -> Fits {
    let used: Vec<&ValidationRow> = rows.iter().filter(|r| r.in_window).collect();
    let eps: Vec<f64> = used.iter().map(|r| r.epsilon).collect();
    let mut fits = Fits::default();
    let mut fit = |name: &str, pick: fn(&ValidationRow) -> f64| -> Option<RateFit> {
        let y: Vec<f64> = used.iter().map(|r| pick(r)).collect();
        match rate_fit(&eps, &y) {
            Ok(f) => Some(f),
            Err(e) => {
                fits.refused.push(format!("{name}: {e}"));
                None
            }
        }
    };
    let eigenvalue = fit("eigenvalue", |r| r.abs_err);
    let outer_left = fit("outer_left", |r| r.l2_outer_left);
    let outer_right = fit("outer_right", |r| r.l2_outer_right);
    let inner = fit("inner", |r| r.l2_inner);
    let gap = fit("gap", |r| r.gap);
    let amplitude = fit("amplitude", |r| r.amplitude_ratio);
    Fits {
        eigenvalue,
        outer_left,
        outer_right,
        inner,
        gap,
        amplitude,
        refused: fits.refused,
    }
}

fn oracle_row(
    art: &ExpansionArtifact,
    coeffs: &CoefficientSet,
    ev: &Composite,
    l: i64,
    eps: f64,
    opts: &ValidationOptions,
) -> Result<ValidationRow> {
    let n = opts.n;
    let tol = &art.config.tolerances;
    let target = art.lambda_truncated(eps, n);
    // locate the global mode with the best available estimate
    let search = art.lambda_truncated(eps, art.n_max());
    let (problem, r) = oracle_solve(coeffs, eps, search, &art.mode.term, tol, opts.refine)?;
    let cmp = compare(&problem, &r, ev, coeffs, n);
    Ok(ValidationRow {
        l,
        epsilon: eps,
        lambda_asym: target,
        lambda_oracle: r.eigenvalue,
        abs_err: (r.eigenvalue - target).abs(),
        gap: r.gap,
        kappa: cmp.kappa,
        l2_outer_left: cmp.left,
        l2_outer_right: cmp.right,
        l2_inner: cmp.inner,
        amplitude_ratio: cmp.amplitude,
        residual: r.residual,
        correlation: r.correlation,
        lower: r.lower,
        upper: r.upper,
        inner_elements: problem.inner_elements(),
        in_window: false,
    })
}

/// Eigenfunction comparison of an oracle result against the composite
/// approximation of order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub kappa: f64,
    pub left: f64,
    pub right: f64,
    pub inner: f64,
    pub amplitude: f64,
}

pub fn compare(
    problem: &DiscreteProblem,
    r: &SpectralResult,
    ev: &Composite,
    coeffs: &CoefficientSet,
    n: usize,
) -> Comparison {
    let eps = problem.epsilon;
    let u = problem.function(r);
    let (a, b) = (coeffs.a, coeffs.b);
    let rho_in = |x: f64| eps.powi(-(coeffs.m as i32)) * coeffs.q.eval(x / eps);
    let p = |x: f64| coeffs.p.eval(x);

    let weighted = |g: &dyn Fn(f64) -> f64| -> f64 {
        problem.integrate(a, -eps, |x| p(x) * g(x))
            + problem.integrate(-eps, eps, |x| rho_in(x) * g(x))
            + problem.integrate(eps, b, |x| p(x) * g(x))
    };
    let approx = |x: f64| ev.eval(x, eps, n);
    let num = weighted(&|x| u.eval(x, 0) * approx(x));
    let den = weighted(&|x| approx(x).powi(2));
    let kappa = num / den;

    let left = problem
        .integrate(a, -eps, |x| (u.eval(x, 0) - kappa * ev.outer(x, eps, n)).powi(2))
        .sqrt();
    let right = problem
        .integrate(eps, b, |x| (u.eval(x, 0) - kappa * ev.outer(x, eps, n)).powi(2))
        .sqrt();
    let inner = (problem.integrate(-eps, eps, |x| {
        (u.eval(x, 0) - kappa * ev.inner(x / eps, eps, n)).powi(2)
    }) / eps)
        .sqrt();

    let nodal_max = |lo: f64, hi: f64| -> f64 {
        u.nodes
            .windows(2)
            .filter(|w| w[0] >= lo && w[1] <= hi)
            .flat_map(|w| [w[0], 0.5 * (w[0] + w[1])])
            .map(|x| u.eval(x, 0).abs())
            .fold(0.0, f64::max)
    };
    let amplitude = nodal_max(-eps, eps) / nodal_max(a, -eps);
    Comparison {
        kappa,
        left,
        right,
        inner,
        amplitude,
    }
}

/// Validation for several values of `delta`, one expansion per value.
pub fn sweep_delta(
    base: &crate::model::Config,
    deltas: &[f64],
    opts: &ValidationOptions,
) -> Result<Vec<(ExpansionArtifact, ValidationReport)>> {
    deltas
        .iter()
        .map(|&delta| {
            let mut cfg = base.clone();
            cfg.delta = delta;
            let art = build_expansion(&cfg)?;
            let report = run_convergence(&art, opts)?;
            Ok((art, report))
        })
        .collect()
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    artifact: &'a ExpansionArtifact,
    report: &'a ValidationReport,
}

#[derive(Deserialize)]
pub struct LoadedReport {
    pub schema_version: u32,
    pub artifact: ExpansionArtifact,
    pub report: ValidationReport,
}

pub fn write_csv(report: &ValidationReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record(&[
            r.l.to_string(),
            r.epsilon.to_string(),
            r.lambda_asym.to_string(),
            r.lambda_oracle.to_string(),
            r.abs_err.to_string(),
            r.gap.to_string(),
            r.kappa.to_string(),
            r.l2_outer_left.to_string(),
            r.l2_outer_right.to_string(),
            r.l2_inner.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(art: &ExpansionArtifact, report: &ValidationReport, path: impl AsRef<Path>) -> Result<()> {
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        artifact: art,
        report,
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<LoadedReport> {
    let loaded: LoadedReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if loaded.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("report schema_version {}", loaded.schema_version)));
    }
    Ok(loaded)
}

/// Write `<stem>.csv` and `<stem>.json` into `dir`.
pub fn emit_report(
    art: &ExpansionArtifact,
    report: &ValidationReport,
    dir: impl AsRef<Path>,
    stem: &str,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(report, &csv_path)?;
    write_json(art, report, &json_path)?;
    Ok((csv_path, json_path))
}
