use cmass::harness::{
    build_expansion, emit_report, read_json, run_convergence, Execution, ExpansionArtifact, ValidationOptions,
    CSV_HEADER,
};
use cmass::model::Config;
use cmass::Error;

fn small() -> Config {
    let mut c = Config::uniform_beam(-1.0, 0.8);
    c.n_max = 1;
    c.outer_grid = 120;
    c.inner_grid = 64;
    c
}

#[test]
fn sweep_writes_csv_and_json() {
    let art = build_expansion(&small()).unwrap();
    let opts = ValidationOptions::new(1, (14, 18));
    let report = run_convergence(&art, &opts).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert!(report.failures.is_empty());
    for r in &report.rows {
        assert!(r.in_window);
        assert!(
            r.abs_err < 2.0 * art.lambda_next.abs() * r.epsilon.powi(2),
            "l = {}",
            r.l
        );
        assert!(r.kappa > 0.8 && r.kappa < 1.0, "kappa {}", r.kappa);
    }
    assert!(report.fits.eigenvalue.as_ref().unwrap().rate > 1.0);

    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = emit_report(&art, &report, dir.path(), "run").unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "l,epsilon,lambda_asym,lambda_oracle,abs_err,gap,kappa,l2_outer_left,l2_outer_right,l2_inner"
    );
    assert_eq!(header, CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 6);

    let loaded = read_json(&json).unwrap();
    assert_eq!(loaded.schema_version, 1);
    assert_eq!(loaded.artifact, art);
    assert_eq!(loaded.report, report);
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(raw["schema_version"], 1);
}

#[test]
fn sequential_and_parallel_agree() {
    let art = build_expansion(&small()).unwrap();
    let mut opts = ValidationOptions::new(0, (16, 18));
    opts.execution = Execution::Sequential;
    let seq = run_convergence(&art, &opts).unwrap();
    opts.execution = Execution::Parallel;
    let par = run_convergence(&art, &opts).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn truncation_order_is_bounded_by_the_artifact() {
    let art = build_expansion(&small()).unwrap();
    let err = run_convergence(&art, &ValidationOptions::new(2, (14, 18))).unwrap_err();
    assert!(err.is_config());
}

#[test]
fn empty_index_range_is_reported() {
    let art = build_expansion(&small()).unwrap();
    let err = run_convergence(&art, &ValidationOptions::new(0, (500, 400))).unwrap_err();
    assert!(matches!(err, Error::EmptyRange { .. }));
}

#[test]
fn artifact_schema_is_checked() {
    let art = build_expansion(&small()).unwrap();
    let mut raw: serde_json::Value = serde_json::from_str(&art.to_json().unwrap()).unwrap();
    raw["schema_version"] = 2.into();
    let err = ExpansionArtifact::from_json(&raw.to_string()).unwrap_err();
    assert!(err.is_config());
}

#[test]
fn bad_configs_are_config_errors() {
    let mut c = small();
    c.a = 0.5;
    assert!(build_expansion(&c).unwrap_err().is_config());

    let mut c = small();
    c.delta = std::f64::consts::FRAC_PI_2;
    assert!(build_expansion(&c).unwrap_err().is_config());

    let mut c = small();
    c.q = vec![-1.0];
    assert!(build_expansion(&c).unwrap_err().is_config());
}
