//! Driver: expansion chain, oracle sweeps, rate fits and reports.

pub mod expansion;
pub mod fit;
pub mod par;
pub mod validate;

pub use expansion::{build_expansion, Composite, ExpansionArtifact, SCHEMA_VERSION};
pub use par::Execution;
pub use validate::{
    compare, emit_report, read_json, run_convergence, sweep_delta, write_csv, write_json, ValidationOptions,
    ValidationReport, ValidationRow, CSV_HEADER,
};
