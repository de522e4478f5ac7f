//! Inner WKB construction on `[-1, 1]`.

mod eval;
mod phase;
mod series;
pub mod tcalc;
mod transport;

pub use eval::InnerEvaluator;
pub use phase::{compute_phase, PhaseData};
pub use series::{is_zero, zero_fn, InnerCtx, VecFn};
pub use transport::{epsilon_l, first_index, quantize, InnerCoefficient, InterfaceQuantities, QuantizedSequence};
