pub mod banded;
pub mod cheb;
pub mod direct_oracle;
pub mod error;
pub mod fem;
pub mod harness;
pub mod inner_wkb;
pub mod model;
pub mod outer_spectral;
pub mod poly;
pub mod quad;

pub use error::{Error, Result};
