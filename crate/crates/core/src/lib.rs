pub mod analytic;
pub mod bounds;
pub mod channel;
pub mod checks;
pub mod cli;
pub mod design;
pub mod error;
pub mod mc;
pub mod quad;
pub mod rng;
pub mod specfun;

pub use error::{FasError, Result};
