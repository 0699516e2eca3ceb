pub mod data_io;
pub mod diagnostics;
pub mod error;
pub mod estimate;
pub mod fi_logacd;
pub mod forecast;
pub mod optim;
pub mod process;
pub mod quadrature;
pub mod residual;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
