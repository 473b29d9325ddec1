pub mod error;
pub mod bimodule;
pub mod checks;
pub mod cli;
pub mod exactnum;
pub mod multiplier;
pub mod morita;
pub mod padic;
pub mod solenoid;

pub use error::{Error, Result};
