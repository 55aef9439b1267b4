pub mod asymptotics;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod montecarlo;
pub mod spectra;

pub use error::{Error, Result};
