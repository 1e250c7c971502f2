pub mod dfree;
pub mod cli;
pub mod criticality;
pub mod error;
pub mod interactions;
pub mod quantum_ops;
pub mod scan;
pub mod slh;
pub mod spinchain;
pub mod waveguide;

pub use error::{Error, Result};
