pub mod backbone;
pub mod cli;
pub mod coupling;
pub mod currents;
pub mod error;
pub mod experiments;
pub mod extremal;
pub mod fk;
pub mod ising_exact;
pub mod lattice;
pub mod law;
pub mod model;
pub mod numeric;
pub mod record;
pub mod rng;
pub mod unionfind;

pub use error::{Error, Result};
