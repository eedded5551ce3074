pub mod acceptance;
pub mod cft;
pub mod error;
pub mod fcs;
pub mod fock;
pub mod gaussian;
pub mod holo;
pub mod hyperfine;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod ode;
pub mod poly;
pub mod recon;
pub mod sampling;

pub use error::{Error, Result};
