//! Classical emulation of variational quantum circuits for nonlinear
//! differential equations.

pub mod ansatz;
pub mod burgers;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod mps;
pub mod optimizer;
pub mod qnpu;
pub mod sampler;
pub mod statevector;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
