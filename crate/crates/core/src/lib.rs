//! Semilinear elliptic equations `-Δu + a|u|^{p-2}u - b|u|^{q-2}u = 0` on the
//! lattice `Z^N`, truncated to l1 balls with zero Dirichlet extension.
//!
//! * [`lattice`]: sites, boxes, lattice functions and the discrete calculus.
//! * [`coefficients`]: coefficient fields with a limit at infinity.
//! * [`functionals`]: `J1`, `J2`, `Φ`, `Φ̄`, Gateaux gradients, residuals.
//! * [`minimizer`]: the constrained problem `inf { J1 : J2 = 1 }` and the
//!   positive solutions it produces.
//! * [`decompose`]: bubble decomposition of function sequences.
//! * [`oracles`]: executable numerical checks of the underlying lemmas.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod coefficients;
pub mod decompose;
pub mod error;
pub mod functionals;
pub mod lattice;
pub mod minimizer;
pub mod oracles;
pub mod sum;

pub use coefficients::CoefficientField;
pub use decompose::{Decomposition, ExtractOptions, FunctionSequence};
pub use error::{Error, Result};
pub use functionals::ProblemParams;
pub use lattice::{LatticeBox, LatticeFunction, Site};
pub use minimizer::{MinimizeResult, SolverOptions};
pub use oracles::CheckReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
