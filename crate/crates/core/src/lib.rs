//! Shubin-class pseudodifferential symbol calculus on ℝⁿ: sharp products,
//! parametrices, complex powers, sectorial projections, the Wodzicki residue,
//! the Kontsevich–Vishik finite-part integral and spectral ζ/η functions,
//! with a Hermite-basis spectral oracle for cross-checks.

pub mod calculus;
pub mod cli;
pub mod cmat;
pub mod error;
pub mod fit;
pub mod functionals;
pub mod oracle;
pub mod powers;
pub mod quadrature;
pub mod resolvent;
pub mod schema;
pub mod spectra;
pub mod symring;
pub mod verify;

pub use error::{Error, Result};
