//! Grothendieck's inequality as running code.
//!
//! * [`series`]: odd power series, the Haagerup function's Taylor data and its
//!   compositional inverse.
//! * [`constants`]: Krivine's and Haagerup's constants, `x0`/`c0`, Davie's
//!   lower bounds.
//! * [`gaussian`]: sign functions and Monte Carlo checks of the Gaussian
//!   sign-product identities.
//! * [`solver`]: the discrete problem and its unit-vector relaxation.
//! * [`rounding`]: Krivine/Haagerup embeddings and Gaussian sign rounding.
//! * [`haagerup_verify`]: numerical certificates for the nonpositivity of the
//!   inverse-series coefficients.
//! * [`cli`]: report types and subcommand drivers behind the `gk` binary.

pub mod cli;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod haagerup_verify;
pub mod quad;
pub mod rounding;
pub mod schema;
pub mod series;
pub mod solver;

pub use error::{GkError, Result};
pub use num_complex::Complex64;
pub use gaussian::Field;
