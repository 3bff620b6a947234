//! Generalized Collatz dynamics over the p-adic integers.
//!
//! For a prime `p` and an integer `q ≥ 2` coprime to `p`, the map
//!
//! ```text
//! g(u) = u / p                      if p | u
//! g(u) = (q·u + ε₀(−q·u)) / p       otherwise
//! ```
//!
//! acts on `Z_p` (and on the rationals whose denominator is prime to `p`),
//! where `ε₀(x) ∈ {0, …, p−1}` is the residue of `x` modulo `p`. The case
//! `(p, q) = (2, 3)` is the classical `3n + 1` map in its halved form.
//!
//! The crate is organised by subsystem:
//!
//! * [`padic`]: exact Hensel expansions, eventually periodic digit streams,
//!   the digit shift `δ_p` and valuations.
//! * [`dynamics`]: the map itself, orbits with exact cycle detection,
//!   enumeration of periodic points, integer cycle search.
//! * [`isometry`]: the isometry `φ` conjugating `g` to the digit shift, its
//!   inverse, density witnesses and the `ψ'` discrete-log diagnostic.
//! * [`diagnostics`]: heights, tranche statistics and mean height drift.
//! * [`fpseries`]: the analogous construction on `F_p[[T]]`.
//! * [`cli`]: the command-line front end.
//!
//! All arithmetic is exact; floating point only appears in reported ratios.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fpseries;
pub mod isometry;
pub mod padic;
pub mod rational;

pub use error::{Error, Result};
pub use padic::{HenselDigits, PadicApprox, Params, ReducedFraction};

/// Library version, echoed in every CLI report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
