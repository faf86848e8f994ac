//! Exact Newton-Okounkov bodies for toric divisors and inverted-simplex
//! jet separation certificates.
//!
//! Everything is computed over `BigRational`; there is no floating point in
//! the geometry. The crate is organised bottom-up:
//!
//! - [`ratgeom`]: rational vectors, convex hulls, H-/V-representations.
//! - [`valuation`]: flag and infinitesimal valuations of monomial sections.
//! - [`toric`]: lattice-point enumeration and single-point, infinitesimal and
//!   multipoint bodies of toric divisors, plus brute-force jet oracles.
//! - [`jetsep`]: inverted simplices, `xi_max`, and certificate issuing and
//!   re-verification.
//! - [`surfaces`]: intersection arithmetic on `E x E` and its double cover.
//! - [`cli`]: the `okkit` command line.

pub mod cli;
mod error;
pub mod jetsep;
pub mod ratgeom;
pub mod surfaces;
pub mod toric;
pub mod valuation;

pub use error::{Error, Result};

/// Version tag carried by every JSON document the crate reads or writes.
pub const SCHEMA: &str = "okkit/1";
