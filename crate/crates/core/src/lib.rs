//! Process-chain perturbation theory for the Bose-Hubbard model.
//!
//! The crate computes the hopping expansion of the source-response
//! coefficients `c_{2k}(J/U)` of a Mott insulator on a `d`-dimensional
//! hypercubic lattice, assembles them into the Landau coefficients
//! `a_2, a_4, a_6` of the effective potential, and derives phase boundaries,
//! condensate and superfluid densities, and logarithmic-derivative critical
//! exponents from them.
//!
//! Module map:
//!
//! - [`lattice`]: site offsets, neighbours, twist phases, cluster
//!   canonicalisation and bond-animal enumeration.
//! - [`kato`]: Kato trace-formula index sets and their reduction to
//!   matrix-element terms with exact rational weights.
//! - [`chains`]: the diagram enumerator and evaluation kernel producing
//!   `gamma_{2k}^{(nu)}`.
//! - [`series`]: truncated power series in `J/U` and the Landau assembly.
//! - [`observables`]: boundaries, densities and exponents.
//! - [`oracle`]: brute-force finite-cluster references.
//!
//! The crate is `no_std` (with `alloc`); file formats, caching, parallel
//! drivers and the command line live in the `procchain` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chains;
mod error;
pub mod fit;
pub mod kato;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod series;
pub mod sum;

pub use error::{Error, Result};

pub use num_complex::Complex64;
pub use num_rational::Ratio;
