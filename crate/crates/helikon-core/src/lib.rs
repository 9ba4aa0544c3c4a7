//! Genus-one helicoids from theta-function Weierstrass data.
//!
//! The crate builds the Gauss map `g` and height differential `dh` on a
//! marked rhombic torus, integrates the Weierstrass forms over homology
//! cycles, solves the horizontal and vertical period conditions in
//! `(theta, b)` for a fixed twist `k`, and integrates the immersion into a
//! triangle mesh. A small flat-cone-metric toolkit lives in [`conemetric`].
//!
//! Everything here is `no_std` with `alloc`; file formats and the command line
//! live in the `helikon` crate.

#![no_std]

extern crate alloc;

pub mod conemetric;
pub mod elliptic;
pub mod error;
pub mod periods;
pub mod quad;
pub mod solver;
pub mod surface;
pub mod torus;
pub mod weierstrass;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Crate version string stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
