//! Higher-order Poincaré–Pontryagin (Melnikov) functions of perturbed planar
//! polynomial foliations `df − ε(P dx + Q dy) = 0`, computed symbolically
//! through iterated path integrals and cross-checked against an independent
//! first-return-map oracle.
//!
//! The crate is organised in layers:
//!
//! * [`poly`] — exact sparse polynomial arithmetic over arbitrary-precision
//!   rationals, an expression parser, Gröbner bases with cofactor tracking,
//!   and gradient-ideal certificates.
//! * [`forms`] — rational differential forms relative to a fixed first
//!   integral `f`: exterior derivative, wedge, Gelfand–Leray division and
//!   transversal pullback.
//! * [`geometry`] — numeric fiber geometry: critical points, oval tracing by
//!   Hamiltonian flow, transversal curves, and path algebra (concatenation,
//!   reversal, commutators, synthetic complex loops).
//! * [`chen`] — iterated path integrals, free words, and the Möbius/Witt
//!   combinatorics behind the order bounds.
//! * [`francoise`] — the generating-function recursion: symbolic word
//!   combinations for `M_k`, closed-form fast paths for `M₁..M₃`, and the
//!   first-nonvanishing-order driver.
//! * [`oracle`] — ground truth: integrate the perturbed vector field, sample
//!   the first-return map, and extract the leading order and coefficient by
//!   Richardson fitting in ε.
//! * [`analysis`] — empirical structure checks: monodromy of periods by
//!   analytic continuation, sector growth exponents, and numeric detection of
//!   annihilating linear ODEs.
//! * [`scenario`] / [`report`] — scenario files, bundled families, CSV and
//!   SVG emission for the command-line driver.
//!
//! The `melnikov` binary exposes the `witt`, `certificate`, `melnikov`,
//! `oracle`, `chen-check`, `monodromy`, `growth` and `ode-fit` subcommands;
//! the `examples/` directory demonstrates each capability as a library call.

pub mod analysis;
pub mod chen;
pub mod error;
pub mod forms;
pub mod francoise;
pub mod geometry;
pub mod oracle;
pub mod poly;
pub mod report;
pub(crate) mod rk;
pub mod scenario;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
