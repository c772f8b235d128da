//! Critical exponents, singular kernels, negative-order Besov proxies and
//! Bessel capacities for boundary singularities of `-Δu + |u|^{q-1}u = 0`
//! in k-wedges and polyhedra.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: wedges, polyhedra, measures, compact sets, spherical
//!   coordinates and measure decomposition across strata.
//! * [`spectral`]: Sturm–Liouville chain for the first Dirichlet eigenvalue of
//!   an angular box on `S^{k-1}` and the assembled eigenfunction on `S_A`.
//! * [`exponents`]: closed-form `κ±`, `λ_A`, `q_c`, `q_c*`, `s`, `a_{N,q}`.
//! * [`kernels`]: Martin and Poisson kernels and the integral functionals
//!   `F`, `F^R`, `h`, `I`, `M`, `J`.
//! * [`besov`]: Poisson-extension proxy for `B^{-s,q}` and positive-order
//!   Besov/Sobolev norms of sampled functions.
//! * [`capacity`]: Bessel kernels, discretized Bessel capacities and the
//!   ρ-capacity of a finite edge set.
//! * [`classify`]: per-stratum regimes, good-measure and removability verdicts.
//! * [`verify`]: numerical experiments with pre-declared tolerances.

pub mod besov;
pub mod capacity;
pub mod classify;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod geometry;
pub mod json;
pub mod kernels;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

/// Tool version embedded in every CLI artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
