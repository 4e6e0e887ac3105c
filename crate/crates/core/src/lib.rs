//! Space-homogeneous quantum walks on `Z^d`.
//!
//! A walk is an `n × n` matrix of Laurent polynomials in the lattice shifts
//! ([`symbol`]). States evolve by sparse convolution ([`dynamics`]). For
//! one-dimensional walks the symbol `Û(k)` is diagonalised along analytic
//! eigenvalue branches ([`spectral`]), which drive the decomposition into
//! model walks and the search for intertwiners ([`category`]) as well as the
//! winding-number test for continuous-time realizability ([`ctqw`]).
//!
//! Convention: the shift `S` moves amplitude from `x` to `x + 1` and
//! contributes `exp(+ik)` to the symbol; Fourier transforms of states are
//! `ξ̂(k) = Σ_x ξ(x) exp(ikx)`.

pub mod category;
pub mod ctqw;
pub mod dynamics;
pub mod error;
mod linalg;
pub mod registry;
pub mod spectral;
pub mod symbol;

pub use error::{QwError, Result};
pub use symbol::{parse_walk, LaurentPoly, LaurentTerm, RegularityClass, WalkDefinition};
