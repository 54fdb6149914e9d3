//! Logarithmic Sobolev and Poincaré constants for Gaussian convolutions of
//! compactly supported probability measures.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | log-sum-exp, Gaussian tails, adaptive quadrature, sup search, symmetric eigenvalues |
//! | [`measures`] | compactly supported measures on ℝ and their Gaussian smoothings μ_δ = μ * γ_δ |
//! | [`bg`] | Bobkov–Götze functionals D₀, D₁ and tail-lemma verifiers |
//! | [`bounds`] | closed-form upper/lower bounds and the Lyapunov constant chain |
//! | [`variational`] | entropy/energy quadrature giving variational lower bounds |
//! | [`rmt`] | dependence-partitioned random symmetric ensembles and spectral statistics |
//! | [`cli`] | batch front-end used by the `lsi` binary |
//!
//! Every quantity that can overflow `f64` (constants growing like e^{R²/δ})
//! is carried in log form alongside an optional linear value.

pub mod bg;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod measures;
pub mod numerics;
pub mod rmt;
pub mod variational;

pub use error::{Error, Result};
