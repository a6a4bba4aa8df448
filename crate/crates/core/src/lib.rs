//! Linear maps that preserve products equal to fixed elements, on `M_n(ℂ)`
//! and on the pointwise algebra `ℂ^m`.
//!
//! The crate builds the constructive pieces (rank-one calculus, factorization
//! certificates that reduce fixed-product preservation to zero-product
//! preservation, the conjugation and transpose-conjugation preserver
//! families) and checks their consequences numerically: annihilator
//! inclusion, the zero / invertible dichotomies, the inverse formula
//! `φ(x⁻¹) = zφ(x)⁻¹z`, and the Jordan / homomorphism classification of
//! `z⁻¹φ`.

pub mod error;
pub mod matrix_core;
pub mod pointwise;
pub mod preserver;
pub mod rank_one;
pub mod verify;
pub mod zp_factory;

pub use error::{Error, Result};
pub use matrix_core::{CMatrix, Rng, Tolerances, C64};
