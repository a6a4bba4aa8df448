//! Dense complex matrices, factorizations with an explicit tolerance policy,
//! and seeded sampling.

mod decomp;
mod dense;
mod sampling;

pub use decomp::{
    find_regular_scalar, inverse, is_invertible, lu_decompose, null_residual, nullspace_basis,
    rank, row_reduce, LuDecomposition, RowReduction, Tolerances, REGULAR_SCALAR_FALLBACK_BUDGET,
};
pub(crate) use dense::{complex_from_pairs, pairs_from_complex};
pub use dense::{complex_vec, complex_vec_list, pair, relative, vec_norm, CMatrix, C64, ONE, ZERO};
pub use sampling::{
    sample_gaussian, sample_ginibre, sample_invertible, sample_rank, Rng, INVERTIBLE_RETRY_BUDGET,
};

/// `‖x·y − target‖_F / max(1, ‖x‖_F ‖y‖_F, ‖target‖_F)`.
///
/// Products are compared against the size of their factors so that the
/// acceptance threshold tracks floating-point error in the product itself.
pub fn product_residual(x: &CMatrix, y: &CMatrix, target: &CMatrix) -> f64 {
    let prod = x * y;
    let scale = (x.frobenius_norm() * y.frobenius_norm()).max(target.frobenius_norm());
    relative(prod.distance(target), scale)
}
