//! Property checks and the staged classification pipeline. Every check is a
//! pure function of its inputs, the tolerances and the seed; sample `i` draws
//! from its own sub-stream so results do not depend on evaluation order.

mod checks;
mod pipeline;
mod report;

pub use checks::{
    check_annihilator_inclusion, check_hua, check_inverse_formula, check_jordan,
    check_preserves_at, check_rank_equality, check_strong_invertibility, check_theorem33,
    check_zero_product_preserving, classify_multiplicativity, classify_residuals,
    hua_identity_residual, infer_target, invertibility_probe, sample_factor_pair,
    sample_hua_admissible, FactorPair, InvertibilityProbe, MultClass, MultiplicativityClass,
    CLASSIFICATION_MARGIN, EXHAUSTIVE_LIMIT, TARGET_CROSS_CHECKS,
};
pub use pipeline::{theorem41_pipeline, PipelineReport};
pub use report::{Detail, ReportBuilder, Verdict, VerificationReport};
