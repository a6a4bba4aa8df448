//! Staged check of the invertible-target classification: from `Φ` and an
//! invertible `C`, infer `D`, recover `z = Φ(I)`, test
//! `Φ(x⁻¹) = zΦ(x)⁻¹z`, then test `ψ = z⁻¹Φ` for strong invertibility
//! preservation, the Jordan identity, and homomorphism vs antihomomorphism.

use serde::{Deserialize, Serialize};

use super::checks::{
    check_inverse_formula, check_jordan, check_strong_invertibility, classify_multiplicativity,
    infer_target, MultClass, MultiplicativityClass,
};
use super::report::{ReportBuilder, Verdict, VerificationReport};
use crate::error::{Error, Result};
use crate::matrix_core::{inverse, is_invertible, relative, CMatrix, Rng, Tolerances};
use crate::preserver::{is_bijective, scale_left, SuperOp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stages: Vec<VerificationReport>,
    /// Inferred target `D`.
    pub d: CMatrix,
    /// `z = Φ(I)`.
    pub z: CMatrix,
    pub class: MultiplicativityClass,
    pub verdict: Verdict,
}

impl PipelineReport {
    pub fn stage(&self, name: &str) -> Option<&VerificationReport> {
        self.stages.iter().find(|s| s.name == name)
    }
}

pub fn theorem41_pipeline(
    phi: &SuperOp,
    c: &CMatrix,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<PipelineReport> {
    let n = phi.n();
    let seed = rng.seed();
    if !is_bijective(phi, tol) {
        return Err(Error::NotBijective.at_stage("bijective"));
    }
    if !is_invertible(c, tol).map_err(|e| e.at_stage("c_invertible"))? {
        return Err(Error::SingularMatrix.at_stage("c_invertible"));
    }
    let d = infer_target(phi, c, rng, tol).map_err(|e| e.at_stage("infer_target"))?;
    let d_inv = inverse(&d, tol).map_err(|e| e.at_stage("d_invertible"))?;

    let z = phi.apply(&CMatrix::identity(n))?;
    let z_inv = inverse(&z, tol).map_err(|e| e.at_stage("z_invertible"))?;
    let mut z_check = ReportBuilder::new("z_inverse", n, seed);
    let via_c = &phi.apply(c)? * &d_inv;
    z_check.record(
        "z⁻¹ − Φ(C)D⁻¹",
        relative(z_inv.distance(&via_c), z_inv.frobenius_norm()),
    );
    let mut stages = vec![z_check.finish(tol.check_tol)];

    stages.push(
        check_inverse_formula(phi, &z, samples, rng, tol)
            .map_err(|e| e.at_stage("inverse_formula"))?,
    );
    let psi = scale_left(phi, &z_inv)?;
    stages.push(
        check_strong_invertibility(&psi, samples, rng, tol)
            .map_err(|e| e.at_stage("strong_invertibility"))?,
    );
    stages.push(check_jordan(&psi, tol).map_err(|e| e.at_stage("jordan"))?);
    let class = classify_multiplicativity(&psi, tol).map_err(|e| e.at_stage("classify"))?;
    let mut cls = ReportBuilder::new("classification", n, seed);
    let label = match class.class {
        MultClass::Homomorphism => "Homomorphism",
        MultClass::Antihomomorphism => "Antihomomorphism",
        MultClass::Both => "Both",
        MultClass::Neither => "Neither",
    };
    cls.record(label, class.accepted_residual());
    stages.push(cls.finish(tol.check_tol));

    let verdict = Verdict::combine(stages.iter().map(|s| s.verdict));
    Ok(PipelineReport {
        stages,
        d,
        z,
        class,
        verdict,
    })
}
