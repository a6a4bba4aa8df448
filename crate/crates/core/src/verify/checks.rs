use serde::{Deserialize, Serialize};

use super::report::{ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::matrix_core::{
    find_regular_scalar, inverse, is_invertible, product_residual, rank, relative, sample_ginibre,
    sample_invertible, sample_rank, CMatrix, Rng, Tolerances, C64,
};
use crate::preserver::{annihilator_basis, is_bijective, Side, SuperOp};
use crate::zp_factory::sample_zero_product_pair;

/// Number of extra factor pairs used to cross-check an inferred target.
pub const TARGET_CROSS_CHECKS: usize = 10;
/// Largest `n` for the exhaustive basis-pair checks (`n⁴` pairs).
pub const EXHAUSTIVE_LIMIT: usize = 8;
/// Required ratio between the rejected and the accepted residual.
pub const CLASSIFICATION_MARGIN: f64 = 1e3;
const ADMISSIBLE_RETRY_BUDGET: usize = 100;

/// A factorization `AB = C` with one invertible factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub a: CMatrix,
    pub b: CMatrix,
    /// `true` when `A` was drawn invertible and `B = A⁻¹C`.
    pub left_invertible: bool,
}

impl FactorPair {
    pub fn label(&self) -> &'static str {
        if self.left_invertible {
            "A invertible, B = A⁻¹C"
        } else {
            "B invertible, A = CB⁻¹"
        }
    }
}

fn require_n(n: usize, m: &CMatrix, what: &str) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Fair coin between `(A, A⁻¹C)` and `(CB⁻¹, B)` with Gaussian `A` / `B`.
pub fn sample_factor_pair(c: &CMatrix, rng: &mut Rng, tol: &Tolerances) -> Result<FactorPair> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch("C must be square".into()));
    }
    let n = c.rows();
    let left_invertible = rng.coin();
    let t = sample_invertible(n, rng, tol)?;
    let t_inv = inverse(&t, tol)?;
    Ok(if left_invertible {
        FactorPair {
            b: &t_inv * c,
            a: t,
            left_invertible,
        }
    } else {
        FactorPair {
            a: c * &t_inv,
            b: t,
            left_invertible,
        }
    })
}

/// `D = Φ(A₀)Φ(A₀⁻¹C)` for a seeded invertible `A₀`, cross-checked on
/// [`TARGET_CROSS_CHECKS`] further factor pairs.
pub fn infer_target(
    phi: &SuperOp,
    c: &CMatrix,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let n = phi.n();
    require_n(n, c, "C")?;
    let base = rng.next_u64();
    let mut first = Rng::substream(base, 0);
    let a0 = sample_invertible(n, &mut first, tol)?;
    let b0 = &inverse(&a0, tol)? * c;
    let d = &phi.apply(&a0)? * &phi.apply(&b0)?;
    for i in 1..=TARGET_CROSS_CHECKS as u64 {
        let pair = sample_factor_pair(c, &mut Rng::substream(base, i), tol)?;
        let di = &phi.apply(&pair.a)? * &phi.apply(&pair.b)?;
        let residual = relative(di.distance(&d), d.frobenius_norm());
        if residual.is_nan() || residual > tol.check_tol {
            return Err(Error::NotAPreserver { residual });
        }
    }
    Ok(d)
}

/// `max ‖Φ(A)Φ(B) − D‖_F / max(1, ‖D‖_F)` over sampled factorizations of `C`.
pub fn check_preserves_at(
    phi: &SuperOp,
    c: &CMatrix,
    d: &CMatrix,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = phi.n();
    require_n(n, c, "C")?;
    require_n(n, d, "D")?;
    let seed = rng.seed();
    let base = rng.next_u64();
    let mut report = ReportBuilder::new("preserves_at", n, seed);
    let d_scale = d.frobenius_norm();
    for i in 0..samples as u64 {
        let pair = sample_factor_pair(c, &mut Rng::substream(base, i), tol)?;
        let prod = &phi.apply(&pair.a)? * &phi.apply(&pair.b)?;
        report.record(pair.label(), relative(prod.distance(d), d_scale));
    }
    Ok(report.finish(tol.check_tol))
}

/// `‖Φ(Q)Φ(P)‖ / (‖Φ(Q)‖‖Φ(P)‖)` over sampled pairs with `QP = 0`. Needs
/// `n ≥ 2`; for `n = 1` the report is `Infeasible`.
pub fn check_zero_product_preserving(
    phi: &SuperOp,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = phi.n();
    let seed = rng.seed();
    if n < 2 {
        return Ok(VerificationReport::infeasible(
            "zero_product_preserving",
            n,
            seed,
        ));
    }
    let base = rng.next_u64();
    let mut report = ReportBuilder::new("zero_product_preserving", n, seed);
    for i in 0..samples as u64 {
        let mut srng = Rng::substream(base, i);
        let r = srng.range_inclusive(1, n - 1);
        let (q, p) = sample_zero_product_pair(n, r, &mut srng, tol)?;
        let fq = phi.apply(&q)?;
        let fp = phi.apply(&p)?;
        let prod = (&fq * &fp).frobenius_norm();
        let denom = fq.frobenius_norm() * fp.frobenius_norm();
        let residual = if denom > 0.0 { prod / denom } else { prod };
        report.record(&format!("rank Q = {r}"), residual);
    }
    Ok(report.finish(tol.check_tol))
}

/// Images of a basis of `ann_ℓ(C)` must left-annihilate `D`, images of a
/// basis of `ann_r(C)` must right-annihilate it.
pub fn check_annihilator_inclusion(
    phi: &SuperOp,
    c: &CMatrix,
    d: &CMatrix,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = phi.n();
    require_n(n, c, "C")?;
    require_n(n, d, "D")?;
    let zero = CMatrix::zeros(n, n);
    let mut report = ReportBuilder::new("annihilator_inclusion", n, 0);
    for x in annihilator_basis(c, Side::Left, tol)?.basis {
        let fx = phi.apply(&x)?;
        report.record("left: Φ(X)·D", product_residual(&fx, d, &zero));
    }
    for x in annihilator_basis(c, Side::Right, tol)?.basis {
        let fx = phi.apply(&x)?;
        report.record("right: D·Φ(X)", product_residual(d, &fx, &zero));
    }
    Ok(report.finish(tol.check_tol))
}

/// `rank(C) = rank(D)` with `D` inferred from `Φ`. A declared `D` that
/// disagrees with the inferred one is rejected as `NotAPreserver`.
pub fn check_rank_equality(
    phi: &SuperOp,
    c: &CMatrix,
    declared: Option<&CMatrix>,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if !is_bijective(phi, tol) {
        return Err(Error::NotBijective);
    }
    let seed = rng.seed();
    let d = infer_target(phi, c, rng, tol)?;
    if let Some(decl) = declared {
        require_n(phi.n(), decl, "declared D")?;
        let residual = relative(decl.distance(&d), d.frobenius_norm());
        if residual.is_nan() || residual > tol.check_tol {
            return Err(Error::NotAPreserver { residual });
        }
    }
    let gap = rank(c, tol).abs_diff(rank(&d, tol));
    let mut report = ReportBuilder::new("rank_equality", phi.n(), seed);
    report.record("|rank C − rank D|", gap as f64);
    Ok(report.finish(tol.check_tol))
}

fn is_zero(m: &CMatrix, tol: &Tolerances) -> bool {
    m.frobenius_norm() <= tol.check_tol
}

/// Both dichotomies with `D` inferred: `C = 0 ⟺ D = 0` and
/// `C invertible ⟺ D invertible`. Each violated equivalence counts 1.
pub fn check_theorem33(
    phi: &SuperOp,
    c: &CMatrix,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if !is_bijective(phi, tol) {
        return Err(Error::NotBijective);
    }
    let seed = rng.seed();
    let d = infer_target(phi, c, rng, tol)?;
    let zero_gap = is_zero(c, tol) != is_zero(&d, tol);
    let inv_gap = is_invertible(c, tol)? != is_invertible(&d, tol)?;
    let mut report = ReportBuilder::new("zero_invertible_dichotomy", phi.n(), seed);
    report.record("C = 0 ⟺ D = 0", zero_gap as u8 as f64);
    report.record("C invertible ⟺ D invertible", inv_gap as u8 as f64);
    Ok(report.finish(tol.check_tol))
}

/// Relative residual of `(I − a)⁻¹ = I + (a⁻¹ − I)⁻¹`.
pub fn hua_identity_residual(a: &CMatrix, tol: &Tolerances) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("a must be square".into()));
    }
    let id = CMatrix::identity(a.rows());
    let lhs = inverse(&(&id - a), tol)?;
    let a_inv = inverse(a, tol)?;
    let rhs = &id + &inverse(&(&a_inv - &id), tol)?;
    Ok(relative(
        lhs.distance(&rhs),
        lhs.frobenius_norm().max(rhs.frobenius_norm()),
    ))
}

/// Gaussian `a` resampled until both `a` and `I − a` are invertible.
pub fn sample_hua_admissible(n: usize, rng: &mut Rng, tol: &Tolerances) -> Result<CMatrix> {
    let id = CMatrix::identity(n);
    for _ in 0..ADMISSIBLE_RETRY_BUDGET {
        let a = sample_ginibre(n, rng);
        if is_invertible(&a, tol)? && is_invertible(&(&id - &a), tol)? {
            return Ok(a);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no admissible {n}x{n} sample for Hua's identity"
    )))
}

pub fn check_hua(
    n: usize,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let seed = rng.seed();
    let base = rng.next_u64();
    let mut report = ReportBuilder::new("hua_identity", n, seed);
    for i in 0..samples as u64 {
        let a = sample_hua_admissible(n, &mut Rng::substream(base, i), tol)?;
        report.record("(I−a)⁻¹ − I − (a⁻¹−I)⁻¹", hua_identity_residual(&a, tol)?);
    }
    Ok(report.finish(tol.check_tol))
}

/// Invertible `x` with `1 ∈ σ(x)`: `x = I + N` with `N` of rank `n − 1`.
fn sample_unit_eigenvalue(n: usize, rng: &mut Rng, tol: &Tolerances) -> Result<CMatrix> {
    let id = CMatrix::identity(n);
    for _ in 0..ADMISSIBLE_RETRY_BUDGET {
        let x = &id + &sample_rank(n, n - 1, rng);
        if is_invertible(&x, tol)? {
            return Ok(x);
        }
    }
    Err(Error::SearchExhausted(
        "no invertible x with 1 in its spectrum".into(),
    ))
}

fn relative_gap(lhs: &CMatrix, rhs: &CMatrix) -> f64 {
    relative(
        lhs.distance(rhs),
        lhs.frobenius_norm().max(rhs.frobenius_norm()),
    )
}

/// Every fourth sample (starting with the first) has `1 ∈ σ(x)` and is
/// checked through `λx` with `I − λx` invertible:
/// `Φ(x⁻¹) = λ·zΦ(λx)⁻¹z`. A singular `Φ(x)` is recorded as an infinite
/// residual under the label `singular Φ(x)`.
pub fn check_inverse_formula(
    phi: &SuperOp,
    z: &CMatrix,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = phi.n();
    require_n(n, z, "z")?;
    let seed = rng.seed();
    let base = rng.next_u64();
    let mut report = ReportBuilder::new("inverse_formula", n, seed);
    for i in 0..samples as u64 {
        let mut srng = Rng::substream(base, i);
        let rescaled = i % 4 == 0;
        let (x, lambda) = if rescaled {
            let x = sample_unit_eigenvalue(n, &mut srng, tol)?;
            let lambda = find_regular_scalar(&x, tol)?;
            (x, lambda)
        } else {
            (sample_invertible(n, &mut srng, tol)?, C64::new(1.0, 0.0))
        };
        let lhs = phi.apply(&inverse(&x, tol)?)?;
        let image = phi.apply(&x.scale(lambda))?;
        let label = if rescaled { "λ-rescaled" } else { "direct" };
        match inverse(&image, tol) {
            Ok(image_inv) => {
                let rhs = (&(z * &image_inv) * z).scale(lambda);
                report.record(label, relative_gap(&lhs, &rhs));
            }
            Err(Error::SingularMatrix) => {
                report.record("singular Φ(x)", f64::INFINITY);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report.finish(tol.check_tol))
}

/// `ψ(x⁻¹) = ψ(x)⁻¹` over sampled invertible `x`; `ψ` must be unital.
pub fn check_strong_invertibility(
    psi: &SuperOp,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = psi.n();
    let id = CMatrix::identity(n);
    let unital_gap = relative(psi.apply(&id)?.distance(&id), id.frobenius_norm());
    if unital_gap.is_nan() || unital_gap > tol.check_tol {
        return Err(Error::NotUnital {
            residual: unital_gap,
        });
    }
    let seed = rng.seed();
    let base = rng.next_u64();
    let mut report = ReportBuilder::new("strong_invertibility", n, seed);
    for i in 0..samples as u64 {
        let x = sample_invertible(n, &mut Rng::substream(base, i), tol)?;
        let lhs = psi.apply(&inverse(&x, tol)?)?;
        match inverse(&psi.apply(&x)?, tol) {
            Ok(rhs) => report.record("ψ(x⁻¹) − ψ(x)⁻¹", relative_gap(&lhs, &rhs)),
            Err(Error::SingularMatrix) => report.record("singular ψ(x)", f64::INFINITY),
            Err(e) => return Err(e),
        };
    }
    Ok(report.finish(tol.check_tol))
}

/// `ψ(E_ij)` indexed by `i·n + j`.
fn unit_images(psi: &SuperOp) -> Result<Vec<CMatrix>> {
    let n = psi.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::DimensionTooLarge {
            n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    Ok((0..n * n)
        .map(|ij| psi.image_of_unit(ij / n, ij % n))
        .collect())
}

/// Polarized Jordan identity `ψ(ab + ba) = ψ(a)ψ(b) + ψ(b)ψ(a)` on all
/// `n⁴` pairs of matrix units; by bilinearity this covers all of `M_n`.
pub fn check_jordan(psi: &SuperOp, tol: &Tolerances) -> Result<VerificationReport> {
    let n = psi.n();
    let img = unit_images(psi)?;
    let zero = CMatrix::zeros(n, n);
    let mut report = ReportBuilder::new("jordan", n, 0);
    for (ij, a) in img.iter().enumerate() {
        let (i, j) = (ij / n, ij % n);
        for (kl, b) in img.iter().enumerate() {
            let (k, l) = (kl / n, kl % n);
            // E_ij E_kl + E_kl E_ij = δ_jk E_il + δ_li E_kj
            let mut lhs = zero.clone();
            if j == k {
                lhs = &lhs + &img[i * n + l];
            }
            if l == i {
                lhs = &lhs + &img[k * n + j];
            }
            let rhs = &(a * b) + &(b * a);
            let scale = a.frobenius_norm() * b.frobenius_norm();
            report.record(
                "ψ(ab+ba) − ψ(a)ψ(b) − ψ(b)ψ(a)",
                relative(lhs.distance(&rhs), scale),
            );
        }
    }
    Ok(report.finish(tol.check_tol))
}

/// Counts of sampled invertible `x` whose image `Φ(x)` is invertible.
/// Experimental statistics only; no verdict attached.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityProbe {
    pub samples: usize,
    pub preserved: usize,
}

pub fn invertibility_probe(
    phi: &SuperOp,
    samples: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<InvertibilityProbe> {
    let base = rng.next_u64();
    let mut preserved = 0;
    for i in 0..samples as u64 {
        let x = sample_invertible(phi.n(), &mut Rng::substream(base, i), tol)?;
        if is_invertible(&phi.apply(&x)?, tol)? {
            preserved += 1;
        }
    }
    Ok(InvertibilityProbe { samples, preserved })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultClass {
    Homomorphism,
    Antihomomorphism,
    Both,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityClass {
    pub class: MultClass,
    pub homo_residual: f64,
    pub anti_residual: f64,
    /// Exactly one residual was within tolerance but the other did not
    /// exceed it by [`CLASSIFICATION_MARGIN`].
    pub margin_warning: bool,
}

impl MultiplicativityClass {
    /// `rejected / accepted`; infinite when the accepted residual is exactly 0.
    pub fn margin(&self) -> f64 {
        let (lo, hi) = if self.homo_residual <= self.anti_residual {
            (self.homo_residual, self.anti_residual)
        } else {
            (self.anti_residual, self.homo_residual)
        };
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Residual of the accepted side, or infinity for `Neither`.
    pub fn accepted_residual(&self) -> f64 {
        match self.class {
            MultClass::Homomorphism => self.homo_residual,
            MultClass::Antihomomorphism => self.anti_residual,
            MultClass::Both => self.homo_residual.max(self.anti_residual),
            MultClass::Neither => f64::INFINITY,
        }
    }
}

/// Decision rule shared by [`classify_multiplicativity`] and independent
/// re-implementations.
pub fn classify_residuals(homo: f64, anti: f64, tol: f64) -> MultiplicativityClass {
    let (homo_ok, anti_ok) = (homo <= tol, anti <= tol);
    let (class, margin_warning) = match (homo_ok, anti_ok) {
        (true, true) => (MultClass::Both, false),
        (true, false) if anti > CLASSIFICATION_MARGIN * homo => (MultClass::Homomorphism, false),
        (false, true) if homo > CLASSIFICATION_MARGIN * anti => {
            (MultClass::Antihomomorphism, false)
        }
        (true, false) | (false, true) => (MultClass::Neither, true),
        (false, false) => (MultClass::Neither, false),
    };
    MultiplicativityClass {
        class,
        homo_residual: homo,
        anti_residual: anti,
        margin_warning,
    }
}

/// Exhaustive test of `ψ(ab) = ψ(a)ψ(b)` and `ψ(ab) = ψ(b)ψ(a)` on matrix
/// units.
pub fn classify_multiplicativity(psi: &SuperOp, tol: &Tolerances) -> Result<MultiplicativityClass> {
    let n = psi.n();
    let img = unit_images(psi)?;
    let zero = CMatrix::zeros(n, n);
    let (mut homo, mut anti) = (0.0_f64, 0.0_f64);
    for (ij, a) in img.iter().enumerate() {
        let (i, j) = (ij / n, ij % n);
        for (kl, b) in img.iter().enumerate() {
            let (k, l) = (kl / n, kl % n);
            let prod = if j == k { &img[i * n + l] } else { &zero };
            let scale = a.frobenius_norm() * b.frobenius_norm();
            homo = homo.max(relative(prod.distance(&(a * b)), scale));
            anti = anti.max(relative(prod.distance(&(b * a)), scale));
        }
    }
    Ok(classify_residuals(homo, anti, tol.check_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::{sample_invertible, ONE, ZERO};
    use crate::preserver::{
        conjugation_map, scale_left, solve_transpose_constraint, transpose_conjugation_map,
    };

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    struct Family {
        alpha: C64,
        u: CMatrix,
        d: CMatrix,
        phi: SuperOp,
    }

    fn conj_family(n: usize, rng: &mut Rng, c: &CMatrix) -> Family {
        let alpha = rng.nonzero_scalar();
        let u = sample_invertible(n, rng, &tol()).unwrap();
        let phi = conjugation_map(alpha, &u, &tol()).unwrap();
        let d = phi.apply(c).unwrap().scale(alpha);
        Family { alpha, u, d, phi }
    }

    fn tconj_family(n: usize, rng: &mut Rng, c: &CMatrix) -> Family {
        let alpha = rng.nonzero_scalar();
        let u = sample_invertible(n, rng, &tol()).unwrap();
        let d = solve_transpose_constraint(alpha, &u, c, &tol()).unwrap();
        let phi = transpose_conjugation_map(alpha, &d, &u, &tol()).unwrap();
        Family { alpha, u, d, phi }
    }

    #[test]
    fn factor_pairs() {
        let mut rng = Rng::new(1);
        let id = CMatrix::identity(3);
        for _ in 0..10 {
            let p = sample_factor_pair(&id, &mut rng, &tol()).unwrap();
            assert!((&p.a * &p.b).distance(&id) <= 1e-9);
        }
        let e11 = CMatrix::unit(3, 0, 0);
        let p = loop {
            let p = sample_factor_pair(&e11, &mut rng, &tol()).unwrap();
            if p.left_invertible {
                break p;
            }
        };
        assert_eq!(rank(&p.b, &tol()), 1);
        let a = sample_factor_pair(&e11, &mut Rng::new(5), &tol()).unwrap();
        let b = sample_factor_pair(&e11, &mut Rng::new(5), &tol()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn preserves_at_examples() {
        let mut rng = Rng::new(2);
        let c = sample_ginibre(3, &mut rng);
        let fam = conj_family(3, &mut rng, &c);
        let r = check_preserves_at(&fam.phi, &c, &fam.d, 50, &mut rng, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");

        let c = sample_invertible(3, &mut rng, &tol()).unwrap();
        let fam = tconj_family(3, &mut rng, &c);
        let r = check_preserves_at(&fam.phi, &c, &fam.d, 50, &mut rng, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");

        let e11 = CMatrix::unit(2, 0, 0);
        let r = check_preserves_at(
            &SuperOp::identity(2),
            &e11,
            &CMatrix::identity(2),
            10,
            &mut rng,
            &tol(),
        )
        .unwrap();
        assert!(!r.passed());
        // ‖E11 − I‖ / ‖I‖ = 1/√2 for every factorization.
        assert!((r.max_residual - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn zero_product_examples() {
        let mut rng = Rng::new(3);
        let c = sample_ginibre(4, &mut rng);
        let fam = conj_family(4, &mut rng, &c);
        assert!(
            check_zero_product_preserving(&fam.phi, 30, &mut rng, &tol())
                .unwrap()
                .passed()
        );
        // Antihomomorphisms reverse products: E11·E21 = 0 but E21·E11 = E21.
        let r =
            check_zero_product_preserving(&SuperOp::transpose(4), 30, &mut rng, &tol()).unwrap();
        assert!(!r.passed());
        let r = check_zero_product_preserving(&SuperOp::random(4, &mut rng), 30, &mut rng, &tol())
            .unwrap();
        assert!(!r.passed());
        let r = check_zero_product_preserving(&SuperOp::identity(1), 5, &mut rng, &tol()).unwrap();
        assert_eq!(r.verdict, super::super::Verdict::Infeasible);
    }

    #[test]
    fn annihilator_examples() {
        let mut rng = Rng::new(4);
        let c = sample_rank(4, 2, &mut rng);
        let u = sample_invertible(4, &mut rng, &tol()).unwrap();
        let phi = conjugation_map(ONE, &u, &tol()).unwrap();
        let d = phi.apply(&c).unwrap();
        let r = check_annihilator_inclusion(&phi, &c, &d, &tol()).unwrap();
        assert!(r.passed());
        assert_eq!(r.samples, 2 * 4 * 2);
        for side in [Side::Left, Side::Right] {
            assert_eq!(
                annihilator_basis(&c, side, &tol()).unwrap().basis.len(),
                annihilator_basis(&d, side, &tol()).unwrap().basis.len()
            );
        }

        let inv = sample_invertible(3, &mut rng, &tol()).unwrap();
        let r = check_annihilator_inclusion(&SuperOp::identity(3), &inv, &inv, &tol()).unwrap();
        assert!(r.passed());
        assert_eq!(r.samples, 0);

        let r = check_annihilator_inclusion(
            &SuperOp::identity(2),
            &CMatrix::unit(2, 0, 0),
            &CMatrix::unit(2, 1, 1),
            &tol(),
        )
        .unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn rank_equality_examples() {
        let mut rng = Rng::new(5);
        let e11 = CMatrix::unit(3, 0, 0);
        let fam = conj_family(3, &mut rng, &e11);
        let r = check_rank_equality(&fam.phi, &e11, None, &mut rng, &tol()).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_residual, 0.0);

        let c = sample_invertible(3, &mut rng, &tol()).unwrap();
        let fam = tconj_family(3, &mut rng, &c);
        let r = check_rank_equality(&fam.phi, &c, Some(&fam.d), &mut rng, &tol()).unwrap();
        assert!(r.passed());

        let res = check_rank_equality(
            &SuperOp::identity(3),
            &e11,
            Some(&CMatrix::identity(3)),
            &mut rng,
            &tol(),
        );
        assert!(matches!(res, Err(Error::NotAPreserver { .. })));
        assert_eq!(
            check_rank_equality(
                &SuperOp::zero(2),
                &CMatrix::unit(2, 0, 0),
                None,
                &mut rng,
                &tol()
            ),
            Err(Error::NotBijective)
        );
    }

    #[test]
    fn target_inference_detects_non_preservers() {
        let mut rng = Rng::new(6);
        let phi = SuperOp::random(3, &mut rng);
        let c = sample_ginibre(3, &mut rng);
        assert!(matches!(
            infer_target(&phi, &c, &mut rng, &tol()),
            Err(Error::NotAPreserver { .. })
        ));
    }

    #[test]
    fn dichotomy_examples() {
        let mut rng = Rng::new(7);
        let zero = CMatrix::zeros(3, 3);
        let fam = conj_family(3, &mut rng, &zero);
        let r = check_theorem33(&fam.phi, &zero, &mut rng, &tol()).unwrap();
        assert!(r.passed());

        let id = CMatrix::identity(3);
        let fam = conj_family(3, &mut rng, &id);
        let expected = id.scale(fam.alpha * fam.alpha);
        assert!(fam.d.distance(&expected) < 1e-10);
        assert!(check_theorem33(&fam.phi, &id, &mut rng, &tol())
            .unwrap()
            .passed());

        let e11 = CMatrix::unit(3, 0, 0);
        let fam = conj_family(3, &mut rng, &e11);
        assert!(!is_invertible(&fam.d, &tol()).unwrap());
        assert!(check_theorem33(&fam.phi, &e11, &mut rng, &tol())
            .unwrap()
            .passed());
    }

    #[test]
    fn hua_examples() {
        let a = CMatrix::diag_real(&[2.0]);
        assert_eq!(hua_identity_residual(&a, &tol()).unwrap(), 0.0);
        let a = CMatrix::diag_real(&[2.0, 3.0]);
        assert!(hua_identity_residual(&a, &tol()).unwrap() <= 1e-12);
        assert_eq!(
            hua_identity_residual(&CMatrix::identity(2), &tol()),
            Err(Error::SingularMatrix)
        );
        assert_eq!(
            hua_identity_residual(&CMatrix::zeros(2, 2), &tol()),
            Err(Error::SingularMatrix)
        );
        let r = check_hua(3, 200, &mut Rng::new(8), &tol()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn inverse_formula_examples() {
        let mut rng = Rng::new(9);
        let id = CMatrix::identity(3);
        let r = check_inverse_formula(&SuperOp::identity(3), &id, 8, &mut rng, &tol()).unwrap();
        assert!(r.passed());
        assert!(r.max_residual < 1e-12);
        assert!(r.details.iter().any(|d| d.label == "λ-rescaled"));

        let two = C64::new(2.0, 0.0);
        let u = sample_invertible(3, &mut rng, &tol()).unwrap();
        let phi = conjugation_map(two, &u, &tol()).unwrap();
        let r = check_inverse_formula(&phi, &id.scale(two), 20, &mut rng, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");

        let c = sample_invertible(3, &mut rng, &tol()).unwrap();
        let fam = tconj_family(3, &mut rng, &c);
        let z = fam.d.scale(fam.alpha);
        let r = check_inverse_formula(&fam.phi, &z, 20, &mut rng, &tol()).unwrap();
        assert!(r.passed(), "{r:?}");

        // Wrong z fails.
        let r = check_inverse_formula(&fam.phi, &id, 4, &mut rng, &tol()).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn strong_invertibility_examples() {
        let mut rng = Rng::new(10);
        assert!(
            check_strong_invertibility(&SuperOp::identity(3), 10, &mut rng, &tol())
                .unwrap()
                .passed()
        );
        assert!(
            check_strong_invertibility(&SuperOp::transpose(3), 10, &mut rng, &tol())
                .unwrap()
                .passed()
        );
        let doubled = SuperOp::identity(3).scale(C64::new(2.0, 0.0));
        assert!(matches!(
            check_strong_invertibility(&doubled, 10, &mut rng, &tol()),
            Err(Error::NotUnital { .. })
        ));
    }

    #[test]
    fn probe_counts() {
        let mut rng = Rng::new(13);
        let p = invertibility_probe(&SuperOp::transpose(3), 20, &mut rng, &tol()).unwrap();
        assert_eq!(
            p,
            InvertibilityProbe {
                samples: 20,
                preserved: 20
            }
        );
        let p = invertibility_probe(&SuperOp::zero(3), 5, &mut rng, &tol()).unwrap();
        assert_eq!(p.preserved, 0);
    }

    #[test]
    fn jordan_examples() {
        assert!(check_jordan(&SuperOp::identity(3), &tol())
            .unwrap()
            .passed());
        assert!(check_jordan(&SuperOp::transpose(3), &tol())
            .unwrap()
            .passed());
        let e12 = CMatrix::unit(2, 0, 1);
        let skewed = SuperOp::from_fn(2, |t| &t.clone() + &e12.scale(t.trace()));
        let r = check_jordan(&skewed, &tol()).unwrap();
        assert!(!r.passed());
        assert_eq!(r.samples, 16);
        assert_eq!(
            check_jordan(&SuperOp::identity(9), &tol()),
            Err(Error::DimensionTooLarge { n: 9, limit: 8 })
        );
    }

    #[test]
    fn classification_examples() {
        let mut rng = Rng::new(11);
        let u = sample_invertible(3, &mut rng, &tol()).unwrap();
        let conj = conjugation_map(ONE, &u, &tol()).unwrap();
        let cls = classify_multiplicativity(&conj, &tol()).unwrap();
        assert_eq!(cls.class, MultClass::Homomorphism);
        let cls = classify_multiplicativity(&SuperOp::transpose(3), &tol()).unwrap();
        assert_eq!(cls.class, MultClass::Antihomomorphism);
        let scalar = SuperOp::identity(1).scale(ONE);
        assert_eq!(
            classify_multiplicativity(&scalar, &tol()).unwrap().class,
            MultClass::Both
        );
        let rand = SuperOp::random(2, &mut rng);
        assert_eq!(
            classify_multiplicativity(&rand, &tol()).unwrap().class,
            MultClass::Neither
        );
    }

    #[test]
    fn classification_margin_rule() {
        let c = classify_residuals(1e-12, 1e-8, 1e-9);
        assert_eq!(c.class, MultClass::Homomorphism);
        let c = classify_residuals(1e-10, 5e-9, 1e-9);
        assert_eq!(c.class, MultClass::Neither);
        assert!(c.margin_warning);
        let c = classify_residuals(0.5, 0.0, 1e-9);
        assert_eq!(c.class, MultClass::Antihomomorphism);
        assert_eq!(c.margin(), f64::INFINITY);
    }

    #[test]
    fn homomorphism_implies_jordan_on_scaled_families() {
        let mut rng = Rng::new(12);
        let c = sample_invertible(3, &mut rng, &tol()).unwrap();
        for fam in [conj_family(3, &mut rng, &c), tconj_family(3, &mut rng, &c)] {
            let z = fam.phi.apply(&CMatrix::identity(3)).unwrap();
            let psi = scale_left(&fam.phi, &inverse(&z, &tol()).unwrap()).unwrap();
            let cls = classify_multiplicativity(&psi, &tol()).unwrap();
            assert_ne!(cls.class, MultClass::Neither);
            assert!(check_jordan(&psi, &tol()).unwrap().passed());
            let _ = (&fam.u, ZERO);
        }
    }
}
