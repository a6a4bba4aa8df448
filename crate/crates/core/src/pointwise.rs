//! The commutative algebra `ℂ^m` with coordinatewise product and sup norm,
//! and linear maps on it given as `m×m` matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{
    complex_from_pairs, pairs_from_complex, rank, relative, CMatrix, Rng, Tolerances, C64, ONE,
    ZERO,
};
use crate::verify::{ReportBuilder, VerificationReport, TARGET_CROSS_CHECKS};

const INVERTIBLE_RETRY_BUDGET: usize = 100;

/// Element of `ℂ^m`; `m ≥ 1`, all coordinates finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementFile", into = "ElementFile")]
pub struct PointwiseElement {
    values: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    m: usize,
    values: Vec<[f64; 2]>,
}

impl TryFrom<ElementFile> for PointwiseElement {
    type Error = Error;

    fn try_from(f: ElementFile) -> Result<Self> {
        if f.values.len() != f.m {
            return Err(Error::InvalidInput(format!(
                "m = {} but {} values given",
                f.m,
                f.values.len()
            )));
        }
        PointwiseElement::new(complex_from_pairs(&f.values)?)
    }
}

impl From<PointwiseElement> for ElementFile {
    fn from(e: PointwiseElement) -> Self {
        ElementFile {
            m: e.m(),
            values: pairs_from_complex(&e.values),
        }
    }
}

impl PointwiseElement {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("pointwise element needs m ≥ 1".into()));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        Ok(PointwiseElement { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(m: usize) -> Self {
        PointwiseElement {
            values: vec![ZERO; m],
        }
    }

    pub fn one(m: usize) -> Self {
        PointwiseElement {
            values: vec![ONE; m],
        }
    }

    pub fn unit(m: usize, i: usize) -> Self {
        let mut e = Self::zero(m);
        e.values[i] = ONE;
        e
    }

    /// Standard complex Gaussian coordinates.
    pub fn random(m: usize, rng: &mut Rng) -> Self {
        PointwiseElement {
            values: (0..m).map(|_| rng.complex_gaussian()).collect(),
        }
    }

    pub fn random_invertible(m: usize, rng: &mut Rng, tol: &Tolerances) -> Result<Self> {
        for _ in 0..INVERTIBLE_RETRY_BUDGET {
            let v = Self::random(m, rng);
            if v.is_invertible(tol) {
                return Ok(v);
            }
        }
        Err(Error::SearchExhausted(format!(
            "no invertible element of ℂ^{m}"
        )))
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch(format!(
                "ℂ^{} vs ℂ^{}",
                self.m(),
                other.m()
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(PointwiseElement {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        PointwiseElement {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_len(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn min_modulus(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Every coordinate has modulus above `pivot_eps`.
    pub fn is_invertible(&self, tol: &Tolerances) -> bool {
        self.min_modulus() > tol.pivot_eps
    }

    pub fn inverse(&self, tol: &Tolerances) -> Result<Self> {
        if !self.is_invertible(tol) {
            return Err(Error::SingularMatrix);
        }
        Ok(PointwiseElement {
            values: self.values.iter().map(|v| v.inv()).collect(),
        })
    }
}

/// Replaces every coordinate of modulus below `ε/2` by `ε/2`, so the result
/// has no zero coordinate and lies within sup-distance `ε` of `v`.
pub fn perturb_to_invertible(v: &PointwiseElement, eps: f64) -> Result<PointwiseElement> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ε must be positive, got {eps}"
        )));
    }
    let floor = C64::new(eps / 2.0, 0.0);
    Ok(PointwiseElement {
        values: v
            .values
            .iter()
            .map(|&z| if z.norm() < eps / 2.0 { floor } else { z })
            .collect(),
    })
}

/// Linear map on `ℂ^m` acting by an `m×m` matrix on coordinate vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseMap {
    mat: CMatrix,
}

impl PointwiseMap {
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "map on ℂ^m must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(PointwiseMap { mat })
    }

    pub fn identity(m: usize) -> Self {
        PointwiseMap {
            mat: CMatrix::identity(m),
        }
    }

    pub fn m(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn apply(&self, f: &PointwiseElement) -> Result<PointwiseElement> {
        PointwiseElement::new(self.mat.mul_vec(f.values())?)
    }

    /// `w · Φ(f)`.
    pub fn weighted(&self, w: &PointwiseElement) -> Result<Self> {
        if w.m() != self.m() {
            return Err(Error::DimensionMismatch(
                "weight length differs from m".into(),
            ));
        }
        Ok(PointwiseMap {
            mat: &CMatrix::diag(w.values()) * &self.mat,
        })
    }

    pub fn kernel_dim(&self, tol: &Tolerances) -> usize {
        self.m() - rank(&self.mat, tol)
    }

    pub fn is_injective(&self, tol: &Tolerances) -> bool {
        self.kernel_dim(tol) == 0
    }

    pub fn is_surjective(&self, tol: &Tolerances) -> bool {
        rank(&self.mat, tol) == self.m()
    }

    /// Exhaustive `max ‖Φ(eᵢeⱼ) − Φ(eᵢ)Φ(eⱼ)‖_∞` over basis pairs, relative to
    /// `max(1, ‖Φ(eᵢ)‖_∞‖Φ(eⱼ)‖_∞)`.
    pub fn multiplicativity_residual(&self) -> f64 {
        let m = self.m();
        let images: Vec<PointwiseElement> = (0..m)
            .map(|i| PointwiseElement {
                values: self.mat.column(i),
            })
            .collect();
        let zero = PointwiseElement::zero(m);
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let lhs = if i == j { &images[i] } else { &zero };
                let rhs = images[i].mul(&images[j]).expect("same length");
                let gap = lhs.sup_distance(&rhs).expect("same length");
                let scale = images[i].sup_norm() * images[j].sup_norm();
                worst = worst.max(relative(gap, scale));
            }
        }
        worst
    }
}

/// `Φ(f)(i) = f(τ(i))`.
pub fn composition_map(tau: &[usize]) -> Result<PointwiseMap> {
    let m = tau.len();
    if m == 0 {
        return Err(Error::InvalidInput("index map must be nonempty".into()));
    }
    if let Some(&bad) = tau.iter().find(|&&t| t >= m) {
        return Err(Error::InvalidInput(format!("τ value {bad} outside 0..{m}")));
    }
    Ok(PointwiseMap {
        mat: CMatrix::from_fn(m, m, |i, j| if tau[i] == j { ONE } else { ZERO }),
    })
}

/// `τ(i) = ⌈i/2⌉`, the finite analogue of `f ↦ f(x/2)`.
pub fn halving_index_map(m: usize) -> Vec<usize> {
    (0..m).map(|i| i.div_ceil(2)).collect()
}

/// Composition with a bijection of the index set.
pub fn permutation_map(perm: &[usize]) -> Result<PointwiseMap> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidInput(format!(
                "{perm:?} is not a permutation"
            )));
        }
    }
    composition_map(perm)
}

pub fn random_permutation(m: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    rng.shuffle(&mut p);
    p
}

/// Indices where `|cᵢ| ≤ pivot_eps`; `ann(c)` is spanned by the unit
/// vectors at these indices.
pub fn annihilator_support(c: &PointwiseElement, tol: &Tolerances) -> Vec<usize> {
    c.values()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() <= tol.pivot_eps)
        .map(|(i, _)| i)
        .collect()
}

fn require_m(phi: &PointwiseMap, x: &PointwiseElement, what: &str) -> Result<()> {
    if x.m() != phi.m() {
        return Err(Error::DimensionMismatch(format!(
            "{what} has length {}, map acts on ℂ^{}",
            x.m(),
            phi.m()
        )));
    }
    Ok(())
}

/// `d = Φ(a)Φ(a⁻¹c)` for a seeded invertible `a`, cross-checked against
/// further invertible factors.
pub fn infer_target_pointwise(
    phi: &PointwiseMap,
    c: &PointwiseElement,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<PointwiseElement> {
    require_m(phi, c, "c")?;
    let m = phi.m();
    let base = rng.next_u64();
    let product_at = |i: u64| -> Result<PointwiseElement> {
        let a = PointwiseElement::random_invertible(m, &mut Rng::substream(base, i), tol)?;
        let b = a.inverse(tol)?.mul(c)?;
        phi.apply(&a)?.mul(&phi.apply(&b)?)
    };
    let d = product_at(0)?;
    for i in 1..=TARGET_CROSS_CHECKS as u64 {
        let residual = relative(product_at(i)?.sup_distance(&d)?, d.sup_norm());
        if residual.is_nan() || residual > tol.check_tol {
            return Err(Error::NotAPreserver { residual });
        }
    }
    Ok(d)
}

/// Both dichotomies on `ℂ^m` with `d` inferred; each violated equivalence
/// counts 1.
pub fn check_theorem33_pointwise(
    phi: &PointwiseMap,
    c: &PointwiseElement,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if !phi.is_injective(tol) {
        return Err(Error::NotBijective);
    }
    let seed = rng.seed();
    let d = infer_target_pointwise(phi, c, rng, tol)?;
    let is_zero = |x: &PointwiseElement| x.sup_norm() <= tol.check_tol;
    let mut report = ReportBuilder::new("zero_invertible_dichotomy_pointwise", phi.m(), seed);
    report.record("c = 0 ⟺ d = 0", (is_zero(c) != is_zero(&d)) as u8 as f64);
    report.record(
        "c invertible ⟺ d invertible",
        (c.is_invertible(tol) != d.is_invertible(tol)) as u8 as f64,
    );
    Ok(report.finish(tol.check_tol))
}

/// Images of the basis of `ann(c)` must annihilate `d`.
pub fn check_annihilator_inclusion_pointwise(
    phi: &PointwiseMap,
    c: &PointwiseElement,
    d: &PointwiseElement,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    require_m(phi, c, "c")?;
    require_m(phi, d, "d")?;
    let mut report = ReportBuilder::new("annihilator_inclusion_pointwise", phi.m(), 0);
    for i in annihilator_support(c, tol) {
        let fx = phi.apply(&PointwiseElement::unit(phi.m(), i))?;
        let prod = fx.mul(d)?.sup_norm();
        report.record("Φ(eᵢ)·d", relative(prod, fx.sup_norm() * d.sup_norm()));
    }
    Ok(report.finish(tol.check_tol))
}
