//! Rank-one operators `x ⊗ f` acting by `(x ⊗ f)(y) = f(y)·x`, and rank
//! factorizations `C = Σ v_i ⊗ f_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{
    complex_vec, complex_vec_list, is_invertible, pair, relative, row_reduce, CMatrix, Tolerances,
    C64, ZERO,
};

/// `x ⊗ f`, with the functional `f` stored as a coefficient vector
/// (`f(y) = Σ f_i y_i`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneOp {
    #[serde(with = "complex_vec")]
    x: Vec<C64>,
    #[serde(with = "complex_vec")]
    f: Vec<C64>,
}

impl RankOneOp {
    pub fn new(x: Vec<C64>, f: Vec<C64>) -> Result<Self> {
        if x.is_empty() || f.is_empty() {
            return Err(Error::DimensionMismatch("empty vector".into()));
        }
        if x.iter().all(|z| *z == ZERO) || f.iter().all(|z| *z == ZERO) {
            return Err(Error::InvalidInput("x and f must be nonzero".into()));
        }
        Ok(RankOneOp { x, f })
    }

    pub fn x(&self) -> &[C64] {
        &self.x
    }

    pub fn f(&self) -> &[C64] {
        &self.f
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::outer(&self.x, &self.f)
    }

    pub fn apply(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.f.len() {
            return Err(Error::DimensionMismatch(format!(
                "functional of length {} applied to a vector of length {}",
                self.f.len(),
                y.len()
            )));
        }
        let s = pair(&self.f, y);
        Ok(self.x.iter().map(|xi| s * xi).collect())
    }
}

pub fn apply_rank_one(op: &RankOneOp, y: &[C64]) -> Result<Vec<C64>> {
    op.apply(y)
}

/// Result of `(x ⊗ f) ∘ (y ⊗ g)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Composition {
    /// `f(y) = 0` exactly.
    Zero,
    /// `scale · (x ⊗ g)` with `scale = f(y)`.
    Scaled { scale: C64, op: RankOneOp },
}

impl Composition {
    pub fn matrix(&self, rows: usize, cols: usize) -> CMatrix {
        match self {
            Composition::Zero => CMatrix::zeros(rows, cols),
            Composition::Scaled { scale, op } => op.matrix().scale(*scale),
        }
    }
}

pub fn compose_rank_one(a: &RankOneOp, b: &RankOneOp) -> Result<Composition> {
    if a.f.len() != b.x.len() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: inner dimensions {} and {}",
            a.f.len(),
            b.x.len()
        )));
    }
    let scale = pair(&a.f, &b.x);
    if scale == ZERO {
        return Ok(Composition::Zero);
    }
    Ok(Composition::Scaled {
        scale,
        op: RankOneOp {
            x: a.x.clone(),
            f: b.f.clone(),
        },
    })
}

/// `x ⊗ f` is a projection iff `f(x) = 1`.
pub fn is_projection(op: &RankOneOp, tol: &Tolerances) -> bool {
    op.x.len() == op.f.len() && (pair(&op.f, &op.x) - 1.0).norm() <= tol.check_tol
}

/// `C = Σ_{i<k} v_i ⊗ f_i` with independent `v_i` and independent `f_i`.
///
/// Serialized as `{"k": k, "vs": [...], "fs": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FactorizationFile", into = "FactorizationFile")]
pub struct RankFactorization {
    vs: Vec<Vec<C64>>,
    fs: Vec<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorizationFile {
    k: usize,
    #[serde(with = "complex_vec_list")]
    vs: Vec<Vec<C64>>,
    #[serde(with = "complex_vec_list")]
    fs: Vec<Vec<C64>>,
}

impl TryFrom<FactorizationFile> for RankFactorization {
    type Error = Error;

    fn try_from(file: FactorizationFile) -> Result<Self> {
        if file.k == 0 || file.vs.len() != file.k || file.fs.len() != file.k {
            return Err(Error::InvalidInput(format!(
                "k = {} with {} vs and {} fs",
                file.k,
                file.vs.len(),
                file.fs.len()
            )));
        }
        RankFactorization::from_parts(file.vs, file.fs)
    }
}

impl From<RankFactorization> for FactorizationFile {
    fn from(r: RankFactorization) -> Self {
        FactorizationFile {
            k: r.k(),
            vs: r.vs,
            fs: r.fs,
        }
    }
}

impl RankFactorization {
    /// Shape-checked constructor; independence is checked separately by
    /// [`RankFactorization::is_independent`].
    pub fn from_parts(vs: Vec<Vec<C64>>, fs: Vec<Vec<C64>>) -> Result<Self> {
        if vs.is_empty() || vs.len() != fs.len() {
            return Err(Error::DimensionMismatch(
                "vs and fs must be nonempty and paired".into(),
            ));
        }
        let rows = vs[0].len();
        let cols = fs[0].len();
        if rows == 0
            || cols == 0
            || vs.iter().any(|v| v.len() != rows)
            || fs.iter().any(|f| f.len() != cols)
        {
            return Err(Error::DimensionMismatch("ragged factor vectors".into()));
        }
        Ok(RankFactorization { vs, fs })
    }

    pub fn k(&self) -> usize {
        self.vs.len()
    }

    pub fn vs(&self) -> &[Vec<C64>] {
        &self.vs
    }

    pub fn fs(&self) -> &[Vec<C64>] {
        &self.fs
    }

    pub fn terms(&self) -> Vec<RankOneOp> {
        self.vs
            .iter()
            .zip(&self.fs)
            .map(|(v, f)| RankOneOp {
                x: v.clone(),
                f: f.clone(),
            })
            .collect()
    }

    /// `V` with the `v_i` as columns.
    pub fn left(&self) -> CMatrix {
        CMatrix::from_columns(&self.vs).expect("validated on construction")
    }

    /// `F` with the `f_i` as rows.
    pub fn right(&self) -> CMatrix {
        CMatrix::from_rows(&self.fs).expect("validated on construction")
    }

    pub fn matrix(&self) -> CMatrix {
        &self.left() * &self.right()
    }

    /// Both `k x k` Gram matrices `V*V` and `F F*` pass the invertibility test.
    pub fn is_independent(&self, tol: &Tolerances) -> bool {
        let v = self.left();
        let f = self.right();
        let gv = &v.adjoint() * &v;
        let gf = &f * &f.adjoint();
        is_invertible(&gv, tol).unwrap_or(false) && is_invertible(&gf, tol).unwrap_or(false)
    }

    pub fn reconstruction_residual(&self, c: &CMatrix) -> f64 {
        relative(self.matrix().distance(c), c.frobenius_norm())
    }
}

/// Factor `C = V·F` from its reduced row echelon form: `V` holds the pivot
/// columns of `C` verbatim and `F` the nonzero rows of the echelon form.
pub fn rank_factorize(c: &CMatrix, tol: &Tolerances) -> Result<RankFactorization> {
    let rr = row_reduce(c, tol.rank_eps);
    if rr.rank() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let vs = rr.pivot_columns.iter().map(|&j| c.column(j)).collect();
    let fs = (0..rr.rank()).map(|i| rr.reduced.row(i)).collect();
    RankFactorization::from_parts(vs, fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::{rank, sample_rank, Rng, ONE};

    fn e(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; n];
        v[i] = ONE;
        v
    }

    fn op(x: Vec<C64>, f: Vec<C64>) -> RankOneOp {
        RankOneOp::new(x, f).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(op(e(3, 0), e(3, 0)).apply(&e(3, 0)).unwrap(), e(3, 0));
        assert_eq!(op(e(3, 0), e(3, 1)).apply(&e(3, 1)).unwrap(), e(3, 0));
        assert_eq!(op(e(3, 0), e(3, 1)).apply(&e(3, 0)).unwrap(), vec![ZERO; 3]);
        assert!(op(e(3, 0), e(3, 1)).apply(&e(2, 0)).is_err());
    }

    #[test]
    fn zero_vectors_rejected() {
        assert!(RankOneOp::new(vec![ZERO; 2], e(2, 0)).is_err());
        assert!(RankOneOp::new(e(2, 0), vec![ZERO; 2]).is_err());
    }

    #[test]
    fn compose_examples() {
        let e12 = op(e(2, 0), e(2, 1));
        let e21 = op(e(2, 1), e(2, 0));
        match compose_rank_one(&e12, &e21).unwrap() {
            Composition::Scaled { scale, op } => {
                assert_eq!(scale, ONE);
                assert_eq!(op.matrix(), CMatrix::unit(2, 0, 0));
            }
            Composition::Zero => panic!("E12 E21 = E11"),
        }
        assert_eq!(compose_rank_one(&e12, &e12).unwrap(), Composition::Zero);

        let x = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        let f = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let p = op(x, f);
        let sq = compose_rank_one(&p, &p).unwrap();
        assert_eq!(sq.matrix(2, 2), p.matrix());
    }

    #[test]
    fn projection_examples() {
        let tol = Tolerances::default();
        assert!(is_projection(&op(e(2, 0), e(2, 0)), &tol));
        let two = vec![C64::new(2.0, 0.0), ZERO];
        assert!(!is_projection(&op(two, e(2, 0)), &tol));
        assert!(!is_projection(&op(e(2, 0), e(2, 1)), &tol));
    }

    #[test]
    fn factorize_unit() {
        let tol = Tolerances::default();
        let f = rank_factorize(&CMatrix::unit(4, 0, 0), &tol).unwrap();
        assert_eq!(f.k(), 1);
        assert_eq!(f.vs()[0], e(4, 0));
        assert_eq!(f.fs()[0], e(4, 0));
    }

    #[test]
    fn factorize_identity_and_proportional_columns() {
        let tol = Tolerances::default();
        assert_eq!(rank_factorize(&CMatrix::identity(2), &tol).unwrap().k(), 2);
        let c = &CMatrix::unit(3, 0, 0) + &CMatrix::unit(3, 0, 1);
        let f = rank_factorize(&c, &tol).unwrap();
        assert_eq!(f.k(), 1);
        assert_eq!(f.matrix(), c);
    }

    #[test]
    fn factorize_zero_is_error() {
        assert_eq!(
            rank_factorize(&CMatrix::zeros(3, 3), &Tolerances::default()),
            Err(Error::ZeroMatrix)
        );
    }

    #[test]
    fn factorization_json_shape() {
        let f = rank_factorize(&CMatrix::unit(2, 0, 1), &Tolerances::default()).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"k":1,"vs":[[[1.0,0.0],[0.0,0.0]]],"fs":[[[0.0,0.0],[1.0,0.0]]]}"#
        );
        let back: RankFactorization = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<RankFactorization>(
            r#"{"k":2,"vs":[[[1.0,0.0]]],"fs":[[[1.0,0.0]]]}"#
        )
        .is_err());
    }

    #[test]
    fn random_factorizations_are_exact_rank() {
        let tol = Tolerances::default();
        let mut rng = Rng::new(8);
        for n in 2..7 {
            for k in 1..=n {
                let c = sample_rank(n, k, &mut rng);
                let f = rank_factorize(&c, &tol).unwrap();
                assert_eq!(f.k(), k);
                assert!(f.reconstruction_residual(&c) <= tol.check_tol);
                assert!(f.is_independent(&tol));
                assert_eq!(rank(&f.matrix(), &tol), k);
            }
        }
    }
}
