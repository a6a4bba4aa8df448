//! Linear maps on `M_n(ℂ)` as `n² x n²` superoperators acting on
//! column-stacked vectorizations, with `vec(A X B) = (Bᵗ ⊗ A) vec(X)`.
//!
//! The basis order of `M_n` is `E_11, E_21, …, E_n1, E_12, …` (column-major),
//! so column `i + j·n` of a superoperator matrix is `vec(Φ(E_ij))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{
    complex_from_pairs, inverse, is_invertible, nullspace_basis, pairs_from_complex, rank,
    sample_ginibre, CMatrix, Rng, Tolerances, C64, ONE, ZERO,
};

/// Serialized as the shared matrix format plus `"n"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SuperOpFile", into = "SuperOpFile")]
pub struct SuperOp {
    n: usize,
    mat: CMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuperOpFile {
    n: usize,
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<SuperOpFile> for SuperOp {
    type Error = Error;

    fn try_from(file: SuperOpFile) -> Result<Self> {
        let values = complex_from_pairs(&file.data)?;
        let mat = CMatrix::from_row_major(file.rows, file.cols, values)?;
        SuperOp::from_matrix(file.n, mat)
    }
}

impl From<SuperOp> for SuperOpFile {
    fn from(op: SuperOp) -> Self {
        SuperOpFile {
            n: op.n,
            rows: op.mat.rows(),
            cols: op.mat.cols(),
            data: pairs_from_complex(op.mat.data()),
        }
    }
}

impl SuperOp {
    pub fn from_matrix(n: usize, mat: CMatrix) -> Result<Self> {
        let nn = n
            .checked_mul(n)
            .ok_or_else(|| Error::InvalidInput("n overflows".into()))?;
        if n == 0 || mat.rows() != nn || mat.cols() != nn {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on M_{n} needs a {nn}x{nn} matrix, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        if !mat.is_finite() {
            return Err(Error::InvalidInput("non-finite superoperator entry".into()));
        }
        Ok(SuperOp { n, mat })
    }

    /// Superoperator of an arbitrary linear map, built column by column from
    /// its action on the matrix units.
    pub fn from_fn(n: usize, mut map: impl FnMut(&CMatrix) -> CMatrix) -> Self {
        let nn = n * n;
        let mut mat = CMatrix::zeros(nn, nn);
        for j in 0..n {
            for i in 0..n {
                let image = map(&CMatrix::unit(n, i, j)).vec();
                let col = i + j * n;
                for (r, v) in image.into_iter().enumerate() {
                    mat[(r, col)] = v;
                }
            }
        }
        SuperOp { n, mat }
    }

    pub fn identity(n: usize) -> Self {
        SuperOp {
            n,
            mat: CMatrix::identity(n * n),
        }
    }

    pub fn zero(n: usize) -> Self {
        SuperOp {
            n,
            mat: CMatrix::zeros(n * n, n * n),
        }
    }

    /// `T ↦ Tᵗ`, i.e. the commutation matrix `K_n`.
    pub fn transpose(n: usize) -> Self {
        SuperOp {
            n,
            mat: commutation_matrix(n),
        }
    }

    /// Gaussian `n² x n²` representation; generically bijective and not a
    /// preserver of anything.
    pub fn random(n: usize, rng: &mut Rng) -> Self {
        SuperOp {
            n,
            mat: sample_ginibre(n * n, rng),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.rows() != self.n || t.cols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on M_{} applied to a {}x{} matrix",
                self.n,
                t.rows(),
                t.cols()
            )));
        }
        let v = self.mat.mul_vec(&t.vec())?;
        CMatrix::unvec(self.n, &v)
    }

    /// `Φ(E_ij)` read directly from column `i + j·n`.
    pub fn image_of_unit(&self, i: usize, j: usize) -> CMatrix {
        CMatrix::unvec(self.n, &self.mat.column(i + j * self.n)).expect("square superoperator")
    }

    pub fn scale(&self, s: C64) -> Self {
        SuperOp {
            n: self.n,
            mat: self.mat.scale(s),
        }
    }
}

pub fn apply(phi: &SuperOp, t: &CMatrix) -> Result<CMatrix> {
    phi.apply(t)
}

/// Permutation `K_n` with `vec(Tᵗ) = K_n · vec(T)`.
pub fn commutation_matrix(n: usize) -> CMatrix {
    let nn = n * n;
    let mut k = CMatrix::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            k[(i + j * n, j + i * n)] = ONE;
        }
    }
    k
}

fn require_square_of(n: usize, m: &CMatrix, what: &str) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn require_nonzero(alpha: C64) -> Result<()> {
    if alpha == ZERO || !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidInput(
            "alpha must be a nonzero finite scalar".into(),
        ));
    }
    Ok(())
}

/// `T ↦ α U T U⁻¹`, represented as `α (U⁻ᵗ ⊗ U)`.
pub fn conjugation_map(alpha: C64, u: &CMatrix, tol: &Tolerances) -> Result<SuperOp> {
    require_nonzero(alpha)?;
    if !u.is_square() {
        return Err(Error::DimensionMismatch("U must be square".into()));
    }
    let u_inv = inverse(u, tol)?;
    let mat = u_inv.transpose().kron(u).scale(alpha);
    SuperOp::from_matrix(u.rows(), mat)
}

/// `T ↦ α D U Tᵗ U⁻¹`, represented as `α (U⁻ᵗ ⊗ DU) K_n`.
pub fn transpose_conjugation_map(
    alpha: C64,
    d: &CMatrix,
    u: &CMatrix,
    tol: &Tolerances,
) -> Result<SuperOp> {
    require_nonzero(alpha)?;
    if !u.is_square() {
        return Err(Error::DimensionMismatch("U must be square".into()));
    }
    let n = u.rows();
    require_square_of(n, d, "D")?;
    if !is_invertible(d, tol)? {
        return Err(Error::SingularMatrix);
    }
    let u_inv = inverse(u, tol)?;
    let du = d * u;
    let mat = &u_inv.transpose().kron(&du).scale(alpha) * &commutation_matrix(n);
    SuperOp::from_matrix(n, mat)
}

/// `D = (α² U Cᵗ U⁻¹)⁻¹`, the target for which the transpose-conjugation map
/// with parameters `(α, D, U)` sends every factorization of `C` to one of `D`.
pub fn solve_transpose_constraint(
    alpha: C64,
    u: &CMatrix,
    c: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    require_nonzero(alpha)?;
    if !u.is_square() {
        return Err(Error::DimensionMismatch("U must be square".into()));
    }
    require_square_of(u.rows(), c, "C")?;
    if !is_invertible(c, tol)? {
        return Err(Error::SingularMatrix);
    }
    let u_inv = inverse(u, tol)?;
    let inner = &(u * &c.transpose()) * &u_inv;
    inverse(&inner.scale(alpha * alpha), tol)
}

fn same_n(phi: &SuperOp, psi: &SuperOp) -> Result<()> {
    if phi.n != psi.n {
        return Err(Error::DimensionMismatch(format!(
            "superoperators on M_{} and M_{}",
            phi.n, psi.n
        )));
    }
    Ok(())
}

/// `Φ ∘ Ψ`.
pub fn compose(phi: &SuperOp, psi: &SuperOp) -> Result<SuperOp> {
    same_n(phi, psi)?;
    Ok(SuperOp {
        n: phi.n,
        mat: &phi.mat * &psi.mat,
    })
}

pub fn invert_superop(phi: &SuperOp, tol: &Tolerances) -> Result<SuperOp> {
    Ok(SuperOp {
        n: phi.n,
        mat: inverse(&phi.mat, tol)?,
    })
}

pub fn is_bijective(phi: &SuperOp, tol: &Tolerances) -> bool {
    is_invertible(&phi.mat, tol).unwrap_or(false)
}

pub fn kernel_dim(phi: &SuperOp, tol: &Tolerances) -> usize {
    phi.n * phi.n - rank(&phi.mat, tol)
}

/// `T ↦ z_inv · Φ(T)`.
pub fn scale_left(phi: &SuperOp, z_inv: &CMatrix) -> Result<SuperOp> {
    require_square_of(phi.n, z_inv, "left factor")?;
    let left = CMatrix::identity(phi.n).kron(z_inv);
    Ok(SuperOp {
        n: phi.n,
        mat: &left * &phi.mat,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `{X : X c = 0}`
    Left,
    /// `{X : c X = 0}`
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilatorBasis {
    pub side: Side,
    pub c: CMatrix,
    pub basis: Vec<CMatrix>,
}

/// Basis of the left or right annihilator of `c`, from the nullspace of
/// `cᵗ ⊗ I` (left, `vec(Xc)`) or `I ⊗ c` (right, `vec(cX)`).
pub fn annihilator_basis(c: &CMatrix, side: Side, tol: &Tolerances) -> Result<AnnihilatorBasis> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch(
            "annihilators need a square element".into(),
        ));
    }
    let n = c.rows();
    let id = CMatrix::identity(n);
    let op = match side {
        Side::Left => c.transpose().kron(&id),
        Side::Right => id.kron(c),
    };
    let basis = nullspace_basis(&op, tol)
        .into_iter()
        .map(|v| CMatrix::unvec(n, &v))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnnihilatorBasis {
        side,
        c: c.clone(),
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::{sample_invertible, Rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn direct_conj(alpha: C64, u: &CMatrix, t: &CMatrix) -> CMatrix {
        let ui = inverse(u, &tol()).unwrap();
        (&(u * t) * &ui).scale(alpha)
    }

    #[test]
    fn identity_apply() {
        let mut rng = Rng::new(1);
        let t = sample_ginibre(3, &mut rng);
        assert_eq!(SuperOp::identity(3).apply(&t).unwrap(), t);
        assert!(SuperOp::identity(3).apply(&CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn transpose_of_e12() {
        let k = SuperOp::transpose(2);
        assert_eq!(
            k.apply(&CMatrix::unit(2, 0, 1)).unwrap(),
            CMatrix::unit(2, 1, 0)
        );
    }

    #[test]
    fn conjugation_examples() {
        let mut rng = Rng::new(2);
        let u = sample_invertible(3, &mut rng, &tol()).unwrap();
        let id = CMatrix::identity(3);
        let phi = conjugation_map(ONE, &u, &tol()).unwrap();
        assert!(phi.apply(&id).unwrap().distance(&id) < 1e-12);
        assert_eq!(
            conjugation_map(ONE, &id, &tol()).unwrap(),
            SuperOp::identity(3)
        );
        let two = C64::new(2.0, 0.0);
        assert_eq!(
            conjugation_map(two, &id, &tol()).unwrap(),
            SuperOp::identity(3).scale(two)
        );
        assert!(matches!(
            conjugation_map(ONE, &CMatrix::unit(2, 0, 0), &tol()),
            Err(Error::SingularMatrix)
        ));
        assert!(conjugation_map(ZERO, &id, &tol()).is_err());
    }

    #[test]
    fn conjugation_matches_direct_product() {
        let mut rng = Rng::new(3);
        let alpha = rng.nonzero_scalar();
        let u = sample_invertible(4, &mut rng, &tol()).unwrap();
        let phi = conjugation_map(alpha, &u, &tol()).unwrap();
        for _ in 0..50 {
            let t = sample_ginibre(4, &mut rng);
            let direct = direct_conj(alpha, &u, &t);
            let res = phi.apply(&t).unwrap().distance(&direct) / direct.frobenius_norm().max(1.0);
            assert!(res <= 1e-10, "{res}");
        }
    }

    #[test]
    fn transpose_conjugation_examples() {
        let id = CMatrix::identity(3);
        let pure = transpose_conjugation_map(ONE, &id, &id, &tol()).unwrap();
        assert_eq!(pure, SuperOp::transpose(3));
        let id2 = CMatrix::identity(2);
        let pure2 = transpose_conjugation_map(ONE, &id2, &id2, &tol()).unwrap();
        assert_eq!(
            pure2.apply(&CMatrix::unit(2, 0, 1)).unwrap(),
            CMatrix::unit(2, 1, 0)
        );

        let mut rng = Rng::new(4);
        let alpha = rng.nonzero_scalar();
        let d = sample_invertible(3, &mut rng, &tol()).unwrap();
        let u = sample_invertible(3, &mut rng, &tol()).unwrap();
        let phi = transpose_conjugation_map(alpha, &d, &u, &tol()).unwrap();
        let ui = inverse(&u, &tol()).unwrap();
        for _ in 0..50 {
            let t = sample_ginibre(3, &mut rng);
            let direct = (&(&(&d * &u) * &t.transpose()) * &ui).scale(alpha);
            let res = phi.apply(&t).unwrap().distance(&direct) / direct.frobenius_norm().max(1.0);
            assert!(res <= 1e-10, "{res}");
        }
    }

    #[test]
    fn constraint_examples() {
        let id = CMatrix::identity(2);
        let d = solve_transpose_constraint(ONE, &id, &id, &tol()).unwrap();
        assert_eq!(d, id);
        let c = CMatrix::diag_real(&[2.0, 0.5]);
        let d = solve_transpose_constraint(ONE, &id, &c, &tol()).unwrap();
        assert_eq!(d, CMatrix::diag_real(&[0.5, 2.0]));
        let d = solve_transpose_constraint(C64::new(2.0, 0.0), &id, &id, &tol()).unwrap();
        assert_eq!(d, CMatrix::diag_real(&[0.25, 0.25]));
        assert_eq!(
            solve_transpose_constraint(ONE, &id, &CMatrix::unit(2, 0, 0), &tol()),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn composition_inverse_and_kernel() {
        let mut rng = Rng::new(5);
        let alpha = rng.nonzero_scalar();
        let u = sample_invertible(3, &mut rng, &tol()).unwrap();
        let phi = conjugation_map(alpha, &u, &tol()).unwrap();
        assert!(is_bijective(&phi, &tol()));
        let ui = inverse(&u, &tol()).unwrap();
        let back = conjugation_map(ONE / alpha, &ui, &tol()).unwrap();
        let prod = compose(&back, &phi).unwrap();
        assert!(prod.matrix().distance(&CMatrix::identity(9)) < 1e-9);
        let inv = invert_superop(&phi, &tol()).unwrap();
        assert!(inv.matrix().distance(back.matrix()) < 1e-9 * back.matrix().frobenius_norm());

        assert_eq!(kernel_dim(&SuperOp::zero(3), &tol()), 9);
        assert!(!is_bijective(&SuperOp::zero(3), &tol()));
        assert_eq!(
            invert_superop(&SuperOp::zero(2), &tol()),
            Err(Error::SingularMatrix)
        );
        let tt = compose(&SuperOp::transpose(3), &SuperOp::transpose(3)).unwrap();
        assert_eq!(tt, SuperOp::identity(3));
        assert!(compose(&SuperOp::identity(2), &SuperOp::identity(3)).is_err());
    }

    #[test]
    fn scale_left_examples() {
        let mut rng = Rng::new(6);
        let phi = SuperOp::random(2, &mut rng);
        assert_eq!(scale_left(&phi, &CMatrix::identity(2)).unwrap(), phi);

        let alpha = rng.nonzero_scalar();
        let u = sample_invertible(3, &mut rng, &tol()).unwrap();
        let conj = conjugation_map(alpha, &u, &tol()).unwrap();
        let unital = scale_left(&conj, &CMatrix::identity(3).scale(ONE / alpha)).unwrap();
        let plain = conjugation_map(ONE, &u, &tol()).unwrap();
        assert!(unital.matrix().distance(plain.matrix()) < 1e-10 * plain.matrix().frobenius_norm());

        let d = sample_invertible(3, &mut rng, &tol()).unwrap();
        let tc = transpose_conjugation_map(alpha, &d, &u, &tol()).unwrap();
        let z_inv = inverse(&d.scale(alpha), &tol()).unwrap();
        let psi = scale_left(&tc, &z_inv).unwrap();
        let id = CMatrix::identity(3);
        assert!(psi.apply(&id).unwrap().distance(&id) < 1e-10);
        assert!(scale_left(&tc, &CMatrix::identity(2)).is_err());
    }

    #[test]
    fn annihilator_examples() {
        let left = annihilator_basis(&CMatrix::unit(2, 0, 0), Side::Left, &tol()).unwrap();
        assert_eq!(left.basis.len(), 2);
        for x in &left.basis {
            assert_eq!(x[(0, 0)], ZERO);
            assert_eq!(x[(1, 0)], ZERO);
        }
        let mut rng = Rng::new(7);
        let c = sample_invertible(3, &mut rng, &tol()).unwrap();
        for side in [Side::Left, Side::Right] {
            assert!(annihilator_basis(&c, side, &tol())
                .unwrap()
                .basis
                .is_empty());
            assert_eq!(
                annihilator_basis(&CMatrix::zeros(3, 3), side, &tol())
                    .unwrap()
                    .basis
                    .len(),
                9
            );
        }
    }

    #[test]
    fn superop_json_has_n_field() {
        let s = serde_json::to_value(SuperOp::identity(1)).unwrap();
        assert_eq!(s["n"], 1);
        assert_eq!(s["rows"], 1);
        let back: SuperOp = serde_json::from_value(s).unwrap();
        assert_eq!(back, SuperOp::identity(1));
        assert!(
            serde_json::from_str::<SuperOp>(r#"{"n":2,"rows":1,"cols":1,"data":[[1.0,0.0]]}"#)
                .is_err()
        );
    }
}
