use serde::{Deserialize, Serialize};

use super::dense::{vec_norm, CMatrix, C64, ONE, ZERO};
use super::sampling::Rng;
use crate::error::{Error, Result};

/// Numerical thresholds. All three are relative to `max(1, scale)` of the
/// operands they are applied to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Pivot threshold for invertibility decisions.
    pub pivot_eps: f64,
    /// Residual acceptance for property checks.
    pub check_tol: f64,
    /// Pivot threshold for rank and nullspace decisions.
    pub rank_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pivot_eps: 1e-10,
            check_tol: 1e-9,
            rank_eps: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(pivot_eps: f64, check_tol: f64, rank_eps: f64) -> Result<Self> {
        let t = Tolerances {
            pivot_eps,
            check_tol,
            rank_eps,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_check_tol(self, check_tol: f64) -> Result<Self> {
        Tolerances::new(self.pivot_eps, check_tol, self.rank_eps)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pivot_eps", self.pivot_eps),
            ("check_tol", self.check_tol),
            ("rank_eps", self.rank_eps),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} is outside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// `P·M = L·U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct LuDecomposition {
    pub lower: CMatrix,
    pub upper: CMatrix,
    /// Row `i` of `P·M` is row `permutation[i]` of `M`.
    pub permutation: Vec<usize>,
    pub min_abs_pivot: f64,
}

impl LuDecomposition {
    pub fn permutation_matrix(&self) -> CMatrix {
        let n = self.permutation.len();
        CMatrix::from_fn(
            n,
            n,
            |i, j| if self.permutation[i] == j { ONE } else { ZERO },
        )
    }

    /// Solve `M x = b`. Assumes the factorization came from an invertible matrix.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.permutation.len();
        let mut y: Vec<C64> = self.permutation.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lower[(i, k)];
                let yk = y[k];
                y[i] -= l * yk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.upper[(i, k)];
                let yk = y[k];
                y[i] -= u * yk;
            }
            y[i] /= self.upper[(i, i)];
        }
        y
    }
}

fn require_square(m: &CMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{what} needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn lu_decompose(m: &CMatrix) -> Result<LuDecomposition> {
    require_square(m, "LU decomposition")?;
    let n = m.rows();
    let mut a = m.clone();
    let mut lower = CMatrix::identity(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_abs_pivot = f64::INFINITY;

    for col in 0..n {
        let (p, pmag) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .fold(
                (col, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if p != col {
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            for j in 0..col {
                let t = lower[(col, j)];
                lower[(col, j)] = lower[(p, j)];
                lower[(p, j)] = t;
            }
            perm.swap(col, p);
        }
        min_abs_pivot = min_abs_pivot.min(pmag);
        if pmag == 0.0 {
            continue;
        }
        let pivot = a[(col, col)];
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            lower[(r, col)] = factor;
            a[(r, col)] = ZERO;
            for j in col + 1..n {
                let v = a[(col, j)];
                a[(r, j)] -= factor * v;
            }
        }
    }

    Ok(LuDecomposition {
        lower,
        upper: a,
        permutation: perm,
        min_abs_pivot,
    })
}

fn pivot_floor(m: &CMatrix, eps: f64) -> f64 {
    eps * m.frobenius_norm().max(1.0)
}

pub fn is_invertible(m: &CMatrix, tol: &Tolerances) -> Result<bool> {
    let lu = lu_decompose(m)?;
    Ok(lu.min_abs_pivot > pivot_floor(m, tol.pivot_eps))
}

pub fn inverse(m: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let lu = lu_decompose(m)?;
    if lu.min_abs_pivot <= pivot_floor(m, tol.pivot_eps) {
        return Err(Error::SingularMatrix);
    }
    let n = m.rows();
    let mut inv = CMatrix::zeros(n, n);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e[j] = ONE;
        let x = lu.solve(&e);
        for (i, v) in x.into_iter().enumerate() {
            inv[(i, j)] = v;
        }
        e[j] = ZERO;
    }
    Ok(inv)
}

/// Reduced row echelon form with partial pivoting.
#[derive(Clone, Debug)]
pub struct RowReduction {
    pub reduced: CMatrix,
    /// Pivot column of each of the leading `rank` rows of `reduced`.
    pub pivot_columns: Vec<usize>,
}

impl RowReduction {
    pub fn rank(&self) -> usize {
        self.pivot_columns.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.reduced.cols())
            .filter(|c| !self.pivot_columns.contains(c))
            .collect()
    }
}

/// Row-reduce `m`. A column whose best remaining pivot has magnitude at most
/// `eps · max(1, ‖m‖_F)` is treated as dependent.
pub fn row_reduce(m: &CMatrix, eps: f64) -> RowReduction {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let floor = pivot_floor(m, eps);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, pmag) = (r..rows)
            .map(|i| (i, a[(i, c)].norm()))
            .fold(
                (r, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pmag <= floor {
            for i in r..rows {
                a[(i, c)] = ZERO;
            }
            continue;
        }
        if p != r {
            for j in 0..cols {
                let t = a[(r, j)];
                a[(r, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
        }
        let inv = ONE / a[(r, c)];
        for j in c..cols {
            a[(r, j)] *= inv;
        }
        a[(r, c)] = ONE;
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = a[(i, c)];
            if factor == ZERO {
                continue;
            }
            for j in c..cols {
                let v = a[(r, j)];
                a[(i, j)] -= factor * v;
            }
            a[(i, c)] = ZERO;
        }
        pivots.push(c);
        r += 1;
    }
    for i in r..rows {
        for j in 0..cols {
            a[(i, j)] = ZERO;
        }
    }
    RowReduction {
        reduced: a,
        pivot_columns: pivots,
    }
}

pub fn rank(m: &CMatrix, tol: &Tolerances) -> usize {
    row_reduce(m, tol.rank_eps).rank()
}

/// Basis of `{v : m·v = 0}` read off the reduced row echelon form: one vector
/// per free column, with a unit entry in that column.
pub fn nullspace_basis(m: &CMatrix, tol: &Tolerances) -> Vec<Vec<C64>> {
    let rr = row_reduce(m, tol.rank_eps);
    nullspace_from_reduction(&rr)
}

fn nullspace_from_reduction(rr: &RowReduction) -> Vec<Vec<C64>> {
    let cols = rr.reduced.cols();
    rr.free_columns()
        .into_iter()
        .map(|f| {
            let mut v = vec![ZERO; cols];
            v[f] = ONE;
            for (row, &pc) in rr.pivot_columns.iter().enumerate() {
                v[pc] = -rr.reduced[(row, f)];
            }
            v
        })
        .collect()
}

/// Budget of random fallback candidates in [`find_regular_scalar`].
pub const REGULAR_SCALAR_FALLBACK_BUDGET: usize = 64;
const REGULAR_SCALAR_SEED: u64 = 0x5eed_1a3b_da00_0001;

/// Nonzero `λ` with `I − λ·x` invertible.
///
/// Tries `λ = 1/j` for `j = 1..=n+1` first; at most `n` of those can hit an
/// eigenvalue reciprocal. Falls back to seeded points on the circle of radius
/// `1 / (2‖x‖_F)`, where `I − λx` is invertible in exact arithmetic.
pub fn find_regular_scalar(x: &CMatrix, tol: &Tolerances) -> Result<C64> {
    require_square(x, "find_regular_scalar")?;
    let n = x.rows();
    let id = CMatrix::identity(n);
    let works = |lambda: C64| -> Result<bool> { is_invertible(&(&id - &x.scale(lambda)), tol) };

    for j in 1..=n + 1 {
        let lambda = C64::new(1.0 / j as f64, 0.0);
        if works(lambda)? {
            return Ok(lambda);
        }
    }
    let radius = 0.5 / x.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut rng = Rng::new(REGULAR_SCALAR_SEED);
    for _ in 0..REGULAR_SCALAR_FALLBACK_BUDGET {
        let lambda = C64::from_polar(radius, rng.uniform_angle());
        if works(lambda)? {
            return Ok(lambda);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no regular scalar found for a {n}x{n} matrix"
    )))
}

/// `‖M·v‖ / (‖M‖_F ‖v‖)`, the nullspace acceptance ratio.
pub fn null_residual(m: &CMatrix, v: &[C64]) -> f64 {
    let mv = m.mul_vec(v).expect("nullspace vector length");
    let denom = m.frobenius_norm() * vec_norm(v);
    if denom == 0.0 {
        vec_norm(&mv)
    } else {
        vec_norm(&mv) / denom
    }
}
