use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
///
/// Serialized as `{"rows": n, "cols": m, "data": [[re, im], ...]}` with the
/// entries in row-major order. Deserialization rejects empty shapes, a data
/// length that disagrees with the shape, and non-finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixFile> for CMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.rows == 0 || file.cols == 0 {
            return Err(Error::InvalidInput("rows and cols must be positive".into()));
        }
        let expected = file
            .rows
            .checked_mul(file.cols)
            .ok_or_else(|| Error::InvalidInput("shape overflows".into()))?;
        if file.data.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                expected,
                file.rows,
                file.cols,
                file.data.len()
            )));
        }
        let data = complex_from_pairs(&file.data)?;
        Ok(CMatrix {
            rows: file.rows,
            cols: file.cols,
            data,
        })
    }
}

impl From<CMatrix> for MatrixFile {
    fn from(m: CMatrix) -> Self {
        MatrixFile {
            rows: m.rows,
            cols: m.cols,
            data: pairs_from_complex(&m.data),
        }
    }
}

pub(crate) fn complex_from_pairs(pairs: &[[f64; 2]]) -> Result<Vec<C64>> {
    pairs
        .iter()
        .map(|&[re, im]| {
            if re.is_finite() && im.is_finite() {
                Ok(C64::new(re, im))
            } else {
                Err(Error::InvalidInput("non-finite entry".into()))
            }
        })
        .collect()
}

pub(crate) fn pairs_from_complex(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

/// Serde adapter for complex vectors written as `[[re, im], ...]`.
pub mod complex_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        pairs_from_complex(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        complex_from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for lists of complex vectors.
pub mod complex_vec_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let nested: Vec<Vec<[f64; 2]>> = v.iter().map(|x| pairs_from_complex(x)).collect();
        nested.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Vec<C64>>, D::Error> {
        let nested = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        nested
            .iter()
            .map(|p| complex_from_pairs(p).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be positive");
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix unit `E_ij` of size `n x n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Real-valued convenience constructor (tests and examples).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Outer product `x f^T` (no conjugation): the matrix of `x ⊗ f`.
    pub fn outer(x: &[C64], f: &[C64]) -> Self {
        Self::from_fn(x.len(), f.len(), |i, j| x[i] * f[j])
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let n = cols.first().map(Vec::len).unwrap_or(0);
        if cols.is_empty() || n == 0 || cols.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch(
                "ragged or empty column list".into(),
            ));
        }
        Ok(Self::from_fn(n, cols.len(), |i, j| cols[j][i]))
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged or empty row list".into()));
        }
        Ok(Self::from_fn(rows.len(), n, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &CMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let c = self.cols;
        Ok(Self::from_fn(self.rows, c + other.cols, |i, j| {
            if j < c {
                self[(i, j)]
            } else {
                other[(i, j - c)]
            }
        }))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn try_mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} to a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn same_shape(&self, rhs: &CMatrix, op: &str) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{op} of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.same_shape(rhs, "sum")?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.same_shape(rhs, "difference")?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `‖self − other‖_F`; panics on a shape mismatch.
    pub fn distance(&self, other: &CMatrix) -> f64 {
        (self - other).frobenius_norm()
    }

    /// Column-stacked vectorization: `vec(T)[i + j·rows] = T[i, j]`.
    pub fn vec(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Inverse of [`CMatrix::vec`] for an `n x n` matrix.
    pub fn unvec(n: usize, v: &[C64]) -> Result<CMatrix> {
        if n == 0 || n.checked_mul(n) != Some(v.len()) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} is not a vectorized {n}x{n} matrix",
                v.len()
            )));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| v[i + j * n]))
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (p, q) = (rhs.rows, rhs.cols);
        CMatrix::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * rhs[(i % p, j % q)]
        })
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; the `try_*` methods are the
// fallible counterparts for data coming from outside the crate.

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bilinear pairing `Σ f_i y_i` (no conjugation).
pub fn pair(f: &[C64], y: &[C64]) -> C64 {
    f.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Residual `‖value‖` divided by `max(1, scale)`.
pub fn relative(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_format_is_row_major_pairs() {
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new((2 * i + j) as f64, -1.0));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"rows":2,"cols":2,"data":[[0.0,-1.0],[1.0,-1.0],[2.0,-1.0],[3.0,-1.0]]}"#
        );
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(serde_json::from_str::<CMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<CMatrix>(r#"{"rows":0,"cols":0,"data":[]}"#).is_err());
        assert!(serde_json::from_str::<CMatrix>(r#"{"rows":1,"cols":1}"#).is_err());
        assert!(
            serde_json::from_str::<CMatrix>(r#"{"rows":1,"cols":1,"data":[[1,0]],"x":1}"#).is_err()
        );
    }

    #[test]
    fn vec_is_column_stacking() {
        let t = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v: Vec<f64> = t.vec().iter().map(|z| z.re).collect();
        assert_eq!(v, vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(CMatrix::unvec(2, &t.vec()).unwrap(), t);
    }

    #[test]
    fn kron_of_units() {
        let a = CMatrix::unit(2, 0, 1);
        let b = CMatrix::unit(2, 1, 0);
        let k = a.kron(&b);
        assert_eq!(k[(1, 2)], ONE);
        assert_eq!(k.frobenius_norm(), 1.0);
    }

    #[test]
    fn product_shape_errors() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(a.try_mul(&a), Err(Error::DimensionMismatch(_))));
        assert!(a.try_mul(&CMatrix::zeros(3, 1)).is_ok());
    }
}
