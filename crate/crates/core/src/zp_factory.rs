//! Factorization witnesses that turn "Φ preserves products equal to C" into
//! "Φ preserves zero products".
//!
//! Given `QP = 0` and `C = Σ_{i<k} v_i ⊗ f_i`, the direct construction picks a
//! `k`-dimensional `W = span{w_i} ⊆ ker Q` meeting `im P` trivially and
//! functionals `g_i` with `g_i(w_j) = δ_ij`, `g_i(im P) = 0`. Then
//! `A = Σ v_i ⊗ g_i` and `B = Σ w_i ⊗ f_i` satisfy `AB = C`, `AP = 0`,
//! `QB = 0`, so all four of `AB`, `(A+Q)B`, `A(P+B)`, `(A+Q)(P+B)` equal `C`.
//!
//! When `dim ker Q − rank P < k` the pair is split into pieces `Q = Σ Q_i`,
//! `P = Σ P_j` with `Q_i P_j = 0` and small enough ranks for the direct
//! construction to apply to every pair. In dimension `n` this succeeds
//! exactly when `n ≥ k + 2` (or the direct case already applies).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{
    inverse, is_invertible, nullspace_basis, product_residual, relative, row_reduce,
    sample_gaussian, sample_rank, vec_norm, CMatrix, Rng, Tolerances, C64, ONE, ZERO,
};
use crate::preserver::SuperOp;
use crate::rank_one::{rank_factorize, RankFactorization};
use crate::verify::{ReportBuilder, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Direct,
    SplitP,
    SplitQ,
    SplitBoth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessResiduals {
    pub ab_minus_c: f64,
    pub ap: f64,
    pub qb: f64,
}

impl WitnessResiduals {
    pub fn max(&self) -> f64 {
        self.ab_minus_c.max(self.ap).max(self.qb)
    }
}

/// `(A, B)` with `AB = C`, `A·p_piece = 0`, `q_piece·B = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessTriple {
    pub q_piece: CMatrix,
    pub p_piece: CMatrix,
    #[serde(rename = "A")]
    pub a: CMatrix,
    #[serde(rename = "B")]
    pub b: CMatrix,
    pub residuals: WitnessResiduals,
}

impl WitnessTriple {
    /// Residuals recomputed from the stored matrices by dense multiplication.
    pub fn measured_residuals(&self, c: &CMatrix) -> WitnessResiduals {
        let n = c.rows();
        let zero = CMatrix::zeros(n, n);
        WitnessResiduals {
            ab_minus_c: product_residual(&self.a, &self.b, c),
            ap: product_residual(&self.a, &self.p_piece, &zero),
            qb: product_residual(&self.q_piece, &self.b, &zero),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationCertificate {
    pub strategy: Strategy,
    #[serde(rename = "Q")]
    pub q: CMatrix,
    #[serde(rename = "P")]
    pub p: CMatrix,
    #[serde(rename = "C")]
    pub c: CMatrix,
    pub q_pieces: Vec<CMatrix>,
    pub p_pieces: Vec<CMatrix>,
    /// Row-major over `(q_piece, p_piece)` pairs.
    pub witnesses: Vec<WitnessTriple>,
}

/// One violated certificate invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateDefect {
    pub what: String,
    pub residual: f64,
}

impl FactorizationCertificate {
    pub fn witness(&self, qi: usize, pj: usize) -> &WitnessTriple {
        &self.witnesses[qi * self.p_pieces.len() + pj]
    }

    /// Re-check every invariant using only dense multiplication and sums.
    /// Returns the list of violations (empty when the certificate is sound).
    pub fn audit(&self, tol: &Tolerances) -> Vec<CertificateDefect> {
        let mut defects = Vec::new();
        let mut flag = |what: String, residual: f64| {
            if residual.is_nan() || residual > tol.check_tol {
                defects.push(CertificateDefect { what, residual });
            }
        };
        let n = self.c.rows();
        let shapes_ok = [&self.q, &self.p, &self.c]
            .into_iter()
            .chain(&self.q_pieces)
            .chain(&self.p_pieces)
            .chain(
                self.witnesses
                    .iter()
                    .flat_map(|w| [&w.a, &w.b, &w.q_piece, &w.p_piece]),
            )
            .all(|m| m.rows() == n && m.cols() == n);
        if !shapes_ok || self.q_pieces.is_empty() || self.p_pieces.is_empty() {
            flag("shape".into(), f64::INFINITY);
            return defects;
        }
        if self.witnesses.len() != self.q_pieces.len() * self.p_pieces.len() {
            flag("witness count".into(), f64::INFINITY);
            return defects;
        }

        let sum = |pieces: &[CMatrix]| {
            pieces
                .iter()
                .skip(1)
                .fold(pieces[0].clone(), |acc, m| &acc + m)
        };
        flag(
            "sum of q_pieces".into(),
            relative(
                sum(&self.q_pieces).distance(&self.q),
                self.q.frobenius_norm(),
            ),
        );
        flag(
            "sum of p_pieces".into(),
            relative(
                sum(&self.p_pieces).distance(&self.p),
                self.p.frobenius_norm(),
            ),
        );
        let zero = CMatrix::zeros(n, n);
        for (i, qi) in self.q_pieces.iter().enumerate() {
            for (j, pj) in self.p_pieces.iter().enumerate() {
                let w = self.witness(i, j);
                if &w.q_piece != qi || &w.p_piece != pj {
                    flag(format!("witness ({i},{j}) pieces"), f64::INFINITY);
                    continue;
                }
                flag(format!("q{i}·p{j}"), product_residual(qi, pj, &zero));
                let m = w.measured_residuals(&self.c);
                flag(format!("({i},{j}) AB-C"), m.ab_minus_c);
                flag(format!("({i},{j}) AP"), m.ap);
                flag(format!("({i},{j}) QB"), m.qb);
            }
        }
        defects
    }
}

fn check_square(n: usize, m: &CMatrix, what: &str) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn check_zero_product(q: &CMatrix, p: &CMatrix, tol: &Tolerances) -> Result<()> {
    let r = product_residual(q, p, &CMatrix::zeros(q.rows(), p.cols()));
    if r > tol.check_tol {
        return Err(Error::InvalidInput(format!(
            "QP is not zero (residual {r:e})"
        )));
    }
    Ok(())
}

/// Random `(Q, P)` with `rank Q = r` and `P = K·M`, where the columns of `K`
/// span `ker Q` and `M` is Gaussian.
pub fn sample_zero_product_pair(
    n: usize,
    r: usize,
    rng: &mut Rng,
    tol: &Tolerances,
) -> Result<(CMatrix, CMatrix)> {
    if n < 2 || r == 0 || r >= n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= r <= n-1, got n = {n}, r = {r}"
        )));
    }
    let q = sample_rank(n, r, rng);
    let kernel = nullspace_basis(&q, tol);
    if kernel.len() != n - r {
        return Err(Error::NumericalFailure(format!(
            "sampled Q has kernel dimension {} instead of {}",
            kernel.len(),
            n - r
        )));
    }
    let k = CMatrix::from_columns(&kernel)?;
    let m = sample_gaussian(n - r, n, rng);
    Ok((q, &k * &m))
}

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let s = vec_norm(&v);
    v.into_iter().map(|z| z / s).collect()
}

/// Case-1 construction for a single `(Q, P)` pair.
pub fn construct_direct(
    q: &CMatrix,
    p: &CMatrix,
    c_fact: &RankFactorization,
    tol: &Tolerances,
) -> Result<WitnessTriple> {
    let n = q.rows();
    check_square(n, q, "Q")?;
    check_square(n, p, "P")?;
    let k = c_fact.k();
    if c_fact.vs()[0].len() != n || c_fact.fs()[0].len() != n {
        return Err(Error::DimensionMismatch(
            "factorization does not match Q".into(),
        ));
    }
    check_zero_product(q, p, tol)?;

    let kernel: Vec<Vec<C64>> = nullspace_basis(q, tol);
    let p_red = row_reduce(p, tol.rank_eps);
    let image: Vec<Vec<C64>> = p_red
        .pivot_columns
        .iter()
        .map(|&j| normalized(p.column(j)))
        .collect();
    let (kernel_dim, image_rank) = (kernel.len(), image.len());
    if kernel_dim < image_rank + k {
        return Err(Error::InfeasibleDimension {
            n,
            kernel_dim,
            image_rank,
            k,
        });
    }

    // Greedy complement: kernel vectors that are pivots after the image basis.
    let mut stacked: Vec<Vec<C64>> = image.clone();
    stacked.extend(kernel.iter().cloned());
    let reduced = row_reduce(&CMatrix::from_columns(&stacked)?, tol.rank_eps);
    let w: Vec<Vec<C64>> = reduced
        .pivot_columns
        .iter()
        .filter(|&&j| j >= image_rank)
        .take(k)
        .map(|&j| normalized(stacked[j].clone()))
        .collect();
    if w.len() < k {
        return Err(Error::NumericalFailure(format!(
            "found only {} complement directions in ker Q, need {k}",
            w.len()
        )));
    }

    // Minimum-norm G with G·[W | im P] = [I_k | 0]: G = R (M*M)^{-1} M*.
    let mut cols = w.clone();
    cols.extend(image);
    let m = CMatrix::from_columns(&cols)?;
    let m_adj = m.adjoint();
    let gram = &m_adj * &m;
    if !is_invertible(&gram, tol)? {
        return Err(Error::NumericalFailure(
            "complement and image directions are numerically dependent".into(),
        ));
    }
    let gram_inv = inverse(&gram, tol)?;
    let selector = CMatrix::from_fn(k, cols.len(), |i, j| if i == j { ONE } else { ZERO });
    let g = &(&selector * &gram_inv) * &m_adj;

    let a = &c_fact.left() * &g;
    let b = &CMatrix::from_columns(&w)? * &c_fact.right();
    let c = c_fact.matrix();
    let zero = CMatrix::zeros(n, n);
    let residuals = WitnessResiduals {
        ab_minus_c: product_residual(&a, &b, &c),
        ap: product_residual(&a, p, &zero),
        qb: product_residual(q, &b, &zero),
    };
    if residuals.max().is_nan() || residuals.max() > tol.check_tol {
        return Err(Error::NumericalFailure(format!(
            "witness residual {:e} exceeds tolerance",
            residuals.max()
        )));
    }
    Ok(WitnessTriple {
        q_piece: q.clone(),
        p_piece: p.clone(),
        a,
        b,
        residuals,
    })
}

/// Split `M = V·F` into consecutive rank-`chunk` pieces `V[:, J]·F[J, :]`.
/// Returns `[m]` itself when no split is needed.
fn split_pieces(m: &CMatrix, fact: &RankFactorization, chunk: usize) -> Vec<CMatrix> {
    let r = fact.k();
    if chunk >= r {
        return vec![m.clone()];
    }
    let v = fact.left();
    let f = fact.right();
    (0..r)
        .step_by(chunk)
        .map(|start| {
            let idx: Vec<usize> = (start..(start + chunk).min(r)).collect();
            &v.select_columns(&idx) * &f.select_rows(&idx)
        })
        .collect()
}

/// Piece ranks `(q_chunk, p_chunk)` and the strategy they realize.
fn plan(n: usize, q_rank: usize, p_rank: usize, k: usize) -> Option<(Strategy, usize, usize)> {
    let kernel_dim = n - q_rank;
    if kernel_dim >= p_rank + k {
        return Some((Strategy::Direct, q_rank, p_rank));
    }
    if kernel_dim > k {
        return Some((Strategy::SplitP, q_rank, kernel_dim - k));
    }
    if n > k + p_rank {
        return Some((Strategy::SplitQ, n - k - p_rank, p_rank));
    }
    if n >= k + 2 {
        // Coarsest (a, b) with a + b <= n - k; ties keep the smaller a.
        let budget = n - k;
        let pieces = |a: usize, b: usize| q_rank.div_ceil(a) * p_rank.div_ceil(b);
        let (a, b) = (1..=q_rank.min(budget - 1))
            .map(|a| (a, p_rank.min(budget - a)))
            .min_by_key(|&(a, b)| pieces(a, b))?;
        return Some((Strategy::SplitBoth, a, b));
    }
    None
}

pub fn construct_certificate(
    q: &CMatrix,
    p: &CMatrix,
    c: &CMatrix,
    tol: &Tolerances,
) -> Result<FactorizationCertificate> {
    let n = q.rows();
    check_square(n, q, "Q")?;
    check_square(n, p, "P")?;
    check_square(n, c, "C")?;
    check_zero_product(q, p, tol)?;
    let c_fact = rank_factorize(c, tol)?;
    let q_fact =
        rank_factorize(q, tol).map_err(|_| Error::InvalidInput("Q must be nonzero".into()))?;
    let p_fact =
        rank_factorize(p, tol).map_err(|_| Error::InvalidInput("P must be nonzero".into()))?;
    let (k, q_rank, p_rank) = (c_fact.k(), q_fact.k(), p_fact.k());

    let (strategy, q_chunk, p_chunk) =
        plan(n, q_rank, p_rank, k).ok_or(Error::InfeasibleDimension {
            n,
            kernel_dim: n - q_rank,
            image_rank: p_rank,
            k,
        })?;
    let q_pieces = split_pieces(q, &q_fact, q_chunk);
    let p_pieces = split_pieces(p, &p_fact, p_chunk);

    let mut witnesses = Vec::with_capacity(q_pieces.len() * p_pieces.len());
    for qi in &q_pieces {
        for pj in &p_pieces {
            witnesses.push(construct_direct(qi, pj, &c_fact, tol)?);
        }
    }
    let cert = FactorizationCertificate {
        strategy,
        q: q.clone(),
        p: p.clone(),
        c: c.clone(),
        q_pieces,
        p_pieces,
        witnesses,
    };
    if let Some(d) = cert.audit(tol).first() {
        return Err(Error::NumericalFailure(format!(
            "certificate invariant `{}` violated ({:e})",
            d.what, d.residual
        )));
    }
    Ok(cert)
}

/// Residuals of `AB`, `(A+Q)B`, `A(P+B)`, `(A+Q)(P+B)` against `C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourEquations {
    pub residuals: [f64; 4],
    pub pass: bool,
}

pub const FOUR_EQUATION_LABELS: [&str; 4] = ["AB=C", "(A+Q)B=C", "A(P+B)=C", "(A+Q)(P+B)=C"];

pub fn verify_four_equations(w: &WitnessTriple, c: &CMatrix, tol: &Tolerances) -> FourEquations {
    let aq = &w.a + &w.q_piece;
    let pb = &w.p_piece + &w.b;
    let residuals = [
        product_residual(&w.a, &w.b, c),
        product_residual(&aq, &w.b, c),
        product_residual(&w.a, &pb, c),
        product_residual(&aq, &pb, c),
    ];
    FourEquations {
        residuals,
        pass: residuals.iter().all(|r| *r <= tol.check_tol),
    }
}

/// Replay the additivity argument against a concrete map: for each witness,
/// check the four equations under `Φ` against `D`, then the deduced
/// `Φ(q)Φ(p) = 0` per pair, and finally `Φ(Q)Φ(P) = 0`.
pub fn derive_zero_product(
    phi: &SuperOp,
    cert: &FactorizationCertificate,
    d: &CMatrix,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = phi.n();
    check_square(n, &cert.c, "certificate")?;
    check_square(n, d, "D")?;
    let zero = CMatrix::zeros(n, n);
    let mut report = ReportBuilder::new("derive_zero_product", n, 0);

    let images = |m: &CMatrix| phi.apply(m);
    for w in &cert.witnesses {
        let fa = images(&w.a)?;
        let fb = images(&w.b)?;
        let fq = images(&w.q_piece)?;
        let fp = images(&w.p_piece)?;
        let faq = &fa + &fq;
        let fpb = &fp + &fb;
        let products = [&fa * &fb, &faq * &fb, &fa * &fpb, &faq * &fpb];
        let factors = [(&fa, &fb), (&faq, &fb), (&fa, &fpb), (&faq, &fpb)];
        for ((label, prod), (x, y)) in FOUR_EQUATION_LABELS.iter().zip(&products).zip(factors) {
            let scale = (x.frobenius_norm() * y.frobenius_norm()).max(d.frobenius_norm());
            report.record(&format!("Φ:{label}"), relative(prod.distance(d), scale));
        }
        // Φ(q)Φ(p) = E4 − E2 − E3 + E1 by bilinearity.
        let deduced = &(&(&products[3] - &products[1]) - &products[2]) + &products[0];
        let scale = (faq.frobenius_norm() * fpb.frobenius_norm()).max(d.frobenius_norm());
        report.record(
            "deduced Φ(q)Φ(p)",
            relative(deduced.frobenius_norm(), scale),
        );
        report.record("Φ(q)Φ(p)", product_residual(&fq, &fp, &zero));
    }
    let fq = images(&cert.q)?;
    let fp = images(&cert.p)?;
    report.record("Φ(Q)Φ(P)", product_residual(&fq, &fp, &zero));
    let mut summed = zero.clone();
    for w in &cert.witnesses {
        summed = &summed + &(&images(&w.q_piece)? * &images(&w.p_piece)?);
    }
    report.record(
        "ΣΦ(q_i)Φ(p_j)",
        relative(
            summed.frobenius_norm(),
            fq.frobenius_norm() * fp.frobenius_norm(),
        ),
    );
    Ok(report.finish(tol.check_tol))
}
