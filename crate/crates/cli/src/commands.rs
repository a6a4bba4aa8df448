use std::path::Path;

use fpp_core::matrix_core::{
    is_invertible, relative, sample_ginibre, sample_invertible, sample_rank, CMatrix, Rng,
    Tolerances, C64,
};
use fpp_core::pointwise::{
    check_annihilator_inclusion_pointwise, check_theorem33_pointwise, composition_map,
    halving_index_map, infer_target_pointwise, permutation_map, random_permutation,
    PointwiseElement,
};
use fpp_core::preserver::{
    conjugation_map, solve_transpose_constraint, transpose_conjugation_map, SuperOp,
};
use fpp_core::rank_one::rank_factorize;
use fpp_core::verify::{
    check_annihilator_inclusion, check_hua, check_preserves_at, check_rank_equality,
    check_theorem33, check_zero_product_preserving, infer_target, invertibility_probe,
    theorem41_pipeline, ReportBuilder, Verdict, VerificationReport,
};
use fpp_core::zp_factory::{
    construct_certificate, derive_zero_product, sample_zero_product_pair, verify_four_equations,
    FOUR_EQUATION_LABELS,
};
use fpp_core::Error;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{
    alpha_scalar, Command, FactorizeArgs, Family, HuaArgs, PointwiseArgs, PointwiseKind,
    PreserverArgs, Prop21Args,
};
use crate::document::Document;
use crate::CliError;

/// Largest `n` for commands that only manipulate `n×n` matrices.
pub const MAX_N: usize = 64;
/// Largest `n` for commands that build `n²×n²` superoperators.
pub const MAX_SUPEROP_N: usize = 12;
pub const MAX_M: usize = 4096;

/// Accumulates the reports and artifacts of one run.
struct Run {
    seed: u64,
    tol: Tolerances,
    reports: Vec<VerificationReport>,
    artifacts: Map<String, Value>,
    notes: Vec<String>,
}

impl Run {
    fn new(cmd: &Command) -> Result<Self, CliError> {
        let common = cmd.common();
        if common.samples == Some(0) {
            return Err(CliError::usage("--samples must be at least 1"));
        }
        let tol = Tolerances::default()
            .with_check_tol(common.tol)
            .map_err(|e| CliError::usage(format!("--tol: {e}")))?;
        Ok(Run {
            seed: common.seed,
            tol,
            reports: Vec::new(),
            artifacts: Map::new(),
            notes: Vec::new(),
        })
    }

    /// Sub-stream `i` of the master seed; stream 0 builds inputs.
    fn stream(&self, i: u64) -> Rng {
        Rng::substream(self.seed, i)
    }

    fn artifact(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(CliError::io)?;
        self.artifacts.insert(key.to_string(), v);
        Ok(())
    }

    fn push(
        &mut self,
        name: &str,
        n: usize,
        r: fpp_core::Result<VerificationReport>,
    ) -> Result<(), CliError> {
        let report = match r {
            Ok(report) => report,
            Err(e) => self.soften(name, n, e)?,
        };
        self.reports.push(report);
        Ok(())
    }

    /// Maps failed preconditions to Infeasible and numerical contradictions
    /// to Fail; malformed input stays an error.
    fn soften(&mut self, name: &str, n: usize, e: Error) -> Result<VerificationReport, CliError> {
        let fail = |label: &str, residual: f64| {
            let mut b = ReportBuilder::new(name, n, self.seed);
            b.record(label, residual);
            b.finish(self.tol.check_tol)
        };
        Ok(match e {
            Error::Stage { stage, source } => return self.soften(stage, n, *source),
            Error::NotAPreserver { residual } => fail("target inference", residual),
            Error::NotUnital { residual } => fail("ψ(I) − I", residual),
            Error::NumericalFailure(msg) | Error::SearchExhausted(msg) => fail(&msg, f64::INFINITY),
            e @ (Error::NotBijective
            | Error::InfeasibleDimension { .. }
            | Error::SingularMatrix
            | Error::ZeroMatrix) => {
                self.notes.push(format!("{name}: {e}"));
                VerificationReport::infeasible(name, n, self.seed)
            }
            e @ (Error::DimensionMismatch(_)
            | Error::InvalidInput(_)
            | Error::DimensionTooLarge { .. }) => return Err(CliError::usage(e)),
        })
    }

    fn finish(mut self, cmd: &Command) -> Result<Document, CliError> {
        if !self.notes.is_empty() {
            let notes = std::mem::take(&mut self.notes);
            self.artifact("notes", notes)?;
        }
        Ok(Document::new(cmd, self.reports, self.artifacts))
    }
}

fn check_dim(name: &str, value: usize, max: usize) -> Result<(), CliError> {
    if value == 0 || value > max {
        return Err(CliError::usage(format!(
            "--{name} must be in 1..={max}, got {value}"
        )));
    }
    Ok(())
}

fn check_rank(name: &str, rank: usize, n: usize) -> Result<(), CliError> {
    if rank > n {
        return Err(CliError::usage(format!(
            "--{name} = {rank} exceeds n = {n}"
        )));
    }
    Ok(())
}

pub fn load_matrix(path: &Path, n: usize, what: &str) -> Result<CMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let m: CMatrix = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    if m.rows() != n || m.cols() != n {
        return Err(CliError::usage(format!(
            "{what} in {} is {}x{}, expected {n}x{n}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

fn rank_matrix(n: usize, r: usize, rng: &mut Rng) -> CMatrix {
    if r == 0 {
        CMatrix::zeros(n, n)
    } else {
        sample_rank(n, r, rng)
    }
}

pub fn execute(cmd: &Command) -> Result<Document, CliError> {
    match cmd {
        Command::Factorize(a) => factorize(cmd, a),
        Command::Prop21(a) => prop21(cmd, a),
        Command::VerifyPreserver(a) => verify_preserver(cmd, a),
        Command::Thm33(a) => thm33(cmd, a),
        Command::Thm41(a) => thm41(cmd, a),
        Command::Hua(a) => hua(cmd, a),
        Command::Pointwise(a) => pointwise(cmd, a),
        Command::Revalidate(_) => Err(CliError::usage("revalidate cannot be nested")),
    }
}

fn factorize(cmd: &Command, a: &FactorizeArgs) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    check_dim("n", a.n, MAX_N)?;
    check_rank("rank-c", a.rank_c, a.n)?;
    let c = match &a.c {
        Some(p) => load_matrix(p, a.n, "C")?,
        None => rank_matrix(a.n, a.rank_c, &mut run.stream(0)),
    };
    run.artifact("C", &c)?;
    match rank_factorize(&c, &run.tol) {
        Ok(f) => {
            let mut b = ReportBuilder::new("rank_factorize", a.n, run.seed);
            b.record("Σ vᵢ⊗fᵢ − C", f.reconstruction_residual(&c));
            b.record(
                "dependent terms",
                if f.is_independent(&run.tol) { 0.0 } else { 1.0 },
            );
            run.reports.push(b.finish(run.tol.check_tol));
            run.artifact("k", f.k())?;
            run.artifact("factorization", &f)?;
        }
        Err(e) => run.push("rank_factorize", a.n, Err(e))?,
    }
    run.finish(cmd)
}

/// Re-records every detail of `r` so several reports merge into one.
fn absorb(into: &mut ReportBuilder, r: &VerificationReport) {
    for d in &r.details {
        into.record(&d.label, d.residual);
    }
}

fn prop21(cmd: &Command, a: &Prop21Args) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    let n = a.n;
    check_dim("n", n, MAX_SUPEROP_N)?;
    check_rank("rank-c", a.rank_c, n)?;
    if let Some(r) = a.rank_q {
        if r == 0 || r >= n {
            return Err(CliError::usage(format!(
                "--rank-q must be in 1..={}",
                n.saturating_sub(1)
            )));
        }
    }
    if n < 2 {
        run.notes
            .push("n = 1 has no nonzero pair with QP = 0".into());
        run.reports.push(VerificationReport::infeasible(
            "construct_certificate",
            n,
            run.seed,
        ));
        return run.finish(cmd);
    }
    let c = match &a.c {
        Some(p) => load_matrix(p, n, "C")?,
        None => rank_matrix(n, a.rank_c, &mut run.stream(0)),
    };
    run.artifact("C", &c)?;

    let instances = a.common.samples.unwrap_or(1);
    let check = run.tol.check_tol;
    let mut four = ReportBuilder::new("four_equations", n, run.seed);
    let mut audit = ReportBuilder::new("certificate_audit", n, run.seed);
    let mut derive = ReportBuilder::new("derive_zero_product", n, run.seed);
    let mut certificates = Vec::new();
    let mut infeasible = None;
    for i in 0..instances as u64 {
        let mut rng = run.stream(1 + i);
        let r = a.rank_q.unwrap_or_else(|| rng.range_inclusive(1, n - 1));
        let (q, p) = sample_zero_product_pair(n, r, &mut rng, &run.tol).map_err(CliError::usage)?;
        let cert = match construct_certificate(&q, &p, &c, &run.tol) {
            Ok(cert) => cert,
            Err(e) => {
                let report = run.soften("construct_certificate", n, e)?;
                if report.verdict == Verdict::Infeasible {
                    infeasible = Some(report);
                } else {
                    run.reports.push(report);
                }
                continue;
            }
        };
        for w in &cert.witnesses {
            let eqs = verify_four_equations(w, &c, &run.tol);
            for (label, r) in FOUR_EQUATION_LABELS.iter().zip(eqs.residuals) {
                four.record(label, r);
            }
        }
        let defects = cert.audit(&run.tol);
        audit.record("defects", defects.len() as f64);
        for d in &defects {
            audit.record(&d.what, d.residual);
        }
        let alpha = rng.nonzero_scalar();
        let u = sample_invertible(n, &mut rng, &run.tol).map_err(CliError::usage)?;
        let phi = conjugation_map(alpha, &u, &run.tol).map_err(CliError::usage)?;
        let d = phi.apply(&c).map_err(CliError::usage)?.scale(alpha);
        match derive_zero_product(&phi, &cert, &d, &run.tol) {
            Ok(rep) => absorb(&mut derive, &rep),
            Err(e) => run.push("derive_zero_product", n, Err(e))?,
        }
        certificates.push(cert);
    }
    if certificates.is_empty() {
        run.reports.extend(infeasible);
    } else {
        run.reports.push(four.finish(check));
        run.reports.push(audit.finish(check));
        run.reports.push(derive.finish(check));
        if let Some(r) = infeasible {
            run.reports.push(r);
        }
        run.artifact("certificates", &certificates)?;
    }
    run.finish(cmd)
}

struct Instance {
    phi: SuperOp,
    c: CMatrix,
    d: CMatrix,
    alpha: C64,
}

/// Builds `(Φ, C, D)` from stream 0. `None` when the family does not
/// exist for this `C`.
fn build_instance(run: &mut Run, a: &PreserverArgs) -> Result<Option<Instance>, CliError> {
    let n = a.n;
    check_dim("n", n, MAX_SUPEROP_N)?;
    let rank_c = a.rank_c.unwrap_or(n);
    check_rank("rank-c", rank_c, n)?;
    let mut rng = run.stream(0);
    let alpha = match a.alpha {
        Some(z) => alpha_scalar(z),
        None => rng.nonzero_scalar(),
    };
    let u = match &a.u {
        Some(p) => {
            let u = load_matrix(p, n, "U")?;
            if !is_invertible(&u, &run.tol).map_err(CliError::usage)? {
                return Err(CliError::usage("U must be invertible"));
            }
            u
        }
        None => sample_invertible(n, &mut rng, &run.tol).map_err(CliError::usage)?,
    };
    let c = match &a.c {
        Some(p) => load_matrix(p, n, "C")?,
        None => rank_matrix(n, rank_c, &mut rng),
    };
    let (phi, d) = match a.family {
        Family::Conj => {
            let phi = conjugation_map(alpha, &u, &run.tol).map_err(CliError::usage)?;
            let d = phi.apply(&c).map_err(CliError::usage)?.scale(alpha);
            (phi, d)
        }
        Family::Tconj => match solve_transpose_constraint(alpha, &u, &c, &run.tol) {
            Ok(d) => {
                let phi =
                    transpose_conjugation_map(alpha, &d, &u, &run.tol).map_err(CliError::usage)?;
                (phi, d)
            }
            Err(Error::SingularMatrix) => {
                run.notes
                    .push("the transpose-conjugation family needs an invertible C".into());
                return Ok(None);
            }
            Err(e) => return Err(CliError::usage(e)),
        },
        Family::Random => (SuperOp::random(n, &mut rng), sample_ginibre(n, &mut rng)),
    };
    let d = match &a.d {
        Some(p) => load_matrix(p, n, "D")?,
        None => d,
    };
    run.artifact("alpha", [alpha.re, alpha.im])?;
    run.artifact("C", &c)?;
    run.artifact("D", &d)?;
    Ok(Some(Instance { phi, c, d, alpha }))
}

fn verify_preserver(cmd: &Command, a: &PreserverArgs) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    let n = a.n;
    let Some(inst) = build_instance(&mut run, a)? else {
        run.reports
            .push(VerificationReport::infeasible("preserves_at", n, run.seed));
        return run.finish(cmd);
    };
    let samples = a.common.samples.unwrap_or(100);
    let tol = run.tol;
    let r = check_preserves_at(
        &inst.phi,
        &inst.c,
        &inst.d,
        samples,
        &mut run.stream(1),
        &tol,
    );
    run.push("preserves_at", n, r)?;
    let zp = check_zero_product_preserving(&inst.phi, samples, &mut run.stream(2), &tol);
    if a.family == Family::Conj {
        run.push("zero_product_preserving", n, zp)?;
    } else {
        // Recorded without a claim: outside the conjugation family the
        // zero-product property is not a consequence.
        let zp = zp.map_err(CliError::usage)?;
        run.artifact("zero_product_empirical", &zp)?;
    }
    let r = check_annihilator_inclusion(&inst.phi, &inst.c, &inst.d, &tol);
    run.push("annihilator_inclusion", n, r)?;
    let r = check_rank_equality(&inst.phi, &inst.c, Some(&inst.d), &mut run.stream(3), &tol);
    run.push("rank_equality", n, r)?;
    run.finish(cmd)
}

fn thm33(cmd: &Command, a: &PreserverArgs) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    let n = a.n;
    let Some(inst) = build_instance(&mut run, a)? else {
        run.reports.push(VerificationReport::infeasible(
            "zero_invertible_dichotomy",
            n,
            run.seed,
        ));
        return run.finish(cmd);
    };
    let tol = run.tol;
    if let Ok(d) = infer_target(&inst.phi, &inst.c, &mut run.stream(1), &tol) {
        run.artifact("D_inferred", &d)?;
    }
    let r = check_theorem33(&inst.phi, &inst.c, &mut run.stream(1), &tol);
    run.push("zero_invertible_dichotomy", n, r)?;
    let samples = a.common.samples.unwrap_or(100);
    let probe = invertibility_probe(&inst.phi, samples, &mut run.stream(2), &tol)
        .map_err(CliError::usage)?;
    run.artifact("invertibility_probe", probe)?;
    run.finish(cmd)
}

fn thm41(cmd: &Command, a: &PreserverArgs) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    let n = a.n;
    let Some(inst) = build_instance(&mut run, a)? else {
        run.reports.push(VerificationReport::infeasible(
            "classification_pipeline",
            n,
            run.seed,
        ));
        return run.finish(cmd);
    };
    let samples = a.common.samples.unwrap_or(100);
    let tol = run.tol;
    match theorem41_pipeline(&inst.phi, &inst.c, samples, &mut run.stream(1), &tol) {
        Ok(rep) => {
            run.reports.extend(rep.stages);
            run.artifact("z", &rep.z)?;
            run.artifact("D_inferred", &rep.d)?;
            run.artifact("class", rep.class)?;
            run.artifact("margin", rep.class.margin().min(f64::MAX))?;
            if a.family == Family::Tconj {
                let target = inst.d.scale(inst.alpha);
                let gap = relative(rep.z.distance(&target), target.frobenius_norm());
                run.artifact("z_minus_alpha_d", gap)?;
            }
        }
        Err(e) => run.push("classification_pipeline", n, Err(e))?,
    }
    run.finish(cmd)
}

fn hua(cmd: &Command, a: &HuaArgs) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    check_dim("n", a.n, MAX_N)?;
    let samples = a.common.samples.unwrap_or(100);
    let tol = run.tol;
    let r = check_hua(a.n, samples, &mut run.stream(1), &tol);
    run.push("hua_identity", a.n, r)?;
    run.finish(cmd)
}

fn pointwise(cmd: &Command, a: &PointwiseArgs) -> Result<Document, CliError> {
    let mut run = Run::new(cmd)?;
    let m = a.m;
    check_dim("m", m, MAX_M)?;
    if a.zeros > m {
        return Err(CliError::usage(format!(
            "--zeros = {} exceeds m = {m}",
            a.zeros
        )));
    }
    let tol = run.tol;
    let mut rng = run.stream(0);
    let perm = random_permutation(m, &mut rng);
    let phi = match a.map {
        PointwiseKind::Halving => composition_map(&halving_index_map(m)),
        PointwiseKind::Permutation => permutation_map(&perm),
        PointwiseKind::Weighted => {
            let w =
                PointwiseElement::random_invertible(m, &mut rng, &tol).map_err(CliError::usage)?;
            permutation_map(&perm).and_then(|p| p.weighted(&w))
        }
    }
    .map_err(CliError::usage)?;
    let zero_at = random_permutation(m, &mut rng);
    let mut values: Vec<C64> = (0..m).map(|_| rng.complex_gaussian()).collect();
    for &i in &zero_at[..a.zeros] {
        values[i] = C64::new(0.0, 0.0);
    }
    let c = PointwiseElement::new(values).map_err(CliError::usage)?;
    run.artifact("c", &c)?;
    run.artifact("kernel_dim", phi.kernel_dim(&tol))?;
    run.artifact("injective", phi.is_injective(&tol))?;
    run.artifact("surjective", phi.is_surjective(&tol))?;

    if a.map != PointwiseKind::Weighted {
        let mut b = ReportBuilder::new("multiplicativity", m, run.seed);
        b.record("Φ(eᵢeⱼ) − Φ(eᵢ)Φ(eⱼ)", phi.multiplicativity_residual());
        run.reports.push(b.finish(tol.check_tol));
    }
    match infer_target_pointwise(&phi, &c, &mut run.stream(1), &tol) {
        Ok(d) => {
            run.artifact("d", &d)?;
            let r = check_annihilator_inclusion_pointwise(&phi, &c, &d, &tol);
            run.push("annihilator_inclusion_pointwise", m, r)?;
        }
        Err(e) => run.push("infer_target", m, Err(e))?,
    }
    if phi.is_injective(&tol) {
        let r = check_theorem33_pointwise(&phi, &c, &mut run.stream(1), &tol);
        run.push("zero_invertible_dichotomy_pointwise", m, r)?;
    } else {
        run.notes.push(format!(
            "zero_invertible_dichotomy_pointwise skipped: map has kernel dimension {}",
            phi.kernel_dim(&tol)
        ));
    }
    run.finish(cmd)
}
