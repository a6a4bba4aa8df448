use fpp_core::matrix_core::Tolerances;
use fpp_core::verify::{ReportBuilder, VerificationReport};
use fpp_core::zp_factory::FactorizationCertificate;
use serde_json::Map;

use crate::args::{Command, RevalidateArgs};
use crate::commands::execute;
use crate::document::{parse_report, Document, ParsedReport};
use crate::CliError;

/// Re-runs the configuration recorded in a report and checks that the
/// verdict and the timestamp-free bytes are reproduced. JSON reports are
/// also checked for internal consistency, and any certificates in them are
/// audited independently of the re-run.
pub fn revalidate(cmd: &Command, a: &RevalidateArgs) -> Result<Document, CliError> {
    let text = std::fs::read_to_string(&a.report)
        .map_err(|e| CliError::io(format!("{}: {e}", a.report.display())))?;
    let parsed = parse_report(&text)?;
    let (config, recorded_verdict, format) = match &parsed {
        ParsedReport::Json(doc) => (&doc.config, doc.verdict, doc.config.common().format),
        ParsedReport::Annotated {
            config,
            verdict,
            format,
            ..
        } => (config, *verdict, *format),
    };
    if matches!(config, Command::Revalidate(_)) {
        return Err(CliError::usage("cannot revalidate a revalidation report"));
    }
    let tol = Tolerances::default()
        .with_check_tol(a.common.tol)
        .map_err(|e| CliError::usage(format!("--tol: {e}")))?;
    let rerun = execute(config)?;
    let rerun_bytes = rerun.render(format)?;
    let recorded_bytes = match &parsed {
        ParsedReport::Json(doc) => {
            let mut doc = doc.clone();
            doc.timestamp = None;
            doc.render(format)?
        }
        ParsedReport::Annotated {
            without_timestamp, ..
        } => without_timestamp.clone(),
    };

    let mut b = ReportBuilder::new("revalidate", 0, a.common.seed);
    b.record(
        "verdict mismatch",
        (recorded_verdict != rerun.verdict) as u8 as f64,
    );
    b.record("bytes differ", (recorded_bytes != rerun_bytes) as u8 as f64);
    if let ParsedReport::Json(doc) = &parsed {
        let run_tol = config.common().tol;
        let inconsistent = doc
            .reports
            .iter()
            .filter(|r| !r.is_consistent(run_tol))
            .count();
        b.record("inconsistent reports", inconsistent as f64);
        let combined = fpp_core::verify::Verdict::combine(doc.reports.iter().map(|r| r.verdict));
        let expected = if doc.reports.is_empty() {
            fpp_core::verify::Verdict::Infeasible
        } else {
            combined
        };
        b.record("document verdict", (expected != doc.verdict) as u8 as f64);
        if let Some(certs) = doc.artifacts.get("certificates") {
            let certs: Vec<FactorizationCertificate> = serde_json::from_value(certs.clone())
                .map_err(|e| CliError::usage(format!("certificates: {e}")))?;
            let cert_tol = Tolerances::default()
                .with_check_tol(run_tol)
                .map_err(CliError::usage)?;
            for cert in &certs {
                let defects = cert.audit(&cert_tol);
                b.record("certificate defects", defects.len() as f64);
            }
        }
    }
    let report: VerificationReport = b.finish(tol.check_tol);
    let mut artifacts = Map::new();
    artifacts.insert(
        "revalidated".into(),
        serde_json::Value::String(config.name().into()),
    );
    Ok(Document::new(cmd, vec![report], artifacts))
}
