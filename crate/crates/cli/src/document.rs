use std::fmt::Write as _;

use fpp_core::verify::{Verdict, VerificationReport};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::{Command, Format};
use crate::CliError;

/// Everything one run produces. `artifacts` is keyed and ordered by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub command: String,
    pub config: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub verdict: Verdict,
    pub reports: Vec<VerificationReport>,
    pub artifacts: Map<String, Value>,
}

impl Document {
    pub fn new(
        config: &Command,
        reports: Vec<VerificationReport>,
        artifacts: Map<String, Value>,
    ) -> Self {
        let verdict = if reports.is_empty() {
            Verdict::Infeasible
        } else {
            Verdict::combine(reports.iter().map(|r| r.verdict))
        };
        Document {
            command: config.name().to_string(),
            config: config.clone(),
            timestamp: None,
            verdict,
            reports,
            artifacts,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Infeasible => 2,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(CliError::io)?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.render_csv(),
            Format::Text => Ok(self.render_text()),
        }
    }

    fn header(&self) -> Result<String, CliError> {
        let mut h = format!(
            "# config: {}\n# verdict: {}\n",
            serde_json::to_string(&self.config).map_err(CliError::io)?,
            self.verdict.as_str()
        );
        if let Some(t) = self.timestamp {
            let _ = writeln!(h, "# timestamp: {t}");
        }
        Ok(h)
    }

    fn render_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::io(e);
        w.write_record([
            "report",
            "n",
            "seed",
            "samples",
            "max_residual",
            "mean_residual",
            "verdict",
            "label",
            "residual",
        ])
        .map_err(io)?;
        for r in &self.reports {
            let base = [
                r.name.clone(),
                r.n.to_string(),
                r.seed.to_string(),
                r.samples.to_string(),
                format!("{:e}", r.max_residual),
                format!("{:e}", r.mean_residual),
                r.verdict.as_str().to_string(),
            ];
            if r.details.is_empty() {
                w.write_record(base.iter().map(String::as_str).chain(["", ""]))
                    .map_err(io)?;
            }
            for d in &r.details {
                let residual = format!("{:e}", d.residual);
                w.write_record(
                    base.iter()
                        .map(String::as_str)
                        .chain([d.label.as_str(), residual.as_str()]),
                )
                .map_err(io)?;
            }
        }
        let body = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
        let body = String::from_utf8(body).map_err(CliError::io)?;
        Ok(self.header()? + &body)
    }

    fn render_text(&self) -> String {
        let mut s = self.header().unwrap_or_default();
        for r in &self.reports {
            let _ = writeln!(
                s,
                "{}: {} max residual {:e}, mean {:e}, {} samples",
                r.name,
                r.verdict.as_str(),
                r.max_residual,
                r.mean_residual,
                r.samples
            );
            for d in &r.details {
                let _ = writeln!(s, "  {}: {:e}", d.label, d.residual);
            }
        }
        for (k, v) in &self.artifacts {
            if k == "notes" {
                for note in v.as_array().into_iter().flatten() {
                    let _ = writeln!(s, "note: {}", note.as_str().unwrap_or_default());
                }
            } else if !(v.is_object() || v.is_array()) {
                let _ = writeln!(s, "{k}: {v}");
            }
        }
        s
    }
}

/// A report whose header identifies the configuration: JSON documents, or
/// CSV / text with `# config:` and `# verdict:` comment lines.
#[derive(Debug)]
pub enum ParsedReport {
    Json(Document),
    Annotated {
        format: Format,
        config: Command,
        verdict: Verdict,
        /// Body with the timestamp line removed.
        without_timestamp: String,
    },
}

pub fn parse_report(text: &str) -> Result<ParsedReport, CliError> {
    if text.trim_start().starts_with('{') {
        let doc: Document = serde_json::from_str(text)
            .map_err(|e| CliError::usage(format!("not a report document: {e}")))?;
        return Ok(ParsedReport::Json(doc));
    }
    let mut lines = text.lines();
    let config = lines
        .next()
        .and_then(|l| l.strip_prefix("# config: "))
        .ok_or_else(|| CliError::usage("missing `# config:` header line"))?;
    let config: Command = serde_json::from_str(config)
        .map_err(|e| CliError::usage(format!("bad config header: {e}")))?;
    let verdict = lines
        .next()
        .and_then(|l| l.strip_prefix("# verdict: "))
        .ok_or_else(|| CliError::usage("missing `# verdict:` header line"))?
        .parse()
        .map_err(CliError::usage)?;
    let format = config.common().format;
    if format == Format::Json {
        return Err(CliError::usage("annotated report claims JSON format"));
    }
    let without_timestamp: String = text
        .split_inclusive('\n')
        .filter(|l| !l.starts_with("# timestamp: "))
        .collect();
    Ok(ParsedReport::Annotated {
        format,
        config,
        verdict,
        without_timestamp,
    })
}
