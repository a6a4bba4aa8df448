use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Infeasible,
}

impl Verdict {
    /// `Pass` when every verdict passes, `Infeasible` if any is infeasible and
    /// none failed, `Fail` otherwise.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Infeasible => out = Verdict::Infeasible,
                Verdict::Pass => {}
            }
        }
        out
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "Pass",
            Verdict::Fail => "Fail",
            Verdict::Infeasible => "Infeasible",
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Pass" => Ok(Verdict::Pass),
            "Fail" => Ok(Verdict::Fail),
            "Infeasible" => Ok(Verdict::Infeasible),
            other => Err(format!("unknown verdict `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detail {
    pub label: String,
    pub residual: f64,
}

/// Outcome of one property check.
///
/// `details` holds the maximum residual per sample label, in first-seen
/// order, so `max_residual` is always the largest detail residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub name: String,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub verdict: Verdict,
    pub details: Vec<Detail>,
}

impl VerificationReport {
    pub fn infeasible(name: &str, n: usize, seed: u64) -> Self {
        VerificationReport {
            name: name.to_string(),
            n,
            seed,
            samples: 0,
            max_residual: 0.0,
            mean_residual: 0.0,
            verdict: Verdict::Infeasible,
            details: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Re-derives the verdict from the stored residuals; `None` for
    /// infeasible reports, which carry no residuals.
    pub fn recomputed_verdict(&self, tol: f64) -> Option<Verdict> {
        match self.verdict {
            Verdict::Infeasible => None,
            _ => Some(verdict_for(self.max_residual, tol)),
        }
    }

    /// Internal consistency: verdict matches `max_residual` against `tol`
    /// and `max_residual` equals the largest detail.
    pub fn is_consistent(&self, tol: f64) -> bool {
        if self.verdict == Verdict::Infeasible {
            return true;
        }
        let detail_max = self
            .details
            .iter()
            .map(|d| d.residual)
            .fold(0.0_f64, f64::max);
        let max_ok = self.details.is_empty() || detail_max == self.max_residual;
        max_ok && self.recomputed_verdict(tol) == Some(self.verdict)
    }
}

pub(crate) fn verdict_for(max_residual: f64, tol: f64) -> Verdict {
    // NaN residuals fail.
    if max_residual <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Accumulates labelled residuals into a [`VerificationReport`].
#[derive(Debug)]
pub struct ReportBuilder {
    name: String,
    n: usize,
    seed: u64,
    count: usize,
    sum: f64,
    max: f64,
    details: Vec<Detail>,
}

impl ReportBuilder {
    pub fn new(name: &str, n: usize, seed: u64) -> Self {
        ReportBuilder {
            name: name.to_string(),
            n,
            seed,
            count: 0,
            sum: 0.0,
            max: 0.0,
            details: Vec::new(),
        }
    }

    pub fn record(&mut self, label: &str, residual: f64) -> &mut Self {
        // NaN is stored as +inf so that it dominates the maximum.
        let r = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        self.count += 1;
        self.sum += r;
        self.max = self.max.max(r);
        match self.details.iter_mut().find(|d| d.label == label) {
            Some(d) => d.residual = d.residual.max(r),
            None => self.details.push(Detail {
                label: label.to_string(),
                residual: r,
            }),
        }
        self
    }

    pub fn finish(self, tol: f64) -> VerificationReport {
        let mean = if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        };
        // Infinite residuals cannot be written as JSON numbers.
        let clamp = |x: f64| if x.is_finite() { x } else { f64::MAX };
        let max_residual = clamp(self.max);
        VerificationReport {
            name: self.name,
            n: self.n,
            seed: self.seed,
            samples: self.count,
            max_residual,
            mean_residual: clamp(mean),
            verdict: verdict_for(max_residual, tol),
            details: self
                .details
                .into_iter()
                .map(|d| Detail {
                    label: d.label,
                    residual: clamp(d.residual),
                })
                .collect(),
        }
    }
}
