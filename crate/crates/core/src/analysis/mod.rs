//! Verdicts on the long-time behaviour of a run.
//!
//! Asymptotic checks look at the tail of a trace only: the first 10% of the
//! records are discarded as transient and the "late window" is the upper half
//! of what remains, measured in `log t̃` (unnormalised) or `log(1 + t)`
//! (normalised). The constants in the bounds are existential, so each check
//! estimates its constant and reports it rather than assuming a value.

mod asymptotic;
mod fit;
mod lemmas;
mod potential;
mod symmetric;

use std::fmt;

pub use asymptotic::{
    check_blowup, check_nonexponential, check_total_curvature_normalized, check_total_curvature_unnormalized,
    log_derivative_identity, AsymptoticTolerances, Windows,
};
pub use fit::{fit_rate, FitModel, FitResult};
pub use lemmas::{check_area_bounds, check_parallel_bounds, lemma_constants, LemmaConstants};
pub use potential::{
    boundary_average_curvature, h_field, h_monitor, potential_residual, solve_potential, PotentialSolution,
};
pub use symmetric::{
    check_decreasing_from_middle, middle_parallel_identity, middle_parallel_identity_with, SymmetricTolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough data to decide (short span, short window).
    Inconclusive,
    /// The run does not satisfy the assumptions of the statement being checked.
    HypothesesNotMet,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::HypothesesNotMet => "hypotheses-not-met",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub verdict: Verdict,
    pub constant_found: f64,
    /// Smallest slack of the inequality being checked; negative means violated.
    pub worst_margin: f64,
    /// Inclusive record range the verdict is based on.
    pub window: Option<(usize, usize)>,
    /// Named auxiliary measurements.
    pub details: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>) -> Self {
        BoundCheck {
            name: name.into(),
            verdict: Verdict::Inconclusive,
            constant_found: f64::NAN,
            worst_margin: f64::NAN,
            window: None,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn detail(&mut self, key: impl Into<String>, v: f64) {
        self.details.push((key.into(), v));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Sets the verdict from the margin: pass iff `worst_margin >= 0`.
    pub(crate) fn decide(&mut self) {
        self.verdict = if self.worst_margin >= 0.0 { Verdict::Pass } else { Verdict::Fail };
    }

    /// `name verdict constant margin`, whitespace separated.
    pub fn summary_line(&self) -> String {
        format!("{} {} {:.9e} {:.9e}", self.name, self.verdict, self.constant_found, self.worst_margin)
    }
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<34} {:<18} constant {:>14.6e}  margin {:>14.6e}", self.name, self.verdict, self.constant_found, self.worst_margin)?;
        if let Some((a, b)) = self.window {
            write!(f, "  window [{a}, {b}]")?;
        }
        for (k, v) in &self.details {
            write!(f, "\n    {k} = {v:.6e}")?;
        }
        for n in &self.notes {
            write!(f, "\n    note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
