//! Area-normalised view of an unnormalised trace.
//!
//! With `φ = A_target/Ã` the metric `g = φ g̃` has area `A_target`, and with
//! `t = ∫ φ dt̃` it solves the normalised flow `∂g/∂t = (r − R) g`. All
//! observables follow from the unnormalised ones by the homothety rules
//! `R = R̃/φ`, `l = √φ·l̃`, `k = k̃/√φ`; total curvature is unchanged.

use crate::analysis::{BoundCheck, Verdict};
use crate::error::NormalizationError;
use crate::geometry::{scalar_curvature, FlowState};
use crate::quadrature::cumulative_trapezoid;
use crate::solver::{FlowTrace, TraceRecord};

/// Scale-dependent observables of a single metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub area: f64,
    pub total_r: f64,
    pub r_max: f64,
    pub r_min: f64,
    pub total_r2: f64,
    pub len_minus: f64,
    pub len_plus: f64,
    pub len_mid: f64,
    pub k_minus: f64,
    pub k_plus: f64,
}

impl Observables {
    pub fn of(rec: &TraceRecord) -> Self {
        Observables {
            area: rec.area,
            total_r: rec.total_r,
            r_max: rec.r_max,
            r_min: rec.r_min,
            total_r2: rec.total_r2,
            len_minus: rec.len_minus,
            len_plus: rec.len_plus,
            len_mid: rec.len_mid,
            k_minus: rec.k_minus,
            k_plus: rec.k_plus,
        }
    }

    /// Observables of the metric multiplied by `phi`.
    pub fn scaled(&self, phi: f64) -> Self {
        let s = phi.sqrt();
        Observables {
            area: self.area * phi,
            total_r: self.total_r,
            r_max: self.r_max / phi,
            r_min: self.r_min / phi,
            total_r2: self.total_r2 / phi,
            len_minus: self.len_minus * s,
            len_plus: self.len_plus * s,
            len_mid: self.len_mid * s,
            k_minus: self.k_minus / s,
            k_plus: self.k_plus / s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedRecord {
    pub t: f64,
    pub phi: f64,
    /// Average scalar curvature `∫R dA / A_target`.
    pub r: f64,
    pub obs: Observables,
}

impl NormalizedRecord {
    pub fn r_max(&self) -> f64 {
        self.obs.r_max
    }
    pub fn r_min(&self) -> f64 {
        self.obs.r_min
    }
    pub fn min_boundary_length(&self) -> f64 {
        self.obs.len_minus.min(self.obs.len_plus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTrace {
    pub a_target: f64,
    pub records: Vec<NormalizedRecord>,
}

impl NormalizedTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
    pub fn t(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
    pub fn column(&self, f: impl Fn(&NormalizedRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}

fn check_target(a_target: f64) -> Result<(), NormalizationError> {
    if a_target.is_finite() && a_target > 0.0 {
        Ok(())
    } else {
        Err(NormalizationError::BadTargetArea(a_target))
    }
}

fn check_trace(trace: &FlowTrace) -> Result<(), NormalizationError> {
    for (i, r) in trace.records.iter().enumerate() {
        if !(r.area > 0.0 && r.area.is_finite()) {
            return Err(NormalizationError::MalformedTrace(format!("record {i} has area {}", r.area)));
        }
        if i > 0 && !(r.t_tilde > trace.records[i - 1].t_tilde) {
            return Err(NormalizationError::MalformedTrace(format!(
                "t_tilde not increasing at record {i} ({} after {})",
                r.t_tilde,
                trace.records[i - 1].t_tilde
            )));
        }
    }
    Ok(())
}

/// Normalised trace: `t` by the trapezoid rule for `∫ φ dt̃` over the records.
pub fn normalize_trace(trace: &FlowTrace, a_target: f64) -> Result<NormalizedTrace, NormalizationError> {
    check_target(a_target)?;
    check_trace(trace)?;
    let tt = trace.t_tilde();
    let phi: Vec<f64> = trace.records.iter().map(|r| a_target / r.area).collect();
    let t = cumulative_trapezoid(&tt, &phi);
    let records = trace
        .records
        .iter()
        .zip(phi.iter().zip(&t))
        .map(|(rec, (&phi, &t))| {
            let obs = Observables::of(rec).scaled(phi);
            NormalizedRecord { t, phi, r: rec.total_r / a_target, obs }
        })
        .collect();
    Ok(NormalizedTrace { a_target, records })
}

/// Unnormalised observables recovered from a normalised record.
pub fn denormalize(rec: &NormalizedRecord) -> Observables {
    rec.obs.scaled(1.0 / rec.phi)
}

/// Checks `log(1 + t(t̃)) ≤ t̃·(1 + tol)` at every record, with `t` the
/// normalised time for area `a_target`. The margin reported is the smallest
/// value of `t̃(1 + tol) − log(1 + t)`.
pub fn time_map_bounds_check(trace: &FlowTrace, a_target: f64, tol: f64) -> Result<BoundCheck, NormalizationError> {
    let nt = normalize_trace(trace, a_target)?;
    let tt = trace.t_tilde();
    let mut check = BoundCheck::new("time_map");
    let first = tt.iter().position(|&t| t > 0.0);
    let span = match (first, tt.last()) {
        (Some(i), Some(&last)) => last / tt[i],
        _ => 0.0,
    };
    let mut worst = f64::INFINITY;
    let mut worst_at = 0;
    for (i, (tt, r)) in tt.iter().zip(&nt.records).enumerate() {
        let m = tt * (1.0 + tol) - r.t.ln_1p();
        if m < worst {
            worst = m;
            worst_at = i;
        }
    }
    check.worst_margin = worst;
    check.window = Some((0, tt.len().saturating_sub(1)));
    check.constant_found = worst;
    if span < 10.0 {
        check.verdict = if worst < 0.0 { Verdict::Fail } else { Verdict::Inconclusive };
        check.note(format!("t_tilde spans a factor {span:.3} < 10"));
    } else {
        check.verdict = if worst >= 0.0 { Verdict::Pass } else { Verdict::Fail };
    }
    if worst < 0.0 {
        check.note(format!(
            "violated at record {worst_at}: t_tilde = {:.6e}, t = {:.6e}",
            trace.records[worst_at].t_tilde, nt.records[worst_at].t
        ));
    }
    Ok(check)
}

/// Largest deviation, over nodes and records, between the normalised conformal
/// factor `g(t)/g(0) = (φ/φ₀)e^{2(w − w₀)}` and `exp ∫₀ᵗ (r − R) dτ`, with the
/// time integral taken by the trapezoid rule over the records.
pub fn conformal_factor_residual(ntrace: &NormalizedTrace, states: &[FlowState]) -> Result<f64, NormalizationError> {
    if states.len() != ntrace.len() {
        return Err(NormalizationError::MalformedTrace(format!(
            "{} states for {} records",
            states.len(),
            ntrace.len()
        )));
    }
    let Some(first) = states.first() else { return Ok(0.0) };
    let w0 = first.w().to_vec();
    let phi0 = ntrace.records[0].phi;
    let mut integral = vec![0.0; w0.len()];
    let mut prev: Option<Vec<f64>> = None;
    let mut worst = 0.0f64;
    for (k, (state, rec)) in states.iter().zip(&ntrace.records).enumerate() {
        let growth: Vec<f64> = scalar_curvature(state).iter().map(|r| rec.r - r / rec.phi).collect();
        if let Some(p) = &prev {
            let dt = rec.t - ntrace.records[k - 1].t;
            for ((acc, a), b) in integral.iter_mut().zip(p).zip(&growth) {
                *acc += 0.5 * dt * (a + b);
            }
        }
        for ((w, w0), acc) in state.w().iter().zip(&w0).zip(&integral) {
            let u = rec.phi / phi0 * (2.0 * (w - w0)).exp();
            worst = worst.max((u - acc.exp()).abs());
        }
        prev = Some(growth);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
