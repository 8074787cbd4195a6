//! Checks for reflection-symmetric data whose curvature decreases away from
//! the middle parallel.
//!
//! For such data the maximum of R sits on the middle parallel, whose length
//! under the normalised flow obeys `d log L/dt = (r − R_max)/2`, and
//! `R_max' ≤ R_max(R_max − r)` by the maximum principle.

use super::{BoundCheck, Verdict};
use crate::geometry::{scalar_curvature, FlowState};
use crate::normalization::NormalizedTrace;
use crate::quadrature::cumulative_trapezoid;
use crate::scenarios::{is_decreasing_from_middle, is_reflection_symmetric};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricTolerances {
    /// Relative slack (to `max|R|`) for "the maximum is at the middle node"
    /// and for the monotone scan.
    pub profile_rel: f64,
    /// Relative tolerance on the middle-parallel identity.
    pub identity_rel: f64,
    /// Absolute slack on the discrete inequality for `R_max`.
    pub inequality_abs: f64,
    /// Late increments of `∫(R_max − r)` must stay below this fraction of the
    /// early total.
    pub late_fraction: f64,
}

impl Default for SymmetricTolerances {
    fn default() -> Self {
        SymmetricTolerances { profile_rel: 1e-10, identity_rel: 1e-3, inequality_abs: 1e-6, late_fraction: 0.1 }
    }
}

const NAMES: [&str; 5] =
    ["middle_argmax", "decreasing_from_middle", "middle_parallel_identity", "rmax_inequality", "rmax_excess_integral"];

/// Runs the five checks on a run with a state stored at every record. If the
/// initial state is not symmetric and monotone every verdict is
/// not-applicable.
pub fn check_decreasing_from_middle(
    nt: &NormalizedTrace,
    states: &[FlowState],
    tol: &SymmetricTolerances,
) -> Vec<BoundCheck> {
    let applicable = states.first().is_some_and(|s| {
        let r = scalar_curvature(s);
        is_reflection_symmetric(&r, 1e-12) && is_decreasing_from_middle(&r, tol.profile_rel)
    }) && states.len() == nt.len();
    if !applicable {
        return NAMES
            .iter()
            .map(|n| {
                let mut c = BoundCheck::new(*n);
                c.verdict = Verdict::NotApplicable;
                c.note("initial data is not reflection symmetric with curvature decreasing from the middle");
                c
            })
            .collect();
    }
    let whole = Some((0, states.len() - 1));

    let mut argmax = BoundCheck::new(NAMES[0]);
    let mut mono = BoundCheck::new(NAMES[1]);
    argmax.worst_margin = f64::INFINITY;
    mono.worst_margin = f64::INFINITY;
    let (mut bad_argmax, mut bad_mono) = (0usize, 0usize);
    for (k, s) in states.iter().enumerate() {
        let r = scalar_curvature(s);
        let n = r.len() - 1;
        let mid = n / 2;
        // Margins are relative to max |R| at the record.
        let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let a = (r[mid] - r.max()) / scale + tol.profile_rel;
        let mut m = f64::INFINITY;
        for i in mid..n {
            m = m.min((r[i] - r[i + 1]) / scale + tol.profile_rel);
        }
        for i in 1..=mid {
            m = m.min((r[i] - r[i - 1]) / scale + tol.profile_rel);
        }
        if a < 0.0 {
            if bad_argmax == 0 {
                argmax.note(format!("first violated at record {k}, t = {:.6e}", nt.records[k].t));
            }
            bad_argmax += 1;
        }
        if m < 0.0 {
            if bad_mono == 0 {
                mono.note(format!("first violated at record {k}, t = {:.6e}", nt.records[k].t));
            }
            bad_mono += 1;
        }
        argmax.worst_margin = argmax.worst_margin.min(a);
        mono.worst_margin = mono.worst_margin.min(m);
    }
    // The constant is the number of records at which the property fails.
    argmax.constant_found = bad_argmax as f64;
    mono.constant_found = bad_mono as f64;
    argmax.window = whole;
    mono.window = whole;
    argmax.decide();
    mono.decide();

    let mut ident = BoundCheck::new(NAMES[2]);
    let res = middle_parallel_identity(nt);
    let l0 = nt.records[0].obs.len_mid;
    ident.constant_found = res;
    ident.worst_margin = tol.identity_rel - res / l0;
    ident.window = whole;
    ident.decide();

    let mut ineq = BoundCheck::new(NAMES[3]);
    let t = nt.t();
    let rmax = nt.column(|r| r.r_max());
    let rr = nt.column(|r| r.r);
    let bound: Vec<f64> = rmax.iter().zip(&rr).map(|(m, r)| m * (m - r)).collect();
    let mut worst = f64::INFINITY;
    let mut excess_max = f64::NEG_INFINITY;
    for j in 0..t.len().saturating_sub(1) {
        let d = (rmax[j + 1] - rmax[j]) / (t[j + 1] - t[j]);
        let excess = d - bound[j].max(bound[j + 1]);
        excess_max = excess_max.max(excess);
        worst = worst.min(tol.inequality_abs - excess);
    }
    ineq.constant_found = excess_max;
    ineq.worst_margin = worst;
    ineq.window = whole;
    ineq.decide();

    let mut integ = BoundCheck::new(NAMES[4]);
    let gap: Vec<f64> = rmax.iter().zip(&rr).map(|(m, r)| m - r).collect();
    let cum = cumulative_trapezoid(&t, &gap);
    let x: Vec<f64> = t.iter().map(|v| v.ln_1p()).collect();
    let split_x = 0.5 * x[x.len() - 1];
    let split = x.iter().position(|&v| v >= split_x).unwrap_or(0);
    let total = *cum.last().unwrap();
    let early = cum[split];
    let late = total - early;
    integ.constant_found = total;
    integ.detail("early", early);
    integ.detail("late", late);
    integ.worst_margin = tol.late_fraction * early - late;
    integ.window = whole;
    integ.decide();

    vec![argmax, mono, ident, ineq, integ]
}

/// Largest `|L_mid(t) − L₀ exp(½∫₀ᵗ (r − R_max) dτ)|` over the records.
pub fn middle_parallel_identity(nt: &NormalizedTrace) -> f64 {
    middle_parallel_identity_with(nt, 0.5)
}

/// As [`middle_parallel_identity`] with a general factor in front of the
/// integral.
pub fn middle_parallel_identity_with(nt: &NormalizedTrace, factor: f64) -> f64 {
    if nt.is_empty() {
        return 0.0;
    }
    let t = nt.t();
    let g: Vec<f64> = nt.records.iter().map(|r| r.r - r.r_max()).collect();
    let cum = cumulative_trapezoid(&t, &g);
    let l0 = nt.records[0].obs.len_mid;
    nt.records
        .iter()
        .zip(&cum)
        .map(|(r, i)| (r.obs.len_mid - l0 * (factor * i).exp()).abs())
        .fold(0.0, f64::max)
}
