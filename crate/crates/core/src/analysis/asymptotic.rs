use std::ops::Range;

use super::fit::{fit_rate, FitModel, MIN_WINDOW};
use super::{BoundCheck, Verdict};
use crate::normalization::NormalizedTrace;
use crate::scenarios::MinLocation;
use crate::solver::FlowTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTolerances {
    /// Admissible range of the fitted power-law exponent of `∫R̃ dÃ`.
    pub exponent_range: (f64, f64),
    /// Minimum ratio between the last and first retained abscissa
    /// (`t̃` or `1 + t`).
    pub min_span: f64,
    /// Relative slack on the constant 2 in `R_max ≥ 2/(t + c)`.
    pub tol_rate: f64,
    /// Largest allowed ratio of late-window to mid-window maxima of a product
    /// that should stay bounded.
    pub growth_factor: f64,
    /// Required ratio of exponential- to power-fit residual.
    pub residual_ratio: f64,
    /// Fraction of records whose minimum of R must sit on the boundary.
    pub boundary_fraction: f64,
    /// Declared lower bound for the normalised boundary length (must be
    /// exceeded, and the measured floor must be positive).
    pub length_floor: f64,
}

impl Default for AsymptoticTolerances {
    fn default() -> Self {
        AsymptoticTolerances {
            exponent_range: (-1.3, -0.7),
            min_span: 100.0,
            tol_rate: 0.25,
            growth_factor: 1.5,
            residual_ratio: 3.0,
            boundary_fraction: 0.95,
            length_floor: 0.0,
        }
    }
}

/// Index ranges used by the asymptotic checks, computed from a monotone
/// abscissa `x` (`log t̃` or `log(1+t)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Windows {
    /// Records after the initial 10% are dropped.
    pub kept: Range<usize>,
    /// Upper half of the kept `x` range.
    pub late: Range<usize>,
    /// Second quarter of the kept `x` range.
    pub mid: Range<usize>,
    /// `exp(x_last − x_first)` over the kept records.
    pub span: f64,
}

impl Windows {
    pub fn new(x: &[f64]) -> Self {
        let len = x.len();
        let start = len.div_ceil(10);
        if start >= len {
            return Windows { kept: len..len, late: len..len, mid: len..len, span: 1.0 };
        }
        let (x0, x1) = (x[start], x[len - 1]);
        let d = x1 - x0;
        let first_at = |v: f64| (start..len).find(|&i| x[i] >= v).unwrap_or(len);
        let late = first_at(x0 + 0.5 * d)..len;
        let mid = first_at(x0 + 0.25 * d)..late.start;
        Windows { kept: start..len, late, mid, span: d.exp() }
    }
}

fn window_pair(r: &Range<usize>) -> Option<(usize, usize)> {
    if r.is_empty() {
        None
    } else {
        Some((r.start, r.end - 1))
    }
}

fn sup(v: &[f64], r: Range<usize>) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, r.start);
    for i in r {
        if v[i] > best.0 {
            best = (v[i], i);
        }
    }
    best
}

/// The bound holds with constant zero when the series vanishes on the kept records.
fn vanishing(c: &mut BoundCheck, y: &[f64], kept: &Range<usize>) -> bool {
    if kept.is_empty() || y[kept.clone()].iter().any(|v| *v != 0.0) {
        return false;
    }
    c.constant_found = 0.0;
    c.worst_margin = 0.0;
    c.verdict = Verdict::Pass;
    c.note("total curvature vanishes; the bound holds with constant 0");
    true
}

fn inf(v: &[f64], r: Range<usize>) -> f64 {
    r.map(|i| v[i]).fold(f64::INFINITY, f64::min)
}

/// `∫R̃ dÃ ≤ c/t̃`: on the late window the product `t̃·∫R̃ dÃ` must peak in the
/// first half and the fitted power-law exponent must lie in the admissible
/// range. The constant reported is the supremum of the product.
pub fn check_total_curvature_unnormalized(trace: &FlowTrace, tol: &AsymptoticTolerances) -> BoundCheck {
    let mut c = BoundCheck::new("total_curvature_unnormalized");
    let t = trace.t_tilde();
    let y = trace.column(|r| r.total_r);
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let w = Windows::new(&x);
    c.window = window_pair(&w.late);
    c.detail("span", w.span);
    if vanishing(&mut c, &y, &w.kept) {
        return c;
    }
    if w.late.len() < MIN_WINDOW {
        c.note(format!("late window has {} records", w.late.len()));
        return c;
    }
    let product: Vec<f64> = t.iter().zip(&y).map(|(a, b)| a * b).collect();
    let (s, at) = sup(&product, w.late.clone());
    c.constant_found = s;
    let first_half = at < w.late.start + w.late.len() / 2;
    c.detail("sup_at_record", at as f64);
    let fit = match fit_rate(&t, &y, FitModel::Power, w.late.clone()) {
        Ok(f) => f,
        Err(e) => {
            c.note(format!("power fit failed: {e}"));
            c.verdict = Verdict::Fail;
            return c;
        }
    };
    c.detail("exponent", fit.rate);
    c.detail("fit_rms", fit.rms_residual);
    let (lo, hi) = tol.exponent_range;
    c.worst_margin = (fit.rate - lo).min(hi - fit.rate);
    if !first_half {
        c.note("supremum of t_tilde * total curvature is in the second half of the late window");
        c.worst_margin = c.worst_margin.min(-1.0);
    }
    if w.span < tol.min_span {
        c.note(format!("t_tilde spans a factor {:.3e} < {:.0e} after the transient", w.span, tol.min_span));
        c.verdict = Verdict::Inconclusive;
    } else {
        c.decide();
    }
    c
}

/// `∫R dA ≤ c/log(1+t)`: the product `log(1+t)·r` must not grow, i.e. its
/// late-window maximum stays within `growth_factor` of its mid-window maximum.
pub fn check_total_curvature_normalized(nt: &NormalizedTrace, tol: &AsymptoticTolerances) -> BoundCheck {
    let mut c = BoundCheck::new("total_curvature_normalized");
    let t = nt.t();
    let r = nt.column(|r| r.r);
    let x: Vec<f64> = t.iter().map(|v| v.ln_1p()).collect();
    let w = Windows::new(&x);
    c.window = window_pair(&w.late);
    c.detail("span", w.span);
    if vanishing(&mut c, &r, &w.kept) {
        return c;
    }
    if w.late.len() < MIN_WINDOW || w.mid.is_empty() {
        c.note(format!("late window {} records, mid window {} records", w.late.len(), w.mid.len()));
        return c;
    }
    let product: Vec<f64> = x.iter().zip(&r).map(|(a, b)| a * b).collect();
    let (late_max, _) = sup(&product, w.late.clone());
    let (mid_max, _) = sup(&product, w.mid.clone());
    c.constant_found = sup(&product, w.kept.clone()).0;
    c.detail("late_max", late_max);
    c.detail("mid_max", mid_max);
    c.worst_margin = tol.growth_factor * mid_max - late_max;
    if !c.worst_margin.is_finite() {
        c.worst_margin = f64::NEG_INFINITY;
    }

    let fits: Vec<_> = [FitModel::LogInverse, FitModel::Power, FitModel::Exponential]
        .into_iter()
        .filter_map(|m| fit_rate(&t, &r, m, w.late.clone()).ok())
        .collect();
    for f in &fits {
        c.detail(format!("{:?}_rms_log", f.model).to_lowercase(), f.rms_log);
    }
    if fits.len() == 3 {
        if fits[0].rms_log <= fits[1].rms_log && fits[0].rms_log <= fits[2].rms_log {
            c.note("log-inverse model fits the late window best");
        } else {
            c.note("log-inverse model does not fit the late window best");
        }
        c.detail("power_exponent", fits[1].rate);
        if fits[1].rate <= -0.5 {
            c.note("faster than paper bound");
        }
    }
    if w.span < tol.min_span {
        c.note(format!("1 + t spans a factor {:.3e} < {:.0e} after the transient", w.span, tol.min_span));
        c.verdict = Verdict::Inconclusive;
    } else {
        c.decide();
    }
    c
}

/// Blow-up: on the late window `R̃_max` increases strictly, and both
/// `inf ∫R̃² dÃ` and `inf R̃_max/t̃` are positive. Requires a negatively curved
/// boundary and a positive floor for the normalised boundary length.
pub fn check_blowup(trace: &FlowTrace, nt: &NormalizedTrace, tol: &AsymptoticTolerances) -> BoundCheck {
    let mut c = BoundCheck::new("blowup");
    let floor = nt.records.iter().map(|r| r.min_boundary_length()).fold(f64::INFINITY, f64::min);
    c.detail("boundary_length_floor", floor);
    let curved = trace.records.iter().any(|r| r.k_minus < 0.0 || r.k_plus < 0.0);
    if !curved {
        c.verdict = Verdict::HypothesesNotMet;
        c.note("boundary geodesic curvature is not negative");
        return c;
    }
    if !(floor > 0.0 && floor >= tol.length_floor) {
        c.verdict = Verdict::HypothesesNotMet;
        c.note(format!("normalised boundary length floor {floor:.6e} below the declared {:.6e}", tol.length_floor));
        return c;
    }
    let t = trace.t_tilde();
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let w = Windows::new(&x);
    c.window = window_pair(&w.late);
    if w.late.len() < MIN_WINDOW {
        c.note(format!("late window has {} records", w.late.len()));
        return c;
    }
    let rmax = trace.column(|r| r.r_max);
    let r2 = trace.column(|r| r.total_r2);
    let ratio: Vec<f64> = rmax.iter().zip(&t).map(|(r, t)| r / t).collect();
    let c1 = inf(&r2, w.late.clone());
    let c2 = inf(&ratio, w.late.clone());
    let increasing = w.late.clone().skip(1).all(|i| rmax[i] > rmax[i - 1]);
    let overall = rmax.last() > rmax.first();
    c.detail("c1", c1);
    c.detail("c2", c2);
    c.constant_found = c2;
    c.worst_margin = c1.min(c2);
    if !increasing {
        c.note("R_max is not strictly increasing on the late window");
        c.worst_margin = c.worst_margin.min(-1.0);
    }
    if !overall {
        c.note("R_max did not increase over the run");
        c.worst_margin = c.worst_margin.min(-1.0);
    }
    // Both constants have to be strictly positive.
    c.verdict = if c.worst_margin > 0.0 { Verdict::Pass } else { Verdict::Fail };
    c
}

/// Non-exponential convergence: `(t + ĉ)·R_max ≥ 2(1 − tol_rate)` on the late
/// window, with `ĉ = −2·A_target/Ã′(0)` from the first two records, and the
/// exponential fit of `R_max` at least `residual_ratio` times worse than the
/// power-law fit.
pub fn check_nonexponential(trace: &FlowTrace, nt: &NormalizedTrace, tol: &AsymptoticTolerances) -> BoundCheck {
    let mut c = BoundCheck::new("nonexponential");
    let on_boundary = trace.records.iter().filter(|r| r.rmin_loc == MinLocation::Boundary).count();
    let frac = on_boundary as f64 / trace.len().max(1) as f64;
    c.detail("boundary_min_fraction", frac);
    let curved = trace.records.iter().any(|r| r.k_minus < 0.0 || r.k_plus < 0.0);
    if frac < tol.boundary_fraction || !curved {
        c.verdict = Verdict::HypothesesNotMet;
        c.note(if curved {
            "minimum of R is not on both boundary circles often enough"
        } else {
            "boundary geodesic curvature is not negative"
        });
        return c;
    }
    if trace.len() < 2 {
        return c;
    }
    let (r0, r1) = (&trace.records[0], &trace.records[1]);
    let slope = (r1.area - r0.area) / (r1.t_tilde - r0.t_tilde);
    if !(slope < 0.0) {
        c.verdict = Verdict::HypothesesNotMet;
        c.note("initial area is not decreasing");
        return c;
    }
    let c_hat = -2.0 * nt.a_target / slope;
    c.detail("c_hat", c_hat);

    let t = nt.t();
    let rmax = nt.column(|r| r.r_max());
    let x: Vec<f64> = t.iter().map(|v| v.ln_1p()).collect();
    let w = Windows::new(&x);
    c.window = window_pair(&w.late);
    c.detail("span", w.span);
    if w.late.len() < MIN_WINDOW {
        c.note(format!("late window has {} records", w.late.len()));
        return c;
    }
    let product: Vec<f64> = t.iter().zip(&rmax).map(|(t, r)| (t + c_hat) * r).collect();
    let lower = inf(&product, w.late.clone());
    c.constant_found = lower;
    let threshold = 2.0 * (1.0 - tol.tol_rate);
    let mut margin = lower - threshold;
    match (
        fit_rate(&t, &rmax, FitModel::Power, w.late.clone()),
        fit_rate(&t, &rmax, FitModel::Exponential, w.late.clone()),
    ) {
        (Ok(p), Ok(e)) => {
            let ratio = e.rms_log / p.rms_log;
            c.detail("power_exponent", p.rate);
            c.detail("residual_ratio", ratio);
            margin = margin.min(if ratio.is_nan() { -1.0 } else { ratio - tol.residual_ratio });
        }
        (p, e) => {
            c.note(format!("rate fits failed: {:?} {:?}", p.err(), e.err()));
            margin = margin.min(-1.0);
        }
    }
    c.worst_margin = margin;
    if w.span < tol.min_span {
        c.note(format!("1 + t spans a factor {:.3e} < {:.0e} after the transient", w.span, tol.min_span));
        c.verdict = Verdict::Inconclusive;
    } else {
        c.decide();
    }
    c
}

/// Largest deviation between the difference quotient of `log ∫R̃ dÃ` and
/// `−r_∂/2` (averaged over the two records) along a trace. Records with a
/// geodesic boundary are skipped.
pub fn log_derivative_identity(trace: &FlowTrace) -> f64 {
    trace
        .records
        .windows(2)
        .filter(|p| p[0].r_boundary.is_finite() && p[1].r_boundary.is_finite())
        .map(|p| {
            let d = (p[1].total_r.ln() - p[0].total_r.ln()) / (p[1].t_tilde - p[0].t_tilde);
            (d + 0.25 * (p[0].r_boundary + p[1].r_boundary)).abs()
        })
        .fold(0.0, f64::max)
}
