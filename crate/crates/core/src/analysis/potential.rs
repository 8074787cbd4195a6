//! Potential `f` of the curvature, `Δ_g f = R − r` with zero normal derivative,
//! and the quantity `h = Δ_g f + |∇f|²`.
//!
//! The 1-D operator is the conservative finite-volume form of
//! `e^{-2w} f0^{-1} (f0 f')'` with half cells at the ends, so the discrete
//! compatibility condition holds when `r` is the same cell-weighted mean of R.

use crate::error::AnalysisError;
use crate::geometry::{boundary_geodesic_curvature, parallel_length, scalar_curvature, FlowState, ScalarField};
use crate::solver::tridiag::solve_twisted;

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSolution {
    pub f: ScalarField,
    /// Cell-weighted mean of R.
    pub r_mean: f64,
    /// `‖L f − (R − r)‖_∞ / ‖R − r‖_∞` (zero when `R ≡ r`).
    pub relative_residual: f64,
}

struct Operator {
    /// Cell volumes `e^{2w} f0 h` (halved at the ends).
    vol: Vec<f64>,
    /// Face conductances `f0_{i+1/2}/h`.
    cond: Vec<f64>,
}

impl Operator {
    fn new(state: &FlowState) -> Self {
        let base = state.base();
        let (n, h) = (base.n(), base.h());
        let f0 = base.f0();
        let vol = (0..=n)
            .map(|i| {
                let v = (2.0 * state.w()[i]).exp() * f0[i] * h;
                if i == 0 || i == n {
                    0.5 * v
                } else {
                    v
                }
            })
            .collect();
        let cond = (0..n).map(|i| 0.5 * (f0[i] + f0[i + 1]) / h).collect();
        Operator { vol, cond }
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len() - 1;
        (0..=n)
            .map(|i| {
                let right = if i < n { self.cond[i] * (u[i + 1] - u[i]) } else { 0.0 };
                let left = if i > 0 { self.cond[i - 1] * (u[i] - u[i - 1]) } else { 0.0 };
                (right - left) / self.vol[i]
            })
            .collect()
    }

    fn mean(&self, v: &[f64]) -> f64 {
        let total: f64 = self.vol.iter().sum();
        self.vol.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / total
    }
}

/// Solves for the mean-zero potential. The singular system is made regular by
/// pinning the middle node (its equation is implied by the others), then the
/// mean is removed.
pub fn solve_potential(state: &FlowState) -> PotentialSolution {
    let op = Operator::new(state);
    let r = scalar_curvature(state);
    let mut r_mean = op.mean(&r);
    let mut rhs: Vec<f64> = r.iter().map(|v| v - r_mean).collect();
    // Second pass: the first mean carries rounding of size eps*max|R|, which
    // breaks compatibility once R - r is that small.
    let drift = op.mean(&rhs);
    r_mean += drift;
    rhs.iter_mut().for_each(|v| *v -= drift);
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let len = rhs.len();
    // R constant up to rounding: the potential is zero.
    let r_scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= 64.0 * f64::EPSILON * r_scale {
        return PotentialSolution { f: ScalarField::from_vec(vec![0.0; len]), r_mean, relative_residual: 0.0 };
    }
    let n = len - 1;
    let m = n / 2;
    let (mut a, mut b, mut c) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for i in 0..=n {
        if i > 0 {
            a[i] = op.cond[i - 1];
        }
        if i < n {
            c[i] = op.cond[i];
        }
        b[i] = -(a[i] + c[i]);
    }
    a[m] = 0.0;
    c[m] = 0.0;
    b[m] = 1.0;
    let solve = |target: &[f64]| {
        let mut d: Vec<f64> = target.iter().zip(&op.vol).map(|(v, w)| v * w).collect();
        d[m] = 0.0;
        solve_twisted(&a, &b, &c, &mut d);
        d
    };
    let mut u = solve(&rhs);
    // One sweep of iterative refinement.
    let defect: Vec<f64> = op.apply(&u).iter().zip(&rhs).map(|(l, t)| t - l).collect();
    for (ui, du) in u.iter_mut().zip(solve(&defect)) {
        *ui += du;
    }
    let mean = op.mean(&u);
    let f: Vec<f64> = u.iter().map(|v| v - mean).collect();
    let lf = op.apply(&f);
    let res = lf.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    PotentialSolution { f: ScalarField::from_vec(f), r_mean, relative_residual: res / scale }
}

/// Direct-substitution residual of [`solve_potential`].
pub fn potential_residual(state: &FlowState) -> f64 {
    solve_potential(state).relative_residual
}

/// `h = (R − r) + e^{-2w} f_σ²` at every node (centred `f_σ`, zero at the ends).
pub fn h_field(state: &FlowState) -> ScalarField {
    let sol = solve_potential(state);
    let r = scalar_curvature(state);
    let base = state.base();
    let (n, h) = (base.n(), base.h());
    let f = &sol.f;
    let w = state.w();
    let out = (0..=n)
        .map(|i| {
            let fs = if i == 0 || i == n { 0.0 } else { (f[i + 1] - f[i - 1]) / (2.0 * h) };
            (r[i] - sol.r_mean) + (-2.0 * w[i]).exp() * fs * fs
        })
        .collect();
    ScalarField::from_vec(out)
}

/// `max h` over the nodes.
pub fn h_monitor(state: &FlowState) -> f64 {
    h_field(state).max()
}

/// `r_∂ = ∮ k R ds / ∮ k ds` over the two boundary circles.
pub fn boundary_average_curvature(state: &FlowState) -> Result<f64, AnalysisError> {
    let n = state.base().n();
    let (km, kp) = boundary_geodesic_curvature(state);
    let (lm, lp) = (parallel_length(state, 0), parallel_length(state, n));
    let den = km * lm + kp * lp;
    if den == 0.0 {
        return Err(AnalysisError::GeodesicBoundary);
    }
    let r = scalar_curvature(state);
    Ok((km * r[0] * lm + kp * r[n] * lp) / den)
}
