use std::f64::consts::PI;

use crate::geometry::{
    area, boundary_curvature_integral, boundary_geodesic_curvature, curvature_density, meridian_distance,
    parallel_length, scalar_curvature, FlowState,
};
use crate::quadrature::simpson;
use crate::scenarios::{min_location_of, MinLocation};

/// Observables of one unnormalised state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub t_tilde: f64,
    /// Step that produced this state (0 for the initial record).
    pub dt: f64,
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
    /// Gauss–Bonnet residual relative to the larger of its two terms (signed).
    pub gb_residual: f64,
    pub meridian: f64,
    pub argmax_node: usize,
    pub rmin_loc: MinLocation,
    /// Boundary-weighted average curvature; NaN when the boundary is geodesic.
    pub r_boundary: f64,
}

impl TraceRecord {
    pub fn observe(state: &FlowState, step: u64, dt: f64) -> Self {
        let base = state.base();
        let n = base.n();
        let r = scalar_curvature(state);
        let density = curvature_density(state);
        let f0 = base.f0();
        let y: Vec<f64> = density.iter().zip(f0).map(|(d, f)| d * f).collect();
        let total_r = 2.0 * PI * simpson(base.h(), &y);
        let y2: Vec<f64> = density.iter().zip(&r).zip(f0).map(|((d, r), f)| d * r * f).collect();
        let total_r2 = 2.0 * PI * simpson(base.h(), &y2);
        let (k_minus, k_plus) = boundary_geodesic_curvature(state);
        let len_minus = parallel_length(state, 0);
        let len_plus = parallel_length(state, n);
        let edge = boundary_curvature_integral(state);
        let bulk = 0.5 * total_r;
        let scale = bulk.abs().max(edge.abs());
        let gb_residual = if scale > 0.0 { (bulk + edge) / scale } else { bulk + edge };
        let r_boundary = if edge != 0.0 {
            (k_minus * r[0] * len_minus + k_plus * r[n] * len_plus) / edge
        } else {
            f64::NAN
        };
        TraceRecord {
            step,
            t_tilde: state.t_tilde(),
            dt,
            area: area(state),
            total_r,
            r_max: r.max(),
            r_min: r.min(),
            total_r2,
            len_minus,
            len_plus,
            len_mid: parallel_length(state, base.mid()),
            k_minus,
            k_plus,
            gb_residual,
            meridian: meridian_distance(state),
            argmax_node: r.argmax(),
            rmin_loc: min_location_of(&r),
            r_boundary,
        }
    }

    /// Field-exact comparison that treats NaN as equal to itself.
    pub fn bits_eq(&self, other: &Self) -> bool {
        let f = |x: f64, y: f64| x.to_bits() == y.to_bits();
        self.step == other.step
            && f(self.t_tilde, other.t_tilde)
            && f(self.dt, other.dt)
            && f(self.area, other.area)
            && f(self.total_r, other.total_r)
            && f(self.r_max, other.r_max)
            && f(self.r_min, other.r_min)
            && f(self.total_r2, other.total_r2)
            && f(self.len_minus, other.len_minus)
            && f(self.len_plus, other.len_plus)
            && f(self.len_mid, other.len_mid)
            && f(self.k_minus, other.k_minus)
            && f(self.k_plus, other.k_plus)
            && f(self.gb_residual, other.gb_residual)
            && f(self.meridian, other.meridian)
            && self.argmax_node == other.argmax_node
            && self.rmin_loc == other.rmin_loc
            && f(self.r_boundary, other.r_boundary)
    }
}

/// Time-ordered records of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowTrace {
    pub records: Vec<TraceRecord>,
}

impl FlowTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
    pub fn t_tilde(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t_tilde).collect()
    }
    pub fn column(&self, f: impl Fn(&TraceRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}
