//! Background cylinder metric `g0 = dσ² + f0(σ)² dθ²` and the observables of a
//! conformally deformed metric `e^{2w} g0`.
//!
//! Everything here is θ-independent: a field is one value per node of the
//! uniform σ-grid on `[-ρ, ρ]`. Derivatives of the profile are always analytic.
//! Only `w` is differenced.
//!
//! Geodesic curvature of a boundary circle is measured against the outward
//! normal, so the band `|σ| ≤ ρ` of the unit sphere has `k = -tan ρ` on both
//! components.

use std::f64::consts::PI;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::GeometryError;
use crate::quadrature::{simpson, trapezoid};

/// Smallest admissible number of grid cells.
pub const MIN_CELLS: usize = 16;

/// Analytic rotationally symmetric profile `f0(σ)`. Both kinds are even in σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `f0 ≡ 1`: the flat cylinder.
    Flat,
    /// `f0 = cos(aσ)`: a band of the round sphere of curvature `a²`
    /// (scalar curvature `2a²`), normalised so its widest parallel has `f0 = 1`.
    CosBand { a: f64 },
}

impl Profile {
    /// `(f0, f0', f0'')` at `sigma`.
    pub fn eval(&self, sigma: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Flat => (1.0, 0.0, 0.0),
            Profile::CosBand { a } => {
                let (s, c) = (a * sigma).sin_cos();
                (c, -a * s, -(a * a) * c)
            }
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            Profile::Flat => Ok(()),
            Profile::CosBand { a } if a.is_finite() && a > 0.0 => Ok(()),
            Profile::CosBand { a } => Err(GeometryError::BadProfile(format!(
                "cos_band frequency must be positive, got {a}"
            ))),
        }
    }
}

/// Fixed background metric sampled on the grid `σ_i = -ρ + i h`, `h = 2ρ/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseGeometry {
    profile: Profile,
    rho: f64,
    n: usize,
    h: f64,
    sigma: Vec<f64>,
    f0: Vec<f64>,
    f0_prime: Vec<f64>,
    f0_second: Vec<f64>,
    /// `f0'/f0`, the drift coefficient of the background Laplacian.
    log_slope: Vec<f64>,
    r0: Vec<f64>,
    k0_minus: f64,
    k0_plus: f64,
}

/// Builds the background geometry from analytic profile data.
///
/// Nodes are generated as `σ_i = ρ(2i - n)/n` and the profile is evaluated on
/// the left half and mirrored, so even data stays bitwise reflection symmetric.
pub fn build_base(profile: Profile, rho: f64, n: usize) -> Result<BaseGeometry, GeometryError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(GeometryError::BadRho(rho));
    }
    if n < MIN_CELLS {
        return Err(GeometryError::GridTooSmall(n));
    }
    if !n.is_multiple_of(2) {
        return Err(GeometryError::OddGrid(n));
    }
    profile.validate()?;

    let nodes = n + 1;
    let mut sigma = vec![0.0; nodes];
    let mut f0 = vec![0.0; nodes];
    let mut f0_prime = vec![0.0; nodes];
    let mut f0_second = vec![0.0; nodes];
    let half = n / 2;
    for i in 0..=half {
        let s = rho * (2 * i as i64 - n as i64) as f64 / n as f64;
        let (f, fp, fpp) = profile.eval(s);
        let j = n - i;
        sigma[i] = s;
        f0[i] = f;
        f0_prime[i] = fp;
        f0_second[i] = fpp;
        if j != i {
            sigma[j] = -s;
            f0[j] = f;
            f0_prime[j] = -fp;
            f0_second[j] = fpp;
        }
    }
    for (i, &f) in f0.iter().enumerate() {
        if !(f > 0.0) {
            return Err(GeometryError::NonPositiveProfile { index: i, sigma: sigma[i], value: f });
        }
    }
    let log_slope: Vec<f64> = f0_prime.iter().zip(&f0).map(|(fp, f)| fp / f).collect();
    let r0 = f0_second.iter().zip(&f0).map(|(fpp, f)| -2.0 * fpp / f).collect();
    let k0_plus = f0_prime[n] / f0[n];
    let k0_minus = -f0_prime[0] / f0[0];

    Ok(BaseGeometry {
        profile,
        rho,
        n,
        h: 2.0 * rho / n as f64,
        sigma,
        f0,
        f0_prime,
        f0_second,
        log_slope,
        r0,
        k0_minus,
        k0_plus,
    })
}

impl BaseGeometry {
    pub fn profile(&self) -> Profile {
        self.profile
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    /// Number of cells; the grid has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nodes(&self) -> usize {
        self.n + 1
    }
    /// Index of the middle parallel σ = 0.
    pub fn mid(&self) -> usize {
        self.n / 2
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
    pub fn f0(&self) -> &[f64] {
        &self.f0
    }
    pub fn f0_prime(&self) -> &[f64] {
        &self.f0_prime
    }
    pub fn f0_second(&self) -> &[f64] {
        &self.f0_second
    }
    pub fn log_slope(&self) -> &[f64] {
        &self.log_slope
    }
    /// Background scalar curvature `-2 f0''/f0`.
    pub fn r0(&self) -> &[f64] {
        &self.r0
    }
    pub fn k0_minus(&self) -> f64 {
        self.k0_minus
    }
    pub fn k0_plus(&self) -> f64 {
        self.k0_plus
    }
    pub fn max_abs_log_slope(&self) -> f64 {
        self.log_slope.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Tolerance for the Gauss–Bonnet residual relative to the curvature scale:
    /// `1e-6` at `n = 256`, scaled by `(256/n)²`.
    pub fn tol_gauss_bonnet(&self) -> f64 {
        let scale = 256.0 / self.n as f64;
        1e-6 * scale * scale
    }
}

/// One value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>, base: &BaseGeometry) -> Result<Self, GeometryError> {
        if values.len() != base.nodes() {
            return Err(GeometryError::LengthMismatch { expected: base.nodes(), got: values.len() });
        }
        Ok(ScalarField(values))
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        ScalarField(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the maximum; ties go to the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// Index of the minimum; ties go to the smallest index.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v < self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl<'a> IntoIterator for &'a ScalarField {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl Deref for ScalarField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Geodesic curvatures the boundary circles are held at by the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTarget {
    pub minus: f64,
    pub plus: f64,
}

/// Conformal exponent `w` at unnormalised time `t̃`; the metric is `e^{2w} g0`.
///
/// A state also carries the boundary geodesic curvatures that the evolution
/// keeps fixed. States built by [`FlowState::new`] take them from their own
/// boundary, so any state is a valid initial datum.
#[derive(Debug, Clone)]
pub struct FlowState {
    base: Arc<BaseGeometry>,
    w: Vec<f64>,
    t_tilde: f64,
    target: BoundaryTarget,
}

impl FlowState {
    pub fn new(base: Arc<BaseGeometry>, w: Vec<f64>, t_tilde: f64) -> Result<Self, GeometryError> {
        if w.len() != base.nodes() {
            return Err(GeometryError::LengthMismatch { expected: base.nodes(), got: w.len() });
        }
        if let Some(i) = w.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        let (minus, plus) = one_sided_curvature(&base, &w);
        Ok(FlowState { base, w, t_tilde, target: BoundaryTarget { minus, plus } })
    }

    /// `w ≡ 0` at `t̃ = 0`, i.e. the background metric itself.
    pub fn background(base: Arc<BaseGeometry>) -> Self {
        let w = vec![0.0; base.nodes()];
        let target = BoundaryTarget { minus: base.k0_minus(), plus: base.k0_plus() };
        FlowState { base, w, t_tilde: 0.0, target }
    }

    /// Replaces the boundary curvatures held fixed by the flow.
    pub fn with_target(mut self, target: BoundaryTarget) -> Self {
        self.target = target;
        self
    }

    /// Holds the boundary at the background curvatures `k₀`.
    pub fn with_background_target(self) -> Self {
        let target = BoundaryTarget { minus: self.base.k0_minus(), plus: self.base.k0_plus() };
        self.with_target(target)
    }

    /// A later state of the same run.
    pub(crate) fn successor(&self, w: Vec<f64>, t_tilde: f64) -> Self {
        debug_assert_eq!(w.len(), self.base.nodes());
        FlowState { base: Arc::clone(&self.base), w, t_tilde, target: self.target }
    }

    pub fn base(&self) -> &BaseGeometry {
        &self.base
    }
    pub fn base_arc(&self) -> &Arc<BaseGeometry> {
        &self.base
    }
    pub fn w(&self) -> &[f64] {
        &self.w
    }
    pub fn t_tilde(&self) -> f64 {
        self.t_tilde
    }
    pub fn target(&self) -> BoundaryTarget {
        self.target
    }
    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
    }

    /// The homothetic state `w + c` (metric scaled by `e^{2c}`), with the
    /// boundary targets scaled accordingly.
    pub fn shifted(&self, c: f64) -> Self {
        let s = (-c).exp();
        FlowState {
            base: Arc::clone(&self.base),
            w: self.w.iter().map(|w| w + c).collect(),
            t_tilde: self.t_tilde,
            target: BoundaryTarget { minus: self.target.minus * s, plus: self.target.plus * s },
        }
    }

    /// Largest `|w_i - w_{n-i}|`; zero for reflection-symmetric states.
    pub fn asymmetry(&self) -> f64 {
        let n = self.base.n();
        (0..=n / 2).map(|i| (self.w[i] - self.w[n - i]).abs()).fold(0.0, f64::max)
    }
}

/// Values of `w` one cell outside each end of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghosts {
    pub minus: f64,
    pub plus: f64,
}

/// Ghost values enforcing the Robin condition `∂w/∂η₀ = γ e^w − k₀` with a
/// centred difference across each end, where `γ` is the state's boundary
/// target. This is what keeps the boundary geodesic curvature
/// `e^{-w}(k₀ + ∂w/∂η₀)` equal to `γ`; for `γ = k₀` it reads
/// `∂w/∂η₀ = k₀(e^w − 1)`.
pub fn robin_ghosts(state: &FlowState) -> Ghosts {
    robin_ghosts_for(state.base(), state.w(), state.target())
}

/// `γ e^w − k₀`, written to stay accurate when `γ = k₀` and `w` is small.
pub(crate) fn robin_flux(gamma: f64, k0: f64, w: f64) -> f64 {
    gamma * w.exp_m1() + (gamma - k0)
}

pub(crate) fn robin_ghosts_for(base: &BaseGeometry, w: &[f64], target: BoundaryTarget) -> Ghosts {
    let (n, h) = (base.n(), base.h());
    Ghosts {
        minus: w[1] + 2.0 * h * robin_flux(target.minus, base.k0_minus(), w[0]),
        plus: w[n - 1] + 2.0 * h * robin_flux(target.plus, base.k0_plus(), w[n]),
    }
}

/// Background Laplacian `Δ₀u = u'' + (f0'/f0) u'` of a θ-independent field,
/// centred second differences, with the caller's ghost values at the ends.
pub fn laplace_base(base: &BaseGeometry, u: &[f64], ghosts: Ghosts) -> ScalarField {
    let mut out = vec![0.0; base.nodes()];
    laplace_into(base, u, ghosts, &mut out);
    ScalarField(out)
}

pub(crate) fn laplace_into(base: &BaseGeometry, u: &[f64], ghosts: Ghosts, out: &mut [f64]) {
    let n = base.n();
    let h = base.h();
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 1.0 / (2.0 * h);
    let slope = base.log_slope();
    let stencil = |left: f64, centre: f64, right: f64, drift: f64| {
        ((right + left) - 2.0 * centre) * inv_h2 + drift * (right - left) * inv_2h
    };
    out[0] = stencil(ghosts.minus, u[0], u[1], slope[0]);
    for i in 1..n {
        out[i] = stencil(u[i - 1], u[i], u[i + 1], slope[i]);
    }
    out[n] = stencil(u[n - 1], u[n], ghosts.plus, slope[n]);
}

/// `R e^{2w} f0`-free density `R₀ − 2Δ₀w`, i.e. `R e^{2w}`.
pub(crate) fn curvature_density(state: &FlowState) -> Vec<f64> {
    let base = state.base();
    let mut lap = vec![0.0; base.nodes()];
    laplace_into(base, state.w(), robin_ghosts(state), &mut lap);
    base.r0().iter().zip(&lap).map(|(r0, l)| r0 - 2.0 * l).collect()
}

/// Scalar curvature `R = e^{-2w}(R₀ − 2Δ₀w)` of `e^{2w} g0`, using the Robin ghosts.
pub fn scalar_curvature(state: &FlowState) -> ScalarField {
    scalar_curvature_with(state, robin_ghosts(state))
}

/// [`scalar_curvature`] with explicit ghost values.
pub fn scalar_curvature_with(state: &FlowState, ghosts: Ghosts) -> ScalarField {
    let base = state.base();
    let mut lap = vec![0.0; base.nodes()];
    laplace_into(base, state.w(), ghosts, &mut lap);
    let r = state
        .w()
        .iter()
        .zip(base.r0())
        .zip(&lap)
        .map(|((w, r0), l)| (-2.0 * w).exp() * (r0 - 2.0 * l))
        .collect();
    ScalarField(r)
}

/// Outward normal derivative of a nodal field in the background metric, from
/// second-order one-sided differences: `(minus end, plus end)`.
pub(crate) fn outward_derivatives(u: &[f64], h: f64) -> (f64, f64) {
    let n = u.len() - 1;
    let minus = (3.0 * (u[0] - u[1]) - (u[1] - u[2])) / (2.0 * h);
    let plus = (3.0 * (u[n] - u[n - 1]) - (u[n - 1] - u[n - 2])) / (2.0 * h);
    (minus, plus)
}

/// Geodesic curvature of the two boundary circles, `k = e^{-w}(k₀ + ∂w/∂η₀)`,
/// with one-sided second-order normal derivatives: `(k_minus, k_plus)`.
pub fn boundary_geodesic_curvature(state: &FlowState) -> (f64, f64) {
    one_sided_curvature(state.base(), state.w())
}

fn one_sided_curvature(base: &BaseGeometry, w: &[f64]) -> (f64, f64) {
    let n = base.n();
    let (dm, dp) = outward_derivatives(w, base.h());
    ((-w[0]).exp() * (base.k0_minus() + dm), (-w[n]).exp() * (base.k0_plus() + dp))
}

/// `A = 2π ∫ e^{2w} f0 dσ` (composite Simpson).
pub fn area(state: &FlowState) -> f64 {
    let base = state.base();
    let y: Vec<f64> = state.w().iter().zip(base.f0()).map(|(w, f)| (2.0 * w).exp() * f).collect();
    2.0 * PI * simpson(base.h(), &y)
}

/// Length `2π e^{w} f0` of the parallel through `node`.
pub fn parallel_length(state: &FlowState, node: usize) -> f64 {
    2.0 * PI * state.w()[node].exp() * state.base().f0()[node]
}

/// Distance between the boundary circles along a meridian, `∫ e^{w} dσ` (trapezoid).
pub fn meridian_distance(state: &FlowState) -> f64 {
    let y: Vec<f64> = state.w().iter().map(|w| w.exp()).collect();
    trapezoid(state.base().h(), &y)
}

/// Total curvature `∫ R dA = 2π ∫ (R₀ − 2Δ₀w) f0 dσ` (composite Simpson).
pub fn total_curvature(state: &FlowState) -> f64 {
    let base = state.base();
    let y: Vec<f64> = curvature_density(state).iter().zip(base.f0()).map(|(d, f)| d * f).collect();
    2.0 * PI * simpson(base.h(), &y)
}

/// `∮ k ds` over both boundary circles.
pub fn boundary_curvature_integral(state: &FlowState) -> f64 {
    let (km, kp) = boundary_geodesic_curvature(state);
    let n = state.base().n();
    km * parallel_length(state, 0) + kp * parallel_length(state, n)
}

/// Signed Gauss–Bonnet residual `∫ R/2 dA + ∮ k ds` (the cylinder has χ = 0).
pub fn gauss_bonnet_residual(state: &FlowState) -> f64 {
    0.5 * total_curvature(state) + boundary_curvature_integral(state)
}

/// Gauss–Bonnet residual divided by the larger of its two terms.
pub fn gauss_bonnet_relative(state: &FlowState) -> f64 {
    let bulk = 0.5 * total_curvature(state);
    let edge = boundary_curvature_integral(state);
    let scale = bulk.abs().max(edge.abs());
    if scale == 0.0 {
        (bulk + edge).abs()
    } else {
        (bulk + edge).abs() / scale
    }
}

/// The metric rewritten as `ds² + f(s)² dθ²` with `s` measured from the σ = −ρ end.
#[derive(Debug, Clone, PartialEq)]
pub struct ArclengthProfile {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
}

/// Arclength reparametrisation: `s(σ) = ∫ e^{w}` (cumulative trapezoid), `f = e^{w} f0`.
pub fn to_arclength_profile(state: &FlowState) -> ArclengthProfile {
    let base = state.base();
    let h = base.h();
    let ew: Vec<f64> = state.w().iter().map(|w| w.exp()).collect();
    let mut s = Vec::with_capacity(ew.len());
    let mut acc = 0.0;
    s.push(0.0);
    for pair in ew.windows(2) {
        acc += 0.5 * h * (pair[0] + pair[1]);
        s.push(acc);
    }
    let f = ew.iter().zip(base.f0()).map(|(e, f)| e * f).collect();
    ArclengthProfile { s, f }
}

/// Geodesic curvature `f_s/f = e^{-w}(f0'/f0 + w')` of every parallel, oriented
/// towards increasing σ. End values use the one-sided boundary derivative, so
/// they equal `-k_minus` and `k_plus`.
pub fn parallel_curvatures(state: &FlowState) -> Vec<f64> {
    let base = state.base();
    let (w, n, h) = (state.w(), base.n(), base.h());
    let (dm, dp) = outward_derivatives(w, h);
    (0..=n)
        .map(|i| {
            let dw = if i == 0 {
                -dm
            } else if i == n {
                dp
            } else {
                (w[i + 1] - w[i - 1]) / (2.0 * h)
            };
            (-w[i]).exp() * (base.log_slope()[i] + dw)
        })
        .collect()
}
