//! Initial data families and a numerical check of the hypotheses the
//! asymptotic results rely on.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::ScenarioError;
use crate::geometry::{build_base, scalar_curvature, BaseGeometry, FlowState, Profile, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Flat,
    CosBand,
}

impl ProfileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::Flat => "flat",
            ProfileKind::CosBand => "cos_band",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Zero,
    CosineBump,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub profile: ProfileKind,
    /// Frequency of the `cos_band` profile; ignored for `flat`.
    pub a: f64,
    pub rho: f64,
    pub n: usize,
    pub w0: InitialKind,
    pub epsilon: f64,
    pub mode: u32,
}

impl ScenarioSpec {
    /// The unit-sphere band `|σ| ≤ ρ` with `w ≡ 0`.
    pub fn sphere_band(rho: f64, n: usize) -> Self {
        ScenarioSpec { profile: ProfileKind::CosBand, a: 1.0, rho, n, w0: InitialKind::Zero, epsilon: 0.0, mode: 1 }
    }

    pub fn flat(rho: f64, n: usize) -> Self {
        ScenarioSpec { profile: ProfileKind::Flat, a: 1.0, rho, n, w0: InitialKind::Zero, epsilon: 0.0, mode: 1 }
    }

    pub fn with_bump(mut self, epsilon: f64, mode: u32) -> Self {
        self.w0 = InitialKind::CosineBump;
        self.epsilon = epsilon;
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.profile == ProfileKind::CosBand && !(self.a * self.rho < FRAC_PI_2) {
            return Err(ScenarioError::ProfileNotPositive { a: self.a, rho: self.rho });
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(ScenarioError::BadEpsilon(self.epsilon));
        }
        if self.mode == 0 {
            return Err(ScenarioError::BadMode);
        }
        Ok(())
    }

    fn profile(&self) -> Profile {
        match self.profile {
            ProfileKind::Flat => Profile::Flat,
            // cos(aσ) already peaks at 1 on the middle parallel.
            ProfileKind::CosBand => Profile::CosBand { a: self.a },
        }
    }

    pub fn base(&self) -> Result<BaseGeometry, ScenarioError> {
        self.validate()?;
        Ok(build_base(self.profile(), self.rho, self.n)?)
    }
}

/// Builds the initial state of a scenario.
///
/// `cosine_bump` is `ε cos(mπ(σ+ρ)/(2ρ))`, which has zero σ-derivative at both
/// ends. When the boundary is curved that alone would violate the Robin
/// condition by `O(ε)`, so a quadratic `(σ² − ρ²)(α + βσ)` vanishing at the ends
/// is added to supply the required normal derivative. For `k₀ = 0` the
/// correction is identically zero.
pub fn make_initial(spec: &ScenarioSpec) -> Result<FlowState, ScenarioError> {
    let base = Arc::new(spec.base()?);
    let w = match spec.w0 {
        InitialKind::Zero => vec![0.0; base.nodes()],
        InitialKind::CosineBump => bump(&base, spec.epsilon, spec.mode),
    };
    Ok(FlowState::new(base, w, 0.0)?.with_background_target())
}

fn bump(base: &BaseGeometry, epsilon: f64, mode: u32) -> Vec<f64> {
    let rho = base.rho();
    let k = mode as f64 * PI / (2.0 * rho);
    // cos(k(σ+ρ)) = cos(kσ + mπ/2), expanded so that even modes are exactly
    // even in σ and odd modes exactly odd.
    let shape = |s: f64| match mode % 4 {
        0 => epsilon * (k * s).cos(),
        1 => -epsilon * (k * s).sin(),
        2 => -epsilon * (k * s).cos(),
        _ => epsilon * (k * s).sin(),
    };
    let end_plus = if mode.is_multiple_of(2) { epsilon } else { -epsilon };
    let end_minus = epsilon;
    // Required outward derivatives at σ = ±ρ.
    let d_plus = base.k0_plus() * end_plus.exp_m1();
    let d_minus = base.k0_minus() * end_minus.exp_m1();
    // q'(ρ) = 2ρ(α+βρ) = d_plus,  -q'(-ρ) = 2ρ(α−βρ) = d_minus
    let alpha = (d_plus + d_minus) / (4.0 * rho);
    let beta = (d_plus - d_minus) / (4.0 * rho * rho);
    base.sigma()
        .iter()
        .map(|&s| shape(s) + (s * s - rho * rho) * (alpha + beta * s))
        .collect()
}

/// Where the minimum of R sits along the meridian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinLocation {
    /// Attained (up to tolerance) on both boundary circles.
    Boundary,
    Interior,
    Middle,
}

impl MinLocation {
    pub fn as_str(&self) -> &'static str {
        match self {
            MinLocation::Boundary => "boundary",
            MinLocation::Interior => "interior",
            MinLocation::Middle => "middle",
        }
    }
}

impl fmt::Display for MinLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MinLocation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "boundary" => Ok(MinLocation::Boundary),
            "interior" => Ok(MinLocation::Interior),
            "middle" => Ok(MinLocation::Middle),
            other => Err(format!("unknown min-R location {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisTolerances {
    /// Absolute slack for `min R ≥ 0`.
    pub r_nonneg: f64,
    /// Absolute slack for `k ≤ 0`.
    pub k_nonpos: f64,
    /// Relative (to `max|R|`) slack for reflection symmetry.
    pub symmetry: f64,
    /// Relative (to `max|R|`) slack for the monotone-from-the-middle scan and
    /// for deciding where the minimum is attained.
    pub monotone: f64,
}

impl Default for HypothesisTolerances {
    fn default() -> Self {
        HypothesisTolerances { r_nonneg: 1e-10, k_nonpos: 1e-10, symmetry: 1e-12, monotone: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub r_nonneg: bool,
    pub k_nonpos: bool,
    pub reflection_symmetric: bool,
    pub decreasing_from_middle: bool,
    pub min_r_location: MinLocation,
}

impl HypothesisReport {
    /// Data for which nonnegative curvature is preserved and the total
    /// curvature is non-increasing.
    pub fn positive_data(&self) -> bool {
        self.r_nonneg && self.k_nonpos
    }

    pub fn symmetric_monotone(&self) -> bool {
        self.reflection_symmetric && self.decreasing_from_middle
    }
}

pub fn validate_hypotheses(state: &FlowState, tol: &HypothesisTolerances) -> HypothesisReport {
    let r = scalar_curvature(state);
    let (km, kp) = crate::geometry::boundary_geodesic_curvature(state);
    let base = state.base();
    HypothesisReport {
        r_nonneg: r.min() >= -tol.r_nonneg,
        k_nonpos: base.k0_minus().max(base.k0_plus()) <= tol.k_nonpos && km.max(kp) <= tol.k_nonpos,
        reflection_symmetric: is_reflection_symmetric(&r, tol.symmetry),
        decreasing_from_middle: is_decreasing_from_middle(&r, tol.monotone),
        min_r_location: min_location(&r, tol.monotone),
    }
}

fn scale(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn is_reflection_symmetric(r: &[f64], rel_tol: f64) -> bool {
    let n = r.len() - 1;
    let tol = rel_tol * scale(r);
    (0..=n / 2).all(|i| (r[i] - r[n - i]).abs() <= tol)
}

/// Non-strict monotonicity away from the middle node, with slack
/// `rel_tol·max|R|` per neighbouring pair.
pub fn is_decreasing_from_middle(r: &[f64], rel_tol: f64) -> bool {
    let n = r.len() - 1;
    let mid = n / 2;
    let tol = rel_tol * scale(r);
    (mid..n).all(|i| r[i + 1] <= r[i] + tol) && (1..=mid).all(|i| r[i - 1] <= r[i] + tol)
}

pub(crate) fn min_location(r: &[f64], rel_tol: f64) -> MinLocation {
    let n = r.len() - 1;
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = rel_tol * scale(r);
    if r[0] <= min + tol && r[n] <= min + tol {
        MinLocation::Boundary
    } else if r[n / 2] <= min + tol {
        MinLocation::Middle
    } else {
        MinLocation::Interior
    }
}

/// Convenience for callers that already hold R.
pub fn min_location_of(r: &ScalarField) -> MinLocation {
    min_location(r, HypothesisTolerances::default().monotone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_geodesic_curvature, robin_ghosts};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn sphere_band_initial_data() {
        let s = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 128)).unwrap();
        assert!(s.base().r0().iter().all(|&r| r == 2.0));
        let (km, kp) = boundary_geodesic_curvature(&s);
        assert_relative_eq!(km, -1.0, epsilon = 1e-15);
        assert_relative_eq!(kp, -1.0, epsilon = 1e-15);
        let rep = validate_hypotheses(&s, &HypothesisTolerances::default());
        assert!(rep.r_nonneg && rep.k_nonpos && rep.reflection_symmetric && rep.decreasing_from_middle);
        assert_eq!(rep.min_r_location, MinLocation::Boundary);
    }

    #[test]
    fn flat_initial_data_is_stationary() {
        let s = make_initial(&ScenarioSpec::flat(1.0, 64)).unwrap();
        assert!(s.w().iter().all(|&w| w == 0.0));
        assert!(scalar_curvature(&s).iter().all(|&r| r == 0.0));
        assert_eq!(boundary_geodesic_curvature(&s), (0.0, 0.0));
    }

    #[test]
    fn neumann_bump_on_flat_cylinder() {
        let s = make_initial(&ScenarioSpec::flat(1.0, 64).with_bump(1e-3, 1)).unwrap();
        let (km, kp) = boundary_geodesic_curvature(&s);
        // w0' vanishes at the ends; the one-sided stencil sees O(ε h²).
        assert!(km.abs() < 1e-7 && kp.abs() < 1e-7, "{km} {kp}");
        assert_eq!(s.target().minus, 0.0);
        assert_eq!(s.w()[0], 1e-3);
        let g = robin_ghosts(&s);
        assert_eq!(g.minus, s.w()[1]);
    }

    #[test]
    fn antisymmetric_bump_breaks_symmetry() {
        let s = make_initial(&ScenarioSpec::flat(1.0, 64).with_bump(1e-2, 1)).unwrap();
        let rep = validate_hypotheses(&s, &HypothesisTolerances::default());
        assert!(!rep.reflection_symmetric);
    }

    #[test]
    fn bump_on_band_is_robin_compatible_and_flags_match_direct_scan() {
        let rho = FRAC_PI_4;
        let spec = ScenarioSpec::sphere_band(rho, 256).with_bump(0.05, 2);
        let s = make_initial(&spec).unwrap();
        let (km, kp) = boundary_geodesic_curvature(&s);
        assert_relative_eq!(km, -1.0, epsilon = 1e-3);
        assert_relative_eq!(kp, -1.0, epsilon = 1e-3);

        // Independent evaluation of R = e^{-2w}(2 − 2Δ₀w) from the closed form.
        let k = PI / rho;
        let dp = -(0.05f64.exp_m1());
        let alpha = dp / (2.0 * rho);
        let exact: Vec<f64> = s
            .base()
            .sigma()
            .iter()
            .map(|&x| {
                let w = 0.05 * (k * (x + rho)).cos() + alpha * (x * x - rho * rho);
                let w1 = -0.05 * k * (k * (x + rho)).sin() + 2.0 * alpha * x;
                let w2 = -0.05 * k * k * (k * (x + rho)).cos() + 2.0 * alpha;
                let lap = w2 - x.tan() * w1;
                (-2.0 * w).exp() * (2.0 - 2.0 * lap)
            })
            .collect();
        let rep = validate_hypotheses(&s, &HypothesisTolerances::default());
        assert_eq!(rep.decreasing_from_middle, is_decreasing_from_middle(&exact, 1e-10));
        assert!(!rep.decreasing_from_middle);
        assert!(rep.reflection_symmetric);
        assert_eq!(rep.min_r_location, MinLocation::Middle);
        let r = scalar_curvature(&s);
        for (a, b) in r.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-3, "{a} {b}");
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(matches!(
            make_initial(&ScenarioSpec::sphere_band(1.6, 64)),
            Err(ScenarioError::ProfileNotPositive { .. })
        ));
        assert_eq!(
            make_initial(&ScenarioSpec::flat(1.0, 64).with_bump(-1.0, 1)).unwrap_err(),
            ScenarioError::BadEpsilon(-1.0)
        );
        assert_eq!(make_initial(&ScenarioSpec::flat(1.0, 64).with_bump(0.1, 0)).unwrap_err(), ScenarioError::BadMode);
    }

    #[test]
    fn construction_is_deterministic() {
        let spec = ScenarioSpec::sphere_band(0.7, 128).with_bump(0.03, 4);
        let a = make_initial(&spec).unwrap();
        let b = make_initial(&spec).unwrap();
        assert_eq!(a.w(), b.w());
    }
}
