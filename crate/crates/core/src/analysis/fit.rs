use std::ops::Range;

use crate::error::AnalysisError;

pub const MIN_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `y = A t^p`, fitted as `log y` against `log t`.
    Power,
    /// `y = A/(log(1+t) + b)`, fitted as `1/y` against `log(1+t)`.
    LogInverse,
    /// `y = A e^{λt}`, fitted as `log y` against `t`.
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub amplitude: f64,
    /// Exponent `p` for power, `λ` for exponential, `1/A` for log-inverse.
    pub rate: f64,
    /// `b` for log-inverse, zero otherwise.
    pub offset: f64,
    pub window: Range<usize>,
    /// RMS residual in the fitted (transformed) coordinates.
    pub rms_residual: f64,
    /// RMS of `log y − log ŷ`, comparable across models.
    pub rms_log: f64,
}

impl FitResult {
    pub fn predict(&self, t: f64) -> f64 {
        match self.model {
            FitModel::Power => self.amplitude * t.powf(self.rate),
            FitModel::LogInverse => self.amplitude / (t.ln_1p() + self.offset),
            FitModel::Exponential => self.amplitude * (self.rate * t).exp(),
        }
    }
}

/// Least-squares line through `(x, y)`: `(slope, intercept)`.
fn line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut k) = (0.0, 0usize);
    for e in v {
        s += e * e;
        k += 1;
    }
    (s / k as f64).sqrt()
}

pub fn fit_rate(t: &[f64], y: &[f64], model: FitModel, window: Range<usize>) -> Result<FitResult, AnalysisError> {
    if t.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(t.len(), y.len()));
    }
    let got = window.len();
    if got < MIN_WINDOW || window.end > t.len() {
        return Err(AnalysisError::WindowTooShort { min: MIN_WINDOW, got: got.min(t.len()) });
    }
    let (tw, yw) = (&t[window.clone()], &y[window.clone()]);
    for (i, &v) in yw.iter().enumerate() {
        if !(v > 0.0) {
            return Err(AnalysisError::NonPositive { index: window.start + i, value: v });
        }
    }
    let (x, z): (Vec<f64>, Vec<f64>) = match model {
        FitModel::Power => {
            if let Some(i) = tw.iter().position(|&v| !(v > 0.0)) {
                return Err(AnalysisError::NonPositive { index: window.start + i, value: tw[i] });
            }
            (tw.iter().map(|v| v.ln()).collect(), yw.iter().map(|v| v.ln()).collect())
        }
        FitModel::LogInverse => (tw.iter().map(|v| v.ln_1p()).collect(), yw.iter().map(|v| 1.0 / v).collect()),
        FitModel::Exponential => (tw.to_vec(), yw.iter().map(|v| v.ln()).collect()),
    };
    let (slope, icpt) = line(&x, &z);
    let rms_residual = rms(x.iter().zip(&z).map(|(a, b)| b - (slope * a + icpt)));
    let (amplitude, rate, offset) = match model {
        FitModel::Power | FitModel::Exponential => (icpt.exp(), slope, 0.0),
        FitModel::LogInverse => (1.0 / slope, slope, icpt / slope),
    };
    let mut fit = FitResult { model, amplitude, rate, offset, window, rms_residual, rms_log: 0.0 };
    fit.rms_log = rms(tw.iter().zip(yw).map(|(&t, &y)| {
        let p = fit.predict(t);
        if p > 0.0 {
            y.ln() - p.ln()
        } else {
            f64::INFINITY
        }
    }));
    Ok(fit)
}
