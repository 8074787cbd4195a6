//! Composite rules on uniform grids. Sums are accumulated pairwise from both
//! ends towards the middle so that mirror-symmetric integrands give the same
//! result as their reflections, bit for bit.

/// Composite Simpson rule; `y.len() - 1` must be even.
pub fn simpson(h: f64, y: &[f64]) -> f64 {
    let n = y.len() - 1;
    debug_assert!(n.is_multiple_of(2) && n >= 2);
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    symmetric_sum(n, |i| weight(i) * y[i]) * h / 3.0
}

/// Composite trapezoid rule.
pub fn trapezoid(h: f64, y: &[f64]) -> f64 {
    let n = y.len() - 1;
    let weight = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    symmetric_sum(n, |i| weight(i) * y[i]) * h
}

/// `Σ_{i=0}^{n} term(i)`, pairing `i` with `n - i`.
fn symmetric_sum(n: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut i = 0;
    while i < n - i {
        acc += term(i) + term(n - i);
        i += 1;
    }
    if i == n - i {
        acc += term(i);
    }
    acc
}

/// Trapezoid integral over a non-uniform abscissa, returning the running value
/// at every sample (first entry zero).
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}
