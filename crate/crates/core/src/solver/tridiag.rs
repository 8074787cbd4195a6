//! Tridiagonal solve that eliminates from both ends towards the middle row.
//!
//! For a system whose coefficients are mirror images of each other
//! (`a[i] = c[n-i]`, `b[i] = b[n-i]`, `d[i] = d[n-i]`) both sweeps perform
//! identical floating point operations, so the solution is exactly symmetric.
//! A one-directional Thomas sweep would break that symmetry at rounding level
//! and the error would then grow along a long run.

/// Solves `a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i]` in place, writing the
/// solution into `d`. `a[0]` and `c[n]` are ignored. Requires at least three
/// unknowns. No pivoting: the system must be diagonally dominant or close to it.
pub fn solve_twisted(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let len = d.len();
    assert!(len >= 3 && a.len() == len && b.len() == len && c.len() == len);
    let n = len - 1;
    let m = n / 2;

    let mut cp = vec![0.0; len];
    let mut dp = vec![0.0; len];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..m {
        let denom = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / denom;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / denom;
    }

    let mut ap = vec![0.0; len];
    let mut dq = vec![0.0; len];
    ap[n] = a[n] / b[n];
    dq[n] = d[n] / b[n];
    for i in (m + 1..n).rev() {
        let denom = b[i] - c[i] * ap[i + 1];
        ap[i] = a[i] / denom;
        dq[i] = (d[i] - c[i] * dq[i + 1]) / denom;
    }

    let (lower, upper) = if m == 0 { (0.0, 0.0) } else { (a[m] * cp[m - 1], a[m] * dp[m - 1]) };
    let xm = (d[m] - (upper + c[m] * dq[m + 1])) / (b[m] - (lower + c[m] * ap[m + 1]));
    d[m] = xm;
    for i in (0..m).rev() {
        d[i] = dp[i] - cp[i] * d[i + 1];
    }
    for i in m + 1..=n {
        d[i] = dq[i] - ap[i] * d[i - 1];
    }
}
