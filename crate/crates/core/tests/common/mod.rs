#![allow(dead_code)]

pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / scale.max(f64::MIN_POSITIVE)
}

/// The `k`-th smallest eigenvalue (0-based) of the symmetric tridiagonal
/// matrix with constant `diag` and `off`, by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalue(n: usize, diag: f64, off: f64, k: usize) -> f64 {
    let count_below = |x: f64| {
        let mut q = diag - x;
        let mut count = usize::from(q < 0.0);
        for _ in 1..n {
            let q_prev = if q == 0.0 { f64::EPSILON * off.abs() } else { q };
            q = diag - x - off * off / q_prev;
            count += usize::from(q < 0.0);
        }
        count
    };
    let radius = diag.abs() + 2.0 * off.abs();
    let (mut lo, mut hi) = (-radius, radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
