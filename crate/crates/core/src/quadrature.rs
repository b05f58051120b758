//! Composite Simpson quadrature and compensated summation.


#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use crate::error::{invalid, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums in iteration order with compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Composite Simpson rule over uniformly spaced samples with spacing `step`.
///
/// The sample count must be odd and at least 3.
pub fn simpson(samples: &[f64], step: f64) -> Result<f64> {
    let n = samples.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(invalid!("simpson needs an odd number (>= 3) of samples, got {n}"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid!("simpson step must be positive, got {step}"));
    }
    let mut acc = CompensatedSum::new();
    acc.add(samples[0]);
    acc.add(samples[n - 1]);
    for (i, &s) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc.add(if i % 2 == 1 { 4.0 * s } else { 2.0 * s });
    }
    Ok(acc.value() * step / 3.0)
}

/// Number of Simpson intervals (even, at least 2) covering `length` with
/// spacing no larger than `max_step`.
pub fn simpson_intervals(length: f64, max_step: f64) -> usize {
    let raw = (length / max_step).ceil();
    let n = if raw.is_finite() && raw > 2.0 { raw as usize } else { 2 };
    n + (n % 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    #[test]
    fn sine_over_half_period() {
        let n = 2049;
        let h = PI / (n - 1) as f64;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        assert!((simpson(&s, h).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_and_cubic_are_exact() {
        assert_eq!(simpson(&[1.0; 11], 0.1).unwrap(), 1.0);
        let s: Vec<f64> = (0..5).map(|i| (i as f64 * 0.25).powi(2)).collect();
        assert!((simpson(&s, 0.25).unwrap() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn even_sample_count_is_rejected() {
        assert!(simpson(&[1.0, 2.0], 1.0).is_err());
        assert!(simpson(&[1.0; 4], 1.0).is_err());
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(v) - 4e-16).abs() < 1e-30);
    }
}
