//! Small order-insensitive summary statistics.

use serde::{Deserialize, Serialize};

/// Neumaier-compensated sum.
pub fn sum(values: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    sum(values) / values.len() as f64
}

/// Population standard deviation (divides by n).
pub fn std_population(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    (sum(&sq) / values.len() as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> FiveNumber {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        FiveNumber {
            min: quantile_sorted(&v, 0.0),
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: quantile_sorted(&v, 1.0),
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sided normal tail probability `2 (1 - Φ(|z|))`, computed through
/// `erfc` so it stays accurate far in the tail.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std() {
        assert!((mean(&[0.6, 0.8]) - 0.7).abs() < 1e-15);
        assert!((std_population(&[0.6, 0.8]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_is_order_insensitive() {
        let v = [1e16, 1.0, -1e16, 3.0, 0.5];
        let mut r = v;
        r.reverse();
        assert_eq!(sum(&v), sum(&r));
        assert_eq!(sum(&v), 4.5);
    }

    #[test]
    fn five_numbers() {
        let f = FiveNumber::of(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(
            (f.min, f.q1, f.median, f.q3, f.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
    }

    #[test]
    fn normal_tail() {
        assert_eq!(two_sided_p(0.0), 1.0);
        assert!((two_sided_p(1.959963984540054) - 0.05).abs() < 1e-12);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-12);
        assert!(two_sided_p(20.6) > 0.0 && two_sided_p(20.6) < 1e-90);
    }
}
