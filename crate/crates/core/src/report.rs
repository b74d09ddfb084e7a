//! Measured-versus-bound records shared by the inequality checks.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub id: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Sample {
    pub fn new(id: usize, lhs: f64, rhs: f64) -> Self {
        Self { id, lhs, rhs, ratio: ratio(lhs, rhs) }
    }
}

/// `lhs / rhs`, with `0/0 = 0` and `x/0 = inf`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Per-sample ratios of an inequality's two sides over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub inequality: String,
    pub grid_points: usize,
    pub samples: Vec<Sample>,
    /// Smallest constant making the inequality hold on every sample.
    pub max_ratio: f64,
    /// Levelwise contributions of the worst sample, normalized to unit `l^1` norm.
    pub c_q: Vec<f64>,
}

impl EstimateReport {
    pub fn new(inequality: impl Into<String>, grid_points: usize, samples: Vec<Sample>, c_q: Vec<f64>) -> Self {
        let max_ratio = samples.iter().fold(0.0, |m: f64, s| m.max(s.ratio));
        Self { inequality: inequality.into(), grid_points, samples, max_ratio, c_q: normalize_l1(&c_q) }
    }

    pub fn min_ratio(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, s| m.min(s.ratio))
    }

    /// Sample rows then a `max` summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id,lhs,rhs,ratio\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{:.17e},{:.17e},{:.17e}", s.id, s.lhs, s.rhs, s.ratio);
        }
        let _ = writeln!(out, "max,,,{:.17e}", self.max_ratio);
        out
    }
}

pub fn normalize_l1(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().map(|v| v.abs()).sum();
    if total == 0.0 {
        return values.to_vec();
    }
    values.iter().map(|v| v / total).collect()
}

/// Smallest `c >= 0` with `holds(c)`, for a predicate monotone in `c`.
/// Returns `inf` when no `c` up to `1e12` works.
pub fn smallest_constant(holds: impl Fn(f64) -> bool) -> f64 {
    if holds(0.0) {
        return 0.0;
    }
    let mut hi = 1e-6;
    while !holds(hi) {
        hi *= 4.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

/// `max(a, b) / min(a, b)`, the drift factor of a fitted constant.
pub fn drift_factor(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo <= 0.0 {
        if hi <= 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio(1.0, 4.0), 0.25);
        assert_eq!(drift_factor(2.0, 1.0), 2.0);
    }

    #[test]
    fn csv_summary_row() {
        let r = EstimateReport::new("x", 64, vec![Sample::new(0, 1.0, 2.0), Sample::new(1, 3.0, 2.0)], vec![1.0, 3.0]);
        assert_eq!(r.max_ratio, 1.5);
        assert_eq!(r.c_q, vec![0.25, 0.75]);
        let csv = r.to_csv();
        assert!(csv.ends_with("max,,,1.50000000000000000e0\n"));
    }

    #[test]
    fn smallest_constant_brackets_threshold() {
        let c = smallest_constant(|c| c * c >= 2.0);
        assert!((c - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(smallest_constant(|_| true), 0.0);
        assert_eq!(smallest_constant(|_| false), f64::INFINITY);
    }
}
