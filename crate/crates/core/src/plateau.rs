//! Smooth plateau cutoff: zero below 1, one above 2, monotone in between.

use serde::{Deserialize, Serialize};

/// The cutoff `σ(t) = e(t-1) / (e(t-1) + e(2-t))` with `e(t) = exp(-1/t)` for
/// `t > 0` and zero otherwise.
///
/// Inside `(1, 2)` it is evaluated as a logistic function of
/// `w = 1/(t-1) - 1/(2-t)`, which avoids the 0/0 of the raw quotient near
/// the endpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlateauFunction;

struct Parts {
    sigma: f64,
    /// σ(1-σ)
    spread: f64,
    /// 1/r² + 1/s² with s = t-1, r = 2-t
    dw: f64,
    s: f64,
    r: f64,
}

impl PlateauFunction {
    fn parts(t: f64) -> Option<Parts> {
        if t <= 1.0 || t >= 2.0 {
            return None;
        }
        let s = t - 1.0;
        let r = 2.0 - t;
        let w = 1.0 / s - 1.0 / r;
        let e = (-w.abs()).exp();
        let sigma = if w > 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
        let spread = e / ((1.0 + e) * (1.0 + e));
        Some(Parts {
            sigma,
            spread,
            dw: 1.0 / (r * r) + 1.0 / (s * s),
            s,
            r,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        match Self::parts(t) {
            Some(p) => p.sigma,
            None if t >= 2.0 => 1.0,
            None => 0.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        Self::parts(t).map_or(0.0, |p| p.spread * p.dw)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        Self::parts(t).map_or(0.0, |p| {
            let d1 = p.spread * p.dw;
            d1 * (1.0 - 2.0 * p.sigma) * p.dw
                + p.spread * (2.0 / (p.r * p.r * p.r) - 2.0 / (p.s * p.s * p.s))
        })
    }

    /// Maximum of σ′ sampled on a uniform grid of `n` points in `[1, 2]`.
    pub fn sup_derivative(&self, n: usize) -> f64 {
        (0..=n)
            .map(|i| self.derivative(1.0 + i as f64 / n as f64))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values() {
        let s = PlateauFunction;
        assert_eq!(s.value(0.3), 0.0);
        assert_eq!(s.value(1.0), 0.0);
        assert_eq!(s.value(2.0), 1.0);
        assert_eq!(s.value(7.0), 1.0);
        assert!((s.value(1.5) - 0.5).abs() < 1e-15);
        assert!((s.derivative(1.5) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_and_bounded_slope() {
        let s = PlateauFunction;
        let n = 100_000;
        let mut prev = 0.0;
        for i in 0..=n {
            let t = 0.5 + 2.0 * i as f64 / n as f64;
            let v = s.value(t);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        let sup = s.sup_derivative(100_000);
        assert!(sup <= 2.0 + 1e-12, "{sup}");
        assert!(sup <= 4.0);
    }

    #[test]
    fn derivatives_match_differences() {
        let s = PlateauFunction;
        for i in 1..40 {
            let t = 1.0 + i as f64 / 40.0;
            let d = 1e-5;
            let fd1 = (s.value(t + d) - s.value(t - d)) / (2.0 * d);
            let fd2 = (s.derivative(t + d) - s.derivative(t - d)) / (2.0 * d);
            assert!((fd1 - s.derivative(t)).abs() < 1e-7, "t={t}");
            assert!((fd2 - s.second_derivative(t)).abs() < 1e-5 * (1.0 + fd2.abs()), "t={t}");
        }
    }

    #[test]
    fn integral_of_derivative_is_one() {
        let s = PlateauFunction;
        let r = crate::quadrature::integrate(|t| s.derivative(t), 1.0, 2.0, Default::default())
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }
}
