//! Scalar data `(f, a)` of the Dirichlet problem
//! `-div(a(u)∇u) + a'(u)/2 |∇u|² = f(u)` and the derived quantities used by
//! the concavity hypotheses: the antiderivative `F`, the first positive root
//! `M_f`, the weight ratio `ξ`, the monotonicity function `γ`, and the
//! concavizing map `φ`.
//!
//! `M_f` is located as the first sign change of `f`. One may define it either
//! as `inf{f = 0}` or as `inf{f ≤ 0}`; for continuous `f` that is positive near
//! zero both agree with the first sign change except when `f` touches zero
//! without crossing, which [`MfRoot::touches_zero`] reports.
//!
//! `ξ` is implemented as `(F/f)(a'/a)`; the alternative form
//! `(a'/F')(a/F)^{-1}` is the same expression.

mod expr;
pub mod registry;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_graded, QuadOptions};

pub use expr::ExprModelSpec;
pub use registry::{counterexample_source, ModelRegistry, RegistryEntry};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub(crate) fn scalar_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

/// Default cap for the sign scan of `f`.
pub const DEFAULT_T_CAP: f64 = 1e6;

/// The pair `(f, a)` together with optional closed forms.
#[derive(Clone)]
pub struct ScalarModel {
    name: String,
    f: ScalarFn,
    df: Option<ScalarFn>,
    a: ScalarFn,
    da: Option<ScalarFn>,
    antiderivative: Option<ScalarFn>,
    nu: f64,
    beta: f64,
    t_cap: f64,
    holder: Option<f64>,
    mf: Arc<OnceLock<Result<MfRoot>>>,
}

impl fmt::Debug for ScalarModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarModel")
            .field("name", &self.name)
            .field("nu", &self.nu)
            .field("beta", &self.beta)
            .field("t_cap", &self.t_cap)
            .field("closed_F", &self.antiderivative.is_some())
            .finish()
    }
}

/// Result of the root search for `M_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfRoot {
    /// First sign change of `f`; `+∞` when none is found below the cap.
    #[serde(with = "crate::ext_float")]
    pub value: f64,
    /// Some scanned sample before the sign change had `f = 0` (or a local
    /// minimum within roundoff of zero): `inf{f = 0}` and `inf{f ≤ 0}` then
    /// differ from the first sign change.
    pub touches_zero: bool,
}

/// Extrapolated one-sided limit at `0⁺`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    #[serde(with = "crate::ext_float")]
    pub value: f64,
    #[serde(with = "crate::ext_float")]
    pub error: f64,
    pub monotone_tail: bool,
    /// `(t, value)` pairs at `t = 10^{-k}`, `k = 2..=8`.
    pub samples: Vec<(f64, f64)>,
}

/// Evaluates `func` at `t = 10^{-k}` for `k = 2..=8` and extrapolates.
///
/// When the tail is monotone with shrinking increments, the limit is the
/// Aitken Δ² extrapolation of the last three samples; otherwise the last
/// sample is returned with the spread of the tail as error.
pub fn limit_at_zero(func: impl Fn(f64) -> Result<f64>) -> Result<LimitEstimate> {
    let mut samples = Vec::with_capacity(7);
    for k in 2..=8 {
        let t = 10f64.powi(-k);
        samples.push((t, func(t)?));
    }
    let vals: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = vals.len();
    let diffs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &diffs[diffs.len() - 3..];
    let same_sign = tail.iter().all(|d| *d >= 0.0) || tail.iter().all(|d| *d <= 0.0);
    let shrinking = tail.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-15);
    let monotone_tail = same_sign && shrinking;
    let last = vals[n - 1];
    if monotone_tail {
        let (x0, x1, x2) = (vals[n - 3], vals[n - 2], vals[n - 1]);
        let denom = x2 - 2.0 * x1 + x0;
        let value = if denom.abs() > 1e-300 && (x2 - x1).abs() > 1e-15 * x2.abs() {
            x2 - (x2 - x1) * (x2 - x1) / denom
        } else {
            x2
        };
        let value = if value.is_finite() { value } else { last };
        Ok(LimitEstimate {
            value,
            error: (x2 - x1).abs().max((value - last).abs()),
            monotone_tail,
            samples,
        })
    } else {
        let spread = vals[n - 3..]
            .iter()
            .map(|v| (v - last).abs())
            .fold(0.0, f64::max);
        Ok(LimitEstimate {
            value: last,
            error: spread,
            monotone_tail,
            samples,
        })
    }
}

impl ScalarModel {
    /// A model with source `f` and weight `a`. The ellipticity constant is
    /// estimated unless set with [`ScalarModel::with_nu`].
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let mut m = Self {
            name: name.into(),
            f: scalar_fn(f),
            df: None,
            a: scalar_fn(a),
            da: None,
            antiderivative: None,
            nu: f64::NAN,
            beta: f64::INFINITY,
            t_cap: DEFAULT_T_CAP,
            holder: None,
            mf: Arc::new(OnceLock::new()),
        };
        m.nu = m.estimate_nu();
        m
    }

    fn reset_cache(&mut self) {
        self.mf = Arc::new(OnceLock::new());
    }

    pub fn with_df(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.df = Some(scalar_fn(df));
        self
    }

    pub fn with_da(mut self, da: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.da = Some(scalar_fn(da));
        self
    }

    pub fn with_antiderivative(
        mut self,
        big_f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.antiderivative = Some(scalar_fn(big_f));
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// Declares an exploding weight: `a(t) → ∞` as `t → β⁻`. Re-estimates
    /// `ν` on the new range.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self.nu = self.estimate_nu();
        self.reset_cache();
        self
    }

    pub fn with_t_cap(mut self, t_cap: f64) -> Self {
        self.t_cap = t_cap;
        self.reset_cache();
        self
    }

    /// Hölder exponent of `f` at the origin, when known.
    pub fn with_holder(mut self, sigma: f64) -> Self {
        self.holder = Some(sigma);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_cap(&self) -> f64 {
        self.t_cap
    }

    pub fn holder(&self) -> Option<f64> {
        self.holder
    }

    pub fn has_closed_antiderivative(&self) -> bool {
        self.antiderivative.is_some()
    }

    /// `μ = ν^{-1/2}`, the base point of `φ`.
    pub fn mu(&self) -> f64 {
        self.nu.powf(-0.5)
    }

    /// `ν := 0.999 · min a` over `10⁴` points of `[0, min(0.999β, 10)]`.
    pub fn estimate_nu(&self) -> f64 {
        let hi = (0.999 * self.beta).min(10.0);
        let n = 10_000;
        let min = (0..=n)
            .map(|i| (self.a)(hi * i as f64 / n as f64))
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        0.999 * min
    }

    /// Model `(λ f, m a)`.
    pub fn scaled(&self, lambda: f64, m: f64) -> ScalarModel {
        let f = self.f.clone();
        let a = self.a.clone();
        let mut out = ScalarModel {
            name: format!("{}*({lambda},{m})", self.name),
            f: scalar_fn(move |t| lambda * f(t)),
            df: self.df.clone().map(|d| scalar_fn(move |t| lambda * d(t))),
            a: scalar_fn(move |t| m * a(t)),
            da: self.da.clone().map(|d| scalar_fn(move |t| m * d(t))),
            antiderivative: self
                .antiderivative
                .clone()
                .map(|g| scalar_fn(move |t| lambda * g(t))),
            nu: self.nu * m,
            beta: self.beta,
            t_cap: self.t_cap,
            holder: self.holder,
            mf: Arc::new(OnceLock::new()),
        };
        out.reset_cache();
        out
    }

    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn a(&self, t: f64) -> f64 {
        (self.a)(t)
    }

    fn central_difference(func: &ScalarFn, t: f64) -> f64 {
        let mut step = 1e-6 * t.abs().max(1.0);
        if t > 0.0 && t - step <= 0.0 {
            step = 0.5 * t;
        }
        (func(t + step) - func(t - step)) / (2.0 * step)
    }

    /// `f'(t)`: closed form when supplied, otherwise a central difference
    /// with step `1e-6 · max(1, t)`.
    pub fn df(&self, t: f64) -> f64 {
        match &self.df {
            Some(d) => d(t),
            None => Self::central_difference(&self.f, t),
        }
    }

    pub fn da(&self, t: f64) -> f64 {
        match &self.da {
            Some(d) => d(t),
            None => Self::central_difference(&self.a, t),
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t < self.beta) {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.beta,
            });
        }
        Ok(())
    }

    /// `F(t) = ∫_0^t f`, closed form when available.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        self.check_domain(t)?;
        match &self.antiderivative {
            Some(big_f) => Ok(big_f(t)),
            None => self.antiderivative_quadrature(t),
        }
    }

    /// `F(t)` by adaptive quadrature to relative tolerance `1e-10`, ignoring
    /// any closed form.
    pub fn antiderivative_quadrature(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        self.check_domain(t)?;
        let f = self.f.clone();
        let pole = if self.beta.is_finite() && t > 0.5 * self.beta {
            // a blows up at β; f may be singular there too
            Some(self.beta)
        } else {
            None
        };
        let opts = QuadOptions::rel(1e-10);
        let r = match pole {
            Some(b) => {
                let mid = 0.5 * t;
                let left = integrate_graded(|s| f(s), 0.0, mid, 0.0, opts)?;
                let right = integrate_graded(|s| f(s), mid, t, b, opts)?;
                left.value + right.value
            }
            None => integrate_graded(|s| f(s), 0.0, t, 0.0, opts)?.value,
        };
        Ok(r)
    }

    /// First positive sign change of `f`, by a geometric scan from `1e-10`
    /// up to `min(t_cap, β)` followed by bisection to `1e-12`.
    pub fn root_mf(&self) -> Result<MfRoot> {
        self.mf.get_or_init(|| self.compute_mf()).clone()
    }

    fn compute_mf(&self) -> Result<MfRoot> {
        let start = 1e-10;
        let upper = if self.beta.is_finite() {
            self.t_cap.min(self.beta * (1.0 - 1e-12))
        } else {
            self.t_cap
        };
        let f0 = self.f(start);
        if !(f0 > 0.0) {
            return Err(Error::Hypothesis(format!(
                "f must be positive near 0, got f({start:e}) = {f0}"
            )));
        }
        let ratio = 1.01f64;
        let mut prev_t = start;
        let mut prev_v = f0;
        let mut prev_prev_t = start;
        let mut prev_prev_v = f64::INFINITY;
        let mut touches_zero = false;
        let mut scale = f0.abs();
        loop {
            let t = (prev_t * ratio).min(upper);
            let v = self.f(t);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!("f({t}) = {v}")));
            }
            scale = scale.max(v.abs());
            if v < 0.0 {
                let (mut lo, mut hi) = (prev_t, t);
                while hi - lo > 1e-12 * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if self.f(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(MfRoot {
                    value: 0.5 * (lo + hi),
                    touches_zero,
                });
            }
            if v == 0.0 && t < upper {
                touches_zero = true;
            }
            if !touches_zero && prev_v <= v && prev_v < prev_prev_v {
                // local minimum between samples: refine and see if it reaches zero
                let fmin = self.minimize_f(prev_prev_t, t);
                if fmin <= 1e-10 * scale {
                    touches_zero = true;
                }
            }
            if t >= upper {
                return Ok(MfRoot {
                    value: f64::INFINITY,
                    touches_zero,
                });
            }
            prev_prev_v = prev_v;
            prev_prev_t = prev_t;
            prev_t = t;
            prev_v = v;
        }
    }

    /// Golden-section minimum of `f` on `[lo, hi]`.
    fn minimize_f(&self, mut lo: f64, mut hi: f64) -> f64 {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - r * (hi - lo);
        let mut x2 = lo + r * (hi - lo);
        let (mut f1, mut f2) = (self.f(x1), self.f(x2));
        for _ in 0..100 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - r * (hi - lo);
                f1 = self.f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + r * (hi - lo);
                f2 = self.f(x2);
            }
        }
        f1.min(f2)
    }

    fn check_below_mf(&self, t: f64) -> Result<()> {
        self.check_domain(t)?;
        let mf = self.root_mf()?.value;
        if t >= mf {
            return Err(Error::OutOfRange { t, lo: 0.0, hi: mf });
        }
        Ok(())
    }

    /// `ξ(t) = F(t) a'(t) / (f(t) a(t))` on `(0, M_f)`.
    pub fn xi(&self, t: f64) -> Result<f64> {
        self.check_below_mf(t)?;
        self.xi_unchecked(t)
    }

    pub(crate) fn xi_unchecked(&self, t: f64) -> Result<f64> {
        let big_f = self.antiderivative(t)?;
        Ok(big_f * self.da(t) / (self.f(t) * self.a(t)))
    }

    /// `F f' / f²`, the semilinear part of `γ`.
    pub fn semilinear_ratio(&self, t: f64) -> Result<f64> {
        let big_f = self.antiderivative(t)?;
        let f = self.f(t);
        Ok(big_f * self.df(t) / (f * f))
    }

    /// `γ(t) = F f'/f² − F a'/(2 f a)` on `(0, M_f)`.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        self.check_below_mf(t)?;
        self.gamma_unchecked(t)
    }

    pub(crate) fn gamma_unchecked(&self, t: f64) -> Result<f64> {
        let big_f = self.antiderivative(t)?;
        let f = self.f(t);
        Ok(big_f * self.df(t) / (f * f) - 0.5 * big_f * self.da(t) / (f * self.a(t)))
    }

    /// Integrand `√(a/F)` of `φ`; errors when `F ≤ 0`.
    pub fn phi_integrand(&self, s: f64) -> Result<f64> {
        let big_f = self.antiderivative(s)?;
        if !(big_f > 0.0) {
            return Err(Error::Hypothesis(format!("F({s}) = {big_f} is not positive")));
        }
        Ok((self.a(s) / big_f).sqrt())
    }

    /// `∫_lo^hi √(a/F)` with grading toward `0` (where `F` vanishes) and
    /// toward a finite `β` (where `a` explodes).
    fn integrate_phi(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo == hi {
            return Ok(0.0);
        }
        if lo > hi {
            return Ok(-self.integrate_phi(hi, lo)?);
        }
        let failure: OnceLock<Error> = OnceLock::new();
        let integrand = |s: f64| match self.phi_integrand(s) {
            Ok(v) => v,
            Err(e) => {
                let _ = failure.set(e);
                f64::NAN
            }
        };
        let opts = QuadOptions::rel(1e-10);
        let mid = 0.5 * (lo + hi);
        let result = (|| -> Result<f64> {
            let left = integrate_graded(integrand, lo, mid, 0.0, opts)?;
            let right = if self.beta.is_finite() {
                integrate_graded(integrand, mid, hi, self.beta, opts)?
            } else {
                integrate(integrand, mid, hi, opts)?
            };
            Ok(left.value + right.value)
        })();
        match (result, failure.into_inner()) {
            (_, Some(e)) => Err(e),
            (r, None) => r,
        }
    }

    /// `φ(t) = ∫_μ^t √(a(s)/F(s)) ds` with `μ = ν^{-1/2}`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || t > self.beta {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.beta,
            });
        }
        let mu = self.mu().min(self.beta);
        self.integrate_phi(mu, t)
    }

    /// `∫_0^t √(a/F)`: the concavizing map anchored at the origin. Finite only
    /// when `F^{-1/2}` is integrable at zero.
    pub fn phi_from_origin(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || t > self.beta {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.beta,
            });
        }
        self.integrate_phi(0.0, t)
    }

    /// `φ'(t) = √(a(t)/F(t))`.
    pub fn phi_derivative(&self, t: f64) -> Result<f64> {
        self.phi_integrand(t)
    }

    /// `lim_{t→0⁺} ξ(t)`.
    pub fn xi_limit(&self) -> Result<LimitEstimate> {
        limit_at_zero(|t| self.xi_unchecked(t))
    }

    /// `lim_{t→0⁺} γ(t)`.
    pub fn gamma_limit(&self) -> Result<LimitEstimate> {
        limit_at_zero(|t| self.gamma_unchecked(t))
    }

    /// Upper end of the interval on which hypotheses are tested:
    /// `min(M_f, t_cap, β)`.
    pub fn test_upper(&self) -> Result<f64> {
        let mf = self.root_mf()?.value;
        Ok(mf.min(self.t_cap).min(self.beta))
    }
}

/// Writes `(t, value)` rows as CSV with header `t,value`.
pub fn curve_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in rows {
        out.push_str(&format!("{t:.12e},{v:.12e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(p: f64) -> ScalarModel {
        ScalarModel::new("power", move |t| t.powf(p), |_| 1.0)
            .with_antiderivative(move |t| t.powf(p + 1.0) / (p + 1.0))
            .with_df(move |t| p * t.powf(p - 1.0))
            .with_da(|_| 0.0)
            .with_nu(1.0)
    }

    fn mnls_power(q: f64) -> ScalarModel {
        ScalarModel::new("mnls", move |t| t.powf(q), |t| 1.0 + 2.0 * t * t)
            .with_da(|t| 4.0 * t)
            .with_df(move |t| q * t.powf(q - 1.0))
            .with_antiderivative(move |t| t.powf(q + 1.0) / (q + 1.0))
            .with_nu(1.0)
    }

    #[test]
    fn antiderivative_examples() {
        let one = ScalarModel::new("one", |_| 1.0, |_| 1.0);
        assert!((one.antiderivative(0.5).unwrap() - 0.5).abs() < 1e-12);
        let lin = ScalarModel::new("lin", |t| 1.0 - t, |_| 1.0);
        assert!((lin.antiderivative(1.0).unwrap() - 0.5).abs() < 1e-12);
        let lambda = 0.5;
        let rel = ScalarModel::new(
            "rel",
            move |t: f64| -lambda * t + t / (1.0 + t * t).sqrt(),
            |_| 1.0,
        );
        let expected = -0.25 + 2f64.sqrt() - 1.0;
        assert!((rel.antiderivative(1.0).unwrap() - expected).abs() < 1e-10);
        assert!((expected - 0.164214).abs() < 1e-6);
    }

    #[test]
    fn antiderivative_beyond_beta_is_rejected() {
        let m = ScalarModel::new("h", |t| t, |t| 1.0 + t * t / (2.0 * (1.0 - t * t))).with_beta(1.0);
        assert!(matches!(m.antiderivative(1.2), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn mf_examples() {
        let one = ScalarModel::new("one", |_| 1.0, |_| 1.0);
        assert!(one.root_mf().unwrap().value.is_infinite());
        let lin = ScalarModel::new("lin", |t| 1.0 - t, |_| 1.0);
        assert!((lin.root_mf().unwrap().value - 1.0).abs() < 1e-11);
        let lambda = 0.6;
        let rel = ScalarModel::new(
            "rel",
            move |t: f64| -lambda * t + t / (1.0 + t * t).sqrt(),
            |_| 1.0,
        );
        let mf = rel.root_mf().unwrap().value;
        assert!((mf - 4.0 / 3.0).abs() < 1e-10, "{mf}");
    }

    #[test]
    fn mf_requires_positive_source_near_zero() {
        let neg = ScalarModel::new("neg", |t| -1.0 - t, |_| 1.0);
        assert!(matches!(neg.root_mf(), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn touching_zero_is_flagged() {
        // f = (t-1)² + 0 touches zero at t = 1 then crosses at t = 3
        let m = ScalarModel::new(
            "touch",
            |t: f64| if t < 2.0 { (t - 1.0).powi(2) } else { 1.0 - (t - 2.0) },
            |_| 1.0,
        );
        let r = m.root_mf().unwrap();
        assert!((r.value - 3.0).abs() < 1e-9);
        assert!(r.touches_zero);
    }

    #[test]
    fn xi_examples() {
        let flat = ScalarModel::new("flat", |t: f64| t.sqrt(), |_| 1.0);
        assert!(flat.xi(0.7).unwrap().abs() < 1e-9);
        let m = mnls_power(1.0);
        assert!((m.xi(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        for q in [0.0, 0.5, 2.0] {
            let m = mnls_power(q);
            let c = m.xi(1.0).unwrap() * 3.0;
            for i in 1..=20 {
                let t = 0.15 * i as f64;
                let expected = c * t * t / (1.0 + 2.0 * t * t);
                assert!((m.xi(t).unwrap() - expected).abs() < 1e-12 * (1.0 + expected));
            }
        }
    }

    #[test]
    fn xi_rejects_points_beyond_mf() {
        let lin = ScalarModel::new("lin", |t| 1.0 - t, |_| 1.0);
        assert!(matches!(lin.xi(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(lin.gamma(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn gamma_examples() {
        for q in [0.0, 0.3, 1.0, 2.5] {
            let expected = q / (q + 1.0);
            let m = power(q);
            for t in [0.01, 0.4, 3.0] {
                assert!((m.gamma(t).unwrap() - expected).abs() < 1e-12);
            }
            let lim = mnls_power(q).gamma_limit().unwrap();
            assert!((lim.value - expected).abs() < 1e-8, "{lim:?}");
        }
    }

    #[test]
    fn gamma_decomposes_into_semilinear_part_and_xi() {
        let m = mnls_power(0.5);
        for i in 1..30 {
            let t = 0.1 * i as f64;
            let lhs = m.gamma(t).unwrap();
            let rhs = m.semilinear_ratio(t).unwrap() - 0.5 * m.xi(t).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn central_difference_fallback() {
        let m = ScalarModel::new("sin", |t: f64| 1.0 + t.sin(), |_| 1.0);
        for t in [0.1, 1.0, 5.0] {
            assert!((m.df(t) - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn phi_torsion_closed_form() {
        let m = ScalarModel::new("torsion", |_| 1.0, |_| 1.0).with_nu(1.0);
        assert!((m.phi(4.0).unwrap() - 2.0).abs() < 1e-9);
        for t in [0.01f64, 0.5, 2.0, 9.0] {
            let expected = 2.0 * (t.sqrt() - 1.0);
            assert!((m.phi(t).unwrap() - expected).abs() < 1e-8 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn phi_reduces_to_semilinear_form_when_weight_is_one() {
        let m = power(0.4);
        for i in 1..=10 {
            let t = 0.3 * i as f64;
            let fd = (m.phi(t + 1e-5).unwrap() - m.phi(t - 1e-5).unwrap()) / 2e-5;
            let expected = 1.0 / m.antiderivative(t).unwrap().sqrt();
            assert!((fd - expected).abs() < 1e-6 * expected, "t={t}");
            assert!((m.phi_derivative(t).unwrap() - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn phi_is_strictly_increasing() {
        let m = mnls_power(0.6);
        let mut prev = m.phi(1e-4).unwrap();
        for i in 1..=60 {
            let t = 0.05 * i as f64;
            let v = m.phi(t).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn phi_rejects_nonpositive_antiderivative() {
        // F(t) = t - t²/2 vanishes at t = 2
        let m = ScalarModel::new("lin", |t| 1.0 - t, |_| 1.0)
            .with_antiderivative(|t| t - 0.5 * t * t)
            .with_nu(1.0);
        assert!(m.phi(2.5).is_err());
    }

    #[test]
    fn limit_estimate_of_smooth_sequence() {
        let l = limit_at_zero(|t| Ok(0.5 - 3.0 * t)).unwrap();
        assert!((l.value - 0.5).abs() < 1e-12);
        assert!(l.monotone_tail);
    }

    #[test]
    fn nu_estimate_is_below_minimum() {
        let m = ScalarModel::new("w", |_| 1.0, |t: f64| 2.0 + (t - 3.0).powi(2));
        assert!((m.nu() - 0.999 * 2.0).abs() < 1e-6);
    }
}
