//! Grid-based checks of the structural hypotheses on `(f, a)`:
//!
//! - (i) `√F` concave on `(0, M_f)`;
//! - (ii) `F/f` convex on `(0, M_f)`;
//! - (iii) `ξ` non-decreasing on `(0, M_f)` with `ξ(0⁺) ≤ 0`;
//! - (γ) `γ` non-increasing on `(0, M_f)` with `γ(0⁺) ≤ 1/2`.
//!
//! (i)–(iii) together imply (γ). A pass only means that no violation was
//! found on the graded grid at the stated tolerance; a fail carries the
//! points where the defining inequality breaks.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{LimitEstimate, ScalarModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionOptions {
    pub grid_size: usize,
    /// Defects below `tol_rel · scale` are treated as roundoff, where `scale`
    /// is the local magnitude of the tested function.
    pub tol_rel: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            grid_size: 512,
            tol_rel: 1e-9,
        }
    }
}

/// Points where a defining inequality fails, with the size of the failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `[x, y, (x+y)/2]` for midpoint tests, `[s, t]` for monotonicity
    /// tests, `[t]` for a limit.
    pub points: Vec<f64>,
    /// Function values at `points`.
    pub values: Vec<f64>,
    /// Amount by which the inequality is violated (positive).
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { witness: Witness },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail { .. } => "fail",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fail { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Test grid on `(0, U)`, `U = min(M_f, t_cap, β)`: geometric from `1e-8`
/// toward the middle, and when `U` is a root of `f` or an explosion point,
/// geometric again toward `U`.
pub fn sample_grid(model: &ScalarModel, n: usize) -> Result<Vec<f64>> {
    let n = n.max(8);
    let upper = model.test_upper()?;
    let mf = model.root_mf()?.value;
    let graded_top = upper == mf || upper == model.beta();
    let geometric = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        let r = (hi / lo).powf(1.0 / (k - 1) as f64);
        (0..k).map(|i| lo * r.powi(i as i32)).collect()
    };
    if graded_top {
        let half = upper / 2.0;
        let lo = 1e-8 * upper;
        let left = geometric(lo, half, n / 2);
        let right = geometric(lo, half, n - n / 2);
        let mut grid = left;
        // skip the duplicated midpoint
        grid.extend(right.iter().rev().skip(1).map(|gap| upper - gap));
        Ok(grid)
    } else {
        Ok(geometric(1e-8 * upper.min(1.0), upper, n))
    }
}

fn evaluate(grid: &[f64], w: &dyn Fn(f64) -> Result<f64>) -> std::result::Result<Vec<f64>, String> {
    grid.iter()
        .map(|&t| match w(t) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(format!("non-finite value {v} at t = {t:e}")),
            Err(e) => Err(format!("evaluation failed at t = {t:e}: {e}")),
        })
        .collect()
}

/// Midpoint test `sign · (w(m) − (w(x)+w(y))/2) ≥ −tol` over pairs
/// `(t_{i−k}, t_{i+k})` for `k = 1, 2, 4, …`. `sign = +1` tests concavity,
/// `−1` convexity.
fn midpoint_test(grid: &[f64], w: &dyn Fn(f64) -> Result<f64>, sign: f64, tol_rel: f64) -> Verdict {
    let values = match evaluate(grid, w) {
        Ok(v) => v,
        Err(reason) => return Verdict::Inconclusive { reason },
    };
    let n = grid.len();
    // (relative violation, witness)
    let mut worst: Option<(f64, Witness)> = None;
    let mut k = 1;
    while 2 * k < n {
        for i in k..n - k {
            let (x, y) = (grid[i - k], grid[i + k]);
            let m = 0.5 * (x + y);
            let wm = match w(m) {
                Ok(v) if v.is_finite() => v,
                _ => {
                    return Verdict::Inconclusive {
                        reason: format!("evaluation failed at t = {m:e}"),
                    }
                }
            };
            let (wx, wy) = (values[i - k], values[i + k]);
            let defect = sign * (wm - 0.5 * (wx + wy));
            let scale = wx.abs().max(wy.abs()).max(wm.abs());
            let rel = -defect / scale;
            if rel > tol_rel && worst.as_ref().is_none_or(|(r, _)| rel > *r) {
                let witness = Witness {
                    points: vec![x, y, m],
                    values: vec![wx, wy, wm],
                    violation: -defect,
                };
                worst = Some((rel, witness));
            }
        }
        k *= 2;
    }
    match worst {
        Some((_, witness)) => Verdict::Fail { witness },
        None => Verdict::Pass,
    }
}

/// `sign · (w(t_{i+1}) − w(t_i)) ≥ −tol` on consecutive grid points; `+1`
/// tests non-decreasing, `−1` non-increasing.
fn monotone_test(grid: &[f64], values: &[f64], sign: f64, tol_rel: f64) -> Option<Witness> {
    let mut worst: Option<Witness> = None;
    for i in 1..grid.len() {
        let (a, b) = (values[i - 1], values[i]);
        let step = sign * (b - a);
        let scale = a.abs().max(b.abs()).max(1.0);
        if step < -tol_rel * scale && worst.as_ref().is_none_or(|w| -step > w.violation) {
            worst = Some(Witness {
                points: vec![grid[i - 1], grid[i]],
                values: vec![a, b],
                violation: -step,
            });
        }
    }
    worst
}

/// A limit that must satisfy `value ≤ bound`.
fn limit_verdict(limit: &LimitEstimate, bound: f64) -> Option<Verdict> {
    let slack = 1e-8_f64.max(10.0 * limit.error);
    if limit.value <= bound + slack {
        return None;
    }
    if limit.value - bound > 10.0 * slack || limit.monotone_tail {
        let (t, v) = *limit.samples.last().unwrap();
        return Some(Verdict::Fail {
            witness: Witness {
                points: vec![t],
                values: vec![v],
                violation: limit.value - bound,
            },
        });
    }
    Some(Verdict::Inconclusive {
        reason: format!(
            "limit {} ± {} is too uncertain to compare with {bound}",
            limit.value, limit.error
        ),
    })
}

/// (i): `√F` concave.
pub fn check_sqrt_f_concave(model: &ScalarModel, opts: &ConditionOptions) -> Verdict {
    match sample_grid(model, opts.grid_size) {
        Ok(grid) => midpoint_test(&grid, &|t| Ok(model.antiderivative(t)?.sqrt()), 1.0, opts.tol_rel),
        Err(e) => Verdict::Inconclusive { reason: e.to_string() },
    }
}

/// (ii): `F/f` convex.
pub fn check_f_over_f_convex(model: &ScalarModel, opts: &ConditionOptions) -> Verdict {
    match sample_grid(model, opts.grid_size) {
        Ok(grid) => midpoint_test(
            &grid,
            &|t| Ok(model.antiderivative(t)? / model.f(t)),
            -1.0,
            opts.tol_rel,
        ),
        Err(e) => Verdict::Inconclusive { reason: e.to_string() },
    }
}

fn monotone_with_limit(
    model: &ScalarModel,
    opts: &ConditionOptions,
    func: &dyn Fn(f64) -> Result<f64>,
    limit: Result<LimitEstimate>,
    sign: f64,
    bound: f64,
) -> (Verdict, Option<LimitEstimate>) {
    let limit = match limit {
        Ok(l) => l,
        Err(e) => return (Verdict::Inconclusive { reason: e.to_string() }, None),
    };
    let grid = match sample_grid(model, opts.grid_size) {
        Ok(g) => g,
        Err(e) => return (Verdict::Inconclusive { reason: e.to_string() }, Some(limit)),
    };
    let values = match evaluate(&grid, func) {
        Ok(v) => v,
        Err(reason) => return (Verdict::Inconclusive { reason }, Some(limit)),
    };
    if let Some(witness) = monotone_test(&grid, &values, sign, opts.tol_rel) {
        return (Verdict::Fail { witness }, Some(limit));
    }
    let verdict = limit_verdict(&limit, bound).unwrap_or(Verdict::Pass);
    (verdict, Some(limit))
}

/// (iii): `ξ` non-decreasing with `ξ(0⁺) ≤ 0`.
pub fn check_xi_monotone(model: &ScalarModel, opts: &ConditionOptions) -> (Verdict, Option<LimitEstimate>) {
    monotone_with_limit(model, opts, &|t| model.xi(t), model.xi_limit(), 1.0, 0.0)
}

/// `γ` non-increasing with `γ(0⁺) ≤ 1/2`.
pub fn check_gamma(model: &ScalarModel, opts: &ConditionOptions) -> (Verdict, Option<LimitEstimate>) {
    monotone_with_limit(model, opts, &|t| model.gamma(t), model.gamma_limit(), -1.0, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub model: String,
    #[serde(with = "crate::ext_float")]
    pub m_f: f64,
    /// `f` reaches zero before its first sign change, so the two readings of
    /// `M_f` (`inf{f = 0}` and `inf{f ≤ 0}`) may disagree.
    pub m_f_touches_zero: bool,
    pub verdict_i: Verdict,
    pub verdict_ii: Verdict,
    pub verdict_iii: Verdict,
    pub verdict_gamma: Verdict,
    pub limit_xi0: Option<LimitEstimate>,
    pub limit_gamma0: Option<LimitEstimate>,
    pub options: ConditionOptions,
    pub sample_grid: Vec<f64>,
    /// False when (i)–(iii) pass but the γ check does not.
    pub implication_consistent: bool,
}

impl ConditionReport {
    /// Hypotheses (i)–(iii) all hold.
    pub fn all_pass(&self) -> bool {
        self.verdict_i.is_pass() && self.verdict_ii.is_pass() && self.verdict_iii.is_pass()
    }

    pub fn any_fail(&self) -> bool {
        self.verdicts().iter().any(|(_, v)| v.is_fail())
    }

    pub fn verdicts(&self) -> [(&'static str, &Verdict); 4] {
        [
            ("i: sqrt(F) concave", &self.verdict_i),
            ("ii: F/f convex", &self.verdict_ii),
            ("iii: xi non-decreasing, xi(0+) <= 0", &self.verdict_iii),
            ("gamma non-increasing, gamma(0+) <= 1/2", &self.verdict_gamma),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        writeln!(s, "model: {}", self.model)?;
        writeln!(s, "M_f:   {}", self.m_f)?;
        if self.m_f_touches_zero {
            writeln!(s, "       (f touches zero before changing sign)")?;
        }
        writeln!(s, "grid:  {} points, tol_rel {:e}", self.sample_grid.len(), self.options.tol_rel)?;
        writeln!(s)?;
        writeln!(s, "{:<42} {}", "condition", "verdict")?;
        for (name, v) in self.verdicts() {
            let detail = match v {
                Verdict::Pass => String::new(),
                Verdict::Fail { witness } => format!(
                    "  at t = {:?}, violation {:.3e}",
                    witness.points, witness.violation
                ),
                Verdict::Inconclusive { reason } => format!("  ({reason})"),
            };
            writeln!(s, "{:<42} {}{}", name, v.kind(), detail)?;
        }
        if let Some(l) = &self.limit_xi0 {
            writeln!(s, "\nxi(0+)    = {:.9} ± {:.1e}", l.value, l.error)?;
        }
        if let Some(l) = &self.limit_gamma0 {
            writeln!(s, "gamma(0+) = {:.9} ± {:.1e}", l.value, l.error)?;
        }
        if !self.implication_consistent {
            writeln!(s, "\nwarning: i-iii pass but the gamma check does not")?;
        }
        out.write_str(&s)
    }
}

/// Runs all checks on `model`.
pub fn classify(model: &ScalarModel, opts: &ConditionOptions) -> ConditionReport {
    let (m_f, touches) = match model.root_mf() {
        Ok(r) => (r.value, r.touches_zero),
        Err(_) => (f64::NAN, false),
    };
    let verdict_i = check_sqrt_f_concave(model, opts);
    let verdict_ii = check_f_over_f_convex(model, opts);
    let (verdict_iii, limit_xi0) = check_xi_monotone(model, opts);
    let (verdict_gamma, limit_gamma0) = check_gamma(model, opts);
    let implication_consistent = !(verdict_i.is_pass()
        && verdict_ii.is_pass()
        && verdict_iii.is_pass()
        && !verdict_gamma.is_pass());
    ConditionReport {
        model: model.name().to_string(),
        m_f,
        m_f_touches_zero: touches,
        verdict_i,
        verdict_ii,
        verdict_iii,
        verdict_gamma,
        limit_xi0,
        limit_gamma0,
        options: *opts,
        sample_grid: sample_grid(model, opts.grid_size).unwrap_or_default(),
        implication_consistent,
    }
}
