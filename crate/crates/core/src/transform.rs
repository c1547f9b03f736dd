//! The change of variables `g' = 1/√a(g)`, `g(0) = 0`, which turns the
//! quasilinear problem into the semilinear one `−Δv = h(v)` with `u = g(v)`.
//!
//! `g` is integrated with classical RK4 and stored as a node table; values in
//! between come from a monotone cubic Hermite interpolant, and the same nodes
//! with swapped coordinates give `g⁻¹`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ScalarModel;
use crate::quadrature::{integrate, integrate_graded, QuadOptions};

/// Below this slope an exploding weight is integrated in the `g` variable.
const SWITCH_SLOPE: f64 = 1e-4;
const REFINE_TOL: f64 = 1e-10;
const MAX_SUBSTEPS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub t: f64,
    pub g: f64,
    /// `g'(t) = 1/√a(g(t))`
    pub dg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformTable {
    nodes: Vec<Node>,
    #[serde(with = "crate::ext_float")]
    beta: f64,
    step: f64,
    /// Index of the first node produced in the `g` parameterization, if the
    /// weight explodes inside the requested range.
    switch_index: Option<usize>,
    /// For an exploding weight with `∫√a < ∞` near `β`: the finite `t` at
    /// which `g` reaches `β`. The table stops just short of it.
    saturation: Option<f64>,
}

fn rk4(a: &dyn Fn(f64) -> f64, g: f64, dt: f64) -> f64 {
    let rhs = |x: f64| 1.0 / a(x).sqrt();
    let k1 = rhs(g);
    let k2 = rhs(g + 0.5 * dt * k1);
    let k3 = rhs(g + 0.5 * dt * k2);
    let k4 = rhs(g + dt * k3);
    g + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn advance(a: &dyn Fn(f64) -> f64, g: f64, dt: f64, n: usize) -> f64 {
    let sub = dt / n as f64;
    (0..n).fold(g, |x, _| rk4(a, x, sub))
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let w = x1 - x0;
    let slope = (y1 - y0) / w;
    // Fritsch–Carlson: shrink endpoint slopes that would break monotonicity
    let (mut d0, mut d1) = (d0, d1);
    if slope > 0.0 {
        let (p, q) = (d0 / slope, d1 / slope);
        let r = p * p + q * q;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d0 = tau * p * slope;
            d1 = tau * q * slope;
        }
    }
    let s = (x - x0) / w;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * w * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * w * d1
}

/// Integrates `g' = 1/√a(g)` on `[0, t_max]` with output nodes every `step`.
///
/// Each output step is split into `n` RK4 substeps, with `n` doubled until
/// the `n` and `2n` results agree to `1e-10`. For a weight exploding at
/// `β < ∞` the integration switches, once `g' < 1e-4`, to `dt = √a(g) dg`
/// on a geometric sequence of `g` values accumulating at `β`.
pub fn solve_transform(weight: &ScalarModel, t_max: f64, step: f64) -> Result<TransformTable> {
    if !(t_max > 0.0) || !(step > 0.0) || step > t_max / 100.0 {
        return Err(Error::Invalid(format!(
            "need t_max > 0 and 0 < step <= t_max/100 (t_max = {t_max}, step = {step})"
        )));
    }
    let beta = weight.beta();
    let exploding = beta.is_finite();
    let a = |x: f64| {
        if exploding && x >= beta {
            f64::NAN
        } else {
            weight.a(x)
        }
    };
    let slope = |x: f64| 1.0 / a(x).sqrt();

    let a0 = a(0.0);
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(Error::Transform(format!("a(0) = {a0} is not a positive number")));
    }
    let mut nodes = vec![Node {
        t: 0.0,
        g: 0.0,
        dg: slope(0.0),
    }];
    let mut n = 1usize;
    let mut switch = false;
    let count = (t_max / step).ceil() as usize;
    for k in 1..=count {
        let last = *nodes.last().unwrap();
        if exploding && last.dg < SWITCH_SLOPE {
            switch = true;
            break;
        }
        let t = (k as f64 * step).min(t_max);
        let dt = t - last.t;
        n = (n / 2).max(1);
        let g = loop {
            let coarse = advance(&a, last.g, dt, n);
            let fine = advance(&a, last.g, dt, 2 * n);
            if coarse.is_finite() && fine.is_finite() && (coarse - fine).abs() < REFINE_TOL {
                break Some(fine);
            }
            if exploding && !fine.is_finite() && !coarse.is_finite() {
                // the step runs into β
                break None;
            }
            n *= 2;
            if n > MAX_SUBSTEPS {
                if exploding {
                    break None;
                }
                return Err(Error::Transform(format!(
                    "RK4 refinement did not settle on [{}, {t}]",
                    last.t
                )));
            }
        };
        let Some(g) = g else {
            switch = true;
            break;
        };
        let dg = slope(g);
        if !dg.is_finite() || !(dg > 0.0) {
            if exploding {
                switch = true;
                break;
            }
            return Err(Error::Transform(format!(
                "a(g) is not finite and positive at g = {g}; declare the explosion point beta"
            )));
        }
        nodes.push(Node { t, g, dg });
    }

    let mut switch_index = None;
    let mut saturation = None;
    if switch {
        switch_index = Some(nodes.len());
        let root = |x: f64| a(x).sqrt();
        let opts = QuadOptions::rel(1e-12);
        loop {
            let last = *nodes.last().unwrap();
            if last.t >= t_max {
                break;
            }
            let gap = beta - last.g;
            let next = beta - 0.5 * gap;
            if gap <= 1e-9 * beta || next <= last.g {
                let tail = integrate_graded(root, last.g, beta, beta, opts);
                if let Ok(r) = tail {
                    saturation = Some(last.t + r.value);
                }
                break;
            }
            let dt = integrate(root, last.g, next, opts)?.value;
            nodes.push(Node {
                t: last.t + dt,
                g: next,
                dg: slope(next),
            });
        }
    }

    Ok(TransformTable {
        nodes,
        beta,
        step,
        switch_index,
        saturation,
    })
}

impl TransformTable {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Largest `t` covered by the table.
    pub fn t_max(&self) -> f64 {
        self.nodes.last().unwrap().t
    }

    /// `g` at the last node.
    pub fn g_max(&self) -> f64 {
        self.nodes.last().unwrap().g
    }

    pub fn saturation(&self) -> Option<f64> {
        self.saturation
    }

    /// Whether part of the table was integrated in the `g` parameterization.
    pub fn switched(&self) -> bool {
        self.switch_index.is_some()
    }

    pub fn g_of(&self, t: f64) -> Result<f64> {
        let hi = self.t_max();
        if !(t >= 0.0 && t <= hi) {
            return Err(Error::OutOfRange { t, lo: 0.0, hi });
        }
        let i = self.nodes.partition_point(|n| n.t <= t).clamp(1, self.nodes.len() - 1);
        let (p, q) = (self.nodes[i - 1], self.nodes[i]);
        if t == q.t {
            return Ok(q.g);
        }
        Ok(hermite(p.t, q.t, p.g, q.g, p.dg, q.dg, t))
    }

    pub fn g_inv_of(&self, s: f64) -> Result<f64> {
        let hi = self.g_max();
        if !(s >= 0.0 && s <= hi) {
            return Err(Error::OutOfRange { t: s, lo: 0.0, hi });
        }
        let i = self.nodes.partition_point(|n| n.g <= s).clamp(1, self.nodes.len() - 1);
        let (p, q) = (self.nodes[i - 1], self.nodes[i]);
        if s == q.g {
            return Ok(q.t);
        }
        Ok(hermite(p.g, q.g, p.t, q.t, 1.0 / p.dg, 1.0 / q.dg, s))
    }

    /// CSV with header `t,g,gprime`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,g,gprime\n");
        for n in &self.nodes {
            out.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", n.t, n.g, n.dg));
        }
        out
    }
}

/// `h(v) = f(g(v)) / √a(g(v))`.
pub fn h_of(model: &ScalarModel, table: &TransformTable, v: f64) -> Result<f64> {
    let g = table.g_of(v)?;
    if g > 0.0 && g >= model.beta() {
        return Err(Error::OutOfRange {
            t: g,
            lo: 0.0,
            hi: model.beta(),
        });
    }
    Ok(model.f(g) / model.a(g).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub model: String,
    pub samples: Vec<f64>,
    /// `max |H(t) − F(g(t))|` with `H` the quadrature of `h` from `0`.
    pub max_h_defect: f64,
    /// `max |H h'/h² (t) − γ(g(t))|`.
    pub max_gamma_defect: f64,
    /// Sample point where each maximum is attained.
    pub worst_h_at: f64,
    pub worst_gamma_at: f64,
}

impl IdentityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_h_defect < tol && self.max_gamma_defect < tol
    }
}

/// Checks `H = F∘g` and `H h'/h² = γ∘g` at `samples` equally spaced points
/// of `(0, T]`, where `T` is the table range cut short of `g⁻¹(0.95 M_f)`
/// (`γ` blows up at `M_f`) and, for an exploding weight, of `g⁻¹(0.95 β)`.
///
/// `h'` is a central difference with the table step, Richardson-extrapolated
/// against twice that step.
pub fn verify_identities(
    model: &ScalarModel,
    table: &TransformTable,
    samples: usize,
) -> Result<IdentityReport> {
    if samples < 10 {
        return Err(Error::Invalid(format!("need at least 10 samples, got {samples}")));
    }
    let delta = table.step();
    let mut upper = table.t_max() - 2.0 * delta;
    let mf = model.root_mf()?.value;
    let mut g_cap = 0.95 * mf;
    if model.beta().is_finite() {
        g_cap = g_cap.min(0.95 * model.beta());
    }
    if g_cap < table.g_max() {
        upper = upper.min(table.g_inv_of(g_cap)? * (1.0 - 1e-9));
    }
    if !(upper > 0.0) {
        return Err(Error::Invalid("table too short for identity checks".into()));
    }
    let points: Vec<f64> = (1..=samples)
        .map(|k| upper * k as f64 / samples as f64)
        .collect();

    let h = |v: f64| h_of(model, table, v).unwrap_or(f64::NAN);
    let opts = QuadOptions::rel(1e-12);
    let mut big_h = 0.0;
    let mut prev = 0.0;
    let mut report = IdentityReport {
        model: model.name().to_string(),
        samples: points.clone(),
        max_h_defect: 0.0,
        max_gamma_defect: 0.0,
        worst_h_at: 0.0,
        worst_gamma_at: 0.0,
    };
    for &t in &points {
        big_h += integrate_graded(h, prev, t, 0.0, opts)?.value;
        prev = t;
        let g = table.g_of(t)?;
        let defect_h = (big_h - model.antiderivative(g)?).abs();

        let d1 = (h(t + delta) - h(t - delta)) / (2.0 * delta);
        let d2 = if t > 2.0 * delta {
            (h(t + 2.0 * delta) - h(t - 2.0 * delta)) / (4.0 * delta)
        } else {
            d1
        };
        let dh = (4.0 * d1 - d2) / 3.0;
        let hv = h(t);
        let defect_gamma = (big_h * dh / (hv * hv) - model.gamma(g)?).abs();

        if !(defect_h <= report.max_h_defect) {
            report.max_h_defect = defect_h;
            report.worst_h_at = t;
        }
        if !(defect_gamma <= report.max_gamma_defect) {
            report.max_gamma_defect = defect_gamma;
            report.worst_gamma_at = t;
        }
    }
    Ok(report)
}
