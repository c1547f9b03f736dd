//! Midpoint tests of concavity and quasiconcavity on grid fields, convexity
//! of superlevel sets, the three-point witness of the plateau counterexample,
//! and the boundary normal-derivative test for eigenvalue-type sources.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Field};
use crate::model::ScalarModel;

/// `φ` of a model tabulated on a geometric grid, with cubic Hermite
/// interpolation using the exact `φ′ = √(a/F)`.
#[derive(Debug, Clone)]
pub struct PhiMap {
    model: ScalarModel,
    t: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
}

// 5-point Gauss–Legendre on [−1, 1]
const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

impl PhiMap {
    /// Tabulates `φ` on `[1e-9·t_hi, t_hi]` with `n` geometric nodes.
    pub fn new(model: &ScalarModel, t_hi: f64, n: usize) -> Result<Self> {
        if !(t_hi > 0.0) || n < 2 {
            return Err(Error::Invalid(format!("bad φ table range {t_hi} with {n} nodes")));
        }
        let t_lo = 1e-9 * t_hi;
        let ratio = (t_hi / t_lo).powf(1.0 / (n - 1) as f64);
        let t: Vec<f64> = (0..n).map(|i| if i == n - 1 { t_hi } else { t_lo * ratio.powi(i as i32) }).collect();
        let d: Vec<f64> = t.iter().map(|&s| model.phi_derivative(s)).collect::<Result<_>>()?;
        let mut v = Vec::with_capacity(n);
        v.push(model.phi(t_lo)?);
        for w in t.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            let mut s = 0.0;
            for (x, wt) in GL_X.iter().zip(GL_W) {
                s += wt * model.phi_derivative(m + r * x)?;
            }
            v.push(v.last().unwrap() + r * s);
        }
        Ok(Self {
            model: model.clone(),
            t,
            v,
            d,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x < self.t[0] || x > self.t[n - 1] {
            return self.model.phi(x).unwrap_or(f64::NAN);
        }
        let i = self.t.partition_point(|&s| s <= x).clamp(1, n - 1);
        let (a, b) = (self.t[i - 1], self.t[i]);
        let h = b - a;
        let s = (x - a) / h;
        let (h00, h10) = ((1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s), s * (1.0 - s) * (1.0 - s));
        let (h01, h11) = (s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        h00 * self.v[i - 1] + h10 * h * self.d[i - 1] + h01 * self.v[i] + h11 * h * self.d[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// `w(m) ≥ (w(x) + w(y))/2 − tol`
    Concavity,
    /// `w(m) ≥ min(w(x), w(y)) − tol`
    Quasiconcavity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MidpointOptions {
    pub pairs: usize,
    pub tol: f64,
    pub seed: u64,
    /// Nodes closer than this many lattice steps to a non-interior lattice
    /// point are excluded as pair endpoints.
    pub band: i64,
    /// Add the deterministic row/column sweep.
    pub sweep: bool,
}

impl MidpointOptions {
    /// `10⁵` pairs at tolerance `5h²`, band of two lattice steps.
    pub fn for_grid(h: f64) -> Self {
        Self {
            pairs: 100_000,
            tol: 5.0 * h * h,
            seed: 0x5eed,
            band: 2,
            sweep: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairWitness {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub mid: [f64; 2],
    /// transformed values at `x`, `y` and the midpoint
    pub values: [f64; 3],
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub kind: TestKind,
    pub seed: u64,
    pub tol: f64,
    pub band: i64,
    pub pairs_requested: usize,
    pub pairs_checked: usize,
    pub sweep_checked: usize,
    /// Largest `bound − w(m)` seen; positive beyond `tol` means a violation.
    pub worst_defect: f64,
    pub violations: usize,
    /// Up to ten worst violations.
    pub witnesses: Vec<PairWitness>,
    pub passed: bool,
}

impl ConcavityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const MAX_WITNESSES: usize = 10;

/// Midpoint test of `w = transform ∘ u`, with `u` bilinearly interpolated at
/// the midpoint before the transform is applied. Endpoints are grid nodes
/// outside the boundary band.
pub fn midpoint_test(
    field: &Field,
    transform: Option<&(dyn Fn(f64) -> f64 + Sync)>,
    kind: TestKind,
    opts: &MidpointOptions,
) -> Result<ConcavityReport> {
    let grid = field.grid();
    let u = field.values();
    let w = |x: f64| transform.map_or(x, |f| f(x));
    let admissible: Vec<usize> = (0..grid.len()).filter(|&k| grid.has_interior_block(k, opts.band)).collect();
    if admissible.len() < 2 {
        return Err(Error::Invalid(format!(
            "only {} nodes lie outside the boundary band",
            admissible.len()
        )));
    }
    let node_w: Vec<f64> = u.iter().map(|&x| w(x)).collect();
    let mut report = ConcavityReport {
        kind,
        seed: opts.seed,
        tol: opts.tol,
        band: opts.band,
        pairs_requested: opts.pairs,
        pairs_checked: 0,
        sweep_checked: 0,
        worst_defect: f64::NEG_INFINITY,
        violations: 0,
        witnesses: Vec::new(),
        passed: true,
    };
    let check = |a: usize, b: usize, report: &mut ConcavityReport| -> bool {
        let (na, nb) = (grid.node(a), grid.node(b));
        let mid = [0.5 * (na.x + nb.x), 0.5 * (na.y + nb.y)];
        let um = if (na.i + nb.i) % 2 == 0 && (na.j + nb.j) % 2 == 0 {
            grid.at((na.i + nb.i) / 2, (na.j + nb.j) / 2).map(|k| u[k])
        } else {
            field.interpolate(mid[0], mid[1])
        };
        let Some(um) = um else { return false };
        let (wa, wb, wm) = (node_w[a], node_w[b], w(um));
        let bound = match kind {
            TestKind::Concavity => 0.5 * (wa + wb),
            TestKind::Quasiconcavity => wa.min(wb),
        };
        let defect = bound - wm;
        report.worst_defect = report.worst_defect.max(defect);
        if !(defect <= opts.tol) {
            report.violations += 1;
            let wit = PairWitness {
                x: [na.x, na.y],
                y: [nb.x, nb.y],
                mid,
                values: [wa, wb, wm],
                defect,
            };
            let ws = &mut report.witnesses;
            let pos = ws.partition_point(|o| o.defect >= defect);
            if pos < MAX_WITNESSES {
                ws.insert(pos, wit);
                ws.truncate(MAX_WITNESSES);
            }
        }
        true
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut attempts = 0usize;
    while report.pairs_checked < opts.pairs {
        attempts += 1;
        if attempts > 20 * opts.pairs.max(1) {
            return Err(Error::Invalid(format!(
                "only {} admissible pairs after {attempts} draws",
                report.pairs_checked
            )));
        }
        let a = admissible[rng.random_range(0..admissible.len())];
        let b = admissible[rng.random_range(0..admissible.len())];
        if a == b {
            continue;
        }
        if check(a, b, &mut report) {
            report.pairs_checked += 1;
        }
    }
    if opts.sweep {
        let inside = |k: usize| grid.has_interior_block(k, opts.band);
        for &a in &admissible {
            let n = grid.node(a);
            for (di, dj) in [(1i64, 0i64), (0, 1)] {
                let mut d = 1i64;
                loop {
                    let Some(b) = grid.at(n.i + 2 * d * di, n.j + 2 * d * dj) else { break };
                    if inside(b) && check(a, b, &mut report) {
                        report.sweep_checked += 1;
                    }
                    d *= 2;
                }
            }
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// Concavity of `transform ∘ u` (identity when `None`).
pub fn midpoint_concavity(
    field: &Field,
    transform: Option<&(dyn Fn(f64) -> f64 + Sync)>,
    opts: &MidpointOptions,
) -> Result<ConcavityReport> {
    midpoint_test(field, transform, TestKind::Concavity, opts)
}

/// Quasiconcavity of `u`: `u(m) ≥ min(u(x), u(y)) − tol`.
pub fn quasiconcavity(field: &Field, opts: &MidpointOptions) -> Result<ConcavityReport> {
    midpoint_test(field, None, TestKind::Quasiconcavity, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct Triple {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub mid: [f64; 2],
    pub values: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperlevelReport {
    pub eta: f64,
    pub tol: f64,
    pub seed: u64,
    pub members: usize,
    pub pairs_checked: usize,
    pub convex: bool,
    /// The violating triple with the lowest midpoint value.
    pub witness: Option<Triple>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperlevelOptions {
    pub pairs: usize,
    pub seed: u64,
    /// A midpoint counts as outside only if `u(m) ≤ η − tol`.
    pub tol: f64,
}

impl Default for SuperlevelOptions {
    fn default() -> Self {
        Self {
            pairs: 100_000,
            seed: 0x5eed,
            tol: 0.0,
        }
    }
}

/// Tests whether `{u > η}` is midpoint convex on the grid: sampled member
/// pairs plus, along every lattice row and column, the member pairs
/// straddling a gap.
pub fn superlevel_convexity(field: &Field, eta: f64, opts: &SuperlevelOptions) -> Result<SuperlevelReport> {
    let grid = field.grid();
    let u = field.values();
    if !(eta > 0.0 && eta < field.max()) {
        return Err(Error::Invalid(format!("level {eta} outside (0, max u = {})", field.max())));
    }
    let members: Vec<usize> = (0..grid.len()).filter(|&k| u[k] > eta).collect();
    let mut report = SuperlevelReport {
        eta,
        tol: opts.tol,
        seed: opts.seed,
        members: members.len(),
        pairs_checked: 0,
        convex: true,
        witness: None,
    };
    let mut worst = f64::INFINITY;
    let mut check = |a: usize, b: usize, report: &mut SuperlevelReport| {
        let (na, nb) = (grid.node(a), grid.node(b));
        let mid = [0.5 * (na.x + nb.x), 0.5 * (na.y + nb.y)];
        let um = if (na.i + nb.i) % 2 == 0 && (na.j + nb.j) % 2 == 0 {
            grid.at((na.i + nb.i) / 2, (na.j + nb.j) / 2).map(|k| u[k])
        } else {
            field.interpolate(mid[0], mid[1])
        };
        let Some(um) = um else { return };
        report.pairs_checked += 1;
        if um <= eta - opts.tol && um < worst {
            worst = um;
            report.convex = false;
            report.witness = Some(Triple {
                x: [na.x, na.y],
                y: [nb.x, nb.y],
                mid,
                values: [u[a], u[b], um],
            });
        }
    };
    // lattice lines: a gap between members is a violation at a lattice
    // midpoint whenever some symmetric pair straddles it
    let (ni, nj) = grid.lattice_extent();
    let lines = (-nj..=nj)
        .map(|j| (-ni..=ni).map(move |i| (i, j)).collect::<Vec<_>>())
        .chain((-ni..=ni).map(|i| (-nj..=nj).map(move |j| (i, j)).collect::<Vec<_>>()));
    for line in lines {
        let inset: Vec<Option<usize>> = line
            .iter()
            .map(|&(i, j)| grid.at(i, j).filter(|&k| u[k] > eta))
            .collect();
        let first = inset.iter().position(|k| k.is_some());
        let last = inset.iter().rposition(|k| k.is_some());
        let (Some(first), Some(last)) = (first, last) else { continue };
        for gap in first..=last {
            if inset[gap].is_some() {
                continue;
            }
            let reach = (gap - first).min(last - gap);
            for d in 1..=reach {
                if let (Some(a), Some(b)) = (inset[gap - d], inset[gap + d]) {
                    check(a, b, &mut report);
                    break;
                }
            }
        }
    }
    if members.len() >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.pairs {
            let a = members[rng.random_range(0..members.len())];
            let b = members[rng.random_range(0..members.len())];
            if a != b {
                check(a, b, &mut report);
            }
        }
    }
    if members.is_empty() {
        return Err(Error::Invalid(format!("superlevel set at {eta} is empty")));
    }
    Ok(report)
}

/// The structured witness of the counterexample on `stadium(α)`:
/// `P = (0, C₂)` at the top of the bump region `{u > 1}` on the vertical
/// axis, `Q = (α/2, 0)` on the midline and `M = (P + Q)/2`.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessTriple {
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub m: [f64; 2],
    /// `u(P), u(Q), u(M)`
    pub values: [f64; 3],
    /// Highest node of `{u > 1}` on the vertical axis.
    pub c2: f64,
    /// `sup |y|` over the nodes of `{u > 1}`.
    pub sup_y: f64,
    /// `sup |x|` over the nodes of `{u > 1}`.
    pub sup_x: f64,
    pub eta: f64,
    /// `u(P) > η`, `u(Q) > η` and `u(M) < η`.
    pub holds: bool,
}

impl WitnessTriple {
    /// Levels for which the chain `u(M) < η < min(u(P), u(Q))` holds.
    pub fn admissible_levels(&self) -> (f64, f64) {
        (self.values[2], self.values[0].min(self.values[1]))
    }

    /// The window `(1/2 − C₂²/8, 1/2)` suggested by the strip profile.
    pub fn profile_window(&self) -> (f64, f64) {
        (0.5 - self.c2 * self.c2 / 8.0, 0.5)
    }

    /// CSV with header `label,x,y,u`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,x,y,u\n");
        for (label, pt, v) in [("P", self.p, self.values[0]), ("Q", self.q, self.values[1]), ("M", self.m, self.values[2])] {
            out.push_str(&format!("{label},{:.10},{:.10},{:.12e}\n", pt[0], pt[1], v));
        }
        out
    }
}

fn value_at(field: &Field, x: f64, y: f64) -> Option<f64> {
    let g = field.grid();
    let (i, j, s, t) = g.cell(x, y);
    if s.abs() < 1e-9 && t.abs() < 1e-9 {
        return g.at(i, j).map(|k| field.values()[k]);
    }
    field.interpolate(x, y)
}

/// Builds the witness triple. When `eta` is `None` the level is placed in
/// the middle of the admissible interval (if it is nonempty).
pub fn find_witness_triple(field: &Field, eta: Option<f64>, alpha: f64) -> Result<WitnessTriple> {
    let g = field.grid();
    let u = field.values();
    let bump: Vec<usize> = (0..g.len()).filter(|&k| u[k] > 1.0).collect();
    if bump.is_empty() {
        return Err(Error::Infeasible(
            "the region {u > 1} is empty: the constraint is inactive".into(),
        ));
    }
    let (cx, cy) = g.domain().center();
    let sup_y = bump.iter().map(|&k| (g.node(k).y - cy).abs()).fold(0.0, f64::max);
    let sup_x = bump.iter().map(|&k| (g.node(k).x - cx).abs()).fold(0.0, f64::max);
    let c2 = bump
        .iter()
        .map(|&k| g.node(k))
        .filter(|n| n.i == 0)
        .map(|n| n.y - cy)
        .fold(f64::NEG_INFINITY, f64::max);
    if !c2.is_finite() {
        return Err(Error::Infeasible("the bump region misses the vertical axis".into()));
    }
    let p = [cx, cy + c2];
    let q = [cx + 0.5 * alpha, cy];
    let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    let at = |pt: [f64; 2]| {
        value_at(field, pt[0], pt[1])
            .ok_or_else(|| Error::Invalid(format!("({}, {}) is not inside the interpolation region", pt[0], pt[1])))
    };
    let values = [at(p)?, at(q)?, at(m)?];
    let eta = eta.unwrap_or(0.5 * (values[2] + values[0].min(values[1])));
    let holds = values[0] > eta && values[1] > eta && values[2] < eta;
    Ok(WitnessTriple {
        p,
        q,
        m,
        values,
        c2,
        sup_y,
        sup_x,
        eta,
        holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RectangleReport {
    pub threshold: f64,
    pub members: usize,
    pub passed: bool,
    /// A member `(x̄, ȳ)` and a node of `(−x̄, x̄) × (−ȳ, ȳ)` at or below the
    /// threshold.
    pub witness: Option<([f64; 2], [f64; 2])>,
}

/// Checks that every node `(x̄, ȳ)` with `u > threshold` has the whole open
/// lattice rectangle `(−x̄, x̄) × (−ȳ, ȳ)` (about the domain centre) above the
/// threshold.
pub fn rectangle_property(field: &Field, threshold: f64) -> RectangleReport {
    let g = field.grid();
    let u = field.values();
    let (ni, nj) = g.lattice_extent();
    let (wi, wj) = ((2 * ni + 1) as usize, (2 * nj + 1) as usize);
    // prefix counts of interior nodes at or below the threshold
    let mut pre = vec![0u32; (wi + 1) * (wj + 1)];
    for a in 0..wi {
        for b in 0..wj {
            let bad = g
                .at(a as i64 - ni, b as i64 - nj)
                .is_some_and(|k| u[k] <= threshold) as u32;
            pre[(a + 1) * (wj + 1) + b + 1] =
                bad + pre[a * (wj + 1) + b + 1] + pre[(a + 1) * (wj + 1) + b] - pre[a * (wj + 1) + b];
        }
    }
    let count = |i0: i64, i1: i64, j0: i64, j1: i64| -> u32 {
        // inclusive lattice ranges
        let (a0, a1) = ((i0 + ni) as usize, (i1 + ni) as usize + 1);
        let (b0, b1) = ((j0 + nj) as usize, (j1 + nj) as usize + 1);
        pre[a1 * (wj + 1) + b1] + pre[a0 * (wj + 1) + b0] - pre[a0 * (wj + 1) + b1] - pre[a1 * (wj + 1) + b0]
    };
    let mut report = RectangleReport {
        threshold,
        members: 0,
        passed: true,
        witness: None,
    };
    for (k, n) in g.nodes().iter().enumerate() {
        if u[k] <= threshold {
            continue;
        }
        report.members += 1;
        let (ri, rj) = (n.i.abs() - 1, n.j.abs() - 1);
        if ri < 0 || rj < 0 || count(-ri, ri, -rj, rj) == 0 {
            continue;
        }
        report.passed = false;
        if report.witness.is_none() {
            'search: for i in -ri..=ri {
                for j in -rj..=rj {
                    if let Some(b) = g.at(i, j).filter(|&b| u[b] <= threshold) {
                        let m = g.node(b);
                        report.witness = Some(([n.x, n.y], [m.x, m.y]));
                        break 'search;
                    }
                }
            }
        }
    }
    report
}

/// A boundary point with its inward unit normal and curvature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryFrame {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub curvature: f64,
}

/// `n` boundary frames spread over the curved and straight parts of `∂Ω`.
pub fn boundary_frames(domain: &ConvexDomain, n: usize) -> Vec<BoundaryFrame> {
    // arc of the ellipse (a cos t, b sin t) shifted by (cx, cy)
    let ellipse = |a: f64, b: f64, cx: f64, cy: f64, t: f64| {
        let (c, s) = (t.cos(), t.sin());
        let out = [b * c, a * s];
        let len = out[0].hypot(out[1]);
        BoundaryFrame {
            point: [cx + a * c, cy + b * s],
            normal: [-out[0] / len, -out[1] / len],
            curvature: a * b / (a * a * s * s + b * b * c * c).powf(1.5),
        }
    };
    let n = n.max(4);
    let param = |k: usize, m: usize, lo: f64, hi: f64| lo + (hi - lo) * (k as f64 + 0.5) / m as f64;
    match *domain {
        ConvexDomain::Disk { center, radius } => (0..n)
            .map(|k| ellipse(radius, radius, center[0], center[1], param(k, n, 0.0, 2.0 * PI)))
            .collect(),
        ConvexDomain::Ellipse { semi_x, semi_y } => (0..n)
            .map(|k| ellipse(semi_x, semi_y, 0.0, 0.0, param(k, n, 0.0, 2.0 * PI)))
            .collect(),
        ConvexDomain::Rectangle { half_x, half_y } => (0..n)
            .map(|k| {
                let s = param(k / 4, n.div_ceil(4), -1.0, 1.0);
                let (point, normal) = match k % 4 {
                    0 => ([half_x, s * half_y], [-1.0, 0.0]),
                    1 => ([-half_x, s * half_y], [1.0, 0.0]),
                    2 => ([s * half_x, half_y], [0.0, -1.0]),
                    _ => ([s * half_x, -half_y], [0.0, 1.0]),
                };
                BoundaryFrame {
                    point,
                    normal,
                    curvature: 0.0,
                }
            })
            .collect(),
        ConvexDomain::Stadium { alpha, lambda } => {
            let caps = n / 2;
            let mut out = Vec::with_capacity(n);
            for k in 0..caps {
                let t = param(k / 2, caps.div_ceil(2), -PI / 2.0, PI / 2.0);
                out.push(if k % 2 == 0 {
                    ellipse(lambda, 1.0, alpha, 0.0, t)
                } else {
                    ellipse(lambda, 1.0, -alpha, 0.0, PI - t)
                });
            }
            for k in 0..n - caps {
                let s = param(k / 2, (n - caps).div_ceil(2), -alpha, alpha);
                let (y, ny) = if k % 2 == 0 { (1.0, -1.0) } else { (-1.0, 1.0) };
                out.push(BoundaryFrame {
                    point: [s, y],
                    normal: [0.0, ny],
                    curvature: 0.0,
                });
            }
            out
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryEstimate {
    pub frame: BoundaryFrame,
    pub u_n: f64,
    pub u_nn: f64,
    /// Strictly convex point with outward-increasing solution: the remark's
    /// certificate `u_NN > 0` is expected.
    pub applicable: bool,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub estimates: Vec<BoundaryEstimate>,
    /// Every applicable point certifies non-concavity.
    pub all_certified: bool,
}

/// Inward-normal derivatives `u_N`, `u_NN` at boundary points, from a
/// least-squares cubic `c₁d + c₂d² + c₃d³` through `u = 0` on `∂Ω` and
/// interpolated values at distances `d = kδ`, `k = 1..6`.
///
/// For `−Δu = f(u)` with `f(0) = 0` and `f ≥ 0` the boundary identity
/// `u_NN = κ u_N` forces `u_NN > 0` wherever the curvature `κ` is positive,
/// which rules out concavity of `u`.
pub fn boundary_second_derivative(
    field: &Field,
    source: &dyn Fn(f64) -> f64,
    samples: usize,
    delta: f64,
) -> BoundaryReport {
    let top = field.max();
    let gate = if source(0.0) != 0.0 {
        Some(format!("source(0) = {} is not zero", source(0.0)))
    } else if (0..=200).any(|k| source(top * k as f64 / 200.0) < 0.0) {
        Some("source takes negative values on the solution range".to_string())
    } else {
        None
    };
    if let Some(reason) = gate {
        return BoundaryReport {
            applicable: false,
            reason: Some(reason),
            estimates: Vec::new(),
            all_certified: false,
        };
    }
    let mut estimates = Vec::new();
    for frame in boundary_frames(field.grid().domain(), samples) {
        let Some((u_n, u_nn)) = normal_derivatives(field, &frame, delta) else { continue };
        let applicable = frame.curvature > 0.0 && u_n > 0.0;
        estimates.push(BoundaryEstimate {
            frame,
            u_n,
            u_nn,
            applicable,
            certified: applicable && u_nn > 0.0,
        });
    }
    let all_certified = estimates.iter().filter(|e| e.applicable).all(|e| e.certified)
        && estimates.iter().any(|e| e.applicable);
    BoundaryReport {
        applicable: true,
        reason: None,
        estimates,
        all_certified,
    }
}

/// `(u_N, u_NN)` at a boundary frame from a least-squares cubic through
/// `u = 0` at the boundary and interpolated values at `d = kδ`, `k = 1..6`.
/// `None` when fewer than four of the sample points can be interpolated.
pub fn normal_derivatives(field: &Field, frame: &BoundaryFrame, delta: f64) -> Option<(f64, f64)> {
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    let mut used = 0;
    for k in 1..=6 {
        let d = k as f64 * delta;
        let (x, y) = (frame.point[0] + d * frame.normal[0], frame.point[1] + d * frame.normal[1]);
        let Some(v) = field.interpolate(x, y) else { continue };
        let row = [d, d * d, d * d * d];
        for r in 0..3 {
            atb[r] += row[r] * v;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
        used += 1;
    }
    if used < 4 {
        return None;
    }
    let c = solve3(ata, atb)?;
    Some((c[0], 2.0 * c[1]))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..3 {
            let l = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= l * a[col][c];
            }
            b[r] -= l * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `k(t) = t(βt^θ + 1)/(1 + 2t^θ)`, the profile whose concavity for every
/// `β ≥ 0` a power-concavity argument for `a = 1 + 2t²`, `f = t^q` would
/// need (`θ = 1/(1−q)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub beta: f64,
    pub theta: f64,
}

impl PowerProfile {
    pub fn for_exponent(q: f64, beta: f64) -> Self {
        Self {
            beta,
            theta: 1.0 / (1.0 - q),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t.powf(self.theta);
        t * (self.beta * s + 1.0) / (1.0 + 2.0 * s)
    }

    /// `(2 − β)·2θ(θ−1)t^{θ−1}/(2t^θ + 1)³·(t^θ − (θ+1)/(2(θ−1)))`.
    pub fn second_derivative(&self, t: f64) -> f64 {
        let th = self.theta;
        let s = t.powf(th);
        (2.0 - self.beta) * 2.0 * th * (th - 1.0) * t.powf(th - 1.0) / (2.0 * s + 1.0).powi(3)
            * (s - (th + 1.0) / (2.0 * (th - 1.0)))
    }

    /// Where the second derivative changes sign.
    pub fn inflection(&self) -> f64 {
        let th = self.theta;
        ((th + 1.0) / (2.0 * (th - 1.0))).powf(1.0 / th)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::model::ModelRegistry;
    use std::sync::Arc;

    #[test]
    fn phi_map_matches_quadrature() {
        let m = ModelRegistry::new().lookup("mnls-power:q=0.5").unwrap();
        let map = PhiMap::new(&m, 2.0, 2000).unwrap();
        for t in [1e-6, 1e-3, 0.01, 0.3, 1.0, 1.7, 2.0] {
            let exact = m.phi(t).unwrap();
            assert!((map.eval(t) - exact).abs() < 1e-8 * exact.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn concave_paraboloid_passes() {
        let g = Arc::new(make_grid(&ConvexDomain::unit_disk(), 0.05).unwrap());
        let u = Field::from_fn(g, |x, y| 1.0 - x * x - y * y).unwrap();
        let opts = MidpointOptions {
            pairs: 5000,
            tol: 0.0,
            ..MidpointOptions::for_grid(0.05)
        };
        let r = midpoint_concavity(&u, None, &opts).unwrap();
        // bilinear interpolation of a concave function undershoots by at
        // most h²/4 (h²/8 per axis)
        assert!(r.worst_defect <= 0.05 * 0.05 / 4.0 + 1e-15, "{}", r.worst_defect);
    }

    #[test]
    fn convex_bowl_fails() {
        let g = Arc::new(make_grid(&ConvexDomain::unit_disk(), 0.05).unwrap());
        let u = Field::from_fn(g, |x, y| x * x + y * y).unwrap();
        let r = midpoint_concavity(&u, None, &MidpointOptions::for_grid(0.05)).unwrap();
        assert!(!r.passed);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn profile_second_derivative_sign() {
        let p = PowerProfile::for_exponent(0.5, 0.0);
        let t0 = p.inflection();
        assert!(p.second_derivative(0.5 * t0) < 0.0);
        assert!(p.second_derivative(2.0 * t0) > 0.0);
        assert_eq!(PowerProfile::for_exponent(0.5, 2.0).second_derivative(1.3), 0.0);
    }
}
