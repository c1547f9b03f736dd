//! Dirichlet solves on masked grids: linear, semilinear, quasilinear (through
//! the change of variables) and the plateau-constrained torsion problem.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{assemble_laplacian, Field, MaskedGrid};
use crate::linalg::{max_abs, max_abs_diff, BandedLu, CsrMatrix};
use crate::model::ScalarModel;
use crate::plateau::PlateauFunction;
use crate::transform::{solve_transform, TransformTable};

/// The Shortley–Weller `−Δ` of a grid together with its LU factors.
#[derive(Debug, Clone)]
pub struct Laplacian {
    grid: Arc<MaskedGrid>,
    matrix: CsrMatrix,
    lu: BandedLu,
    norm: f64,
}

impl Laplacian {
    pub fn new(grid: Arc<MaskedGrid>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Geometry("grid has no interior nodes".into()));
        }
        let matrix = assemble_laplacian(&grid);
        let lu = BandedLu::factor(&matrix)?;
        let norm = (0..matrix.n())
            .map(|i| matrix.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            grid,
            matrix,
            lu,
            norm,
        })
    }

    pub fn grid(&self) -> &Arc<MaskedGrid> {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.n()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n() == 0
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.apply(u)
    }

    /// `L⁻¹ b` with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.lu.solve(b);
        let r: Vec<f64> = self.apply(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
        let dx = self.lu.solve(&r);
        for (x, d) in x.iter_mut().zip(dx) {
            *x += d;
        }
        x
    }

    /// Normwise backward error `‖Lu − b‖∞ / (‖L‖∞‖u‖∞ + ‖b‖∞)`.
    pub fn backward_error(&self, u: &[f64], b: &[f64]) -> f64 {
        let r = max_abs_diff(&self.apply(u), b);
        let scale = self.norm * max_abs(u) + max_abs(b);
        if scale == 0.0 {
            r
        } else {
            r / scale
        }
    }

    /// Discrete `∫ (½|∇u|² − u)`, with `∫|∇u|²` taken as `⟨u, Lu⟩`.
    pub fn torsion_energy(&self, u: &[f64]) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        let lu = self.apply(u);
        h2 * u.iter().zip(&lu).map(|(u, l)| 0.5 * u * l - u).sum::<f64>()
    }

    fn field(&self, values: Vec<f64>) -> Result<Field> {
        Field::new(self.grid.clone(), values)
    }
}

/// A source term `s(u)` with an optional closed-form derivative.
pub struct Source<'a> {
    value: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    derivative: Option<Box<dyn Fn(f64) -> f64 + Sync + 'a>>,
}

impl<'a> Source<'a> {
    pub fn new(value: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        Self {
            value: Box::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        self.derivative = Some(Box::new(derivative));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_derivative(|_| 0.0)
    }

    pub fn value(&self, u: f64) -> f64 {
        (self.value)(u)
    }

    /// `s′(u)`; central difference with step `1e-6·max(1, |u|)` when no
    /// closed form was supplied.
    pub fn derivative(&self, u: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(u),
            None => {
                let e = 1e-6 * u.abs().max(1.0);
                (self.value(u + e) - self.value(u - e)) / (2.0 * e)
            }
        }
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&x| self.value(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    Picard,
    PicardNewton,
    Newton,
    Quasilinear,
    ConstrainedDescentSecant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Stop when the fixed-point defect `‖L⁻¹s(u) − u‖∞` drops below this.
    pub tol: f64,
    /// Backward error required for a report to count as converged.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Picard damping; halved whenever the defect grows.
    pub omega: f64,
    /// Polish the Picard limit with Newton steps.
    pub newton: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            residual_tol: 1e-9,
            max_iter: 10_000,
            omega: 0.8,
            newton: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Field,
    /// `v` with `u = g(v)` for quasilinear solves.
    pub intermediate: Option<Field>,
    /// Backward error of the final iterate; for constrained solves the sup
    /// norm of the Euler–Lagrange residual.
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
    pub converged: bool,
    pub multiplier: Option<f64>,
    /// `|∫σ(u) − target| / target` for constrained solves.
    pub constraint_defect: Option<f64>,
    pub energy: Option<f64>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub nodes: usize,
    pub h: f64,
    pub max: f64,
    pub multiplier: Option<f64>,
    pub constraint_defect: Option<f64>,
    pub energy: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl SolveReport {
    fn new(solution: Field, method: Method) -> Self {
        Self {
            solution,
            intermediate: None,
            residual: f64::NAN,
            iterations: 0,
            method,
            converged: false,
            multiplier: None,
            constraint_defect: None,
            energy: None,
            diagnostics: Vec::new(),
        }
    }

    /// Turns an unconverged report into an error.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                last_change: self.residual,
            })
        }
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            method: self.method,
            converged: self.converged,
            iterations: self.iterations,
            residual: self.residual,
            nodes: self.solution.values().len(),
            h: self.solution.grid().h(),
            max: self.solution.max(),
            multiplier: self.multiplier,
            constraint_defect: self.constraint_defect,
            energy: self.energy,
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }
}

/// Direct solve of `−Δu = rhs`, zero on the boundary.
pub fn solve_poisson(op: &Laplacian, rhs: &Field) -> Result<SolveReport> {
    let u = op.solve(rhs.values());
    let residual = op.backward_error(&u, rhs.values());
    if !residual.is_finite() || residual > 1e-10 {
        return Err(Error::Linear(format!("residual {residual:e} after refinement")));
    }
    let mut report = SolveReport::new(op.field(u)?, Method::Direct);
    report.residual = residual;
    report.iterations = 1;
    report.converged = true;
    Ok(report)
}

/// `−Δu = s(u)` by damped Picard iteration `u ← (1−ω)u + ω L⁻¹s(u)`.
///
/// The first step is undamped, so a source independent of `u` converges
/// after one update. With `opts.newton` the Picard limit is polished by
/// Newton steps, kept only if they lower the residual.
pub fn solve_semilinear(
    op: &Laplacian,
    source: &Source,
    initial: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let n = op.len();
    let mut u = match initial {
        Some(u0) if u0.len() == n => u0.to_vec(),
        Some(u0) => {
            return Err(Error::Invalid(format!("initial guess has {} values for {n} nodes", u0.len())))
        }
        None => vec![0.0; n],
    };
    let mut omega = opts.omega;
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut halvings = 0;
    let mut method = Method::Picard;
    for k in 0..opts.max_iter {
        let w = op.solve(&source.eval(&u));
        let defect = max_abs_diff(&w, &u);
        if !defect.is_finite() {
            return Err(Error::NonConvergence {
                iterations: k,
                last_change: defect,
            });
        }
        if defect < opts.tol {
            u = w;
            converged = true;
            break;
        }
        if defect > prev && omega > 1e-3 {
            omega *= 0.5;
            halvings += 1;
        }
        prev = defect;
        let om = if k == 0 { 1.0 } else { omega };
        for (u, w) in u.iter_mut().zip(&w) {
            *u = (1.0 - om) * *u + om * w;
        }
        iterations = k + 1;
        // a slowly contracting iteration is periodically handed to Newton
        if opts.newton && iterations % NEWTON_HANDOFF == 0 {
            if let Ok((v, _)) = newton_iterate(op, source, &u, 0.0, 20) {
                if op.backward_error(&v, &source.eval(&v)) < opts.residual_tol {
                    u = v;
                    converged = true;
                    method = Method::PicardNewton;
                    break;
                }
            }
        }
    }
    let mut residual = op.backward_error(&u, &source.eval(&u));
    if opts.newton && converged && method == Method::Picard {
        if let Ok((v, _)) = newton_iterate(op, source, &u, 0.0, 8) {
            let r = op.backward_error(&v, &source.eval(&v));
            if r < residual {
                u = v;
                residual = r;
                method = Method::PicardNewton;
            }
        }
    }
    let collapsed = max_abs(&u) < 1e-8;
    let mut report = SolveReport::new(op.field(u)?, method);
    report.residual = residual;
    report.iterations = iterations;
    report.converged = converged && residual < opts.residual_tol;
    if halvings > 0 {
        report.diagnostics.push(format!("damping halved {halvings} times, final omega {omega}"));
    }
    if collapsed {
        report.diagnostics.push("iterates collapsed onto the trivial solution".into());
    }
    if !converged {
        report
            .diagnostics
            .push(format!("no convergence after {} iterations, last defect {prev:e}", opts.max_iter));
    }
    Ok(report)
}

/// Picard iterations between attempts to finish with Newton.
const NEWTON_HANDOFF: usize = 200;

/// Newton iteration for `Lu = s(u)` started at `u0`, with step halving on
/// residual growth. Stops once `‖Lu − s(u)‖∞ ≤ res_tol` or the step falls
/// below `1e-14‖u‖∞`. Returns the iterate and the number of steps.
fn newton_iterate(
    op: &Laplacian,
    source: &Source,
    u0: &[f64],
    res_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let residual = |u: &[f64]| -> Vec<f64> {
        op.apply(u).iter().zip(u).map(|(l, &x)| l - source.value(x)).collect()
    };
    let mut u = u0.to_vec();
    let mut r = residual(&u);
    for it in 0..max_iter {
        if max_abs(&r) <= res_tol {
            return Ok((u, it));
        }
        let shift: Vec<f64> = u.iter().map(|&x| -source.derivative(x)).collect();
        let jac = BandedLu::factor(&op.matrix().add_diagonal(&shift))?;
        let mut du = r.clone();
        jac.solve_in_place(&mut du);
        let size = max_abs(&du);
        let r0 = max_abs(&r);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(u, d)| u - t * d).collect();
            let rt = residual(&trial);
            if max_abs(&rt) <= r0 || t < 1e-3 {
                u = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
        if size * t <= 1e-14 * max_abs(&u).max(1.0) {
            return Ok((u, it + 1));
        }
    }
    Ok((u, max_iter))
}

/// `−Δu = s(u)` by Newton's method from `initial`.
pub fn solve_newton(
    op: &Laplacian,
    source: &Source,
    initial: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let (u, iterations) = newton_iterate(op, source, initial, 0.0, 50)?;
    let residual = op.backward_error(&u, &source.eval(&u));
    let mut report = SolveReport::new(op.field(u)?, Method::Newton);
    report.residual = residual;
    report.iterations = iterations;
    report.converged = residual < opts.residual_tol;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasilinearOptions {
    pub solve: SolveOptions,
    /// Initial upper end of the transform table in the `v` variable.
    pub t_max: f64,
    /// Output step of the transform table.
    pub table_step: f64,
}

impl Default for QuasilinearOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions {
                newton: true,
                ..SolveOptions::default()
            },
            t_max: 2.0,
            table_step: 1e-3,
        }
    }
}

/// Reduced source `h(v) = f(g(v))/√a(g(v))`, zero past a saturated table
/// (there `g ≡ β` and the weight has blown up).
fn reduced_source<'a>(model: &'a ScalarModel, table: &'a TransformTable) -> Source<'a> {
    let cap = table.t_max();
    let saturated = table.saturation().is_some();
    Source::new(move |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= cap {
            if saturated {
                return 0.0;
            }
            return f64::NAN;
        }
        let g = table.g_of(v).expect("inside table");
        model.f(g) / model.a(g).sqrt()
    })
}

/// Solves the quasilinear problem through `v = g⁻¹(u)`: `−Δv = h(v)`, then
/// `u = g(v)` nodewise. The Picard iteration starts from the torsion
/// solution so that sources with `f(0) = 0` avoid the trivial fixed point.
pub fn solve_quasilinear(
    model: &ScalarModel,
    op: &Laplacian,
    opts: &QuasilinearOptions,
) -> Result<SolveReport> {
    let torsion = op.solve(&vec![1.0; op.len()]);
    let mut t_max = opts.t_max;
    for attempt in 0..2 {
        let step = opts.table_step.min(t_max / 200.0);
        let table = solve_transform(model, t_max, step)?;
        let source = reduced_source(model, &table);
        let report = solve_semilinear(op, &source, Some(&torsion), &opts.solve);
        let escaped = match &report {
            Err(Error::NonConvergence { .. }) => true,
            Ok(r) => r.solution.max() >= table.t_max() && table.saturation().is_none(),
            Err(_) => false,
        };
        if escaped && attempt == 0 {
            let seen = report.as_ref().map_or(t_max, |r| r.solution.max());
            t_max = 2.0 * seen.max(t_max);
            continue;
        }
        let mut report = report?;
        let v = report.solution.clone();
        if let Some(t_star) = table.saturation() {
            if v.max() >= t_star {
                return Err(Error::OutOfRange {
                    t: v.max(),
                    lo: 0.0,
                    hi: t_star,
                });
            }
        }
        let u: Vec<f64> = v
            .values()
            .iter()
            .map(|&x| table.g_of(x.max(0.0)))
            .collect::<Result<_>>()?;
        if model.beta().is_finite() && u.iter().any(|&x| x >= model.beta()) {
            return Err(Error::Invalid("solution reached the explosion point".into()));
        }
        report.solution = op.field(u)?;
        report.intermediate = Some(v);
        report.method = Method::Quasilinear;
        if attempt > 0 {
            report.diagnostics.push(format!("transform table extended to t_max = {t_max}"));
        }
        return Ok(report);
    }
    unreachable!("second attempt always returns")
}

/// Smallest eigenvalue of `−Δ_h` and its eigenvector normalised to max 1,
/// by inverse power iteration from the torsion solution.
pub fn principal_eigenpair(op: &Laplacian, tol: f64, max_iter: usize) -> Result<(f64, Field)> {
    let mut x = op.solve(&vec![1.0; op.len()]);
    let norm = max_abs(&x);
    x.iter_mut().for_each(|v| *v /= norm);
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let y = op.solve(&x);
        let m = max_abs(&y);
        let next: Vec<f64> = y.iter().map(|v| v / m).collect();
        let change = max_abs_diff(&next, &x);
        x = next;
        lambda = 1.0 / m;
        if change < tol {
            let lx = op.apply(&x);
            let num: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
            let den: f64 = x.iter().map(|a| a * a).sum();
            return Ok((num / den, op.field(x)?));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_change: lambda,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedOptions {
    pub target: f64,
    /// Admissible multiplier range; the secant search stays inside it.
    pub mu_bracket: [f64; 2],
    /// Widths of the Gaussian bumps that seed the descent, in units of the
    /// short half-axis.
    pub seed_widths: Vec<f64>,
    pub descent_step: f64,
    pub descent_tol: f64,
    pub max_descent: usize,
    /// Relative constraint defect accepted by the multiplier search.
    pub defect_tol: f64,
}

impl Default for ConstrainedOptions {
    fn default() -> Self {
        Self {
            target: 1.0,
            mu_bracket: [0.25, 8.0],
            seed_widths: vec![0.75, 1.5, 3.0],
            descent_step: 0.5,
            descent_tol: 1e-10,
            max_descent: 5000,
            defect_tol: 1e-6,
        }
    }
}

struct Plateau<'a> {
    op: &'a Laplacian,
    sigma: &'a PlateauFunction,
    target: f64,
    h2: f64,
}

impl Plateau<'_> {
    fn mass(&self, u: &[f64]) -> f64 {
        self.h2 * u.iter().map(|&x| self.sigma.value(x)).sum::<f64>()
    }

    fn defect(&self, u: &[f64]) -> f64 {
        self.mass(u) - self.target
    }

    /// `u + s·dir` with `s` chosen so the constraint holds. `dir` must be
    /// nonnegative, which makes the mass nondecreasing in `s`.
    fn project(&self, u: &[f64], dir: &[f64]) -> Result<Vec<f64>> {
        let at = |s: f64| -> Vec<f64> { u.iter().zip(dir).map(|(u, d)| u + s * d).collect() };
        let c = |s: f64| self.defect(&at(s));
        let (mut lo, mut hi) = (0.0, 0.0);
        let c0 = c(0.0);
        if c0 == 0.0 {
            return Ok(u.to_vec());
        }
        let mut step = 1.0;
        let mut found = false;
        for _ in 0..60 {
            if c0 < 0.0 {
                hi = step;
                if c(hi) > 0.0 {
                    found = true;
                    break;
                }
                lo = hi;
            } else {
                lo = -step;
                if c(lo) < 0.0 {
                    found = true;
                    break;
                }
                hi = lo;
            }
            step *= 2.0;
        }
        if !found {
            return Err(Error::Infeasible(format!(
                "no multiple of the search direction reaches ∫σ(u) = {} (domain area {:.4})",
                self.target,
                self.h2 * u.len() as f64
            )));
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = at(s);
            let cs = self.defect(&v);
            if cs.abs() <= 1e-14 * self.target {
                return Ok(v);
            }
            if cs < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let slope = self.h2
                * v.iter()
                    .zip(dir)
                    .map(|(x, d)| self.sigma.derivative(*x) * d)
                    .sum::<f64>();
            let newton = s - cs / slope;
            s = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
                break;
            }
        }
        Ok(at(s))
    }

    fn el_residual(&self, u: &[f64], mu: f64) -> f64 {
        let lu = self.op.apply(u);
        lu.iter()
            .zip(u)
            .map(|(l, &x)| (l - 1.0 - mu * self.sigma.derivative(x)).abs())
            .fold(0.0, f64::max)
    }

    fn source(&self, mu: f64) -> Source<'_> {
        let s = self.sigma;
        Source::new(move |x| 1.0 + mu * s.derivative(x))
            .with_derivative(move |x| mu * s.second_derivative(x))
    }
}

struct Candidate {
    u: Vec<f64>,
    mu: f64,
    iterations: usize,
    width: f64,
}

/// Projected descent in the `H¹₀` metric on `{∫σ(u) = target}`:
/// `d = (u − v) − μ L⁻¹σ′(u)` with `μ` making `d` tangent to the
/// constraint, `u ← P(u − τd)`. Its fixed points solve
/// `−Δu = 1 + μσ′(u)`.
fn descend(p: &Plateau, torsion: &[f64], u0: Vec<f64>, opts: &ConstrainedOptions) -> Result<(Vec<f64>, f64, usize)> {
    let mut u = p.project(&u0, torsion)?;
    let mut mu = f64::NAN;
    for it in 0..opts.max_descent {
        let sp: Vec<f64> = u.iter().map(|&x| p.sigma.derivative(x)).collect();
        let w = p.op.solve(&sp);
        let den: f64 = w.iter().zip(&sp).map(|(a, b)| a * b).sum();
        if !(den > 0.0) {
            return Err(Error::Infeasible("the constraint is inactive at the current iterate".into()));
        }
        let num: f64 = u.iter().zip(torsion).zip(&sp).map(|((u, v), s)| (u - v) * s).sum();
        mu = num / den;
        let d: Vec<f64> = u
            .iter()
            .zip(torsion)
            .zip(&w)
            .map(|((u, v), w)| u - v - mu * w)
            .collect();
        if max_abs(&d) < opts.descent_tol {
            return Ok((u, mu, it));
        }
        let next: Vec<f64> = u.iter().zip(&d).map(|(u, d)| u - opts.descent_step * d).collect();
        u = p.project(&next, &w)?;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_descent,
        last_change: mu,
    })
}

/// Minimiser of `∫(½|∇u|² − u)` subject to `∫σ(u) = target`.
///
/// Picard iteration at fixed `μ` is repelled by the bump-shaped solutions
/// and falls back to the torsion function (where `∫σ = 0`), so a plain
/// multiplier scan never sees the constraint. Instead a projected descent
/// from Gaussian bumps of several widths locates constrained minimisers;
/// each is then refined by a bracketed secant on `μ ↦ ∫σ(u_μ) − target`
/// whose inner solves are Newton iterations warm-started on the same
/// branch. Among distinct solutions the lowest energy wins.
pub fn solve_constrained_torsion(
    op: &Laplacian,
    sigma: &PlateauFunction,
    opts: &ConstrainedOptions,
) -> Result<SolveReport> {
    let grid = op.grid().clone();
    let h = grid.h();
    let p = Plateau {
        op,
        sigma,
        target: opts.target,
        h2: h * h,
    };
    let area = p.h2 * op.len() as f64;
    if area <= opts.target {
        return Err(Error::Infeasible(format!(
            "discrete area {area:.4} cannot carry ∫σ(u) = {}",
            opts.target
        )));
    }
    let torsion = op.solve(&vec![1.0; op.len()]);
    let (cx, _) = grid.domain().center();
    let (ex, ey) = grid.domain().half_extent();
    let long_x = ex >= ey;
    let short = ex.min(ey);
    let (_, cy) = grid.domain().center();

    let results: Vec<Result<Candidate>> = std::thread::scope(|scope| {
        let handles: Vec<_> = opts
            .seed_widths
            .iter()
            .map(|&width| {
                let (p, torsion) = (&p, &torsion);
                let grid = &grid;
                scope.spawn(move || {
                    let u0: Vec<f64> = grid
                        .nodes()
                        .iter()
                        .zip(torsion.iter())
                        .map(|(n, v)| {
                            let s = if long_x { n.x - cx } else { n.y - cy } / (width * short);
                            v * (1.0 + 5.0 * (-s * s).exp())
                        })
                        .collect();
                    descend(p, torsion, u0, opts).map(|(u, mu, iterations)| Candidate {
                        u,
                        mu,
                        iterations,
                        width,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("descent thread")).collect()
    });

    let mut diagnostics = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(c) => {
                diagnostics.push(format!(
                    "descent from width {}: mu = {:.8}, {} iterations",
                    c.width, c.mu, c.iterations
                ));
                if !candidates
                    .iter()
                    .any(|o| (o.mu - c.mu).abs() < 1e-6 && max_abs_diff(&o.u, &c.u) < 1e-6)
                {
                    candidates.push(c);
                }
            }
            Err(e) => {
                diagnostics.push(format!("descent failed: {e}"));
                first_err.get_or_insert(e);
            }
        }
    }
    if candidates.is_empty() {
        return Err(first_err.unwrap_or_else(|| Error::Infeasible("no descent seeds".into())));
    }

    let mut best: Option<(Vec<f64>, f64, f64, usize)> = None;
    for c in candidates {
        let (u, mu, its) = match multiplier_secant(&p, c.u, c.mu, opts, &mut diagnostics) {
            Ok(x) => x,
            Err(e) => {
                diagnostics.push(format!("multiplier search from mu = {:.6} failed: {e}", c.mu));
                first_err.get_or_insert(e);
                continue;
            }
        };
        let energy = op.torsion_energy(&u);
        diagnostics.push(format!("root mu = {mu:.10}, energy {energy:.10}"));
        if best.as_ref().is_none_or(|b| energy < b.2) {
            best = Some((u, mu, energy, c.iterations + its));
        }
    }
    let Some((u, mu, energy, iterations)) = best else {
        return Err(first_err.expect("a failure was recorded"));
    };
    let residual = p.el_residual(&u, mu);
    let defect = p.defect(&u).abs() / opts.target;
    let mut report = SolveReport::new(op.field(u)?, Method::ConstrainedDescentSecant);
    report.residual = residual;
    report.iterations = iterations;
    report.multiplier = Some(mu);
    report.constraint_defect = Some(defect);
    report.energy = Some(energy);
    report.converged = defect < opts.defect_tol && residual < 1e-8;
    report.diagnostics = diagnostics;
    Ok(report)
}

/// Bracketed secant (Illinois variant) on `μ ↦ ∫σ(u_μ) − target` around the
/// descent estimate `mu0`.
fn multiplier_secant(
    p: &Plateau,
    u0: Vec<f64>,
    mu0: f64,
    opts: &ConstrainedOptions,
    log: &mut Vec<String>,
) -> Result<(Vec<f64>, f64, usize)> {
    let goal = 1e-3 * opts.defect_tol * opts.target;
    let [lo_cap, mut hi_cap] = opts.mu_bracket;
    if mu0 > hi_cap {
        log.push(format!("multiplier {mu0:.6} beyond the bracket, upper end doubled"));
        while hi_cap < mu0 {
            hi_cap *= 2.0;
        }
    }
    let mut solves = 0;
    let mut inner = |mu: f64, start: &[f64]| -> Result<(Vec<f64>, f64)> {
        solves += 1;
        let (u, _) = newton_iterate(p.op, &p.source(mu), start, 1e-11, 40)?;
        if p.el_residual(&u, mu) > 1e-8 {
            return Err(Error::NonConvergence {
                iterations: 40,
                last_change: p.el_residual(&u, mu),
            });
        }
        let c = p.defect(&u);
        Ok((u, c))
    };
    let (u_mid, c_mid) = inner(mu0, &u0)?;
    if c_mid.abs() <= goal {
        return Ok((u_mid, mu0, solves));
    }
    // find a sign change next to mu0, staying on the branch through warm starts
    let mut delta = 1e-3 * mu0.abs().max(1e-3);
    let mut bracket = None;
    for _ in 0..8 {
        for dir in [1.0, -1.0] {
            let mu = (mu0 + dir * delta).clamp(lo_cap, hi_cap);
            if mu == mu0 {
                continue;
            }
            if let Ok((u, c)) = inner(mu, &u_mid) {
                if c.signum() != c_mid.signum() {
                    bracket = Some(((mu0, c_mid, u_mid.clone()), (mu, c, u)));
                    break;
                }
            }
        }
        if bracket.is_some() {
            break;
        }
        delta *= 2.0;
    }
    let Some((mut a, mut b)) = bracket else {
        return Err(Error::Infeasible(format!(
            "no sign change of the constraint near mu = {mu0:.6} (defect {c_mid:e})"
        )));
    };
    log.push(format!("multiplier bracket [{:.8}, {:.8}]", a.0.min(b.0), a.0.max(b.0)));
    let mut side = 0i32;
    for _ in 0..60 {
        let mu = (a.0 * b.1 - b.0 * a.1) / (b.1 - a.1);
        let start = if (mu - a.0).abs() < (mu - b.0).abs() { &a.2 } else { &b.2 };
        let (u, c) = inner(mu, start)?;
        if c.abs() <= goal || (b.0 - a.0).abs() <= 1e-15 * mu.abs() {
            return Ok((u, mu, solves));
        }
        if c.signum() == a.1.signum() {
            a = (mu, c, u);
            if side == -1 {
                b.1 *= 0.5;
            }
            side = -1;
        } else {
            b = (mu, c, u);
            if side == 1 {
                a.1 *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NonConvergence {
        iterations: 60,
        last_change: a.1.abs().min(b.1.abs()),
    })
}
