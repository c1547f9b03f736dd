use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use mnls_core::concavity::{
    find_witness_triple, midpoint_concavity, quasiconcavity, rectangle_property, superlevel_convexity,
    ConcavityReport, MidpointOptions, PhiMap, SuperlevelOptions, SuperlevelReport, WitnessTriple,
};
use mnls_core::conditions::{classify, ConditionOptions, ConditionReport};
use mnls_core::geometry::{make_grid, ConvexDomain, Field};
use mnls_core::model::{counterexample_source, ModelRegistry, ScalarModel};
use mnls_core::plateau::PlateauFunction;
use mnls_core::solver::{
    solve_constrained_torsion, solve_poisson, solve_quasilinear, solve_semilinear, ConstrainedOptions, Laplacian,
    QuasilinearOptions, SolveOptions, SolveReport, Source,
};
use mnls_core::transform::{solve_transform, verify_identities};
use mnls_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::svg::{Svg, PALETTE};
use crate::{EXIT_CONFIG, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INFEASIBLE, EXIT_PASS, EXIT_SOLVER};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::ModelDefinition(_) | Error::Geometry(_) => EXIT_CONFIG,
            Error::Hypothesis(_) => EXIT_FAIL,
            Error::Invalid(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_SOLVER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

struct RunDir(PathBuf);

impl RunDir {
    fn create(cfg: &RunConfig, command: &str) -> Result<Self, Failure> {
        let path = cfg.run_dir(command);
        std::fs::create_dir_all(&path).map_err(|e| Failure {
            code: EXIT_CONFIG,
            message: format!("cannot create {}: {e}", path.display()),
        })?;
        let dir = RunDir(path);
        dir.write("config.snapshot", &cfg.to_toml())?;
        Ok(dir)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.0.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure {
            code: EXIT_CONFIG,
            message: format!("cannot write {}: {e}", path.display()),
        })
    }

    fn json(&self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        self.write(name, &(serde_json::to_string_pretty(value).expect("serializes") + "\n"))
    }
}

pub fn models(json: bool) -> Outcome {
    let reg = ModelRegistry::new();
    if json {
        let list: Vec<_> = reg
            .entries()
            .iter()
            .map(|e| json!({"key": e.key, "params": e.params, "description": e.description}))
            .collect();
        println!("{}", serde_json::to_string_pretty(&list).expect("serializes"));
    } else {
        for e in reg.entries() {
            let params = if e.params.is_empty() {
                String::new()
            } else {
                format!(":{}", e.params.iter().map(|p| format!("{p}=..")).collect::<Vec<_>>().join(","))
            };
            println!("{:<36} {}", format!("{}{}", e.key, params), e.description);
        }
    }
    Ok(EXIT_PASS)
}

fn condition_options(cfg: &RunConfig) -> ConditionOptions {
    ConditionOptions {
        grid_size: cfg.grid_size,
        tol_rel: cfg.tolerances.condition,
    }
}

/// 0 when (i)–(iii) pass, 1 when any of them fails, 2 otherwise.
fn hypothesis_code(r: &ConditionReport) -> u8 {
    let v = [&r.verdict_i, &r.verdict_ii, &r.verdict_iii];
    if v.iter().any(|v| v.is_fail()) {
        EXIT_FAIL
    } else if v.iter().all(|v| v.is_pass()) {
        EXIT_PASS
    } else {
        EXIT_INCONCLUSIVE
    }
}

pub fn check(cfg: &RunConfig, name: &str) -> Outcome {
    let model = cfg.model.build()?;
    let dir = RunDir::create(cfg, name)?;
    let report = classify(&model, &condition_options(cfg));
    dir.write("check.json", &(report.to_json() + "\n"))?;
    dir.write("check.txt", &report.to_string())?;
    print!("{report}");
    Ok(hypothesis_code(&report))
}

pub fn transform(cfg: &RunConfig, name: &str) -> Outcome {
    let model = cfg.model.build()?;
    let dir = RunDir::create(cfg, name)?;
    let table = solve_transform(&model, cfg.t_max, cfg.table_step)?;
    dir.write("g.csv", &table.to_csv())?;
    let report = verify_identities(&model, &table, 50)?;
    dir.write("identities.json", &(report.to_json() + "\n"))?;
    println!("model:            {}", model.name());
    println!("table:            {} nodes on [0, {}]", table.nodes().len(), table.t_max());
    if let Some(s) = table.saturation() {
        println!("saturation:       g reaches beta at t* = {s:.10}");
    }
    println!("max |H - F(g)|:   {:.3e}", report.max_h_defect);
    println!("max |Hh'/h^2 - gamma(g)|: {:.3e}", report.max_gamma_defect);
    Ok(if report.passes(cfg.tolerances.identity) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

/// `a` when the weight is constant on its sampled range.
fn constant_weight(model: &ScalarModel) -> Option<f64> {
    let a0 = model.a(0.0);
    let hi = (0.99 * model.beta()).min(10.0);
    (0..=64)
        .all(|k| (model.a(hi * k as f64 / 64.0) - a0).abs() <= 1e-14 * a0.abs())
        .then_some(a0)
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tolerances.solve,
        residual_tol: cfg.tolerances.residual,
        max_iter: cfg.tolerances.max_iter,
        newton: true,
        ..SolveOptions::default()
    }
}

fn operator(cfg: &RunConfig, domain: &ConvexDomain) -> Result<Laplacian, Failure> {
    let grid = Arc::new(make_grid(domain, cfg.h)?);
    Ok(Laplacian::new(grid)?)
}

/// Semilinear solve for a constant weight, quasilinear otherwise.
fn solve_model(cfg: &RunConfig, model: &ScalarModel, op: &Laplacian) -> Result<SolveReport, Failure> {
    match constant_weight(model) {
        Some(c) => {
            let source = Source::new(|u| model.f(u) / c).with_derivative(|u| model.df(u) / c);
            Ok(solve_semilinear(op, &source, None, &solve_options(cfg))?)
        }
        None => {
            let opts = QuasilinearOptions {
                solve: solve_options(cfg),
                t_max: cfg.t_max,
                table_step: cfg.table_step,
            };
            Ok(solve_quasilinear(model, op, &opts)?)
        }
    }
}

fn write_solution(dir: &RunDir, report: &SolveReport) -> Result<(), Failure> {
    dir.write("solution.csv", &report.solution.to_csv())?;
    if let Some(v) = &report.intermediate {
        dir.write("intermediate.csv", &v.to_csv())?;
    }
    dir.json("solve.json", &report.summary())
}

pub fn solve(cfg: &RunConfig, name: &str) -> Outcome {
    let model = cfg.model.build()?;
    let dir = RunDir::create(cfg, name)?;
    let op = operator(cfg, &cfg.domain)?;
    let report = solve_model(cfg, &model, &op)?;
    write_solution(&dir, &report)?;
    let s = report.summary();
    println!("model:      {}", model.name());
    println!("nodes:      {} (h = {})", s.nodes, s.h);
    println!("method:     {:?}, {} iterations", s.method, s.iterations);
    println!("residual:   {:.3e}", s.residual);
    println!("max u:      {:.10}", s.max);
    for d in &s.diagnostics {
        println!("note:       {d}");
    }
    Ok(if report.converged { EXIT_PASS } else { EXIT_SOLVER })
}

fn midpoint_options(cfg: &RunConfig) -> MidpointOptions {
    MidpointOptions {
        pairs: cfg.pairs,
        tol: cfg.concavity_tol(),
        seed: cfg.seed,
        band: cfg.band,
        sweep: true,
    }
}

fn print_midpoint(label: &str, r: &ConcavityReport) {
    println!(
        "{label:<28} {} (worst defect {:.3e}, tol {:.3e}, {} pairs + {} sweep, {} violations)",
        if r.passed { "pass" } else { "FAIL" },
        r.worst_defect,
        r.tol,
        r.pairs_checked,
        r.sweep_checked,
        r.violations
    );
}

pub fn verify(cfg: &RunConfig, name: &str) -> Outcome {
    let model = cfg.model.build()?;
    let dir = RunDir::create(cfg, name)?;
    let op = operator(cfg, &cfg.domain)?;
    let report = solve_model(cfg, &model, &op)?;
    write_solution(&dir, &report)?;
    if !report.converged {
        return Err(Failure {
            code: EXIT_SOLVER,
            message: format!("solve did not converge (residual {:.3e})", report.residual),
        });
    }
    let u = &report.solution;
    let top = u.max();
    if !(top > 1e-8) {
        println!("solution is trivial (max u = {top:e}); concavity is not tested");
        return Ok(EXIT_INCONCLUSIVE);
    }
    let m_f = model.root_mf()?.value;
    if top >= m_f {
        println!("max u = {top} reaches M_f = {m_f}; phi is undefined there");
        return Ok(EXIT_INCONCLUSIVE);
    }
    let map = PhiMap::new(&model, top, 4000)?;
    let phi = |t: f64| map.eval(t);
    let opts = midpoint_options(cfg);
    let concave = midpoint_concavity(u, Some(&phi), &opts)?;
    let quasi = quasiconcavity(u, &opts)?;
    dir.json("concavity.json", &concave)?;
    dir.json("quasiconcavity.json", &quasi)?;
    println!("model:      {}", model.name());
    println!("max u:      {top:.10}");
    print_midpoint("phi(u) concave:", &concave);
    print_midpoint("u quasiconcave:", &quasi);
    Ok(if concave.passed && quasi.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

#[derive(Serialize)]
struct EtaRow {
    eta: f64,
    chain_holds: bool,
    u_convex: bool,
    v_convex: bool,
    u_witness: Option<mnls_core::concavity::Triple>,
}

#[derive(Serialize)]
struct CounterexampleSummary {
    alpha: f64,
    h: f64,
    multiplier: f64,
    max_u: f64,
    max_v: f64,
    multiplier_above_quarter: bool,
    max_in_bounds: bool,
    profile_window: (f64, f64),
    chain_levels: (f64, f64),
    witness: WitnessTriple,
    eta_levels: usize,
    u_not_quasiconcave: bool,
    v_quasiconcave: bool,
    sqrt_v_concave: bool,
    rectangle_u: bool,
    rectangle_v: bool,
    induced_source_fails_i: bool,
    induced_source_fails_ii: bool,
    reproduced: bool,
    solve: mnls_core::solver::SolveSummary,
    sqrt_v: ConcavityReport,
    quasi_u: ConcavityReport,
}

pub fn counterexample(cfg: &RunConfig, name: &str) -> Outcome {
    let alpha = cfg.alpha;
    if !(alpha >= 4.0) {
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!(
                "alpha = {alpha}: the construction needs a straight part of half-length at least 4 \
                 so the bump region separates from the strip profile"
            ),
        });
    }
    let mut cfg = cfg.clone();
    cfg.domain = ConvexDomain::stadium(alpha);
    let cfg = &cfg;
    let dir = RunDir::create(cfg, name)?;
    let op = operator(cfg, &cfg.domain)?;
    let grid = op.grid().clone();
    let v = solve_poisson(&op, &Field::from_fn(grid.clone(), |_, _| 1.0)?)?.solution;
    dir.write("torsion.csv", &v.to_csv())?;
    let opts = ConstrainedOptions {
        mu_bracket: cfg.mu_bracket,
        defect_tol: cfg.tolerances.constraint,
        ..ConstrainedOptions::default()
    };
    let report = solve_constrained_torsion(&op, &PlateauFunction, &opts)?;
    write_solution(&dir, &report)?;
    if !report.converged {
        return Err(Failure {
            code: EXIT_SOLVER,
            message: format!(
                "constrained solve did not converge (defect {:?}, residual {:.3e})",
                report.constraint_defect, report.residual
            ),
        });
    }
    let mu = report.multiplier.expect("constrained solves report a multiplier");
    let u = &report.solution;

    let base = find_witness_triple(u, None, alpha)?;
    let window = base.profile_window();
    let levels: Vec<f64> = if cfg.eta_scan {
        let n = cfg.eta_points;
        (0..n)
            .map(|k| window.0 + (window.1 - window.0) * (k as f64 + 0.5) / n as f64)
            .collect()
    } else {
        vec![base.eta]
    };
    let sopts = SuperlevelOptions {
        pairs: cfg.pairs,
        seed: cfg.seed,
        tol: 0.0,
    };
    let convex = |f: &Field, eta: f64| -> Result<SuperlevelReport, Failure> { Ok(superlevel_convexity(f, eta, &sopts)?) };
    let mut rows = Vec::with_capacity(levels.len());
    for &eta in &levels {
        let chain = find_witness_triple(u, Some(eta), alpha)?.holds;
        let su = convex(u, eta)?;
        // a level above max v leaves an empty, trivially convex set
        let v_convex = eta >= v.max() || convex(&v, eta)?.convex;
        rows.push(EtaRow {
            eta,
            chain_holds: chain,
            u_convex: su.convex,
            v_convex,
            u_witness: su.witness,
        });
    }
    let chosen = rows
        .iter()
        .find(|r| r.chain_holds && !r.u_convex)
        .map(|r| r.eta);
    let witness = match chosen {
        Some(eta) => find_witness_triple(u, Some(eta), alpha)?,
        None => base.clone(),
    };
    let mut csv = String::from("eta,chain_holds,u_convex,v_convex,mx,my,mu_value\n");
    for r in &rows {
        let (mx, my, mv) = r
            .u_witness
            .as_ref()
            .map_or((f64::NAN, f64::NAN, f64::NAN), |t| (t.mid[0], t.mid[1], t.values[2]));
        writeln!(
            csv,
            "{:.10},{},{},{},{mx},{my},{mv:.12e}",
            r.eta, r.chain_holds, r.u_convex, r.v_convex
        )
        .unwrap();
    }
    dir.write("eta_scan.csv", &csv)?;
    dir.write("witness.csv", &witness.to_csv())?;

    let mopts = midpoint_options(cfg);
    let sqrt = |t: f64| t.max(0.0).sqrt();
    let sqrt_v = midpoint_concavity(&v, Some(&sqrt), &mopts)?;
    let quasi_v = quasiconcavity(&v, &mopts)?;
    let quasi_u = quasiconcavity(u, &mopts)?;
    let rect_u = rectangle_property(u, 1.0);
    let rect_v = rectangle_property(&v, 0.3);
    let induced = classify(&counterexample_source(mu), &condition_options(cfg));
    dir.write("check.json", &(induced.to_json() + "\n"))?;

    let u_not_quasi = !quasi_u.passed && rows.iter().any(|r| !r.u_convex && r.u_witness.is_some());
    let v_quasi = quasi_v.passed && rows.iter().all(|r| r.v_convex);
    let summary = CounterexampleSummary {
        alpha,
        h: cfg.h,
        multiplier: mu,
        max_u: u.max(),
        max_v: v.max(),
        multiplier_above_quarter: mu > 0.25,
        max_in_bounds: u.max() > 1.0 && u.max() < 2.5,
        profile_window: window,
        chain_levels: base.admissible_levels(),
        witness: witness.clone(),
        eta_levels: rows.len(),
        u_not_quasiconcave: u_not_quasi,
        v_quasiconcave: v_quasi,
        sqrt_v_concave: sqrt_v.passed,
        rectangle_u: rect_u.passed,
        rectangle_v: rect_v.passed,
        induced_source_fails_i: induced.verdict_i.is_fail(),
        induced_source_fails_ii: induced.verdict_ii.is_fail(),
        reproduced: false,
        solve: report.summary(),
        sqrt_v: sqrt_v.clone(),
        quasi_u: quasi_u.clone(),
    };
    let reproduced = summary.multiplier_above_quarter
        && summary.max_in_bounds
        && chosen.is_some()
        && summary.u_not_quasiconcave
        && summary.v_quasiconcave
        && summary.sqrt_v_concave
        && summary.induced_source_fails_i
        && summary.induced_source_fails_ii;
    let summary = CounterexampleSummary { reproduced, ..summary };
    dir.json("summary.json", &summary)?;
    overlay(&dir, &cfg.domain, u, &witness)?;

    let yes = |b: bool| if b { "yes" } else { "NO" };
    println!("stadium alpha = {alpha}, h = {}, {} nodes", cfg.h, grid.len());
    println!("multiplier mu          {mu:.8}  (> 1/4: {})", yes(summary.multiplier_above_quarter));
    println!("max u                  {:.8}  (in (1, 5/2): {})", summary.max_u, yes(summary.max_in_bounds));
    println!(
        "witness P, Q, M        u = {:.6}, {:.6}, {:.6}",
        witness.values[0], witness.values[1], witness.values[2]
    );
    println!(
        "chain levels           ({:.6}, {:.6}); profile window ({:.6}, {:.6})",
        summary.chain_levels.0, summary.chain_levels.1, window.0, window.1
    );
    match chosen {
        Some(eta) => println!("witness level          eta = {eta:.6}"),
        None => println!("witness level          none of the {} scanned levels", rows.len()),
    }
    println!("u quasiconcave         {}", yes(!u_not_quasi));
    println!("v quasiconcave         {}", yes(v_quasi));
    println!("sqrt(v) concave        {}", yes(sqrt_v.passed));
    println!("rectangle property     u: {}, v: {}", yes(rect_u.passed), yes(rect_v.passed));
    println!(
        "induced source 1+mu*sigma' fails i: {}, ii: {}",
        yes(summary.induced_source_fails_i),
        yes(summary.induced_source_fails_ii)
    );
    Ok(if reproduced { EXIT_PASS } else { EXIT_FAIL })
}

fn overlay(dir: &RunDir, domain: &ConvexDomain, u: &Field, w: &WitnessTriple) -> Result<(), Failure> {
    let g = u.grid();
    let boundary: Vec<(f64, f64)> = domain.boundary_polygon(400);
    let level: Vec<(f64, f64)> = g
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(_, &v)| v > w.eta && v <= 1.0)
        .map(|(n, _)| (n.x, n.y))
        .collect();
    let bump: Vec<(f64, f64)> = g
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(_, &v)| v > 1.0)
        .map(|(n, _)| (n.x, n.y))
        .collect();
    let triple = [(w.p[0], w.p[1]), (w.m[0], w.m[1]), (w.q[0], w.q[1])];
    let (ex, ey) = domain.half_extent();
    let (cx, cy) = domain.center();
    let pad = 0.1 * ey;
    let mut svg = Svg::new((cx - ex - pad, cx + ex + pad), (cy - ey - pad, cy + ey + pad), true);
    svg.polygon(&boundary, "#333", "#f4f4f4");
    svg.dots(&level, 1.2, "#9ecae1", Some("u > eta"));
    svg.dots(&bump, 1.2, "#08519c", Some("u > 1"));
    svg.polyline(&[triple[0], triple[2]], "#d62728", None);
    svg.dots(&triple, 3.5, "#d62728", Some("P, M, Q"));
    for (pt, name) in triple.iter().zip(["P", "M", "Q"]) {
        svg.label(pt.0, pt.1, name);
    }
    let title = format!("superlevel set u > {:.4} and the witness triple", w.eta);
    dir.write("overlay.svg", &svg.finish(&title, "x", "y"))?;
    let mut csv = String::from("layer,x,y\n");
    for (layer, pts) in [
        ("boundary", &boundary[..]),
        ("superlevel", &level[..]),
        ("bump", &bump[..]),
        ("triple", &triple[..]),
    ] {
        for (x, y) in pts {
            writeln!(csv, "{layer},{x:.10},{y:.10}").unwrap();
        }
    }
    dir.write("overlay.csv", &csv)
}

#[derive(Serialize)]
struct PhiFamily {
    q: f64,
    /// `φ_weighted / φ_const` at `t = 1e-5`, both anchored at their `μ`.
    ratio_at_origin: f64,
    /// The same ratio for `φ` anchored at the origin.
    ratio_at_origin_from_zero: f64,
    /// `φ′_weighted / φ′_const = √a` at `t = 1e-5`.
    derivative_ratio_at_origin: f64,
    /// `min (φ_weighted − φ_const)` over the plotted `t ≥ 0.1`.
    min_gap_anchored: f64,
    min_gap_from_zero: f64,
}

pub fn plot(cfg: &RunConfig, name: &str) -> Outcome {
    let dir = RunDir::create(cfg, name)?;
    let reg = ModelRegistry::new();
    let ts: Vec<f64> = (1..=300).map(|k| 0.01 * k as f64).collect();
    let t0 = 1e-5;
    let mut families = Vec::new();
    let mut anchored = Vec::new();
    let mut origin = Vec::new();
    for &q in &cfg.q_list {
        let plain = reg.lookup(&format!("power:p={q}"))?;
        let weighted = reg.lookup(&format!("mnls-power:q={q}"))?;
        let mut rows_a = Vec::with_capacity(ts.len());
        let mut rows_o = Vec::with_capacity(ts.len());
        for &t in &ts {
            rows_a.push((t, plain.phi(t)?, weighted.phi(t)?));
            rows_o.push((t, plain.phi_from_origin(t)?, weighted.phi_from_origin(t)?));
        }
        let min_gap = |rows: &[(f64, f64, f64)]| {
            rows.iter()
                .filter(|r| r.0 >= 0.1 - 1e-12)
                .map(|r| r.2 - r.1)
                .fold(f64::INFINITY, f64::min)
        };
        families.push(PhiFamily {
            q,
            ratio_at_origin: weighted.phi(t0)? / plain.phi(t0)?,
            ratio_at_origin_from_zero: weighted.phi_from_origin(t0)? / plain.phi_from_origin(t0)?,
            derivative_ratio_at_origin: weighted.phi_derivative(t0)? / plain.phi_derivative(t0)?,
            min_gap_anchored: min_gap(&rows_a),
            min_gap_from_zero: min_gap(&rows_o),
        });
        anchored.push((q, rows_a));
        origin.push((q, rows_o));
    }
    for (file, title, data) in [
        ("phi", "phi anchored at mu", &anchored),
        ("phi_origin", "phi anchored at 0", &origin),
    ] {
        let mut csv = String::from("q,t,phi_const,phi_weighted\n");
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (q, rows) in data.iter() {
            for &(t, a, b) in rows {
                writeln!(csv, "{q},{t:.4},{a:.12e},{b:.12e}").unwrap();
                lo = lo.min(a.min(b));
                hi = hi.max(a.max(b));
            }
        }
        let pad = 0.05 * (hi - lo);
        let mut svg = Svg::new((0.0, 3.0), (lo - pad, hi + pad), false);
        for (k, (q, rows)) in data.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let plain: Vec<_> = rows.iter().map(|r| (r.0, r.1)).collect();
            let weighted: Vec<_> = rows.iter().map(|r| (r.0, r.2)).collect();
            svg.polyline(&plain, color, Some(&format!("q={q}, a=1")));
            svg.polyline(&weighted, PALETTE[(k + 4) % PALETTE.len()], Some(&format!("q={q}, a=1+2t^2")));
        }
        dir.write(&format!("{file}.svg"), &svg.finish(title, "t", "phi(t)"))?;
        dir.write(&format!("{file}.csv"), &csv)?;
    }
    dir.json("plot.json", &families)?;
    println!("{:>5} {:>14} {:>14} {:>14} {:>12} {:>12}", "q", "ratio(1e-5)", "ratio0(1e-5)", "sqrt a(1e-5)", "min gap", "min gap0");
    for f in &families {
        println!(
            "{:>5} {:>14.8} {:>14.8} {:>14.8} {:>12.5} {:>12.5}",
            f.q,
            f.ratio_at_origin,
            f.ratio_at_origin_from_zero,
            f.derivative_ratio_at_origin,
            f.min_gap_anchored,
            f.min_gap_from_zero
        );
    }
    Ok(EXIT_PASS)
}
