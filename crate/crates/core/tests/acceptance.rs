//! Acceptance suite: one line per criterion, `PASS` or `FAIL`.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when a criterion's outcome differs from `EXPECTED_RED`:
//! a new failure, or a known failure that started passing.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mnls_core::concavity::*;
use mnls_core::conditions::{classify, ConditionOptions};
use mnls_core::geometry::{make_grid, ConvexDomain, Field};
use mnls_core::model::{counterexample_source, ModelRegistry, ScalarModel};
use mnls_core::plateau::PlateauFunction;
use mnls_core::solver::*;
use mnls_core::transform::{solve_transform, verify_identities};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail on this implementation, with the reason.
const EXPECTED_RED: &[(u32, &str)] = &[
    (
        3,
        "Shortley-Weller is exact on quadratics, so the disk torsion error is roundoff and has no order",
    ),
    (
        6,
        "phi anchored at mu: both integrals converge at 0 for q < 1, so the ratio tends to phi_a(0)/phi_1(0), not sqrt(a(0))",
    ),
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn lookup(spec: &str) -> ScalarModel {
    ModelRegistry::new().lookup(spec).unwrap()
}

fn within(elapsed: Duration, secs: f64) -> bool {
    elapsed.as_secs_f64() < secs
}

/// Bilinear interpolation written against the lattice directly.
fn bilinear(field: &Field, x: f64, y: f64) -> Option<f64> {
    let g = field.grid();
    let (cx, cy) = g.domain().center();
    let h = g.h();
    let (sx, sy) = ((x - cx) / h, (y - cy) / h);
    let (i, j) = (sx.floor(), sy.floor());
    let (s, t) = (sx - i, sy - j);
    let (i, j) = (i as i64, j as i64);
    let v = |a: i64, b: i64| g.at(a, b).map(|k| field.values()[k]);
    Some(
        (1.0 - s) * (1.0 - t) * v(i, j)?
            + s * (1.0 - t) * v(i + 1, j)?
            + (1.0 - s) * t * v(i, j + 1)?
            + s * t * v(i + 1, j + 1)?,
    )
}

fn condition_table() -> Outcome {
    let start = Instant::now();
    let opts = ConditionOptions::default();
    let cases: [(&str, &[f64], (bool, bool)); 4] = [
        ("power", &[0.0, 0.25, 0.5, 0.75, 1.0], (true, true)),
        ("shifted-power", &[0.1, 0.25, 0.5, 0.75, 1.0], (true, false)),
        ("power", &[1.5, 2.0, 3.0], (false, true)),
        ("shifted-power", &[1.5, 2.0, 3.0], (false, false)),
    ];
    let mut wrong = Vec::new();
    for (key, ps, (want_i, want_ii)) in cases {
        for p in ps {
            let r = classify(&lookup(&format!("{key}:p={p}")), &opts);
            // "fails" means a witnessed failure, not an inconclusive verdict
            let ok_i = if want_i { r.verdict_i.is_pass() } else { r.verdict_i.is_fail() };
            let ok_ii = if want_ii { r.verdict_ii.is_pass() } else { r.verdict_ii.is_fail() };
            if !(ok_i && ok_ii) {
                wrong.push(format!("{key}:p={p}"));
            }
        }
    }
    let t = start.elapsed();
    Outcome {
        passed: wrong.is_empty() && within(t, 1.0),
        detail: format!("16 models, misclassified {wrong:?}, {:.2} s", t.as_secs_f64()),
    }
}

fn transform_identities() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for spec in ["mnls-power:q=0.5", "heisenberg:lambda=0"] {
        let m = lookup(spec);
        let table = solve_transform(&m, 2.0, 1e-3).unwrap();
        let r = verify_identities(&m, &table, 50).unwrap();
        ok &= r.samples.len() == 50 && r.passes(1e-6);
        parts.push(format!(
            "{spec}: |H-F(g)| {:.1e}, |Hh'/h^2-gamma(g)| {:.1e}",
            r.max_h_defect, r.max_gamma_defect
        ));
    }
    let t = start.elapsed();
    Outcome {
        passed: ok && within(t, 1.0),
        detail: format!("{}, {:.2} s", parts.join("; "), t.as_secs_f64()),
    }
}

fn solver_accuracy() -> Outcome {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut bounded = true;
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let g = Arc::new(make_grid(&ConvexDomain::unit_disk(), h).unwrap());
        let op = Laplacian::new(g.clone()).unwrap();
        let u = solve_poisson(&op, &Field::from_fn(g, |_, _| 1.0).unwrap()).unwrap().solution;
        let err = u
            .grid()
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(n, v)| (v - 0.25 * (1.0 - n.x * n.x - n.y * n.y)).abs())
            .fold(0.0, f64::max);
        bounded &= err <= 2.0 * h * h;
        errors.push(err);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|p| (p - 2.0).abs() <= 0.3);
    let t = start.elapsed();
    Outcome {
        passed: bounded && order_ok && within(t, 30.0),
        detail: format!(
            "errors {:.2e} {:.2e} {:.2e} (<= 2h^2: {bounded}), orders {:.2} {:.2}, {:.1} s",
            errors[0],
            errors[1],
            errors[2],
            orders[0],
            orders[1],
            t.as_secs_f64()
        ),
    }
}

fn counterexample_pipeline() -> Outcome {
    let start = Instant::now();
    let (alpha, h) = (12.0, 1.0 / 32.0);
    let g = Arc::new(make_grid(&ConvexDomain::stadium(alpha), h).unwrap());
    let op = Laplacian::new(g.clone()).unwrap();
    let report = solve_constrained_torsion(&op, &PlateauFunction, &ConstrainedOptions::default()).unwrap();
    let mu = report.multiplier.unwrap();
    let u = &report.solution;
    let v = solve_poisson(&op, &Field::from_fn(g, |_, _| 1.0).unwrap()).unwrap().solution;

    let a = report.converged && mu > 0.25;
    let b = u.max() > 1.0 && u.max() < 2.5;

    // (c) scan the profile window for a level where the structured chain
    // holds and the superlevel set is non-convex; re-evaluate both witnesses
    let window = find_witness_triple(u, None, alpha).unwrap().profile_window();
    let n = 41;
    let mut c = None;
    for k in 0..n {
        let eta = window.0 + (window.1 - window.0) * (k as f64 + 0.5) / n as f64;
        let w = find_witness_triple(u, Some(eta), alpha).unwrap();
        if !w.holds {
            continue;
        }
        let s = superlevel_convexity(u, eta, &SuperlevelOptions::default()).unwrap();
        let Some(t) = s.witness.filter(|_| !s.convex) else {
            continue;
        };
        let at = |p: [f64; 2]| bilinear(u, p[0], p[1]).unwrap();
        let mid = [0.5 * (w.p[0] + w.q[0]), 0.5 * (w.p[1] + w.q[1])];
        let chain = at(w.p) > eta && at(w.q) > eta && at(mid) <= eta && mid == w.m;
        let free = at(t.x) > eta && at(t.y) > eta && at(t.mid) <= eta;
        if chain && free {
            c = Some((eta, w));
            break;
        }
    }

    let mopts = MidpointOptions::for_grid(h);
    let sqrt = |t: f64| t.max(0.0).sqrt();
    let d = midpoint_concavity(&v, Some(&sqrt), &mopts).unwrap();
    let induced = classify(&counterexample_source(mu), &ConditionOptions::default());
    let e = induced.verdict_i.is_fail() && induced.verdict_ii.is_fail();

    let t = start.elapsed();
    let witness = c.as_ref().map_or("none".to_string(), |(eta, w)| {
        format!(
            "eta {eta:.4}: u(P) {:.4} at (0,{:.4}), u(Q) {:.4}, u(M) {:.4}",
            w.values[0], w.p[1], w.values[1], w.values[2]
        )
    });
    Outcome {
        passed: a && b && c.is_some() && d.passed && e && within(t, 300.0),
        detail: format!(
            "(a) mu {mu:.6} {a}; (b) max u {:.4} {b}; (c) {witness}; (d) sqrt v worst {:.1e} tol {:.1e} {}; (e) i {} ii {}; {:.1} s",
            u.max(),
            d.worst_defect,
            d.tol,
            d.passed,
            induced.verdict_i.kind(),
            induced.verdict_ii.kind(),
            t.as_secs_f64()
        ),
    }
}

fn quasilinear_concavity() -> Outcome {
    let start = Instant::now();
    let h = 1.0 / 64.0;
    let model = lookup("mnls-power:q=0.5");
    let g = Arc::new(make_grid(&ConvexDomain::unit_disk(), h).unwrap());
    let op = Laplacian::new(g).unwrap();
    let report = solve_quasilinear(&model, &op, &QuasilinearOptions::default()).unwrap();
    let u = &report.solution;
    let map = PhiMap::new(&model, u.max(), 4000).unwrap();
    let phi = |t: f64| map.eval(t);
    let opts = MidpointOptions::for_grid(h);
    let r = midpoint_concavity(u, Some(&phi), &opts).unwrap();
    let t = start.elapsed();
    Outcome {
        passed: report.converged && r.passed && r.pairs_checked == 100_000 && r.band > 0 && within(t, 120.0),
        detail: format!(
            "max u {:.4}, {} pairs + {} sweep, band {}, worst {:.1e}, tol {:.1e}, {:.1} s",
            u.max(),
            r.pairs_checked,
            r.sweep_checked,
            r.band,
            r.worst_defect,
            r.tol,
            t.as_secs_f64()
        ),
    }
}

/// Composite Simpson rule.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let step = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|k| f(a + k as f64 * step) * if k % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * step / 3.0
}

/// `∫_lo^t √(a(s)(q+1)/s^{q+1}) ds` for `a ∈ {1, 1 + 2s²}`, with `lo ∈ {0, 1}`.
///
/// `s = w^m`, `m = 2/(1−q)`, turns the integrand into
/// `m √(q+1) √a(w^m)`, smooth on `[0, 1]`.
fn phi_oracle(q: f64, weighted: bool, from_origin: bool, t: f64) -> f64 {
    let m = 2.0 / (1.0 - q);
    let k = (q + 1.0).sqrt() * m;
    let body = |w: f64| {
        let s = w.powf(m);
        k * if weighted { (1.0 + 2.0 * s * s).sqrt() } else { 1.0 }
    };
    let lo = if from_origin { 0.0 } else { 1.0 };
    simpson(body, lo, t.powf(1.0 / m), 4000)
}

fn phi_families() -> Outcome {
    let start = Instant::now();
    let t0 = 1e-5;
    let mut ratio_ok = true;
    let mut order_ok = true;
    let mut consistent = true;
    let mut rows = Vec::new();
    for q in [0.0, 0.3, 0.6, 0.9] {
        let plain = lookup(&format!("power:p={q}"));
        let weighted = lookup(&format!("mnls-power:q={q}"));
        // both families have ν = 1, so φ is anchored at μ = 1
        consistent &= plain.mu() == 1.0 && weighted.mu() == 1.0;
        for t in [t0, 0.5, 2.0] {
            consistent &= (plain.phi(t).unwrap() - phi_oracle(q, false, false, t)).abs() < 1e-8;
            consistent &= (weighted.phi(t).unwrap() - phi_oracle(q, true, false, t)).abs() < 1e-8;
        }
        let ratio = phi_oracle(q, true, false, t0) / phi_oracle(q, false, false, t0);
        let ratio0 = phi_oracle(q, true, true, t0) / phi_oracle(q, false, true, t0);
        let gaps = |from_origin: bool| {
            (0..=290)
                .map(|k| 0.1 + 0.01 * k as f64)
                .map(|t| phi_oracle(q, true, from_origin, t) - phi_oracle(q, false, from_origin, t))
                .fold(f64::INFINITY, f64::min)
        };
        let (gap, gap0) = (gaps(false), gaps(true));
        ratio_ok &= (ratio - 1.0).abs() <= 1e-3;
        order_ok &= gap > 0.0;
        rows.push(format!("q={q}: ratio {ratio:.4} gap {gap:.3} [origin: {ratio0:.6}, {gap0:.3}]"));
    }
    let t = start.elapsed();
    Outcome {
        passed: ratio_ok && order_ok && consistent && within(t, 5.0),
        detail: format!(
            "ratio within 1e-3 {ratio_ok}, ordering on [0.1, 3] {order_ok}; {}; {:.2} s",
            rows.join("; "),
            t.as_secs_f64()
        ),
    }
}

/// `γ` of `f = −λt + t/√(1+t²)`, `a = 1 − t²/(2(1+t²))`, by hand.
fn relativistic_gamma(l: f64, t: f64) -> f64 {
    let r = (1.0 + t * t).sqrt();
    let f = -l * t + t / r;
    let big_f = -0.5 * l * t * t + t * t / (r + 1.0);
    let df = -l + 1.0 / (r * r * r);
    let a = 1.0 - t * t / (2.0 * r * r);
    let da = -t / (r * r * r * r);
    big_f * df / (f * f) - 0.5 * big_f * da / (f * a)
}

fn relativistic_gamma_claim() -> Outcome {
    let start = Instant::now();
    let l = 0.5;
    let m = lookup("relativistic:lambda=0.5,sign=minus");
    let mf = m.root_mf().unwrap().value;
    let exact_mf = (1.0 / (l * l) - 1.0_f64).sqrt();
    let grid: Vec<f64> = (1..=50).map(|k| mf * k as f64 / 51.0).collect();
    let mut consistent = (mf - exact_mf).abs() < 1e-10;
    for &t in grid.iter().chain([1e-4].iter()) {
        let want = relativistic_gamma(l, t);
        consistent &= (m.gamma(t).unwrap() - want).abs() <= 1e-9 * want.abs().max(1.0);
    }
    let g0 = relativistic_gamma(l, 1e-4);
    let values: Vec<f64> = grid.iter().map(|&t| relativistic_gamma(l, t)).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let t = start.elapsed();
    Outcome {
        passed: (g0 - 0.5).abs() <= 1e-3 && decreasing && consistent && within(t, 1.0),
        detail: format!(
            "gamma(1e-4) {g0:.6}, strictly decreasing on 50 points of (0, {mf:.6}) {decreasing}, \
             library matches closed form {consistent}, {:.2} s",
            t.as_secs_f64()
        ),
    }
}

const CASES: usize = 1000;

fn scaling_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let opts = ConditionOptions {
        grid_size: 128,
        ..ConditionOptions::default()
    };
    for _ in 0..CASES {
        let spec = match rng.random_range(0..3) {
            0 => format!("power:p={}", rng.random_range(0.2..3.0)),
            1 => format!("shifted-power:p={}", rng.random_range(0.1..3.0)),
            _ => format!("mnls-power:q={}", rng.random_range(0.0..0.95)),
        };
        let (l, m) = (rng.random_range(0.2..5.0), rng.random_range(0.2..5.0));
        let base = lookup(&spec);
        let r0 = classify(&base, &opts);
        let r1 = classify(&base.scaled(l, m), &opts);
        for ((name, a), (_, b)) in r0.verdicts().iter().zip(r1.verdicts().iter()) {
            if a.kind() != b.kind() {
                return Err(format!("{spec} scaled by ({l}, {m}): {name} {} vs {}", a.kind(), b.kind()));
            }
        }
    }
    Ok(())
}

fn comparison_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let op = Laplacian::new(Arc::new(make_grid(&ConvexDomain::unit_disk(), 0.2).unwrap())).unwrap();
    let opts = SolveOptions::default();
    for _ in 0..CASES {
        let (a, b, c) = (rng.random_range(0.0..2.0), rng.random_range(0.0..1.0), rng.random_range(0.0..2.0));
        let (d, e) = (rng.random_range(0.0..1.0), rng.random_range(0.0..3.0));
        let low = move |u: f64| a + b * u.tanh() + c * u;
        let high = move |u: f64| low(u) + d * (1.0 + (e * u).tanh());
        let u1 = solve_semilinear(&op, &Source::new(low), None, &opts).map_err(|e| e.to_string())?;
        let u2 = solve_semilinear(&op, &Source::new(high), None, &opts).map_err(|e| e.to_string())?;
        if !(u1.converged && u2.converged) {
            return Err(format!("no convergence at ({a}, {b}, {c}, {d}, {e})"));
        }
        if u1.solution.values().iter().zip(u2.solution.values()).any(|(x, y)| *x > y + 1e-12) {
            return Err(format!("ordering broken at ({a}, {b}, {c}, {d}, {e})"));
        }
    }
    Ok(())
}

fn symmetry_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let op = Laplacian::new(Arc::new(make_grid(&ConvexDomain::stadium(2.0), 0.25).unwrap())).unwrap();
    let grid = op.grid().clone();
    let (ni, nj) = grid.lattice_extent();
    for _ in 0..CASES {
        let (a, b, k) = (rng.random_range(0.1..2.0), rng.random_range(-0.5..0.5), rng.random_range(0.5..4.0));
        let src = Source::new(move |u: f64| a + b * (k * u).sin());
        let r = solve_semilinear(&op, &src, None, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let u = &r.solution;
        let mut defect: f64 = 0.0;
        for i in -ni..=ni {
            for j in -nj..=nj {
                if grid.at(i, j).is_some() {
                    let v = u.lattice_value(i, j);
                    defect = defect
                        .max((v - u.lattice_value(-i, j)).abs())
                        .max((v - u.lattice_value(i, -j)).abs());
                }
            }
        }
        if !r.converged || defect > 1e-9 {
            return Err(format!("({a}, {b}, {k}): converged {}, mirror defect {defect:e}", r.converged));
        }
    }
    Ok(())
}

fn transform_invariance_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let grid = Arc::new(make_grid(&ConvexDomain::unit_disk(), 0.1).unwrap());
    let fields = [
        Field::from_fn(grid.clone(), |x, y| 1.0 + (2.0 * x).sin() * (1.5 * y + 0.3).cos() + 0.2 * x * y).unwrap(),
        Field::from_fn(grid, |x, y| 2.0 - x * x - 2.0 * y * y).unwrap(),
    ];
    if fields.iter().any(|f| !(f.min() > 0.0)) {
        return Err("test fields must be positive for t^p".into());
    }
    for case in 0..CASES {
        let u = &fields[case % 2];
        let (p, c, seed) = (rng.random_range(0.2..4.0), rng.random_range(0.0..3.0), rng.random::<u64>());
        let opts = MidpointOptions {
            pairs: 200,
            tol: 0.0,
            seed,
            band: 0,
            sweep: false,
        };
        // ψ acts on point values of u; mapping the nodal values first would
        // test a different field, since interpolation does not commute with ψ
        let psi = move |t: f64| t.powf(p) + c * t;
        let before = midpoint_test(u, None, TestKind::Quasiconcavity, &opts).map_err(|e| e.to_string())?;
        let after = midpoint_test(u, Some(&psi), TestKind::Quasiconcavity, &opts).map_err(|e| e.to_string())?;
        if before.passed != after.passed || before.violations != after.violations {
            return Err(format!("t^{p} + {c} t with seed {seed}: verdict changed"));
        }
    }
    Ok(())
}

fn profile_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..CASES {
        let (q, beta) = (rng.random_range(0.05..0.95), rng.random_range(0.0..5.0));
        let p = PowerProfile::for_exponent(q, beta);
        for k in 1..=20 {
            let t = 0.1 * k as f64;
            let e = 1e-4 * t;
            let fd = (p.value(t + e) - 2.0 * p.value(t) + p.value(t - e)) / (e * e);
            if (fd - p.second_derivative(t)).abs() >= 1e-6 * (1.0 + fd.abs()) {
                return Err(format!("q={q} beta={beta} t={t}: fd {fd} vs {}", p.second_derivative(t)));
            }
        }
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let suites: [(&str, fn(&mut ChaCha8Rng) -> Result<(), String>); 5] = [
        ("scaling", scaling_suite),
        ("comparison", comparison_suite),
        ("symmetry", symmetry_suite),
        ("monotone transform", transform_invariance_suite),
        ("profile second derivative", profile_suite),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, run) in suites {
        match run(&mut rng) {
            Ok(()) => parts.push(format!("{name} ok")),
            Err(e) => {
                ok = false;
                parts.push(format!("{name} FAILED: {e}"));
            }
        }
    }
    Outcome {
        passed: ok,
        detail: format!("{CASES} cases each, seed 0x5eed: {}, {:.1} s", parts.join(", "), start.elapsed().as_secs_f64()),
    }
}

fn main() -> ExitCode {
    // `cargo test -- --list` still expects one line per test
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "condition table", condition_table),
        (2, "transform identities", transform_identities),
        (3, "solver accuracy", solver_accuracy),
        (4, "counterexample pipeline", counterexample_pipeline),
        (5, "quasilinear phi-concavity", quasilinear_concavity),
        (6, "phi-curve families", phi_families),
        (7, "relativistic gamma", relativistic_gamma_claim),
        (8, "property suites", property_suites),
    ];
    if std::env::args().any(|a| a == "--list") {
        for (n, name, _) in criteria {
            println!("criterion_{n}_{}: test", name.replace([' ', '-'], "_"));
        }
        return ExitCode::SUCCESS;
    }
    let mut unexpected = Vec::new();
    for (n, name, run) in criteria {
        let out = run();
        let red = EXPECTED_RED.iter().find(|(k, _)| *k == n);
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {}", out.detail);
        match (out.passed, red) {
            (false, Some((_, why))) => println!("    known failure: {why}"),
            (true, Some(_)) => unexpected.push(format!("criterion {n} passes but is listed as failing")),
            (false, None) => unexpected.push(format!("criterion {n} fails")),
            (true, None) => {}
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: outcomes as expected ({} known failures)", EXPECTED_RED.len());
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("acceptance: {u}");
        }
        ExitCode::FAILURE
    }
}
