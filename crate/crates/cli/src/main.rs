use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mnls_cli::commands;
use mnls_cli::config::{parse_domain, parse_real, ModelSelection, RunConfig};
use mnls_cli::{EXIT_CONFIG, EXIT_PASS};
use mnls_core::geometry::ConvexDomain;

const AFTER_HELP: &str = "\
Exit codes: 0 pass, 1 hypothesis or property fails, 2 inconclusive,
3 solver failure, 4 infeasible constraint, 64 configuration error.

Every command writes into its run directory (default runs/<command>):
  config.snapshot      effective configuration (TOML, reloadable with --config)
  solution.csv         x,y,value at the interior grid nodes
  torsion.csv          x,y,value of the torsion function (counterexample)
  intermediate.csv     x,y,value of v with u = g(v) (quasilinear solves)
  g.csv                t,g,dg of the transform table
  eta_scan.csv         eta,chain_holds,u_convex,v_convex,mx,my,mu_value
  witness.csv          label,x,y,u for the points P, Q, M
  phi.csv              q,t,phi_const,phi_weighted (phi anchored at mu)
  phi_origin.csv       q,t,phi_const,phi_weighted (phi anchored at 0)
  overlay.csv          layer,x,y of every point drawn in overlay.svg
Reports are JSON; each SVG has a CSV sidecar with the plotted data.";

#[derive(Parser)]
#[command(name = "mnls", version, about = "Concavity laboratory for MNLS Dirichlet problems", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration; its keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Registry key, e.g. `mnls-power:q=0.5` (see `mnls models`).
    #[arg(long, global = true)]
    model: Option<String>,
    /// `disk[:r=..,cx=..,cy=..]`, `ellipse:a=..,b=..`, `rectangle:hx=..,hy=..`,
    /// `stadium:alpha=..[,lambda=..]`.
    #[arg(long, global = true, value_parser = parse_domain)]
    domain: Option<ConvexDomain>,
    /// Grid spacing; fractions such as `1/32` are accepted.
    #[arg(long, global = true, value_parser = parse_real)]
    h: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random pairs per midpoint test.
    #[arg(long, global = true)]
    pairs: Option<usize>,
    /// Run directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List the registry models.
    Models {
        #[arg(long)]
        json: bool,
    },
    /// Check the concavity hypotheses on a model.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Tabulate g and check the transform identities.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_real)]
        t_max: Option<f64>,
        #[arg(long, value_parser = parse_real)]
        step: Option<f64>,
    },
    /// Solve the Dirichlet problem.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Solve, then test concavity of phi(u) and quasiconcavity of u.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Constrained torsion on a stadium: the non-quasiconcave solution.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_real)]
        alpha: Option<f64>,
        /// Scan superlevel sets over the profile window.
        #[arg(long)]
        eta_scan: Option<bool>,
        #[arg(long)]
        eta_points: Option<usize>,
    },
    /// Curves of phi for a = 1 and a = 1 + 2t^2 across source exponents.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Comma-separated exponents q of f = t^q.
        #[arg(long, value_delimiter = ',', value_parser = parse_real)]
        q: Option<Vec<f64>>,
    },
}

fn apply(common: &Common, cfg: &mut RunConfig) {
    if let Some(m) = &common.model {
        cfg.model = ModelSelection::Registry(m.clone());
    }
    if let Some(d) = common.domain {
        cfg.domain = d;
    }
    if let Some(h) = common.h {
        cfg.h = h;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(p) = common.pairs {
        cfg.pairs = p;
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.clone());
    }
}

fn build_config(common: &Common, extra: impl FnOnce(&mut RunConfig)) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    apply(common, &mut cfg);
    extra(&mut cfg);
    let cfg = match &common.config {
        Some(path) => cfg.merge_file(path).map_err(|e| e.to_string())?,
        None => {
            cfg.validate().map_err(|e| e.to_string())?;
            cfg
        }
    };
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if help { EXIT_PASS } else { EXIT_CONFIG });
        }
    };
    let (name, common) = match &cli.command {
        Command::Models { .. } => ("models", Common::default()),
        Command::Check { common, .. } => ("check", common.clone()),
        Command::Transform { common, .. } => ("transform", common.clone()),
        Command::Solve { common } => ("solve", common.clone()),
        Command::Verify { common } => ("verify", common.clone()),
        Command::Counterexample { common, .. } => ("counterexample", common.clone()),
        Command::Plot { common, .. } => ("plot", common.clone()),
    };
    let cfg = build_config(&common, |cfg| match &cli.command {
        Command::Check { grid_size: Some(n), .. } => cfg.grid_size = *n,
        Command::Transform { t_max, step, .. } => {
            if let Some(t) = t_max {
                cfg.t_max = *t;
            }
            if let Some(s) = step {
                cfg.table_step = *s;
            }
        }
        Command::Counterexample {
            alpha,
            eta_scan,
            eta_points,
            ..
        } => {
            if let Some(a) = alpha {
                cfg.alpha = *a;
            }
            if let Some(e) = eta_scan {
                cfg.eta_scan = *e;
            }
            if let Some(n) = eta_points {
                cfg.eta_points = *n;
            }
        }
        Command::Plot { q: Some(q), .. } => cfg.q_list = q.clone(),
        _ => {}
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match &cli.command {
        Command::Models { json } => commands::models(*json),
        Command::Check { .. } => commands::check(&cfg, name),
        Command::Transform { .. } => commands::transform(&cfg, name),
        Command::Solve { .. } => commands::solve(&cfg, name),
        Command::Verify { .. } => commands::verify(&cfg, name),
        Command::Counterexample { .. } => commands::counterexample(&cfg, name),
        Command::Plot { .. } => commands::plot(&cfg, name),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
