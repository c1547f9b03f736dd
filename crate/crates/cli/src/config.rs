//! Run configuration: built from command-line flags, then overridden key by
//! key by an optional TOML file.

use std::path::{Path, PathBuf};

use mnls_core::geometry::ConvexDomain;
use mnls_core::model::{ExprModelSpec, ModelRegistry, ScalarModel};
use serde::{Deserialize, Serialize};

/// A registry key such as `mnls-power:q=0.5`, or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSelection {
    Registry(String),
    Inline(ExprModelSpec),
}

impl ModelSelection {
    pub fn build(&self) -> mnls_core::Result<ScalarModel> {
        match self {
            ModelSelection::Registry(key) => ModelRegistry::new().lookup(key),
            ModelSelection::Inline(spec) => spec.build(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Fixed-point defect at which iterations stop.
    pub solve: f64,
    /// Backward error required of a converged solve.
    pub residual: f64,
    pub max_iter: usize,
    /// Midpoint-test tolerance; `5h²` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concavity: Option<f64>,
    /// Relative constraint defect of the constrained solve.
    pub constraint: f64,
    /// Roundoff allowance of the hypothesis checks.
    pub condition: f64,
    /// Bound on the transform identity defects.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solve: 1e-10,
            residual: 1e-9,
            max_iter: 10_000,
            concavity: None,
            constraint: 1e-6,
            condition: 1e-9,
            identity: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Grid spacing.
    pub h: f64,
    pub seed: u64,
    /// Random pairs per midpoint test.
    pub pairs: usize,
    /// Boundary band of the midpoint tests, in lattice steps.
    pub band: i64,
    pub mu_bracket: [f64; 2],
    /// Points of the hypothesis-check grid.
    pub grid_size: usize,
    /// Upper end of the transform table.
    pub t_max: f64,
    pub table_step: f64,
    /// Half-length of the stadium in `counterexample`.
    pub alpha: f64,
    pub eta_scan: bool,
    pub eta_points: usize,
    /// Exponents of the `plot` families.
    pub q_list: Vec<f64>,
    /// Run directory; `runs/<command>` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub domain: ConvexDomain,
    pub model: ModelSelection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 32.0,
            seed: 0x5eed,
            pairs: 100_000,
            band: 2,
            mu_bracket: [0.25, 8.0],
            grid_size: 512,
            t_max: 2.0,
            table_step: 1e-3,
            alpha: 12.0,
            eta_scan: true,
            eta_points: 41,
            q_list: vec![0.0, 0.3, 0.6, 0.9],
            output: None,
            tolerances: Tolerances::default(),
            domain: ConvexDomain::unit_disk(),
            model: ModelSelection::Registry("torsion".into()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides `self` with every key present in `text`.
    pub fn merge_toml(&self, text: &str) -> Result<Self, ConfigError> {
        let over: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let mut base: toml::Table = toml::from_str(&self.to_toml()).expect("own serialization parses");
        for (k, v) in over {
            // a model or domain given in the file replaces the flag value
            // wholesale rather than merging field by field
            match (base.get_mut(&k), v) {
                (Some(toml::Value::Table(b)), toml::Value::Table(o)) if k == "tolerances" => {
                    b.extend(o);
                }
                (_, v) => {
                    base.insert(k, v);
                }
            }
        }
        let cfg: RunConfig = base.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn merge_file(&self, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        self.merge_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h = {} must be positive", self.h));
        }
        if self.pairs == 0 {
            return bad("pairs must be positive".into());
        }
        if self.band < 0 {
            return bad("band must be non-negative".into());
        }
        let [lo, hi] = self.mu_bracket;
        if !(0.0 < lo && lo < hi) {
            return bad(format!("mu_bracket [{lo}, {hi}] must satisfy 0 < lo < hi"));
        }
        if !(self.t_max > 0.0 && self.table_step > 0.0 && self.table_step < self.t_max) {
            return bad("need 0 < table_step < t_max".into());
        }
        if self.eta_points < 1 {
            return bad("eta_points must be at least 1".into());
        }
        if self.grid_size < 16 {
            return bad("grid_size must be at least 16".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("solve", t.solve),
            ("residual", t.residual),
            ("constraint", t.constraint),
            ("condition", t.condition),
            ("identity", t.identity),
        ] {
            if !(v > 0.0) {
                return bad(format!("tolerances.{name} must be positive"));
            }
        }
        if t.concavity.is_some_and(|c| !(c >= 0.0)) {
            return bad("tolerances.concavity must be non-negative".into());
        }
        self.domain
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn concavity_tol(&self) -> f64 {
        self.tolerances.concavity.unwrap_or(5.0 * self.h * self.h)
    }

    pub fn run_dir(&self, command: &str) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs").join(command))
    }
}

/// Parses `1/32`, `0.03125` and the like.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// `disk`, `disk:r=3`, `ellipse:a=2,b=1`, `rectangle:hx=1,hy=0.5`,
/// `stadium:alpha=12[,lambda=1]`.
pub fn parse_domain(s: &str) -> Result<ConvexDomain, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params = std::collections::BTreeMap::new();
    for item in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected key=value in '{item}'"))?;
        params.insert(k.trim().to_string(), parse_real(v)?);
    }
    let mut take = |k: &str, default: Option<f64>| {
        params
            .remove(k)
            .or(default)
            .ok_or_else(|| format!("domain '{kind}' needs {k}="))
    };
    let d = match kind.trim() {
        "disk" => ConvexDomain::Disk {
            center: [take("cx", Some(0.0))?, take("cy", Some(0.0))?],
            radius: take("r", Some(1.0))?,
        },
        "ellipse" => ConvexDomain::Ellipse {
            semi_x: take("a", None)?,
            semi_y: take("b", None)?,
        },
        "rectangle" => ConvexDomain::Rectangle {
            half_x: take("hx", None)?,
            half_y: take("hy", None)?,
        },
        "stadium" => ConvexDomain::Stadium {
            alpha: take("alpha", None)?,
            lambda: take("lambda", Some(1.0))?,
        },
        other => return Err(format!("unknown domain '{other}'")),
    };
    if let Some(k) = params.keys().next() {
        return Err(format!("unknown domain parameter '{k}'"));
    }
    Ok(d)
}
