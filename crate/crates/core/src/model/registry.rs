//! Named models, addressed as `key` or `key:param=value,...`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::plateau::PlateauFunction;

use super::ScalarModel;

type Builder = fn(&Params) -> Result<ScalarModel>;

/// Parsed `param=value` list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::ModelDefinition(format!("{key}={v} is not a number"))),
        }
    }

    pub fn get_str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.0.get(key).map(String::as_str).unwrap_or(default)
    }

    fn check_known(&self, known: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !known.contains(&k.as_str()) {
                return Err(Error::ModelDefinition(format!("unknown parameter '{k}'")));
            }
        }
        Ok(())
    }
}

pub struct RegistryEntry {
    pub key: &'static str,
    pub description: &'static str,
    pub params: &'static [&'static str],
    /// Interval on which the entry is documented to evaluate cleanly.
    pub sample_interval: (f64, f64),
    build: Builder,
}

impl RegistryEntry {
    pub fn build(&self, params: &Params) -> Result<ScalarModel> {
        params.check_known(self.params)?;
        (self.build)(params)
    }
}

pub struct ModelRegistry {
    entries: Vec<RegistryEntry>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::new()
    }
}

/// Splits `key:p=1,q=2` into the key and its parameters.
pub fn parse_spec(spec: &str) -> Result<(String, Params)> {
    let (key, rest) = match spec.split_once(':') {
        Some((k, r)) => (k.trim(), r.trim()),
        None => (spec.trim(), ""),
    };
    if key.is_empty() {
        return Err(Error::ModelDefinition("empty model key".into()));
    }
    let mut params = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::ModelDefinition(format!("expected param=value, got '{item}'")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((key.to_string(), Params(params)))
}

fn power_model(name: String, p: f64) -> Result<ScalarModel> {
    if p < 0.0 {
        return Err(Error::ModelDefinition(format!("exponent {p} must be >= 0")));
    }
    Ok(ScalarModel::new(name, move |t| t.powf(p), |_| 1.0)
        .with_df(move |t| if p == 0.0 { 0.0 } else { p * t.powf(p - 1.0) })
        .with_da(|_| 0.0)
        .with_antiderivative(move |t| t.powf(p + 1.0) / (p + 1.0))
        .with_nu(1.0)
        .with_holder(p.min(1.0).max(1e-3)))
}

fn torsion(p: &Params) -> Result<ScalarModel> {
    let w = p.get_f64("a", 1.0)?;
    if !(w > 0.0) {
        return Err(Error::ModelDefinition("constant weight must be positive".into()));
    }
    let name = if w == 1.0 { "torsion".to_string() } else { format!("torsion:a={w}") };
    Ok(ScalarModel::new(name, |_| 1.0, move |_| w)
        .with_df(|_| 0.0)
        .with_da(|_| 0.0)
        .with_antiderivative(|t| t)
        .with_nu(w)
        .with_holder(1.0))
}

fn power(p: &Params) -> Result<ScalarModel> {
    let e = p.get_f64("p", 0.5)?;
    power_model(format!("power:p={e}"), e)
}

fn shifted_power(p: &Params) -> Result<ScalarModel> {
    let e = p.get_f64("p", 0.5)?;
    if e < 0.0 {
        return Err(Error::ModelDefinition(format!("exponent {e} must be >= 0")));
    }
    Ok(
        ScalarModel::new(format!("shifted-power:p={e}"), move |t| 1.0 + t.powf(e), |_| 1.0)
            .with_df(move |t| if e == 0.0 { 0.0 } else { e * t.powf(e - 1.0) })
            .with_da(|_| 0.0)
            .with_antiderivative(move |t| t + t.powf(e + 1.0) / (e + 1.0))
            .with_nu(1.0)
            .with_holder(e.min(1.0).max(1e-3)),
    )
}

fn eigen(p: &Params) -> Result<ScalarModel> {
    let l = p.get_f64("lambda", 1.0)?;
    if !(l > 0.0) {
        return Err(Error::ModelDefinition("lambda must be positive".into()));
    }
    Ok(ScalarModel::new(format!("eigen:lambda={l}"), move |t| l * t, |_| 1.0)
        .with_df(move |_| l)
        .with_da(|_| 0.0)
        .with_antiderivative(move |t| 0.5 * l * t * t)
        .with_nu(1.0)
        .with_holder(1.0))
}

fn mnls_power(p: &Params) -> Result<ScalarModel> {
    let q = p.get_f64("q", 0.5)?;
    if q < 0.0 {
        return Err(Error::ModelDefinition(format!("exponent {q} must be >= 0")));
    }
    Ok(
        ScalarModel::new(format!("mnls-power:q={q}"), move |t| t.powf(q), |t| 1.0 + 2.0 * t * t)
            .with_df(move |t| if q == 0.0 { 0.0 } else { q * t.powf(q - 1.0) })
            .with_da(|t| 4.0 * t)
            .with_antiderivative(move |t| t.powf(q + 1.0) / (q + 1.0))
            .with_nu(1.0)
            .with_holder(q.min(1.0).max(1e-3)),
    )
}

fn mnls_linear(_: &Params) -> Result<ScalarModel> {
    Ok(
        ScalarModel::new("mnls-linear", |t| 1.0 - t, |t| 1.0 + 2.0 * t * t)
            .with_df(|_| -1.0)
            .with_da(|t| 4.0 * t)
            .with_antiderivative(|t| t - 0.5 * t * t)
            .with_nu(1.0)
            .with_holder(1.0),
    )
}

fn relativistic(p: &Params) -> Result<ScalarModel> {
    let l = p.get_f64("lambda", 0.5)?;
    if !(0.0..1.0).contains(&l) {
        return Err(Error::ModelDefinition("lambda must lie in [0, 1)".into()));
    }
    let sign = match p.get_str("sign", "minus") {
        "minus" | "-" => -1.0,
        "plus" | "+" => 1.0,
        other => {
            return Err(Error::ModelDefinition(format!("sign must be plus or minus, got {other}")))
        }
    };
    let nu = if sign < 0.0 { 0.5 } else { 1.0 };
    let label = if sign < 0.0 { "minus" } else { "plus" };
    Ok(ScalarModel::new(
        format!("relativistic:lambda={l},sign={label}"),
        move |t: f64| -l * t + t / (1.0 + t * t).sqrt(),
        move |t| 1.0 + sign * t * t / (2.0 * (1.0 + t * t)),
    )
    .with_df(move |t| -l + (1.0 + t * t).powf(-1.5))
    .with_da(move |t| sign * t / (1.0 + t * t).powi(2))
    // √(1+t²) − 1 written without cancellation near 0
    .with_antiderivative(move |t| -0.5 * l * t * t + t * t / ((1.0 + t * t).sqrt() + 1.0))
    .with_nu(nu)
    .with_holder(1.0))
}

fn heisenberg(p: &Params) -> Result<ScalarModel> {
    let l = p.get_f64("lambda", 0.0)?;
    if !(0.0..1.0).contains(&l) {
        return Err(Error::ModelDefinition("lambda must lie in [0, 1)".into()));
    }
    Ok(ScalarModel::new(
        format!("heisenberg:lambda={l}"),
        move |t: f64| t - l * t / (1.0 - t * t).sqrt(),
        |t| 1.0 + t * t / (2.0 * (1.0 - t * t)),
    )
    .with_beta(1.0)
    .with_df(move |t| 1.0 - l * (1.0 - t * t).powf(-1.5))
    .with_da(|t| t / (1.0 - t * t).powi(2))
    .with_antiderivative(move |t| 0.5 * t * t - l * t * t / ((1.0 - t * t).sqrt() + 1.0))
    .with_nu(1.0)
    .with_holder(1.0))
}

fn counterexample(p: &Params) -> Result<ScalarModel> {
    let mu = p.get_f64("mu", 0.3)?;
    if !(mu >= 0.0) {
        return Err(Error::ModelDefinition("mu must be non-negative".into()));
    }
    Ok(counterexample_source(mu))
}

/// `f = 1 + μ σ'`, `a ≡ 1`, with `F = t + μ σ`.
pub fn counterexample_source(mu: f64) -> ScalarModel {
    let s = PlateauFunction;
    ScalarModel::new(
        format!("counterexample:mu={mu}"),
        move |t| 1.0 + mu * s.derivative(t),
        |_| 1.0,
    )
    .with_df(move |t| mu * s.second_derivative(t))
    .with_da(|_| 0.0)
    .with_antiderivative(move |t| t + mu * s.value(t))
    .with_nu(1.0)
    .with_holder(1.0)
}

fn decreasing_weight(_: &Params) -> Result<ScalarModel> {
    Ok(
        ScalarModel::new("decreasing-weight", |t| t, |t: f64| (2.0 - t).max(1.0))
            .with_df(|_| 1.0)
            .with_da(|t| if t < 1.0 { -1.0 } else { 0.0 })
            .with_antiderivative(|t| 0.5 * t * t)
            .with_nu(1.0)
            .with_holder(1.0),
    )
}

impl ModelRegistry {
    pub fn new() -> Self {
        let entries = vec![
            RegistryEntry {
                key: "torsion",
                description: "f = 1, a = const (default 1)",
                params: &["a"],
                sample_interval: (1e-6, 10.0),
                build: torsion,
            },
            RegistryEntry {
                key: "power",
                description: "f = t^p, a = 1",
                params: &["p"],
                sample_interval: (1e-6, 10.0),
                build: power,
            },
            RegistryEntry {
                key: "shifted-power",
                description: "f = 1 + t^p, a = 1",
                params: &["p"],
                sample_interval: (1e-6, 10.0),
                build: shifted_power,
            },
            RegistryEntry {
                key: "eigen",
                description: "f = lambda t, a = 1",
                params: &["lambda"],
                sample_interval: (1e-6, 10.0),
                build: eigen,
            },
            RegistryEntry {
                key: "mnls-power",
                description: "f = t^q, a = 1 + 2t^2",
                params: &["q"],
                sample_interval: (1e-6, 10.0),
                build: mnls_power,
            },
            RegistryEntry {
                key: "mnls-linear",
                description: "f = 1 - t, a = 1 + 2t^2 (M_f = 1)",
                params: &[],
                sample_interval: (1e-6, 0.999),
                build: mnls_linear,
            },
            RegistryEntry {
                key: "relativistic",
                description: "f = -lambda t + t/sqrt(1+t^2), a = 1 -/+ t^2/(2(1+t^2))",
                params: &["lambda", "sign"],
                sample_interval: (1e-6, 1.7),
                build: relativistic,
            },
            RegistryEntry {
                key: "heisenberg",
                description: "f = t - lambda t/sqrt(1-t^2), a = 1 + t^2/(2(1-t^2)), beta = 1",
                params: &["lambda"],
                sample_interval: (1e-6, 0.99),
                build: heisenberg,
            },
            RegistryEntry {
                key: "counterexample",
                description: "f = 1 + mu sigma'(t), a = 1 (plateau-induced source)",
                params: &["mu"],
                sample_interval: (1e-6, 10.0),
                build: counterexample,
            },
            RegistryEntry {
                key: "decreasing-weight",
                description: "f = t, a = max(2 - t, 1)",
                params: &[],
                sample_interval: (1e-6, 10.0),
                build: decreasing_weight,
            },
        ];
        Self { entries }
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn entry(&self, key: &str) -> Option<&RegistryEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Builds the model named by `spec` (`key` or `key:param=value,...`).
    pub fn lookup(&self, spec: &str) -> Result<ScalarModel> {
        let (key, params) = parse_spec(spec)?;
        let entry = self
            .entry(&key)
            .ok_or_else(|| Error::ModelDefinition(format!("unknown model '{key}'")))?;
        entry.build(&params)
    }
}
