//! Models defined by expressions in the variable `t`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ScalarModel;

thread_local! {
    static BUILTINS: meval::Context<'static> = meval::Context::new();
}

fn compile(label: &str, src: &str) -> Result<impl Fn(f64) -> f64 + Send + Sync + 'static> {
    let expr: meval::Expr = src
        .parse()
        .map_err(|e| Error::ModelDefinition(format!("{label} = '{src}': {e}")))?;
    // reject unknown variables up front
    let _ = expr.clone()
        .bind("t")
        .map_err(|e| Error::ModelDefinition(format!("{label} = '{src}': {e}")))?;
    let expr = Arc::new(expr);
    Ok(move |t: f64| {
        BUILTINS.with(|ctx| expr.eval_with_context((("t", t), ctx)).unwrap_or(f64::NAN))
    })
}

/// Plain-text model definition: expressions for `f` and `a` (and optionally
/// their derivatives and `F`), plus `ν`, `β` and the scan cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprModelSpec {
    pub name: String,
    pub f: String,
    pub a: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub da: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antiderivative: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
}

impl ExprModelSpec {
    pub fn build(&self) -> Result<ScalarModel> {
        let mut m = ScalarModel::new(self.name.clone(), compile("f", &self.f)?, compile("a", &self.a)?);
        if let Some(src) = &self.df {
            m = m.with_df(compile("df", src)?);
        }
        if let Some(src) = &self.da {
            m = m.with_da(compile("da", src)?);
        }
        if let Some(src) = &self.antiderivative {
            m = m.with_antiderivative(compile("antiderivative", src)?);
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0) {
                return Err(Error::ModelDefinition("beta must be positive".into()));
            }
            m = m.with_beta(beta);
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0) {
                return Err(Error::ModelDefinition("nu must be positive".into()));
            }
            m = m.with_nu(nu);
        }
        if !(m.nu() > 0.0) {
            return Err(Error::ModelDefinition(format!(
                "weight is not uniformly elliptic (estimated nu = {})",
                m.nu()
            )));
        }
        if let Some(cap) = self.t_cap {
            m = m.with_t_cap(cap);
        }
        Ok(m)
    }
}
