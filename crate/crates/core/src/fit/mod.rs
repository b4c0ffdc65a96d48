//! Vocabulary and diversity growth models.
//!
//! | kind      | curve                 | parameters   |
//! |-----------|-----------------------|--------------|
//! | PowerLaw  | `C n^α`               | `C, alpha`   |
//! | M1        | `D (1 - e^(-α n))`    | `D, alpha`   |
//! | M2        | `D n / (n + c)`       | `D, c`       |
//! | M3        | `D (n + b) / (n + c)` | `D, b, c`    |
//! | M4        | `D (n / (n + c))^α`   | `D, c, alpha`|
//!
//! In every saturating model `D` is the limit as `n → ∞`, i.e. the
//! extrapolated diversity.

mod compare;
mod lm;
mod power;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use compare::{compare_models, RankedModel};
pub use lm::{fit_model, fit_model_with, SolverOptions};
pub use power::fit_power_law;

/// Smallest value a strictly positive parameter is projected to.
pub(crate) const MIN_POSITIVE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    PowerLaw,
    M1,
    M2,
    M3,
    M4,
}

impl ModelKind {
    pub const SATURATING: [ModelKind; 4] = [ModelKind::M1, ModelKind::M2, ModelKind::M3, ModelKind::M4];

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::PowerLaw => &["C", "alpha"],
            ModelKind::M1 => &["D", "alpha"],
            ModelKind::M2 => &["D", "c"],
            ModelKind::M3 => &["D", "b", "c"],
            ModelKind::M4 => &["D", "c", "alpha"],
        }
    }

    pub fn arity(self) -> usize {
        self.param_names().len()
    }

    pub fn is_saturating(self) -> bool {
        self != ModelKind::PowerLaw
    }

    /// Checks arity, finiteness and the per-kind bounds.
    pub fn validate(self, params: &[f64]) -> Result<()> {
        if params.len() != self.arity() {
            return Err(Error::Validation(format!(
                "{self} takes {} parameters, got {}",
                self.arity(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation(format!("{self} parameters must be finite")));
        }
        let ok = match self {
            ModelKind::PowerLaw => params[0] > 0.0,
            ModelKind::M1 | ModelKind::M2 => params[0] > 0.0 && params[1] > 0.0,
            ModelKind::M3 => params[0] > 0.0 && params[2] > 0.0 && (0.0..=params[2]).contains(&params[1]),
            ModelKind::M4 => params.iter().all(|&p| p > 0.0),
        };
        if !ok {
            return Err(Error::Validation(format!(
                "{self} parameters {params:?} violate the model bounds"
            )));
        }
        Ok(())
    }

    /// Value at `n` without validation.
    pub(crate) fn value(self, p: &[f64], n: f64) -> f64 {
        match self {
            ModelKind::PowerLaw => p[0] * n.powf(p[1]),
            ModelKind::M1 => -p[0] * (-p[1] * n).exp_m1(),
            ModelKind::M2 => p[0] * n / (n + p[1]),
            ModelKind::M3 => p[0] * (n + p[1]) / (n + p[2]),
            ModelKind::M4 => p[0] * (n / (n + p[1])).powf(p[2]),
        }
    }

    /// Partial derivatives of the model value with respect to each parameter.
    pub(crate) fn gradient(self, p: &[f64], n: f64, out: &mut [f64]) {
        match self {
            ModelKind::PowerLaw => {
                let pow = n.powf(p[1]);
                out[0] = pow;
                out[1] = if n > 0.0 { p[0] * pow * n.ln() } else { 0.0 };
            }
            ModelKind::M1 => {
                let e = (-p[1] * n).exp();
                out[0] = -(-p[1] * n).exp_m1();
                out[1] = p[0] * n * e;
            }
            ModelKind::M2 => {
                let s = n + p[1];
                out[0] = n / s;
                out[1] = -p[0] * n / (s * s);
            }
            ModelKind::M3 => {
                let s = n + p[2];
                out[0] = (n + p[1]) / s;
                out[1] = p[0] / s;
                out[2] = -p[0] * (n + p[1]) / (s * s);
            }
            ModelKind::M4 => {
                let s = n + p[1];
                if n <= 0.0 {
                    out[..3].fill(0.0);
                    return;
                }
                let q = n / s;
                let qa = q.powf(p[2]);
                out[0] = qa;
                out[1] = -p[0] * p[2] * qa / s;
                out[2] = p[0] * qa * q.ln();
            }
        }
    }

    /// Clamps parameters into the feasible region.
    pub(crate) fn project(self, p: &mut [f64]) {
        match self {
            ModelKind::PowerLaw => p[0] = p[0].max(MIN_POSITIVE),
            ModelKind::M1 | ModelKind::M2 | ModelKind::M4 => {
                p.iter_mut().for_each(|v| *v = v.max(MIN_POSITIVE));
            }
            ModelKind::M3 => {
                p[0] = p[0].max(MIN_POSITIVE);
                p[2] = p[2].max(MIN_POSITIVE);
                p[1] = p[1].clamp(0.0, p[2]);
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::PowerLaw => "power",
            ModelKind::M1 => "m1",
            ModelKind::M2 => "m2",
            ModelKind::M3 => "m3",
            ModelKind::M4 => "m4",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "power" | "powerlaw" | "power-law" => Ok(ModelKind::PowerLaw),
            "m1" => Ok(ModelKind::M1),
            "m2" => Ok(ModelKind::M2),
            "m3" => Ok(ModelKind::M3),
            "m4" => Ok(ModelKind::M4),
            other => Err(Error::Validation(format!("unknown model {other:?}"))),
        }
    }
}

pub fn eval_model(kind: ModelKind, params: &[f64], n: f64) -> Result<f64> {
    kind.validate(params)?;
    if !(n >= 0.0) {
        return Err(Error::Validation(format!("model argument must be >= 0, got {n}")));
    }
    Ok(kind.value(params, n))
}

/// Analytic partial derivatives of the model at `n`, in parameter order.
pub fn model_gradient(kind: ModelKind, params: &[f64], n: f64) -> Result<Vec<f64>> {
    kind.validate(params)?;
    let mut out = vec![0.0; kind.arity()];
    kind.gradient(params, n, &mut out);
    Ok(out)
}

/// A fitted model.
///
/// Serializes as `{kind, params: {name: value, ...}, residual, n_points, converged}`
/// with parameters in model order.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub kind: ModelKind,
    pub params: Vec<f64>,
    /// Root-mean-square error over the fitted points. Log space for the power law.
    pub residual: f64,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: u32,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.kind
            .param_names()
            .iter()
            .position(|&p| p == name)
            .map(|i| self.params[i])
    }

    pub fn predict(&self, n: f64) -> f64 {
        self.kind.value(&self.params, n)
    }
}

/// The extrapolated diversity `D` of a converged saturating fit.
pub fn asymptote(fit: &FitResult) -> Result<f64> {
    if !fit.kind.is_saturating() {
        return Err(Error::Domain("the power law grows without bound".into()));
    }
    if !fit.converged {
        return Err(Error::Domain(format!("{} fit did not converge", fit.kind)));
    }
    Ok(fit.params[0])
}

impl Serialize for FitResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Params<'a>(&'a FitResult);
        impl Serialize for Params<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let names = self.0.kind.param_names();
                let mut map = s.serialize_map(Some(names.len()))?;
                for (name, value) in names.iter().zip(&self.0.params) {
                    map.serialize_entry(name, value)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("kind", &self.kind.to_string())?;
        map.serialize_entry("params", &Params(self))?;
        map.serialize_entry("residual", &self.residual)?;
        map.serialize_entry("n_points", &self.n_points)?;
        map.serialize_entry("converged", &self.converged)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for FitResult {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            kind: String,
            params: BTreeMap<String, f64>,
            residual: f64,
            n_points: usize,
            converged: bool,
        }
        let repr = Repr::deserialize(deserializer)?;
        let kind: ModelKind = repr.kind.parse().map_err(serde::de::Error::custom)?;
        let params = kind
            .param_names()
            .iter()
            .map(|name| {
                repr.params
                    .get(*name)
                    .copied()
                    .ok_or_else(|| serde::de::Error::custom(format!("missing parameter {name}")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(FitResult {
            kind,
            params,
            residual: repr.residual,
            n_points: repr.n_points,
            converged: repr.converged,
            iterations: 0,
        })
    }
}
