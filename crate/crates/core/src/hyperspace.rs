//! Hyperparameter domains and the p-level grid geometry shared by the samplers.
//!
//! Every sampler works in the unit cube `[0,1]^k`; [`HyperSpace::decode`] maps a
//! unit point onto concrete hyperparameter values. Categorical parameters own
//! equal-width sub-intervals of `[0,1]`, so a grid step may cross a category
//! boundary exactly like it moves a continuous value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain of a single hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    Continuous { lower: f64, upper: f64 },
    Integer { lower: f64, upper: f64 },
    Categorical { labels: Vec<String> },
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
}

impl ParamSpec {
    pub fn continuous(name: &str, lower: f64, upper: f64) -> Self {
        Self { name: name.to_owned(), kind: ParamKind::Continuous { lower, upper } }
    }

    pub fn integer(name: &str, lower: f64, upper: f64) -> Self {
        Self { name: name.to_owned(), kind: ParamKind::Integer { lower, upper } }
    }

    pub fn categorical(name: &str, labels: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            kind: ParamKind::Categorical { labels: labels.iter().map(|s| s.to_string()).collect() },
        }
    }

    pub fn boolean(name: &str) -> Self {
        Self { name: name.to_owned(), kind: ParamKind::Boolean }
    }

    /// Labels of a categorical or boolean parameter, `None` for numeric ones.
    pub fn labels(&self) -> Option<Vec<String>> {
        match &self.kind {
            ParamKind::Categorical { labels } => Some(labels.clone()),
            ParamKind::Boolean => Some(vec!["False".to_owned(), "True".to_owned()]),
            _ => None,
        }
    }

    /// Numeric bounds, or `(0, m-1)` over label indices for categorical kinds.
    pub fn value_range(&self) -> (f64, f64) {
        match &self.kind {
            ParamKind::Continuous { lower, upper } | ParamKind::Integer { lower, upper } => {
                (*lower, *upper)
            }
            ParamKind::Categorical { labels } => (0.0, (labels.len() - 1) as f64),
            ParamKind::Boolean => (0.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            ParamKind::Continuous { lower, upper } | ParamKind::Integer { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(Error::InvalidSpace(format!(
                        "parameter `{}` needs finite lower < upper, got [{lower}, {upper}]",
                        self.name
                    )));
                }
            }
            ParamKind::Categorical { labels } => {
                let mut seen = std::collections::HashSet::new();
                if labels.len() < 2 || !labels.iter().all(|l| seen.insert(l)) {
                    return Err(Error::InvalidSpace(format!(
                        "categorical parameter `{}` needs at least 2 distinct labels",
                        self.name
                    )));
                }
            }
            ParamKind::Boolean => {}
        }
        Ok(())
    }

    pub fn decode(&self, u: f64) -> ParamValue {
        let u = u.clamp(0.0, 1.0);
        match &self.kind {
            ParamKind::Continuous { lower, upper } => ParamValue::Real(lower + u * (upper - lower)),
            ParamKind::Integer { lower, upper } => {
                let v = (lower + u * (upper - lower) + 0.5).floor();
                ParamValue::Int(v.clamp(lower.ceil(), upper.floor()) as i64)
            }
            ParamKind::Categorical { labels } => {
                let index = category_index(u, labels.len());
                ParamValue::Label { index, label: labels[index].clone() }
            }
            ParamKind::Boolean => ParamValue::Bool(category_index(u, 2) == 1),
        }
    }

    /// Inverse of [`decode`](Self::decode). Categorical values map to the centre
    /// of their sub-interval.
    pub fn encode(&self, value: &ParamValue) -> Result<f64> {
        let u = match (&self.kind, value) {
            (ParamKind::Continuous { lower, upper }, ParamValue::Real(v)) => {
                (v - lower) / (upper - lower)
            }
            (ParamKind::Integer { lower, upper }, ParamValue::Int(v)) => {
                (*v as f64 - lower) / (upper - lower)
            }
            (ParamKind::Categorical { labels }, ParamValue::Label { index, .. }) => {
                (*index as f64 + 0.5) / labels.len() as f64
            }
            (ParamKind::Boolean, ParamValue::Bool(b)) => {
                if *b {
                    0.75
                } else {
                    0.25
                }
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "value {value:?} does not match the kind of parameter `{}`",
                    self.name
                )))
            }
        };
        Ok(u.clamp(0.0, 1.0))
    }
}

fn category_index(u: f64, m: usize) -> usize {
    ((u * m as f64).floor() as usize).min(m - 1)
}

/// A decoded hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Int(i64),
    Bool(bool),
    Label { index: usize, label: String },
}

impl ParamValue {
    /// Numeric view: the value itself, or the label index for categories.
    pub fn as_f64(&self) -> f64 {
        match self {
            ParamValue::Real(v) => *v,
            ParamValue::Int(v) => *v as f64,
            ParamValue::Bool(b) => f64::from(u8::from(*b)),
            ParamValue::Label { index, .. } => *index as f64,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            ParamValue::Label { label, .. } => write!(f, "{label}"),
        }
    }
}

/// Concrete hyperparameter values in space order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteConfig {
    pub names: Vec<String>,
    pub values: Vec<ParamValue>,
}

impl ConcreteConfig {
    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.names.iter().position(|n| n == name).map(|i| &self.values[i])
    }

    pub fn real(&self, name: &str) -> Result<f64> {
        self.get(name)
            .map(ParamValue::as_f64)
            .ok_or_else(|| Error::Config(format!("missing hyperparameter `{name}`")))
    }

    pub fn label(&self, name: &str) -> Result<String> {
        match self.get(name) {
            Some(ParamValue::Label { label, .. }) => Ok(label.clone()),
            Some(ParamValue::Bool(b)) => Ok(if *b { "True".into() } else { "False".into() }),
            Some(other) => Err(Error::Config(format!("hyperparameter `{name}` is not categorical: {other:?}"))),
            None => Err(Error::Config(format!("missing hyperparameter `{name}`"))),
        }
    }

    pub fn flag(&self, name: &str) -> Result<bool> {
        match self.get(name) {
            Some(ParamValue::Bool(b)) => Ok(*b),
            Some(other) => Err(Error::Config(format!("hyperparameter `{name}` is not boolean: {other:?}"))),
            None => Err(Error::Config(format!("missing hyperparameter `{name}`"))),
        }
    }
}

/// A point of the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitPoint(Vec<f64>);

impl UnitPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidInput(format!("unit coordinate {bad} outside [0,1]")));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| (0.0..=1.0).contains(c)));
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Ordered, flat hyperparameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperSpace {
    params: Vec<ParamSpec>,
}

impl HyperSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one parameter".into()));
        }
        let mut names = std::collections::HashSet::new();
        for p in &params {
            p.validate()?;
            if !names.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate parameter name `{}`", p.name)));
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.params.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn decode(&self, u: &UnitPoint) -> Result<ConcreteConfig> {
        if u.len() != self.k() {
            return Err(Error::Shape { expected: self.k(), got: u.len() });
        }
        Ok(ConcreteConfig {
            names: self.names(),
            values: self.params.iter().zip(u.coords()).map(|(p, &c)| p.decode(c)).collect(),
        })
    }

    pub fn encode(&self, config: &ConcreteConfig) -> Result<UnitPoint> {
        if config.values.len() != self.k() {
            return Err(Error::Shape { expected: self.k(), got: config.values.len() });
        }
        let coords = self
            .params
            .iter()
            .zip(&config.values)
            .map(|(p, v)| p.encode(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnitPoint(coords))
    }

    /// Named preset spaces for the four studied algorithms.
    pub fn preset(name: &str) -> Result<Self> {
        let params = match name {
            "cmaes" => vec![
                ParamSpec::integer("lambda", 10.0, 1000.0),
                ParamSpec::continuous("alpha_mu", 0.0, 4.0),
                ParamSpec::continuous("sigma0", 0.1, 2.0),
                ParamSpec::boolean("sigma0_scale"),
                ParamSpec::continuous("mu_lambda_ratio", 0.1, 1.0),
            ],
            "de" => vec![
                ParamSpec::integer("lambda", 10.0, 1000.0),
                ParamSpec::categorical("crossover", &["bin", "exp"]),
                ParamSpec::continuous("crossover_prob", 0.0, 1.0),
                ParamSpec::continuous("beta_min", 0.0, 1.0),
                ParamSpec::continuous("beta_max", 0.0, 2.0),
                ParamSpec::categorical("b_type", &["best", "target-to-best", "rand-to-best", "rand"]),
                ParamSpec::continuous("b_lambda_ratio", 0.01, 0.5),
            ],
            "nsga3" => {
                let mut p = moo_common();
                p.push(ParamSpec::integer("tournament_k", 2.0, 10.0));
                p
            }
            "moead" => {
                let mut p = moo_common();
                p.push(ParamSpec::categorical(
                    "mode",
                    &["PBI", "Tchebycheff", "Tchebycheff-normalized", "modified-Tchebycheff"],
                ));
                p.push(ParamSpec::continuous("neighbor_ratio", 0.05, 0.5));
                p
            }
            other => return Err(Error::InvalidSpace(format!("unknown preset `{other}`"))),
        };
        Self::new(params)
    }

    pub const PRESETS: [&'static str; 4] = ["cmaes", "de", "nsga3", "moead"];
}

fn moo_common() -> Vec<ParamSpec> {
    vec![
        ParamSpec::integer("lambda", 10.0, 1000.0),
        ParamSpec::continuous("sbx_prob", 0.0, 1.0),
        ParamSpec::continuous("sbx_di", 1.0, 200.0),
        ParamSpec::continuous("pm_prob", 0.0, 1.0),
        ParamSpec::continuous("pm_di", 1.0, 200.0),
    ]
}

/// Morris step `p / (2(p-1))` for an even level count `p >= 2`.
pub fn grid_delta(p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 levels, got p={p}")));
    }
    if p % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "p={p} is odd; the step p/(2(p-1)) only lands on grid levels for even p"
        )));
    }
    Ok(p as f64 / (2.0 * (p as f64 - 1.0)))
}

/// Moves every coordinate to the nearest level `i/(p-1)`, ties rounding up.
pub fn snap_to_grid(u: &UnitPoint, p: usize) -> Result<UnitPoint> {
    if p < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 levels, got p={p}")));
    }
    let steps = (p - 1) as f64;
    Ok(UnitPoint(
        u.coords()
            .iter()
            .map(|&c| ((c * steps + 0.5).floor().clamp(0.0, steps)) / steps)
            .collect(),
    ))
}
