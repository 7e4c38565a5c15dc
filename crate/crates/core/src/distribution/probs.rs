use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::features::{BooleanDataset, FeatureMap};
use super::groups::CompoundGroup;
use crate::error::{Error, Result};
use crate::ssat::{Var, VarProbabilities};

/// Which rows a probability table was estimated from.
#[derive(Debug, Clone, PartialEq)]
pub enum Context {
    All,
    Group(CompoundGroup),
    Label(bool),
    GroupLabel(CompoundGroup, bool),
}

impl Context {
    pub fn contains(&self, row: &[bool], label: bool) -> bool {
        match self {
            Context::All => true,
            Context::Group(g) => g.contains(row),
            Context::Label(y) => label == *y,
            Context::GroupLabel(g, y) => label == *y && g.contains(row),
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let y = |b: &bool| u8::from(*b);
        match self {
            Context::All => f.write_str("all rows"),
            Context::Group(g) => write!(f, "{g}"),
            Context::Label(l) => write!(f, "label={}", y(l)),
            Context::GroupLabel(g, l) => write!(f, "{g}, label={}", y(l)),
        }
    }
}

impl Serialize for Context {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `Pr[X_i = 1]` for every non-protected variable, within a context.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    context: Context,
    rows: usize,
    probs: BTreeMap<Var, f64>,
}

impl ProbabilityTable {
    pub fn new(context: Context, rows: usize, probs: BTreeMap<Var, f64>) -> Result<ProbabilityTable> {
        if let Some((v, p)) = probs.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::validation(format!("probability {p} of variable {v} outside [0, 1]")));
        }
        Ok(ProbabilityTable { context, rows, probs })
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    /// Rows the estimate is based on.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.probs.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.probs.iter().map(|(&v, &p)| (v, p))
    }

    /// JSON with feature names as keys.
    pub fn to_json(&self, map: &FeatureMap) -> serde_json::Value {
        let probs: serde_json::Map<String, serde_json::Value> = self
            .probs
            .iter()
            .map(|(&v, &p)| (map.feature(v).name(), p.into()))
            .collect();
        serde_json::json!({
            "context": self.context.to_string(),
            "rows": self.rows,
            "probabilities": probs,
        })
    }
}

impl VarProbabilities for ProbabilityTable {
    fn probability(&self, var: Var) -> Option<f64> {
        self.get(var)
    }
}

/// Relative frequency of each non-protected variable among the rows in
/// `context`. No smoothing.
pub fn estimate_probs(data: &BooleanDataset, map: &FeatureMap, context: Context) -> Result<ProbabilityTable> {
    let vars = map.random_vars();
    let mut counts = vec![0usize; vars.len()];
    let mut rows = 0usize;
    for (row, label) in data.rows() {
        if !context.contains(row, label) {
            continue;
        }
        rows += 1;
        for (c, v) in counts.iter_mut().zip(&vars) {
            *c += usize::from(row[v.index()]);
        }
    }
    if rows == 0 {
        return Err(Error::EmptyGroup(context.to_string()));
    }
    let probs = vars
        .iter()
        .zip(counts)
        .map(|(&v, c)| (v, c as f64 / rows as f64))
        .collect();
    ProbabilityTable::new(context, rows, probs)
}
