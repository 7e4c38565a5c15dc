use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::linear::{encode_linear, LinearModel, Polarity, DEFAULT_SCALE};
use super::pb::Encoding;
use super::tree::{encode_tree_negative, encode_tree_positive, DecisionTree, TreeNode};
use crate::error::{Error, Result};
use crate::ssat::{Clause, CnfFormula, Lit, Var};

/// A classifier as read from JSON, with features still referred to by name.
///
/// ```json
/// {"type": "tree", "root": {"feature": "income>=0.29", "yes": {"label": 1}, "no": {"label": 0}}}
/// {"type": "linear", "weights": {"sex=male": 0.8, "income>=0.5": -1.2}, "bias": 0.1}
/// {"type": "cnf", "clauses": [["-fitness>=0.61", "income>=0.29"], ["fitness>=0.61"]]}
/// ```
///
/// A leading `-` on a CNF literal negates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Tree {
        root: NodeSpec,
    },
    Linear {
        weights: BTreeMap<String, f64>,
        #[serde(default)]
        bias: f64,
    },
    Cnf {
        clauses: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    yes: Option<Box<NodeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    no: Option<Box<NodeSpec>>,
}

impl NodeSpec {
    pub fn leaf(label: bool) -> NodeSpec {
        NodeSpec {
            label: Some(u8::from(label)),
            feature: None,
            yes: None,
            no: None,
        }
    }

    pub fn split(feature: impl Into<String>, yes: NodeSpec, no: NodeSpec) -> NodeSpec {
        NodeSpec {
            label: None,
            feature: Some(feature.into()),
            yes: Some(Box::new(yes)),
            no: Some(Box::new(no)),
        }
    }
}

fn split_sign(name: &str) -> (bool, &str) {
    match name.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, name),
    }
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<ModelSpec> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            context: "model".into(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("models serialize")
    }

    /// Every feature name the model mentions, in first-seen order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |s: &str| {
            if !out.iter().any(|o| o == s) {
                out.push(s.to_string());
            }
        };
        match self {
            ModelSpec::Tree { root } => {
                let mut stack = vec![root];
                while let Some(n) = stack.pop() {
                    if let Some(f) = &n.feature {
                        add(f);
                    }
                    stack.extend(n.no.iter().map(|b| &**b));
                    stack.extend(n.yes.iter().map(|b| &**b));
                }
            }
            ModelSpec::Linear { weights, .. } => weights.keys().for_each(|k| add(k)),
            ModelSpec::Cnf { clauses } => clauses.iter().flatten().for_each(|l| add(split_sign(l).1)),
        }
        out
    }

    /// Binds feature names to solver literals.
    pub fn resolve(&self, lookup: impl Fn(&str) -> Option<Lit>) -> Result<ClassifierModel> {
        let find = |name: &str| {
            lookup(name).ok_or_else(|| Error::validation(format!("unknown feature `{name}`")))
        };
        match self {
            ModelSpec::Tree { root } => {
                fn build(n: &NodeSpec, find: &dyn Fn(&str) -> Result<Lit>, path: &str) -> Result<TreeNode> {
                    match (n.label, &n.feature, &n.yes, &n.no) {
                        (Some(label), None, None, None) => match label {
                            0 | 1 => Ok(TreeNode::leaf(label == 1)),
                            _ => Err(Error::validation(format!("{path}: label must be 0 or 1"))),
                        },
                        (None, Some(f), Some(yes), Some(no)) => Ok(TreeNode::split(
                            find(f)?,
                            build(yes, find, &format!("{path}.yes"))?,
                            build(no, find, &format!("{path}.no"))?,
                        )),
                        _ => Err(Error::structure(format!(
                            "{path}: a node is either {{\"label\"}} or {{\"feature\", \"yes\", \"no\"}}"
                        ))),
                    }
                }
                Ok(ClassifierModel::Tree(DecisionTree::new(build(root, &find, "root")?)?))
            }
            ModelSpec::Linear { weights, bias } => {
                let weights = weights
                    .iter()
                    .map(|(k, &w)| Ok((find(k)?, w)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ClassifierModel::Linear(LinearModel::new(weights, *bias)?))
            }
            ModelSpec::Cnf { clauses } => {
                let mut out = Vec::new();
                for c in clauses {
                    let lits = c
                        .iter()
                        .map(|l| {
                            let (neg, name) = split_sign(l);
                            let lit = find(name)?;
                            Ok(if neg { !lit } else { lit })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    out.extend(Clause::new(lits));
                }
                Ok(ClassifierModel::Cnf(out))
            }
        }
    }
}

/// A classifier over solver literals.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Tree(DecisionTree),
    Linear(LinearModel),
    /// Clauses satisfied exactly when the prediction is 1.
    Cnf(Vec<Clause>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeOptions {
    pub scale: u32,
    pub lambda: f64,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            scale: DEFAULT_SCALE,
            lambda: 0.0,
        }
    }
}

/// Both class encodings of a model. `negative` is absent for CNF rule sets,
/// whose complement is left to Tseitin negation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedModel {
    pub positive: Encoding,
    pub negative: Option<Encoding>,
}

impl ClassifierModel {
    pub fn max_var(&self) -> u32 {
        match self {
            ClassifierModel::Tree(t) => t.max_var(),
            ClassifierModel::Linear(m) => m.max_var(),
            ClassifierModel::Cnf(cs) => cs.iter().filter_map(Clause::max_var).map(|v| v.id()).max().unwrap_or(0),
        }
    }

    /// The real-valued prediction (linear models are not quantized here).
    pub fn predict(&self, value: impl Fn(Var) -> bool) -> bool {
        match self {
            ClassifierModel::Tree(t) => t.predict(value),
            ClassifierModel::Linear(m) => m.predict(value),
            ClassifierModel::Cnf(cs) => cs.iter().all(|c| c.eval(&value)),
        }
    }

    /// Encodes over feature variables `1..=num_vars`; auxiliaries of each
    /// polarity are numbered from `num_vars + 1`.
    pub fn encode(&self, num_vars: u32, options: EncodeOptions) -> Result<EncodedModel> {
        if self.max_var() > num_vars {
            return Err(Error::structure(format!(
                "model mentions variable {} beyond the {num_vars} feature variables",
                self.max_var()
            )));
        }
        let fresh = Var::new(num_vars + 1).expect("positive");
        Ok(match self {
            ClassifierModel::Tree(t) => EncodedModel {
                positive: Encoding::plain(encode_tree_positive(t, num_vars)),
                negative: Some(Encoding::plain(encode_tree_negative(t, num_vars))),
            },
            ClassifierModel::Linear(m) => EncodedModel {
                positive: encode_linear(m, options.scale, options.lambda, Polarity::Positive, fresh)?,
                negative: Some(encode_linear(m, options.scale, options.lambda, Polarity::Negative, fresh)?),
            },
            ClassifierModel::Cnf(cs) => EncodedModel {
                positive: Encoding::plain(CnfFormula::new(num_vars, cs.clone())?),
                negative: None,
            },
        })
    }
}
