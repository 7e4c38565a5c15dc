use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

/// How a categorical attribute becomes Boolean variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoricalEncoding {
    /// One variable per category.
    #[default]
    Onehot,
    /// Two categories, one variable true for the second.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default)]
    pub protected: bool,
    /// Equal-width bin count for numeric attributes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Interior cut points for numeric attributes, strictly increasing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<f64>>,
    /// Category names; inferred from the data (sorted) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<CategoricalEncoding>,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>) -> AttributeSpec {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Numeric,
            protected: false,
            bins: None,
            edges: None,
            categories: None,
            encoding: None,
        }
    }

    pub fn categorical(name: impl Into<String>, categories: &[&str]) -> AttributeSpec {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Categorical,
            protected: false,
            bins: None,
            edges: None,
            categories: Some(categories.iter().map(|c| c.to_string()).collect()),
            encoding: None,
        }
    }

    pub fn protected(mut self) -> AttributeSpec {
        self.protected = true;
        self
    }

    pub fn binary(mut self) -> AttributeSpec {
        self.encoding = Some(CategoricalEncoding::Binary);
        self
    }
}

/// Describes which CSV columns are used and how.
///
/// ```json
/// {"label": "approved", "positive_label": "yes",
///  "attributes": [{"name": "income", "kind": "numeric", "bins": 4},
///                 {"name": "sex", "kind": "categorical", "protected": true,
///                  "categories": ["female", "male"], "encoding": "binary"}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub label: String,
    /// Label value counted as class 1. Without it, `1`/`true`/`yes` are
    /// positive and `0`/`false`/`no` negative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<String>,
    pub attributes: Vec<AttributeSpec>,
}

impl Schema {
    pub fn from_json(text: &str) -> Result<Schema> {
        let schema: Schema = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "schema".into(),
            source,
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schemas serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for a in &self.attributes {
            if a.name == self.label {
                return Err(Error::validation(format!(
                    "label column `{}` cannot also be an attribute",
                    a.name
                )));
            }
            if !names.insert(a.name.as_str()) {
                return Err(Error::validation(format!("attribute `{}` listed twice", a.name)));
            }
            a.validate()?;
        }
        if !self.attributes.iter().any(|a| a.protected) {
            return Err(Error::validation("schema needs at least one protected attribute"));
        }
        Ok(())
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub(crate) fn parse_label(&self, raw: &str) -> Option<bool> {
        match &self.positive_label {
            Some(p) => Some(raw == p),
            None => match raw.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" => Some(true),
                "0" | "false" | "no" => Some(false),
                _ => None,
            },
        }
    }
}

impl AttributeSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::validation(format!("attribute `{}`: {msg}", self.name)));
        match self.kind {
            AttributeKind::Numeric => {
                if self.protected {
                    return bad("protected attributes must be categorical; pre-bin it into categories");
                }
                if self.categories.is_some() || self.encoding.is_some() {
                    return bad("categories and encoding apply to categorical attributes only");
                }
                if self.bins.is_some() && self.edges.is_some() {
                    return bad("give either bins or edges, not both");
                }
                if self.bins == Some(0) {
                    return bad("bins must be positive");
                }
                if let Some(edges) = &self.edges {
                    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
                        return bad("edges must be finite and strictly increasing");
                    }
                }
            }
            AttributeKind::Categorical => {
                if self.bins.is_some() || self.edges.is_some() {
                    return bad("bins and edges apply to numeric attributes only");
                }
                if let Some(cats) = &self.categories {
                    if cats.is_empty() {
                        return bad("categories must not be empty");
                    }
                    if cats.iter().collect::<BTreeSet<_>>().len() != cats.len() {
                        return bad("categories must be distinct");
                    }
                    if self.encoding == Some(CategoricalEncoding::Binary) && cats.len() != 2 {
                        return bad("binary encoding needs exactly two categories");
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let s = Schema::from_json(
            r#"{"label": "y", "attributes": [
                {"name": "income", "kind": "numeric", "bins": 3},
                {"name": "sex", "kind": "categorical", "protected": true, "categories": ["f", "m"], "encoding": "binary"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(s.attributes.len(), 2);
        assert_eq!(s.attribute("sex").unwrap().encoding, Some(CategoricalEncoding::Binary));
    }

    #[test]
    fn rejections() {
        let no_protected = r#"{"label": "y", "attributes": [{"name": "a", "kind": "numeric"}]}"#;
        assert!(Schema::from_json(no_protected).is_err());
        let numeric_protected = r#"{"label": "y", "attributes": [{"name": "a", "kind": "numeric", "protected": true}]}"#;
        assert!(Schema::from_json(numeric_protected).is_err());
        let bad_edges = r#"{"label": "y", "attributes": [{"name": "s", "kind": "categorical", "protected": true},
            {"name": "a", "kind": "numeric", "edges": [1.0, 1.0]}]}"#;
        assert!(Schema::from_json(bad_edges).is_err());
        let binary_three = r#"{"label": "y", "attributes": [{"name": "s", "kind": "categorical", "protected": true,
            "categories": ["a", "b", "c"], "encoding": "binary"}]}"#;
        assert!(Schema::from_json(binary_three).is_err());
        let label_dup = r#"{"label": "s", "attributes": [{"name": "s", "kind": "categorical", "protected": true}]}"#;
        assert!(Schema::from_json(label_dup).is_err());
        assert!(Schema::from_json(r#"{"label": "y", "attributes": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn label_values() {
        let mut s = Schema {
            label: "y".into(),
            positive_label: None,
            attributes: vec![],
        };
        assert_eq!(s.parse_label("TRUE"), Some(true));
        assert_eq!(s.parse_label("0"), Some(false));
        assert_eq!(s.parse_label(">50K"), None);
        s.positive_label = Some(">50K".into());
        assert_eq!(s.parse_label(">50K"), Some(true));
        assert_eq!(s.parse_label("<=50K"), Some(false));
    }
}
