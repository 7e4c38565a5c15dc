use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::schema::{AttributeKind, AttributeSpec, CategoricalEncoding, Schema, DEFAULT_BINS};
use super::table::RawTable;
use crate::error::{Error, Result};
use crate::ssat::{Clause, Lit, Var};

/// What a Boolean feature variable asserts about its attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// `value ≥ threshold`
    AtLeast(f64),
    /// `lower ≤ value < upper`, open-ended where absent.
    Interval { lower: Option<f64>, upper: Option<f64> },
    /// `value = category`
    Equals(String),
}

impl Predicate {
    fn holds_numeric(&self, x: f64) -> bool {
        match self {
            Predicate::AtLeast(t) => x >= *t,
            Predicate::Interval { lower, upper } => {
                lower.is_none_or(|l| x >= l) && upper.is_none_or(|u| x < u)
            }
            Predicate::Equals(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub var: Var,
    pub attribute: String,
    pub predicate: Predicate,
    pub protected: bool,
}

impl Feature {
    /// `income>=0.29`, `income in [0.25,0.5)`, `sex=male`.
    pub fn name(&self) -> String {
        let a = &self.attribute;
        match &self.predicate {
            Predicate::AtLeast(t) => format!("{a}>={t}"),
            Predicate::Interval { lower, upper } => {
                let lo = lower.map_or("-inf".to_string(), |l| l.to_string());
                let hi = upper.map_or("inf".to_string(), |u| u.to_string());
                let open = if lower.is_some() { '[' } else { '(' };
                format!("{a} in {open}{lo},{hi})")
            }
            Predicate::Equals(c) => format!("{a}={c}"),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// The variables that represent one attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Nested `value ≥ t` variables, ascending thresholds.
    Thresholds(Vec<Var>),
    /// One-hot intervals, ascending.
    Intervals(Vec<Var>),
    /// One-hot categories, in declared order.
    OneHot(Vec<(String, Var)>),
    /// One variable, true for `categories[1]`.
    Binary { var: Var, categories: [String; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeLayout {
    pub name: String,
    pub protected: bool,
    pub layout: Layout,
}

impl AttributeLayout {
    /// `(category, literal true exactly for it)` for categorical layouts.
    pub fn categories(&self) -> Vec<(String, Lit)> {
        match &self.layout {
            Layout::OneHot(cats) => cats.iter().map(|(c, v)| (c.clone(), v.positive())).collect(),
            Layout::Binary { var, categories } => vec![
                (categories[0].clone(), var.negative()),
                (categories[1].clone(), var.positive()),
            ],
            Layout::Thresholds(_) | Layout::Intervals(_) => Vec::new(),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        match &self.layout {
            Layout::Thresholds(vs) | Layout::Intervals(vs) => vs.clone(),
            Layout::OneHot(cats) => cats.iter().map(|(_, v)| *v).collect(),
            Layout::Binary { var, .. } => vec![*var],
        }
    }
}

/// Bijection between solver variables `1..=n` and attribute predicates.
/// Non-protected attributes come first, in schema order, then protected
/// ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    features: Vec<Feature>,
    attributes: Vec<AttributeLayout>,
    names: HashMap<String, Lit>,
}

impl FeatureMap {
    pub fn num_vars(&self) -> u32 {
        self.features.len() as u32
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, var: Var) -> &Feature {
        &self.features[var.index()]
    }

    pub fn attributes(&self) -> &[AttributeLayout] {
        &self.attributes
    }

    /// The literal a feature name denotes. For binary attributes the first
    /// category resolves to the negated variable. Threshold names match
    /// numerically, so `x>=0.50` finds `x>=0.5`.
    pub fn lookup(&self, name: &str) -> Option<Lit> {
        if let Some(&l) = self.names.get(name) {
            return Some(l);
        }
        let (attr, t) = name.rsplit_once(">=")?;
        let t: f64 = t.trim().parse().ok()?;
        self.features.iter().find_map(|f| match f.predicate {
            Predicate::AtLeast(x) if f.attribute == attr.trim() && x == t => Some(f.var.positive()),
            _ => None,
        })
    }

    pub fn protected_vars(&self) -> Vec<Var> {
        self.features.iter().filter(|f| f.protected).map(|f| f.var).collect()
    }

    /// Variables that receive randomized quantifiers.
    pub fn random_vars(&self) -> Vec<Var> {
        self.features.iter().filter(|f| !f.protected).map(|f| f.var).collect()
    }

    /// Exactly-one clauses for each one-hot protected attribute: the valid
    /// compound groups.
    pub fn protected_domain(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        for a in self.attributes.iter().filter(|a| a.protected) {
            if let Layout::OneHot(cats) = &a.layout {
                let vars: Vec<Var> = cats.iter().map(|(_, v)| *v).collect();
                out.extend(Clause::new(vars.iter().map(|v| v.positive())));
                for (i, x) in vars.iter().enumerate() {
                    for y in &vars[i + 1..] {
                        out.extend(Clause::new([x.negative(), y.negative()]));
                    }
                }
            }
        }
        out
    }

    /// Threshold variables of each numeric attribute, strongest first.
    pub fn threshold_chains(&self) -> Vec<Vec<Var>> {
        self.attributes
            .iter()
            .filter_map(|a| match &a.layout {
                Layout::Thresholds(vs) if vs.len() > 1 => Some(vs.iter().rev().copied().collect()),
                _ => None,
            })
            .collect()
    }

    /// One line per variable, e.g. `3 income>=0.69`, with protected
    /// variables marked.
    pub fn legend(&self) -> Vec<String> {
        self.features
            .iter()
            .map(|f| {
                let mark = if f.protected { " (protected)" } else { "" };
                format!("{} {}{mark}", f.var, f.name())
            })
            .collect()
    }

    /// Builds the map from a schema, data (for inferred categories and bin
    /// ranges) and the thresholds a model tests per numeric attribute.
    /// `bins` overrides the schema's bin counts.
    pub fn build(
        schema: &Schema,
        table: &RawTable,
        thresholds: &BTreeMap<String, Vec<f64>>,
        bins: Option<usize>,
    ) -> Result<FeatureMap> {
        schema.validate()?;
        if table.is_empty() {
            return Err(Error::validation("dataset has no rows"));
        }
        table.column(&schema.label)?;
        for attr in thresholds.keys() {
            match schema.attribute(attr) {
                Some(a) if a.kind == AttributeKind::Numeric => {}
                _ => {
                    return Err(Error::validation(format!(
                        "threshold given for `{attr}`, which is not a numeric attribute"
                    )))
                }
            }
        }
        let ordered = schema
            .attributes
            .iter()
            .filter(|a| !a.protected)
            .chain(schema.attributes.iter().filter(|a| a.protected));
        let mut map = FeatureMap {
            features: Vec::new(),
            attributes: Vec::new(),
            names: HashMap::new(),
        };
        for spec in ordered {
            let col = table.column(&spec.name)?;
            let layout = match spec.kind {
                AttributeKind::Numeric => {
                    let values = numeric_column(table, col, &spec.name)?;
                    match thresholds.get(&spec.name) {
                        Some(ts) => {
                            let ts: BTreeSet<OrdF64> = ts.iter().map(|&t| OrdF64(t)).collect();
                            Layout::Thresholds(
                                ts.into_iter()
                                    .map(|t| map.push(spec, Predicate::AtLeast(t.0)))
                                    .collect(),
                            )
                        }
                        None => {
                            let edges = interval_edges(spec, &values, bins);
                            let mut bounds: Vec<Option<f64>> = vec![None];
                            bounds.extend(edges.into_iter().map(Some));
                            bounds.push(None);
                            Layout::Intervals(
                                bounds
                                    .windows(2)
                                    .map(|w| {
                                        map.push(spec, Predicate::Interval { lower: w[0], upper: w[1] })
                                    })
                                    .collect(),
                            )
                        }
                    }
                }
                AttributeKind::Categorical => {
                    let cats = match &spec.categories {
                        Some(c) => c.clone(),
                        None => {
                            let seen: BTreeSet<&str> = table.rows().iter().map(|r| r[col].as_str()).collect();
                            seen.into_iter().map(str::to_string).collect()
                        }
                    };
                    match spec.encoding.unwrap_or_default() {
                        CategoricalEncoding::Onehot => Layout::OneHot(
                            cats.iter()
                                .map(|c| (c.clone(), map.push(spec, Predicate::Equals(c.clone()))))
                                .collect(),
                        ),
                        CategoricalEncoding::Binary => {
                            if cats.len() != 2 {
                                return Err(Error::validation(format!(
                                    "attribute `{}`: binary encoding needs exactly two categories, found {}",
                                    spec.name,
                                    cats.len()
                                )));
                            }
                            let var = map.push(spec, Predicate::Equals(cats[1].clone()));
                            map.names.insert(format!("{}={}", spec.name, cats[0]), var.negative());
                            Layout::Binary {
                                var,
                                categories: [cats[0].clone(), cats[1].clone()],
                            }
                        }
                    }
                }
            };
            map.attributes.push(AttributeLayout {
                name: spec.name.clone(),
                protected: spec.protected,
                layout,
            });
        }
        Ok(map)
    }

    fn push(&mut self, spec: &AttributeSpec, predicate: Predicate) -> Var {
        let var = Var::from_index(self.features.len());
        let f = Feature {
            var,
            attribute: spec.name.clone(),
            predicate,
            protected: spec.protected,
        };
        self.names.insert(f.name(), var.positive());
        self.features.push(f);
        var
    }

    /// Evaluates every predicate on every row.
    pub fn booleanize(&self, schema: &Schema, table: &RawTable) -> Result<BooleanDataset> {
        let n = self.features.len();
        let label_col = table.column(&schema.label)?;
        let mut bits = vec![false; n * table.len()];
        let mut labels = Vec::with_capacity(table.len());
        for (i, row) in table.rows().iter().enumerate() {
            let raw = &row[label_col];
            let label = schema.parse_label(raw).ok_or_else(|| {
                Error::parse(table.line(i), format!("label `{raw}` is not one of 1/0/true/false/yes/no"))
            })?;
            labels.push(label);
        }
        for a in &self.attributes {
            let col = table.column(&a.name)?;
            for (i, row) in table.rows().iter().enumerate() {
                let raw = row[col].as_str();
                let out = &mut bits[i * n..(i + 1) * n];
                match &a.layout {
                    Layout::Thresholds(vs) | Layout::Intervals(vs) => {
                        let x = parse_number(raw, table.line(i), &a.name)?;
                        for v in vs {
                            out[v.index()] = self.feature(*v).predicate.holds_numeric(x);
                        }
                    }
                    Layout::OneHot(cats) => {
                        let v = cats.iter().find(|(c, _)| c == raw).map(|(_, v)| *v).ok_or_else(|| {
                            unknown_category(raw, table.line(i), &a.name)
                        })?;
                        out[v.index()] = true;
                    }
                    Layout::Binary { var, categories } => {
                        if raw == categories[1] {
                            out[var.index()] = true;
                        } else if raw != categories[0] {
                            return Err(unknown_category(raw, table.line(i), &a.name));
                        }
                    }
                }
            }
        }
        Ok(BooleanDataset {
            num_vars: n,
            bits,
            labels,
        })
    }
}

fn unknown_category(raw: &str, line: usize, attr: &str) -> Error {
    if raw.is_empty() {
        Error::parse(line, format!("missing value in `{attr}`"))
    } else {
        Error::parse(line, format!("unknown category `{raw}` in `{attr}`"))
    }
}

fn parse_number(raw: &str, line: usize, attr: &str) -> Result<f64> {
    if raw.is_empty() {
        return Err(Error::parse(line, format!("missing value in `{attr}`")));
    }
    match raw.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::parse(line, format!("`{raw}` in numeric column `{attr}` is not a number"))),
    }
}

fn numeric_column(table: &RawTable, col: usize, attr: &str) -> Result<Vec<f64>> {
    table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| parse_number(&r[col], table.line(i), attr))
        .collect()
}

/// Interior cut points: explicit edges, or equal-width over the data range.
/// A constant column uses unit width so the bins stay distinct.
fn interval_edges(spec: &AttributeSpec, values: &[f64], bins: Option<usize>) -> Vec<f64> {
    if let Some(edges) = &spec.edges {
        return edges.clone();
    }
    let k = bins.or(spec.bins).unwrap_or(DEFAULT_BINS).max(1);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / k as f64 } else { 1.0 / k as f64 };
    (1..k).map(|j| lo + width * j as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Rows over the feature variables plus a label bit.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanDataset {
    num_vars: usize,
    bits: Vec<bool>,
    labels: Vec<bool>,
}

impl BooleanDataset {
    pub fn new(num_vars: usize, rows: Vec<Vec<bool>>, labels: Vec<bool>) -> Result<BooleanDataset> {
        if rows.len() != labels.len() {
            return Err(Error::validation("one label per row required"));
        }
        if rows.iter().any(|r| r.len() != num_vars) {
            return Err(Error::validation(format!("every row needs {num_vars} bits")));
        }
        Ok(BooleanDataset {
            num_vars,
            bits: rows.concat(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.num_vars..(i + 1) * self.num_vars]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[bool], bool)> + '_ {
        (0..self.len()).map(move |i| (self.row(i), self.labels[i]))
    }
}

/// Numeric thresholds tested by feature names of the form `attr>=t`, for
/// numeric attributes of the schema.
pub fn model_thresholds<S: AsRef<str>>(schema: &Schema, names: &[S]) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for name in names {
        let Some((attr, t)) = name.as_ref().rsplit_once(">=") else {
            continue;
        };
        let attr = attr.trim();
        let is_numeric = schema
            .attribute(attr)
            .is_some_and(|a| a.kind == AttributeKind::Numeric);
        if let (true, Ok(t)) = (is_numeric, t.trim().parse::<f64>()) {
            out.entry(attr.to_string()).or_default().push(t);
        }
    }
    out
}

/// Booleanizes a table: numeric attributes use the model's thresholds when
/// it has any for them, else equal-width one-hot intervals.
pub fn discretize(
    table: &RawTable,
    schema: &Schema,
    thresholds: &BTreeMap<String, Vec<f64>>,
    bins: Option<usize>,
) -> Result<(BooleanDataset, FeatureMap)> {
    let map = FeatureMap::build(schema, table, thresholds, bins)?;
    let data = map.booleanize(schema, table)?;
    Ok((data, map))
}
