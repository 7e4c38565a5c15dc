//! Seeded random instances for property suites.

use crate::distribution::{AttributeSpec, RawTable, Schema};
use crate::encoders::{LinearModel, ModelSpec, NodeSpec, TreeNode};
use crate::ssat::{Clause, CnfFormula, Lit, Quantifier, SsatFormula, UrFormula, Var};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var(i: u32) -> Var {
    Var::new(i).unwrap()
}

pub fn vars(range: std::ops::RangeInclusive<u32>) -> Vec<Var> {
    range.map(var).collect()
}

/// Probabilities on a 1/20 grid including the endpoints, so ties and
/// deterministic variables show up.
pub fn probability<R: Rng>(rng: &mut R) -> f64 {
    f64::from(rng.random_range(0..=20u32)) / 20.0
}

pub fn random_clause<R: Rng>(rng: &mut R, over: &[Var], max_len: usize) -> Clause {
    loop {
        let len = rng.random_range(1..=max_len.min(over.len()));
        let lits: Vec<Lit> = over
            .choose_multiple(rng, len)
            .map(|&v| v.lit(rng.random_bool(0.5)))
            .collect();
        if let Some(c) = Clause::new(lits) {
            return c;
        }
    }
}

pub fn random_clauses<R: Rng>(rng: &mut R, over: &[Var], count: usize, max_len: usize) -> Vec<Clause> {
    (0..count).map(|_| random_clause(rng, over, max_len)).collect()
}

/// A formula over `1..=n` with a shuffled prefix of randomly chosen
/// quantifiers.
pub fn random_ssat<R: Rng>(rng: &mut R, n: u32, clauses: usize) -> SsatFormula {
    let mut vs = vars(1..=n);
    vs.shuffle(rng);
    let prefix: Vec<(Var, Quantifier)> = vs
        .into_iter()
        .map(|v| {
            let q = if rng.random_bool(0.4) {
                Quantifier::Exists
            } else {
                Quantifier::Random(probability(rng))
            };
            (v, q)
        })
        .collect();
    let all = vars(1..=n);
    let matrix = CnfFormula::new(n, random_clauses(rng, &all, clauses, 4)).unwrap();
    SsatFormula::new(prefix, matrix).unwrap()
}

/// Existential block then randomized block, or the reverse.
pub fn random_two_block<R: Rng>(rng: &mut R, n: u32, clauses: usize, exists_first: bool) -> SsatFormula {
    let k = rng.random_range(1..n);
    let mut prefix = Vec::new();
    for i in 1..=n {
        let in_first = i <= k;
        let q = if in_first == exists_first {
            Quantifier::Exists
        } else {
            Quantifier::Random(probability(rng))
        };
        prefix.push((var(i), q));
    }
    let all = vars(1..=n);
    let matrix = CnfFormula::new(n, random_clauses(rng, &all, clauses, 3)).unwrap();
    SsatFormula::new(prefix, matrix).unwrap()
}

/// Exactly one of `vs` is TRUE.
pub fn exactly_one(vs: &[Var]) -> Vec<Clause> {
    let mut out = vec![Clause::new(vs.iter().map(|v| v.positive())).unwrap()];
    for (i, a) in vs.iter().enumerate() {
        for b in &vs[i + 1..] {
            out.extend(Clause::new([a.negative(), b.negative()]));
        }
    }
    out
}

/// A universal-random formula over at most `max_vars` variables, sometimes
/// with a one-hot or random domain over the universal block and implication
/// or random support clauses over the randomized block. The domain is
/// always satisfiable.
pub fn random_ur<R: Rng>(rng: &mut R, max_vars: u32) -> UrFormula {
    let n = rng.random_range(2..=max_vars);
    let k = rng.random_range(1..n);
    let universal = vars(1..=k);
    let random: Vec<(Var, f64)> = vars(k + 1..=n).into_iter().map(|v| (v, probability(rng))).collect();
    let all = vars(1..=n);
    let count = rng.random_range(0..=2 * n as usize);
    let matrix = CnfFormula::new(n, random_clauses(rng, &all, count, 3)).unwrap();
    let mut f = UrFormula::new(universal.clone(), random.clone(), matrix);
    match rng.random_range(0..3) {
        0 if k >= 2 => {
            let size = rng.random_range(2..=k as usize);
            f = f.with_domain(exactly_one(&universal[..size]));
        }
        1 => loop {
            let count = rng.random_range(1..=k as usize);
            let domain = random_clauses(rng, &universal, count, 2);
            let ok = super::assignments(&universal).any(|u| domain.iter().all(|c| c.eval(|v| u.get(v).unwrap())));
            if ok {
                f = f.with_domain(domain);
                break;
            }
        },
        _ => {}
    }
    let xs: Vec<Var> = random.iter().map(|&(v, _)| v).collect();
    if xs.len() >= 2 && rng.random_bool(0.5) {
        let count = rng.random_range(1..=xs.len());
        f = f.with_support(random_clauses(rng, &xs, count, 2));
    }
    f
}

/// A tree of at most `depth` tests over distinct variables of `over` per
/// path, mostly positive tests.
pub fn random_tree<R: Rng>(rng: &mut R, over: &[Var], depth: u32) -> TreeNode {
    if depth == 0 || over.is_empty() || rng.random_bool(0.25) {
        return TreeNode::leaf(rng.random_bool(0.5));
    }
    let mut rest = over.to_vec();
    let v = rest.swap_remove(rng.random_range(0..rest.len()));
    let yes = random_tree(rng, &rest, depth - 1);
    let no = random_tree(rng, &rest, depth - 1);
    TreeNode::split(v.lit(rng.random_bool(0.8)), yes, no)
}

/// A linear model over `over` with weights and bias in (-1, 1), some
/// literals negated.
pub fn random_linear<R: Rng>(rng: &mut R, over: &[Var]) -> LinearModel {
    let weights = over
        .iter()
        .map(|&v| (v.lit(rng.random_bool(0.7)), rng.random_range(-1.0..1.0)))
        .collect();
    LinearModel::new(weights, rng.random_range(-1.0..1.0)).unwrap()
}

/// Schema, data and model for an end-to-end run.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub schema: Schema,
    pub table: RawTable,
    pub spec: ModelSpec,
}

impl Bundle {
    /// Writes `data.csv`, `schema.json` and `model.json` into `dir`.
    pub fn write(&self, dir: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(dir.join("data.csv"), self.table.to_csv())?;
        std::fs::write(dir.join("schema.json"), self.schema.to_json())?;
        std::fs::write(dir.join("model.json"), self.spec.to_json())
    }
}

fn random_node<R: Rng>(rng: &mut R, names: &[String], depth: u32) -> NodeSpec {
    if depth == 0 || names.is_empty() || rng.random_bool(0.3) {
        return NodeSpec::leaf(rng.random_bool(0.5));
    }
    let mut rest = names.to_vec();
    let name = rest.swap_remove(rng.random_range(0..rest.len()));
    let yes = random_node(rng, &rest, depth - 1);
    let no = random_node(rng, &rest, depth - 1);
    NodeSpec::split(name, yes, no)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Cnf,
    Tree,
    Linear,
    Any,
}

/// Up to `max_protected` binary protected attributes `s1…` (plus a
/// three-way one-hot attribute `r` when `one_hot`), up to `max_features`
/// binary attributes `x1…`, 10 to 120 rows with per-column biases, and a
/// random CNF, tree or linear model over all of them.
pub fn random_bundle<R: Rng>(rng: &mut R, max_protected: usize, max_features: usize, one_hot: bool) -> Bundle {
    random_bundle_of(rng, ModelKind::Any, max_protected, max_features, one_hot)
}

/// [`random_bundle`] with a chosen kind of model.
pub fn random_bundle_of<R: Rng>(
    rng: &mut R,
    kind: ModelKind,
    max_protected: usize,
    max_features: usize,
    one_hot: bool,
) -> Bundle {
    let p = rng.random_range(1..=max_protected);
    let m = rng.random_range(1..=max_features);
    let mut attributes = Vec::new();
    let mut names = Vec::new();
    for i in 1..=m {
        attributes.push(AttributeSpec::categorical(format!("x{i}").as_str(), &["0", "1"]).binary());
        names.push(format!("x{i}=1"));
    }
    for i in 1..=p {
        attributes.push(AttributeSpec::categorical(format!("s{i}").as_str(), &["0", "1"]).protected().binary());
        names.push(format!("s{i}=1"));
    }
    const RACES: [&str; 3] = ["a", "b", "c"];
    if one_hot {
        attributes.push(AttributeSpec::categorical("r", &RACES).protected());
        names.extend(RACES.iter().map(|c| format!("r={c}")));
    }
    let schema = Schema {
        label: "y".into(),
        positive_label: None,
        attributes,
    };

    let biases: Vec<f64> = (0..m + p).map(|_| rng.random_range(0.1..0.9)).collect();
    let rows = rng.random_range(10..=120);
    let data = (0..rows)
        .map(|_| {
            let mut row: Vec<String> = biases.iter().map(|&b| u8::from(rng.random_bool(b)).to_string()).collect();
            if one_hot {
                row.push(RACES[rng.random_range(0..3)].to_string());
            }
            row.push(u8::from(rng.random_bool(0.5)).to_string());
            row
        })
        .collect();
    let mut headers: Vec<String> = schema.attributes.iter().map(|a| a.name.clone()).collect();
    headers.push("y".into());
    let table = RawTable::new(headers, data).expect("rows match header");

    let kind = match kind {
        ModelKind::Any => [ModelKind::Cnf, ModelKind::Tree, ModelKind::Linear][rng.random_range(0..3)],
        k => k,
    };
    let spec = match kind {
        ModelKind::Cnf => {
            let count = rng.random_range(0..=10);
            let clauses = (0..count)
                .map(|_| {
                    let len = rng.random_range(1..=3.min(names.len()));
                    names
                        .choose_multiple(rng, len)
                        .map(|n| if rng.random_bool(0.5) { format!("-{n}") } else { n.clone() })
                        .collect()
                })
                .collect();
            ModelSpec::Cnf { clauses }
        }
        ModelKind::Tree => ModelSpec::Tree {
            root: random_node(rng, &names, 5),
        },
        _ => {
            let len = rng.random_range(1..=names.len().min(6));
            let weights = names
                .choose_multiple(rng, len)
                .map(|n| (n.clone(), rng.random_range(-1.0..1.0)))
                .collect();
            ModelSpec::Linear {
                weights,
                bias: rng.random_range(-0.5..0.5),
            }
        }
    };
    Bundle { schema, table, spec }
}
