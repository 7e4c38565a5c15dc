//! Seeded synthetic datasets with matching schemas and tree models.
//!
//! The two-attribute example has one protected attribute `age` (`old`
//! means 40 and above, half the population) and normally distributed
//! `fitness` and `income` whose per-group parameters put these masses
//! above the tree's thresholds:
//!
//! | group | fitness ≥ 0.61 | income ≥ 0.29 | income ≥ 0.69 |
//! |-------|----------------|---------------|---------------|
//! | old   | 0.01           | 0.99          | 0.18          |
//! | young | 0.82           | 0.88          | 0.01          |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::distribution::{RawTable, Schema};
use crate::encoders::ModelSpec;

pub const FITNESS_INCOME_SCHEMA: &str = r#"{
  "label": "label",
  "attributes": [
    {"name": "fitness", "kind": "numeric"},
    {"name": "income", "kind": "numeric"},
    {"name": "age", "kind": "categorical", "protected": true, "categories": ["young", "old"], "encoding": "binary"}
  ]
}
"#;

pub const FITNESS_INCOME_TREE: &str = r#"{
  "type": "tree",
  "root": {
    "feature": "fitness>=0.61",
    "yes": {"feature": "income>=0.29", "yes": {"label": 1}, "no": {"label": 0}},
    "no": {"feature": "income>=0.69", "yes": {"label": 1}, "no": {"label": 0}}
  }
}
"#;

/// (mean, sd) of fitness and income for `old` then `young`.
const FITNESS: [(f64, f64); 2] = [(0.377365, 0.1), (0.701537, 0.1)];
const INCOME: [(f64, f64); 2] = [(0.577052, 0.123392), (0.424233, 0.114242)];
const LABEL_NOISE: f64 = 0.1;

pub fn fitness_income_schema() -> Schema {
    Schema::from_json(FITNESS_INCOME_SCHEMA).expect("bundled schema is valid")
}

pub fn fitness_income_tree() -> ModelSpec {
    ModelSpec::from_json(FITNESS_INCOME_TREE).expect("bundled model is valid")
}

fn tree_label(fitness: f64, income: f64) -> bool {
    if fitness >= 0.61 {
        income >= 0.29
    } else {
        income >= 0.69
    }
}

/// `rows` samples; the label is the tree's prediction flipped with
/// probability 0.1.
pub fn fitness_income_data(rows: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |(m, s): (f64, f64)| Normal::new(m, s).expect("positive sd");
    let fitness = FITNESS.map(normal);
    let income = INCOME.map(normal);
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let g = usize::from(rng.random_bool(0.5));
        let f: f64 = fitness[g].sample(&mut rng);
        let i: f64 = income[g].sample(&mut rng);
        let label = tree_label(f, i) ^ rng.random_bool(LABEL_NOISE);
        out.push(vec![
            format!("{f:.6}"),
            format!("{i:.6}"),
            if g == 0 { "old" } else { "young" }.to_string(),
            u8::from(label).to_string(),
        ]);
    }
    let headers = ["fitness", "income", "age", "label"].map(String::from).to_vec();
    RawTable::new(headers, out).expect("rows match header")
}

/// Schema for the UCI Adult census columns (header row required). Works
/// for the real file and for [`adult_like_data`].
pub const ADULT_SCHEMA: &str = r#"{
  "label": "income",
  "positive_label": ">50K",
  "attributes": [
    {"name": "age", "kind": "numeric"},
    {"name": "workclass", "kind": "categorical"},
    {"name": "education-num", "kind": "numeric"},
    {"name": "marital-status", "kind": "categorical"},
    {"name": "occupation", "kind": "categorical"},
    {"name": "relationship", "kind": "categorical"},
    {"name": "capital-gain", "kind": "numeric"},
    {"name": "capital-loss", "kind": "numeric"},
    {"name": "hours-per-week", "kind": "numeric"},
    {"name": "race", "kind": "categorical", "protected": true},
    {"name": "sex", "kind": "categorical", "protected": true, "categories": ["Female", "Male"], "encoding": "binary"}
  ]
}
"#;

/// A depth-5 tree in the shape of what a learner produces on Adult.
pub const ADULT_TREE: &str = r#"{
  "type": "tree",
  "root": {
    "feature": "relationship=Husband",
    "yes": {
      "feature": "education-num>=13",
      "yes": {
        "feature": "capital-gain>=5095.5",
        "yes": {"label": 1},
        "no": {
          "feature": "hours-per-week>=31",
          "yes": {"feature": "age>=29", "yes": {"label": 1}, "no": {"label": 0}},
          "no": {"label": 0}
        }
      },
      "no": {
        "feature": "capital-gain>=5095.5",
        "yes": {"label": 1},
        "no": {
          "feature": "occupation=Exec-managerial",
          "yes": {"feature": "age>=35", "yes": {"label": 1}, "no": {"label": 0}},
          "no": {
            "feature": "capital-loss>=1782.5",
            "yes": {"label": 1},
            "no": {"label": 0}
          }
        }
      }
    },
    "no": {
      "feature": "capital-gain>=7073.5",
      "yes": {"label": 1},
      "no": {
        "feature": "education-num>=13",
        "yes": {
          "feature": "hours-per-week>=44",
          "yes": {"feature": "marital-status=Married-civ-spouse", "yes": {"label": 1}, "no": {"label": 0}},
          "no": {"label": 0}
        },
        "no": {"label": 0}
      }
    }
  }
}
"#;

const RACES: [(&str, f64); 5] = [
    ("White", 0.854),
    ("Black", 0.096),
    ("Asian-Pac-Islander", 0.032),
    ("Amer-Indian-Eskimo", 0.01),
    ("Other", 0.008),
];
const WORKCLASS: [&str; 5] = ["Private", "Self-emp-not-inc", "Local-gov", "State-gov", "Federal-gov"];
const MARITAL: [&str; 4] = ["Married-civ-spouse", "Never-married", "Divorced", "Widowed"];
const OCCUPATION: [&str; 6] = [
    "Exec-managerial",
    "Prof-specialty",
    "Craft-repair",
    "Adm-clerical",
    "Sales",
    "Other-service",
];

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

/// Random rows with the Adult column names and categories used by
/// [`ADULT_TREE`]. Marginals are rough, correlations are not modeled.
pub fn adult_like_data(rows: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let age_dist = Normal::<f64>::new(38.6, 13.6).expect("positive sd");
    let hours_dist = Normal::<f64>::new(40.4, 12.3).expect("positive sd");
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let male = rng.random_bool(0.67);
        let mut u: f64 = rng.random();
        let race = RACES
            .iter()
            .find(|(_, p)| {
                u -= p;
                u < 0.0
            })
            .map_or("Other", |(r, _)| r);
        let married = rng.random_bool(if male { 0.6 } else { 0.15 });
        let marital = if married { MARITAL[0] } else { pick(&mut rng, &MARITAL[1..]) };
        let relationship = match (married, male) {
            (true, true) => "Husband",
            (true, false) => "Wife",
            _ => pick(&mut rng, &["Not-in-family", "Own-child", "Unmarried"]),
        };
        let age = age_dist.sample(&mut rng).clamp(17.0, 90.0).round();
        let edu = rng.random_range(1..=16);
        let hours = hours_dist.sample(&mut rng).clamp(1.0, 99.0).round();
        let gain = if rng.random_bool(0.08) { rng.random_range(100..100_000) } else { 0 };
        let loss = if rng.random_bool(0.05) { rng.random_range(100..4_000) } else { 0 };
        let score = f64::from(u8::from(married)) * 1.5 + f64::from(edu) * 0.2 + (hours - 40.0) * 0.03
            + if gain > 5000 { 3.0 } else { 0.0 };
        let label = score + rng.random::<f64>() * 2.0 > 4.5;
        out.push(vec![
            age.to_string(),
            pick(&mut rng, &WORKCLASS).to_string(),
            edu.to_string(),
            marital.to_string(),
            pick(&mut rng, &OCCUPATION).to_string(),
            relationship.to_string(),
            gain.to_string(),
            loss.to_string(),
            hours.to_string(),
            race.to_string(),
            if male { "Male" } else { "Female" }.to_string(),
            if label { ">50K" } else { "<=50K" }.to_string(),
        ]);
    }
    let headers = [
        "age",
        "workclass",
        "education-num",
        "marital-status",
        "occupation",
        "relationship",
        "capital-gain",
        "capital-loss",
        "hours-per-week",
        "race",
        "sex",
        "income",
    ]
    .map(String::from)
    .to_vec();
    RawTable::new(headers, out).expect("rows match header")
}
