use std::collections::BTreeMap;

use fairssat::distribution::{
    discretize, enumerate_groups, estimate_probs, AttributeSpec, Context, Layout, Predicate, RawTable, Schema,
};
use fairssat::oracle::frequencies;
use fairssat::oracle::instances::rng;
use fairssat::synthetic::{fitness_income_data, fitness_income_schema};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn random_table<R: Rng>(r: &mut R, rows: usize) -> (Schema, RawTable) {
    let schema = Schema {
        label: "y".into(),
        positive_label: None,
        attributes: vec![
            AttributeSpec::numeric("a"),
            AttributeSpec::numeric("b"),
            AttributeSpec::categorical("c", &["p", "q", "s"]),
            AttributeSpec::categorical("g", &["m", "f"]).protected().binary(),
            AttributeSpec::categorical("h", &["u", "v", "w"]).protected(),
        ],
    };
    let data = (0..rows)
        .map(|_| {
            vec![
                format!("{:.3}", r.random_range(-5.0..5.0)),
                r.random_range(0..4).to_string(),
                ["p", "q", "s"][r.random_range(0..3)].to_string(),
                ["m", "f"][r.random_range(0..2)].to_string(),
                ["u", "v", "w"][r.random_range(0..3)].to_string(),
                r.random_range(0..2).to_string(),
            ]
        })
        .collect();
    let headers = ["a", "b", "c", "g", "h", "y"].map(String::from).to_vec();
    (schema, RawTable::new(headers, data).unwrap())
}

#[test]
fn booleanized_rows_follow_the_feature_predicates() {
    let mut r = rng(41);
    for round in 0..20 {
        let (schema, table) = random_table(&mut r, 50);
        let mut thresholds = BTreeMap::new();
        if round % 2 == 0 {
            thresholds.insert("a".to_string(), vec![-1.0, 0.0, 2.5]);
        }
        let (data, map) = discretize(&table, &schema, &thresholds, Some(3)).unwrap();
        let col = |name: &str| table.headers().iter().position(|h| h == name).unwrap();
        for (i, row) in table.rows().iter().enumerate() {
            for f in map.features() {
                let raw = &row[col(&f.attribute)];
                let want = match &f.predicate {
                    Predicate::AtLeast(t) => raw.parse::<f64>().unwrap() >= *t,
                    Predicate::Interval { lower, upper } => {
                        let x: f64 = raw.parse().unwrap();
                        lower.is_none_or(|l| x >= l) && upper.is_none_or(|u| x < u)
                    }
                    Predicate::Equals(c) => raw == c,
                };
                assert_eq!(data.row(i)[f.var.index()], want, "{} on {raw}", f.name());
            }
            assert_eq!(data.label(i), row[col("y")] == "1");
        }
        for a in map.attributes() {
            let on = |i: usize| a.vars().iter().filter(|v| data.row(i)[v.index()]).count();
            match &a.layout {
                Layout::Intervals(_) | Layout::OneHot(_) => (0..data.len()).for_each(|i| assert_eq!(on(i), 1)),
                Layout::Thresholds(vs) => {
                    // nested thresholds: once one fails, every higher one fails
                    for i in 0..data.len() {
                        let bits: Vec<bool> = vs.iter().map(|v| data.row(i)[v.index()]).collect();
                        assert!(bits.windows(2).all(|w| w[0] || !w[1]));
                    }
                }
                Layout::Binary { .. } => {}
            }
        }
        // protected variables come last
        let first_protected = map.protected_vars()[0].index();
        assert!(map.random_vars().iter().all(|v| v.index() < first_protected));
    }
}

#[test]
fn estimates_equal_direct_counts() {
    let mut r = rng(42);
    let (schema, table) = random_table(&mut r, 80);
    let (data, map) = discretize(&table, &schema, &BTreeMap::new(), None).unwrap();
    let mut contexts = vec![Context::All, Context::Label(true), Context::Label(false)];
    for g in enumerate_groups(&map) {
        contexts.push(Context::GroupLabel(g.clone(), true));
        contexts.push(Context::Group(g));
    }
    for c in contexts {
        match (estimate_probs(&data, &map, c.clone()), frequencies(&data, &map, &c)) {
            (Ok(t), Some(want)) => {
                assert_eq!(t.iter().collect::<Vec<_>>(), want);
            }
            (Err(fairssat::Error::EmptyGroup(_)), None) => {}
            (got, want) => panic!("{c}: {got:?} vs {want:?}"),
        }
    }
}

/// The masses the generator's normals put above each tree threshold.
#[test]
fn calibration_masses() {
    let above = |m: f64, s: f64, t: f64| 1.0 - Normal::new(m, s).unwrap().cdf(t);
    let old = [above(0.377365, 0.1, 0.61), above(0.577052, 0.123392, 0.29), above(0.577052, 0.123392, 0.69)];
    let young = [above(0.701537, 0.1, 0.61), above(0.424233, 0.114242, 0.29), above(0.424233, 0.114242, 0.69)];
    for (got, want) in old.iter().zip([0.01, 0.99, 0.18]).chain(young.iter().zip([0.82, 0.88, 0.01])) {
        assert!((got - want).abs() < 0.005, "{got} vs {want}");
    }
    let marginal: Vec<f64> = old.iter().zip(&young).map(|(o, y)| (o + y) / 2.0).collect();
    for (got, want) in marginal.iter().zip([0.41, 0.93, 0.09]) {
        assert!((got - want).abs() < 0.01, "{got} vs {want}");
    }
}

#[test]
fn sampled_marginals_and_conditionals() {
    let table = fitness_income_data(10_000, 1);
    let mut thresholds = BTreeMap::new();
    thresholds.insert("fitness".to_string(), vec![0.61]);
    thresholds.insert("income".to_string(), vec![0.29, 0.69]);
    let (data, map) = discretize(&table, &fitness_income_schema(), &thresholds, None).unwrap();
    let var = |n: &str| map.lookup(n).unwrap().var();
    let fij = [var("fitness>=0.61"), var("income>=0.29"), var("income>=0.69")];
    let all = estimate_probs(&data, &map, Context::All).unwrap();
    for (v, want) in fij.iter().zip([0.41, 0.93, 0.09]) {
        assert!((all.get(*v).unwrap() - want).abs() <= 0.02);
    }
    let groups = enumerate_groups(&map);
    let old = groups.iter().find(|g| g.to_string() == "age=old").unwrap();
    let given_old = estimate_probs(&data, &map, Context::Group(old.clone())).unwrap();
    for (v, want) in fij.iter().zip([0.01, 0.99, 0.18]) {
        assert!((given_old.get(*v).unwrap() - want).abs() <= 0.02);
    }
}
