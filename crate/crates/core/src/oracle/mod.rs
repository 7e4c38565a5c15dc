//! Brute-force reference implementations for tests. Everything here
//! enumerates assignments explicitly and shares no search code with the
//! solver, so keep inputs small.

pub mod instances;

use crate::distribution::{BooleanDataset, CompoundGroup, Context, FeatureMap};
use crate::ssat::{Assignment, Clause, CnfFormula, Quantifier, SsatFormula, Var, Weight};

pub fn satisfies(clauses: &[Clause], a: &Assignment) -> bool {
    clauses
        .iter()
        .all(|c| c.eval(|v| a.get(v).unwrap_or(false)))
}

/// Satisfying probability by the plain quantifier recursion: `max` over
/// existential values, the weighted average over randomized ones, and the
/// matrix's truth value once the prefix is exhausted. No caching, no
/// simplification.
pub fn ssat_probability<W: Weight>(formula: &SsatFormula) -> W {
    fn go<W: Weight>(prefix: &[(Var, Quantifier)], matrix: &CnfFormula, a: &mut Assignment) -> W {
        let Some((&(v, q), rest)) = prefix.split_first() else {
            return if satisfies(matrix.clauses(), a) { W::one() } else { W::zero() };
        };
        a.set(v, false);
        let lo = go::<W>(rest, matrix, a);
        a.set(v, true);
        let hi = go::<W>(rest, matrix, a);
        match q {
            Quantifier::Exists => {
                if hi > lo {
                    hi
                } else {
                    lo
                }
            }
            Quantifier::Random(p) => {
                let p = W::from_probability(p);
                p.clone() * hi + (W::one() - p) * lo
            }
        }
    }
    go(formula.prefix(), formula.matrix(), &mut Assignment::new())
}

/// Every assignment of `vars`, the first variable varying slowest.
pub fn assignments(vars: &[Var]) -> impl Iterator<Item = Assignment> + '_ {
    assert!(vars.len() < 32, "too many variables to enumerate");
    (0u64..1 << vars.len()).map(move |bits| {
        vars.iter()
            .enumerate()
            .map(|(i, &v)| (v, bits >> (vars.len() - 1 - i) & 1 == 1))
            .collect()
    })
}

/// `Pr_X[holds]` with `fixed` held constant, by enumerating `X`.
pub fn weighted_probability<W: Weight>(
    random: &[(Var, f64)],
    fixed: &Assignment,
    holds: impl Fn(&Assignment) -> bool,
) -> W {
    let xs: Vec<Var> = random.iter().map(|&(v, _)| v).collect();
    let mut total = W::zero();
    for x in assignments(&xs) {
        let mut a = fixed.clone();
        let mut weight = W::one();
        for (&(v, p), (_, b)) in random.iter().zip(x.iter()) {
            a.set(v, b);
            let p = W::from_probability(p);
            weight = weight * if b { p } else { W::one() - p };
        }
        if holds(&a) {
            total = total + weight;
        }
    }
    total
}

/// `Pr_X[∃ aux. clauses]` with `fixed` held constant.
pub fn weighted_count<W: Weight>(clauses: &[Clause], random: &[(Var, f64)], aux: &[Var], fixed: &Assignment) -> W {
    weighted_probability(random, fixed, |a| exists_extension(clauses, a, aux))
}

/// Whether some assignment of `aux` extends `a` to a model of `clauses`.
pub fn exists_extension(clauses: &[Clause], a: &Assignment, aux: &[Var]) -> bool {
    assignments(aux).any(|ext| {
        let mut full = a.clone();
        for (v, b) in ext.iter() {
            full.set(v, b);
        }
        satisfies(clauses, &full)
    })
}

/// Number of assignments of `aux` extending `a` to a model of `clauses`,
/// counted up to `limit`. Branches on `aux` in order with unit propagation,
/// so it stays fast when the auxiliaries are functionally determined.
pub fn count_extensions(clauses: &[Clause], a: &Assignment, aux: &[Var], limit: usize) -> usize {
    fn value(a: &Assignment, l: crate::ssat::Lit) -> Option<bool> {
        a.get(l.var()).map(|b| l.eval(b))
    }
    fn go(clauses: &[Clause], mut a: Assignment, aux: &[Var], limit: usize) -> usize {
        loop {
            let mut unit = None;
            for c in clauses {
                if c.lits().iter().any(|&l| value(&a, l) == Some(true)) {
                    continue;
                }
                let open: Vec<_> = c.lits().iter().filter(|&&l| value(&a, l).is_none()).collect();
                match open.as_slice() {
                    [] => return 0,
                    [l] if aux.contains(&l.var()) => unit = Some(**l),
                    _ => {}
                }
            }
            match unit {
                Some(l) => a.set(l.var(), l.polarity()),
                None => break,
            }
        }
        let Some(&v) = aux.iter().find(|&&v| a.get(v).is_none()) else {
            return usize::from(satisfies(clauses, &a));
        };
        let lo = go(clauses, a.clone().with(v, false), aux, limit);
        if lo >= limit {
            return lo;
        }
        lo + go(clauses, a.with(v, true), aux, limit - lo)
    }
    go(clauses, a.clone(), aux, limit)
}

/// `min` over the assignments of `universal` satisfying `domain` of
/// `Pr_X[holds]`, with the first minimizing assignment. `None` when no
/// assignment satisfies the domain.
pub fn ur_minimum<W: Weight>(
    universal: &[Var],
    random: &[(Var, f64)],
    domain: &[Clause],
    holds: impl Fn(&Assignment) -> bool,
) -> Option<(W, Assignment)> {
    let mut best: Option<(W, Assignment)> = None;
    for u in assignments(universal) {
        if !satisfies(domain, &u) {
            continue;
        }
        let w = weighted_probability::<W>(random, &u, &holds);
        if best.as_ref().is_none_or(|(b, _)| w < *b) {
            best = Some((w, u));
        }
    }
    best
}

/// The set of assignments to `vars` (as bit vectors, first variable
/// highest) under which `clauses` has a model over `aux`.
pub fn projected_models(clauses: &[Clause], vars: &[Var], aux: &[Var]) -> Vec<u64> {
    assignments(vars)
        .enumerate()
        .filter(|(_, a)| exists_extension(clauses, a, aux))
        .map(|(i, _)| i as u64)
        .collect()
}

/// The same set for a predicate over assignments.
pub fn predicate_models(vars: &[Var], f: impl Fn(&Assignment) -> bool) -> Vec<u64> {
    assignments(vars)
        .enumerate()
        .filter(|(_, a)| f(a))
        .map(|(i, _)| i as u64)
        .collect()
}

/// Relative frequency of each non-protected variable among rows in
/// `context`, counted directly. `None` when the context is empty.
pub fn frequencies(data: &BooleanDataset, map: &FeatureMap, context: &Context) -> Option<Vec<(Var, f64)>> {
    let rows: Vec<&[bool]> = data
        .rows()
        .filter(|(r, y)| context.contains(r, *y))
        .map(|(r, _)| r)
        .collect();
    if rows.is_empty() {
        return None;
    }
    Some(
        map.random_vars()
            .into_iter()
            .map(|v| {
                let ones = rows.iter().filter(|r| r[v.index()]).count();
                (v, ones as f64 / rows.len() as f64)
            })
            .collect(),
    )
}

/// `Σ_x Pr[x] · classify(x, group)` with the group's protected values fixed
/// and the non-protected variables independent with `probs`.
pub fn group_ppv(group: &CompoundGroup, probs: &[(Var, f64)], classify: impl Fn(&Assignment) -> bool) -> f64 {
    let xs: Vec<Var> = probs.iter().map(|&(v, _)| v).collect();
    let mut total = 0.0;
    for x in assignments(&xs) {
        let mut a = group.to_assignment();
        let mut weight = 1.0;
        for (&(v, p), (_, b)) in probs.iter().zip(x.iter()) {
            a.set(v, b);
            weight *= if b { p } else { 1.0 - p };
        }
        if classify(&a) {
            total += weight;
        }
    }
    total
}
