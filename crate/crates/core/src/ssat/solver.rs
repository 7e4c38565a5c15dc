//! Exact SSAT evaluation by quantifier elimination in prefix order.
//!
//! The search is DPLL-shaped. At every node the residual matrix is
//! simplified by unit propagation (a unit clause on a randomized variable
//! contributes the weight of its forced value; on an existential variable
//! the other value yields 0 and is dropped) and by pure-literal elimination
//! on existential variables. Variable-disjoint components are solved
//! separately and multiplied: both `max` and the weighted average commute
//! with multiplication by a non-negative factor that does not mention the
//! branched variable. Component values are memoized on the sorted clause
//! list; the quantifiers of the remaining variables are fixed by the global
//! prefix, so the clause list alone identifies the subproblem.
//!
//! Branching respects the prefix: only variables of the outermost block that
//! still occurs in the residual are eligible. Variables absent from the
//! residual contribute a factor of 1 under either quantifier.

use std::collections::{BTreeMap, HashMap};

use num::BigRational;
use serde::Serialize;

use super::{Assignment, Lit, Quantifier, SsatFormula, Var, Weight};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub probability: f64,
    /// Assignment to the leading existential block. Ties prefer FALSE.
    pub witness: Assignment,
    pub stats: SolverStats,
}

#[derive(Debug, Clone)]
pub struct ExactSolveResult {
    pub probability: BigRational,
    pub witness: Assignment,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub decisions: u64,
    pub cache_hits: u64,
    pub cache_entries: u64,
}

impl SolverStats {
    pub fn merge(&mut self, other: SolverStats) {
        self.decisions += other.decisions;
        self.cache_hits += other.cache_hits;
        self.cache_entries += other.cache_entries;
    }
}

/// Anything that can say how likely a variable is to be TRUE.
pub trait VarProbabilities {
    fn probability(&self, var: Var) -> Option<f64>;
}

impl VarProbabilities for BTreeMap<Var, f64> {
    fn probability(&self, var: Var) -> Option<f64> {
        self.get(&var).copied()
    }
}

impl VarProbabilities for HashMap<Var, f64> {
    fn probability(&self, var: Var) -> Option<f64> {
        self.get(&var).copied()
    }
}

/// Indexed by `Var::index`.
impl VarProbabilities for [f64] {
    fn probability(&self, var: Var) -> Option<f64> {
        self.get(var.index()).copied()
    }
}

impl VarProbabilities for Vec<f64> {
    fn probability(&self, var: Var) -> Option<f64> {
        self.as_slice().probability(var)
    }
}

/// Satisfying probability of `formula`, with the maximizing assignment of
/// its leading existential block.
pub fn evaluate(formula: &SsatFormula) -> Result<SolveResult> {
    let mut engine = Engine::<f64>::new(formula);
    let (probability, witness) = engine.solve_with_witness(formula);
    Ok(SolveResult {
        probability,
        witness,
        stats: engine.stats,
    })
}

/// [`evaluate`] in exact rational arithmetic. Randomized probabilities are
/// taken at their exact binary values.
pub fn evaluate_exact(formula: &SsatFormula) -> Result<ExactSolveResult> {
    let mut engine = Engine::<BigRational>::new(formula);
    let (probability, witness) = engine.solve_with_witness(formula);
    Ok(ExactSolveResult {
        probability,
        witness,
    })
}

/// Weighted model count of `matrix`: each variable contributes `p` when TRUE
/// and `1 - p` when FALSE. Only variables occurring in the matrix need a
/// probability.
pub fn weighted_model_count<P>(matrix: &super::CnfFormula, probs: &P) -> Result<f64>
where
    P: VarProbabilities + ?Sized,
{
    let mut prefix = Vec::new();
    for v in matrix.occurring_vars() {
        let p = probs
            .probability(v)
            .ok_or_else(|| Error::validation(format!("no probability for variable {v}")))?;
        prefix.push((v, Quantifier::Random(p)));
    }
    let formula = SsatFormula::new(prefix, matrix.clone())?;
    let mut engine = Engine::<f64>::new(&formula);
    Ok(engine.value(clause_lists(&formula)))
}

fn clause_lists(formula: &SsatFormula) -> Vec<Vec<Lit>> {
    formula
        .matrix()
        .clauses()
        .iter()
        .map(|c| c.lits().to_vec())
        .collect()
}

#[derive(Debug, Clone)]
enum Kind<W> {
    Free,
    Exists,
    Random { p: W, q: W },
}

struct Engine<W> {
    kinds: Vec<Kind<W>>,
    position: Vec<usize>,
    cache: HashMap<Vec<Vec<Lit>>, W>,
    stats: SolverStats,
}

impl<W: Weight> Engine<W> {
    fn new(formula: &SsatFormula) -> Engine<W> {
        let n = formula.num_vars() as usize;
        let mut kinds = vec![Kind::Free; n];
        let mut position = vec![usize::MAX; n];
        for (pos, &(v, q)) in formula.prefix().iter().enumerate() {
            position[v.index()] = pos;
            kinds[v.index()] = match q {
                Quantifier::Exists => Kind::Exists,
                Quantifier::Random(p) => {
                    let p = W::from_probability(p);
                    let q = W::one() - p.clone();
                    Kind::Random { p, q }
                }
            };
        }
        Engine {
            kinds,
            position,
            cache: HashMap::new(),
            stats: SolverStats::default(),
        }
    }

    /// Fixes the leading existential block one variable at a time, keeping
    /// the better cofactor (FALSE on ties), then evaluates what is left.
    fn solve_with_witness(&mut self, formula: &SsatFormula) -> (W, Assignment) {
        let mut residual = clause_lists(formula);
        let mut witness = Assignment::new();
        for v in formula.leading_exists() {
            let occurs = residual.iter().flatten().any(|l| l.var() == v);
            let choice = occurs && {
                let on = self.value(assign(&residual, v.positive()));
                let off = self.value(assign(&residual, v.negative()));
                on > off
            };
            witness.set(v, choice);
            residual = assign(&residual, v.lit(choice));
        }
        let value = self.value(residual);
        self.stats.cache_entries = self.cache.len() as u64;
        (value, witness)
    }

    fn literal_weight(&self, lit: Lit) -> W {
        match &self.kinds[lit.var().index()] {
            Kind::Random { p, q } => {
                if lit.polarity() {
                    p.clone()
                } else {
                    q.clone()
                }
            }
            _ => W::one(),
        }
    }

    fn value(&mut self, mut clauses: Vec<Vec<Lit>>) -> W {
        clauses.sort_unstable();
        let mut weight = W::one();
        loop {
            if clauses.first().is_some_and(|c| c.is_empty()) {
                return W::zero();
            }
            let unit = clauses.iter().filter(|c| c.len() == 1).map(|c| c[0]).min();
            let Some(lit) = unit else { break };
            weight = weight * self.literal_weight(lit);
            if weight.is_zero() {
                return weight;
            }
            clauses = assign(&clauses, lit);
            clauses.sort_unstable();
        }
        loop {
            let pure = self.pure_existentials(&clauses);
            if pure.is_empty() {
                break;
            }
            for lit in pure {
                clauses.retain(|c| !c.contains(&lit));
            }
        }
        if clauses.is_empty() {
            return weight;
        }
        for component in components(clauses) {
            let v = self.component_value(component);
            weight = weight * v;
            if weight.is_zero() {
                break;
            }
        }
        weight
    }

    fn pure_existentials(&self, clauses: &[Vec<Lit>]) -> Vec<Lit> {
        // bit 0: seen positive, bit 1: seen negative
        let mut seen: BTreeMap<Var, u8> = BTreeMap::new();
        for lit in clauses.iter().flatten() {
            if matches!(self.kinds[lit.var().index()], Kind::Exists) {
                *seen.entry(lit.var()).or_default() |= 1 << lit.is_negated() as u8;
            }
        }
        seen.into_iter()
            .filter_map(|(v, mask)| match mask {
                1 => Some(v.positive()),
                2 => Some(v.negative()),
                _ => None,
            })
            .collect()
    }

    fn component_value(&mut self, mut clauses: Vec<Vec<Lit>>) -> W {
        clauses.sort_unstable();
        clauses.dedup();
        if let Some(v) = self.cache.get(&clauses) {
            self.stats.cache_hits += 1;
            return v.clone();
        }
        let v = self.branch(&clauses);
        self.cache.insert(clauses, v.clone());
        v
    }

    fn branch(&mut self, clauses: &[Vec<Lit>]) -> W {
        self.stats.decisions += 1;
        let var = self.pick_branch_var(clauses);
        match self.kinds[var.index()].clone() {
            Kind::Random { p, q } => {
                let mut total = W::zero();
                if !p.is_zero() {
                    total = total + p * self.value(assign(clauses, var.positive()));
                }
                if !q.is_zero() {
                    total = total + q * self.value(assign(clauses, var.negative()));
                }
                total
            }
            Kind::Exists | Kind::Free => {
                let on = self.value(assign(clauses, var.positive()));
                let off = self.value(assign(clauses, var.negative()));
                if on > off {
                    on
                } else {
                    off
                }
            }
        }
    }

    /// Most frequent variable of the outermost quantifier block present in
    /// `clauses`; ties go to the earlier prefix position.
    fn pick_branch_var(&self, clauses: &[Vec<Lit>]) -> Var {
        let mut counts: BTreeMap<Var, usize> = BTreeMap::new();
        for lit in clauses.iter().flatten() {
            *counts.entry(lit.var()).or_default() += 1;
        }
        let is_exists = |v: Var| !matches!(self.kinds[v.index()], Kind::Random { .. });
        let outermost = counts
            .keys()
            .copied()
            .min_by_key(|v| self.position[v.index()])
            .expect("branching on a non-empty matrix");
        let block_kind = is_exists(outermost);
        let boundary = counts
            .keys()
            .filter(|&&v| is_exists(v) != block_kind)
            .map(|v| self.position[v.index()])
            .min()
            .unwrap_or(usize::MAX);
        counts
            .into_iter()
            .filter(|&(v, _)| is_exists(v) == block_kind && self.position[v.index()] < boundary)
            .max_by(|a, b| {
                a.1.cmp(&b.1)
                    .then_with(|| self.position[b.0.index()].cmp(&self.position[a.0.index()]))
            })
            .map(|(v, _)| v)
            .expect("outermost variable is always a candidate")
    }
}

/// Sets `lit` TRUE: drops satisfied clauses, deletes `¬lit` elsewhere.
fn assign(clauses: &[Vec<Lit>], lit: Lit) -> Vec<Vec<Lit>> {
    let neg = !lit;
    clauses
        .iter()
        .filter(|c| !c.contains(&lit))
        .map(|c| {
            if c.contains(&neg) {
                c.iter().copied().filter(|&l| l != neg).collect()
            } else {
                c.clone()
            }
        })
        .collect()
}

/// Splits clauses into variable-disjoint groups, ordered by first clause.
fn components(clauses: Vec<Vec<Lit>>) -> Vec<Vec<Vec<Lit>>> {
    let mut slot: HashMap<Var, usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in &clauses {
        let mut root = None;
        for l in c {
            let id = *slot.entry(l.var()).or_insert_with(|| {
                parent.push(parent.len());
                parent.len() - 1
            });
            let r = find(&mut parent, id);
            match root {
                None => root = Some(r),
                Some(r0) if r0 != r => parent[r] = r0,
                _ => {}
            }
        }
    }
    let mut groups: Vec<Vec<Vec<Lit>>> = Vec::new();
    let mut index_of_root: HashMap<usize, usize> = HashMap::new();
    for c in clauses {
        let r = find(&mut parent, slot[&c[0].var()]);
        let idx = *index_of_root.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[idx].push(c);
    }
    groups
}
