//! Stochastic Boolean satisfiability: formulas over existential and
//! randomized quantifiers and an exact solver for them.
//!
//! A formula is a quantifier prefix (one entry per variable, order
//! significant) plus a CNF matrix. The satisfying probability is defined by
//! eliminating the outermost quantifier recursively: `max` over the two
//! cofactors for an existential variable, the `p`-weighted average for a
//! randomized one, `1` for the empty matrix and `0` for a matrix containing
//! the empty clause.

mod dual;
pub mod sdimacs;
mod solver;
mod tseitin;
mod weight;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub use dual::{solve_ur, solve_ur_exact, UrFormula};
pub use solver::{
    evaluate, evaluate_exact, weighted_model_count, ExactSolveResult, SolveResult, SolverStats,
    VarProbabilities,
};
pub use tseitin::{negate_tseitin, Negation};
pub use weight::Weight;

/// A Boolean variable, identified by a positive index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Returns `None` for id 0.
    pub fn new(id: u32) -> Option<Var> {
        (id > 0).then_some(Var(id))
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// Zero-based index, handy for dense per-variable tables.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Var {
        Var(index as u32 + 1)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, false)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn lit(self, value: bool) -> Lit {
        Lit::new(self, !value)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable or its complement. Packed as `2 * id + negated` so that the
/// natural order sorts by variable first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(var.0 << 1 | negated as u32)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// The value the variable must take for this literal to be true.
    pub fn polarity(self) -> bool {
        !self.is_negated()
    }

    /// Parses the DIMACS convention: `3` is `x3`, `-3` is `¬x3`.
    pub fn from_dimacs(code: i64) -> Option<Lit> {
        let id = u32::try_from(code.unsigned_abs()).ok()?;
        Var::new(id).map(|v| Lit::new(v, code < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var().0);
        if self.is_negated() {
            -id
        } else {
            id
        }
    }

    /// Truth value under a total assignment of its variable.
    pub fn eval(self, value: bool) -> bool {
        value == self.polarity()
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Sorts and deduplicates. Returns `None` when the clause contains both
    /// polarities of a variable and is therefore always true.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause(lits))
    }

    pub fn empty() -> Clause {
        Clause(Vec::new())
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause(vec![lit])
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    pub fn max_var(&self) -> Option<Var> {
        self.0.last().map(|l| l.var())
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.0.iter().any(|&l| l.eval(value(l.var())))
    }
}

/// A conjunction of clauses over variables `1..=num_vars`.
///
/// No clauses means TRUE; a formula holding the empty clause is FALSE.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<CnfFormula> {
        for c in &clauses {
            if let Some(v) = c.max_var() {
                if v.id() > num_vars {
                    return Err(Error::structure(format!(
                        "clause mentions variable {v} but the formula has {num_vars} variables"
                    )));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Builds from raw literal lists, dropping tautologies.
    pub fn from_lits<I, C>(num_vars: u32, clauses: I) -> Result<CnfFormula>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = Lit>,
    {
        CnfFormula::new(num_vars, clauses.into_iter().filter_map(Clause::new).collect())
    }

    /// Convenience for tests and examples: DIMACS-coded clauses.
    pub fn from_dimacs(num_vars: u32, clauses: &[&[i64]]) -> Result<CnfFormula> {
        let mut out = Vec::with_capacity(clauses.len());
        for c in clauses {
            let lits = c
                .iter()
                .map(|&code| {
                    Lit::from_dimacs(code)
                        .ok_or_else(|| Error::structure(format!("invalid literal {code}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(clause) = Clause::new(lits) {
                out.push(clause);
            }
        }
        CnfFormula::new(num_vars, out)
    }

    pub fn tautology(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn contradiction(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: vec![Clause::empty()],
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_true(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    pub fn push(&mut self, clause: Clause) -> Result<()> {
        if let Some(v) = clause.max_var() {
            if v.id() > self.num_vars {
                return Err(Error::structure(format!(
                    "clause mentions variable {v} beyond num_vars {}",
                    self.num_vars
                )));
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Raises the variable count, e.g. to make room for auxiliaries.
    pub fn with_num_vars(mut self, num_vars: u32) -> CnfFormula {
        self.num_vars = self.num_vars.max(num_vars);
        self
    }

    /// Conjunction of two formulas; the result spans the larger variable range.
    pub fn and(&self, other: &CnfFormula) -> CnfFormula {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        CnfFormula {
            num_vars: self.num_vars.max(other.num_vars),
            clauses,
        }
    }

    /// Variables that occur in at least one clause.
    pub fn occurring_vars(&self) -> BTreeSet<Var> {
        self.clauses
            .iter()
            .flat_map(|c| c.lits().iter().map(|l| l.var()))
            .collect()
    }

    /// Truth value under a total assignment.
    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.clauses.iter().all(|c| c.eval(&value))
    }

    /// Substitutes a partial assignment: satisfied clauses disappear and
    /// falsified literals are deleted. A clause emptied this way makes the
    /// result FALSE, which is normalized to a single empty clause.
    pub fn substitute(&self, assignment: &Assignment) -> CnfFormula {
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for c in &self.clauses {
            let mut kept = Vec::with_capacity(c.len());
            let mut satisfied = false;
            for &l in c.lits() {
                match assignment.get(l.var()) {
                    Some(v) if l.eval(v) => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            if satisfied {
                continue;
            }
            if kept.is_empty() {
                return CnfFormula::contradiction(self.num_vars);
            }
            clauses.push(Clause(kept));
        }
        CnfFormula {
            num_vars: self.num_vars,
            clauses,
        }
    }
}

/// Quantifier attached to one prefix variable. Universal quantifiers are
/// never stored; see [`solve_ur`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantifier {
    Exists,
    /// Randomized: the variable is TRUE with probability `p`.
    Random(f64),
}

impl Quantifier {
    pub fn is_exists(self) -> bool {
        matches!(self, Quantifier::Exists)
    }

    fn validate(self, var: Var) -> Result<()> {
        match self {
            Quantifier::Random(p) if !(0.0..=1.0).contains(&p) => Err(Error::validation(format!(
                "probability {p} of variable {var} is outside [0, 1]"
            ))),
            _ => Ok(()),
        }
    }
}

/// Partial assignment of variables to truth values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<Var, bool>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.0.insert(var, value);
    }

    pub fn with(mut self, var: Var, value: bool) -> Assignment {
        self.set(var, value);
        self
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.0.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    /// Literals true under the assignment, in variable order.
    pub fn lits(&self) -> Vec<Lit> {
        self.iter().map(|(v, b)| v.lit(b)).collect()
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Var, bool)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Quantifier prefix plus CNF matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SsatFormula {
    prefix: Vec<(Var, Quantifier)>,
    matrix: CnfFormula,
}

impl SsatFormula {
    /// Checks that every prefix variable is in range and appears once, that
    /// every matrix variable is quantified, and that probabilities lie in
    /// `[0, 1]`.
    pub fn new(prefix: Vec<(Var, Quantifier)>, matrix: CnfFormula) -> Result<SsatFormula> {
        let mut seen = vec![false; matrix.num_vars() as usize];
        for &(v, q) in &prefix {
            if v.id() > matrix.num_vars() {
                return Err(Error::structure(format!(
                    "prefix variable {v} exceeds num_vars {}",
                    matrix.num_vars()
                )));
            }
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(Error::structure(format!("variable {v} quantified twice")));
            }
            q.validate(v)?;
        }
        for v in matrix.occurring_vars() {
            if !seen[v.index()] {
                return Err(Error::structure(format!(
                    "variable {v} occurs in the matrix but not in the prefix"
                )));
            }
        }
        Ok(SsatFormula { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Var, Quantifier)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &CnfFormula {
        &self.matrix
    }

    pub fn num_vars(&self) -> u32 {
        self.matrix.num_vars()
    }

    pub fn quantifier(&self, var: Var) -> Option<Quantifier> {
        self.prefix.iter().find(|(v, _)| *v == var).map(|&(_, q)| q)
    }

    /// The maximal run of existential variables at the head of the prefix.
    pub fn leading_exists(&self) -> Vec<Var> {
        self.prefix
            .iter()
            .take_while(|(_, q)| q.is_exists())
            .map(|&(v, _)| v)
            .collect()
    }

    /// True when every quantifier is randomized.
    pub fn is_random_only(&self) -> bool {
        self.prefix.iter().all(|(_, q)| !q.is_exists())
    }

    /// Substitutes `assignment` into the matrix and drops the assigned
    /// variables from the prefix.
    pub fn condition(&self, assignment: &Assignment) -> Result<SsatFormula> {
        for v in assignment.vars() {
            if !self.prefix.iter().any(|(p, _)| *p == v) {
                return Err(Error::structure(format!(
                    "cannot condition on variable {v}: not in the prefix"
                )));
            }
        }
        Ok(SsatFormula {
            prefix: self
                .prefix
                .iter()
                .filter(|(v, _)| assignment.get(*v).is_none())
                .copied()
                .collect(),
            matrix: self.matrix.substitute(assignment),
        })
    }

    /// Same prefix, one more clause in the matrix.
    pub fn with_clause(&self, clause: Clause) -> Result<SsatFormula> {
        let mut matrix = self.matrix.clone();
        matrix.push(clause)?;
        SsatFormula::new(self.prefix.clone(), matrix)
    }
}

/// Free-standing form of [`SsatFormula::condition`].
pub fn condition(formula: &SsatFormula, assignment: &Assignment) -> Result<SsatFormula> {
    formula.condition(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u32) -> Var {
        Var::new(id).unwrap()
    }

    #[test]
    fn clause_drops_duplicates_and_tautologies() {
        let c = Clause::new([v(2).positive(), v(1).negative(), v(2).positive()]).unwrap();
        assert_eq!(c.lits(), &[v(1).negative(), v(2).positive()]);
        assert!(Clause::new([v(1).positive(), v(1).negative()]).is_none());
    }

    #[test]
    fn literal_dimacs_round_trip() {
        for code in [-7, -1, 1, 42] {
            assert_eq!(Lit::from_dimacs(code).unwrap().to_dimacs(), code);
        }
        assert!(Lit::from_dimacs(0).is_none());
        assert_eq!(!Lit::from_dimacs(3).unwrap(), Lit::from_dimacs(-3).unwrap());
    }

    #[test]
    fn cnf_rejects_out_of_range_variable() {
        assert!(CnfFormula::from_dimacs(2, &[&[1, 3]]).is_err());
    }

    #[test]
    fn prefix_must_cover_matrix_once() {
        let m = CnfFormula::from_dimacs(2, &[&[1, 2]]).unwrap();
        let missing = SsatFormula::new(vec![(v(1), Quantifier::Exists)], m.clone());
        assert!(matches!(missing, Err(Error::Structure(_))));
        let dup = SsatFormula::new(
            vec![(v(1), Quantifier::Exists), (v(1), Quantifier::Exists), (v(2), Quantifier::Exists)],
            m.clone(),
        );
        assert!(matches!(dup, Err(Error::Structure(_))));
        let bad_p = SsatFormula::new(
            vec![(v(1), Quantifier::Random(1.5)), (v(2), Quantifier::Exists)],
            m,
        );
        assert!(matches!(bad_p, Err(Error::Validation(_))));
    }

    // F=1, I=2, J=3, A=4
    fn fij_instance() -> SsatFormula {
        let m = CnfFormula::from_dimacs(4, &[&[-1, 2], &[1, 3], &[4]]).unwrap();
        SsatFormula::new(
            vec![
                (v(1), Quantifier::Random(0.41)),
                (v(2), Quantifier::Random(0.93)),
                (v(3), Quantifier::Random(0.09)),
                (v(4), Quantifier::Exists),
            ],
            m,
        )
        .unwrap()
    }

    #[test]
    fn condition_removes_satisfied_unit() {
        let f = fij_instance().condition(&Assignment::new().with(v(4), true)).unwrap();
        let expected = CnfFormula::from_dimacs(4, &[&[-1, 2], &[1, 3]]).unwrap();
        assert_eq!(f.matrix(), &expected);
        assert_eq!(f.prefix().len(), 3);
    }

    #[test]
    fn condition_satisfying_everything_gives_true() {
        let m = CnfFormula::from_dimacs(2, &[&[1, 2]]).unwrap();
        let f = SsatFormula::new(
            vec![(v(1), Quantifier::Random(0.5)), (v(2), Quantifier::Random(0.5))],
            m,
        )
        .unwrap();
        let g = f.condition(&Assignment::new().with(v(1), true)).unwrap();
        assert!(g.matrix().is_true());
    }

    #[test]
    fn condition_producing_empty_clause_gives_false() {
        let m = CnfFormula::from_dimacs(2, &[&[1], &[-1, 2]]).unwrap();
        let f = SsatFormula::new(
            vec![(v(1), Quantifier::Exists), (v(2), Quantifier::Exists)],
            m,
        )
        .unwrap();
        let g = f.condition(&Assignment::new().with(v(1), false)).unwrap();
        assert!(g.matrix().is_false());
    }

    #[test]
    fn condition_rejects_unknown_variable() {
        let f = fij_instance();
        let g = f.condition(&Assignment::new()).unwrap();
        assert_eq!(g, f);
        let m = CnfFormula::from_dimacs(3, &[&[1]]).unwrap();
        let h = SsatFormula::new(vec![(v(1), Quantifier::Exists)], m).unwrap();
        assert!(h.condition(&Assignment::new().with(v(3), true)).is_err());
    }
}
