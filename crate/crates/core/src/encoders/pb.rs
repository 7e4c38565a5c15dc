use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::ssat::{Clause, CnfFormula, Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtLeast,
    AtMost,
}

/// `Σ c_i ℓ_i ≥ k` or `Σ c_i ℓ_i ≤ k` over integer coefficients.
/// With no terms the constraint is a constant: `0 ≥ k` or `0 ≤ k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PbConstraint {
    pub terms: Vec<(i64, Lit)>,
    pub comparison: Comparison,
    pub bound: i64,
}

impl PbConstraint {
    pub fn at_least(terms: Vec<(i64, Lit)>, bound: i64) -> PbConstraint {
        PbConstraint {
            terms,
            comparison: Comparison::AtLeast,
            bound,
        }
    }

    pub fn at_most(terms: Vec<(i64, Lit)>, bound: i64) -> PbConstraint {
        PbConstraint {
            terms,
            comparison: Comparison::AtMost,
            bound,
        }
    }

    pub fn constant(value: bool) -> PbConstraint {
        PbConstraint::at_least(Vec::new(), if value { 0 } else { 1 })
    }

    /// `Some(value)` when no variable can change the outcome.
    pub fn as_constant(&self) -> Option<bool> {
        match self.normalize() {
            Normalized::Constant(b) => Some(b),
            Normalized::AtLeast { .. } => None,
        }
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .filter(|(_, l)| l.eval(value(l.var())))
            .map(|(c, _)| c)
            .sum();
        match self.comparison {
            Comparison::AtLeast => lhs >= self.bound,
            Comparison::AtMost => lhs <= self.bound,
        }
    }

    pub fn max_var(&self) -> u32 {
        self.terms.iter().map(|(_, l)| l.var().id()).max().unwrap_or(0)
    }

    /// The complement over integers: `≥ k` becomes `≤ k−1` and vice versa.
    pub fn negate(&self) -> PbConstraint {
        match self.comparison {
            Comparison::AtLeast => PbConstraint::at_most(self.terms.clone(), self.bound - 1),
            Comparison::AtMost => PbConstraint::at_least(self.terms.clone(), self.bound + 1),
        }
    }

    /// Rewrites into `Σ a_i ℓ_i ≥ K` with every `a_i > 0`, one term per
    /// variable, coefficients in descending order.
    fn normalize(&self) -> Normalized {
        let sign = match self.comparison {
            Comparison::AtLeast => 1,
            Comparison::AtMost => -1,
        };
        let mut bound = sign * self.bound;
        // c·¬x = c − c·x, so gather everything on positive literals first.
        let mut per_var: BTreeMap<Var, i64> = BTreeMap::new();
        for &(c, l) in &self.terms {
            let c = sign * c;
            if l.is_negated() {
                bound -= c;
                *per_var.entry(l.var()).or_default() -= c;
            } else {
                *per_var.entry(l.var()).or_default() += c;
            }
        }
        let mut terms = Vec::new();
        for (v, c) in per_var {
            match c {
                0 => {}
                c if c > 0 => terms.push((c, v.positive())),
                c => {
                    bound -= c;
                    terms.push((-c, v.negative()));
                }
            }
        }
        let total: i64 = terms.iter().map(|(c, _)| c).sum();
        if bound <= 0 {
            return Normalized::Constant(true);
        }
        if bound > total {
            return Normalized::Constant(false);
        }
        terms.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        Normalized::AtLeast { terms, bound }
    }
}

impl fmt::Display for PbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (c, l)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c:+} {l}")?;
        }
        let op = match self.comparison {
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        };
        write!(f, " {op} {}", self.bound)
    }
}

enum Normalized {
    Constant(bool),
    AtLeast { terms: Vec<(i64, Lit)>, bound: i64 },
}

/// A CNF with the auxiliary variables it introduced. Auxiliaries are
/// functionally determined by the other variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub cnf: CnfFormula,
    pub aux: Vec<Var>,
}

impl Encoding {
    pub fn plain(cnf: CnfFormula) -> Encoding {
        Encoding { cnf, aux: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Inner(usize),
}

struct Bdd<'a> {
    terms: &'a [(i64, Lit)],
    /// suffix[i] = Σ_{j ≥ i} a_j
    suffix: Vec<i64>,
    /// Per level, intervals `[lo, hi]` of bounds that yield the same node.
    memo: Vec<Vec<(i64, i64, Node)>>,
    unique: HashMap<(usize, Node, Node), usize>,
    /// (level, hi child, lo child)
    nodes: Vec<(usize, Node, Node)>,
}

impl Bdd<'_> {
    /// The node deciding `Σ_{j ≥ i} a_j ℓ_j ≥ k`, with the interval of `k`
    /// values it also decides.
    fn build(&mut self, i: usize, k: i64) -> (i64, i64, Node) {
        if k <= 0 {
            return (i64::MIN, 0, Node::True);
        }
        if k > self.suffix[i] {
            return (self.suffix[i] + 1, i64::MAX, Node::False);
        }
        if let Some(&hit) = self.memo[i].iter().find(|(lo, hi, _)| *lo <= k && k <= *hi) {
            return hit;
        }
        let a = self.terms[i].0;
        let (hlo, hhi, hi) = self.build(i + 1, k - a);
        let (llo, lhi, lo) = self.build(i + 1, k);
        let lower = hlo.saturating_add(a).max(llo);
        let upper = hhi.saturating_add(a).min(lhi);
        let node = if hi == lo {
            hi
        } else {
            let next = self.nodes.len();
            let id = *self.unique.entry((i, hi, lo)).or_insert(next);
            if id == next {
                self.nodes.push((i, hi, lo));
            }
            Node::Inner(id)
        };
        self.memo[i].push((lower, upper, node));
        (lower, upper, node)
    }
}

#[derive(Clone, Copy)]
enum Term {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for Term {
    type Output = Term;
    fn not(self) -> Term {
        match self {
            Term::Const(b) => Term::Const(!b),
            Term::Lit(l) => Term::Lit(!l),
        }
    }
}

fn push_clause(out: &mut Vec<Clause>, terms: &[Term]) {
    let mut lits = Vec::with_capacity(terms.len());
    for t in terms {
        match *t {
            Term::Const(true) => return,
            Term::Const(false) => {}
            Term::Lit(l) => lits.push(l),
        }
    }
    out.extend(Clause::new(lits));
}

/// Translates a pseudo-Boolean constraint to CNF through a reduced ordered
/// BDD over the normalized at-least form. Each non-root node `v` testing
/// `ℓ` gets an auxiliary with the full equivalence `v ↔ ite(ℓ, hi, lo)`, so
/// auxiliaries are forced by the original variables; nodes equivalent to a
/// single literal reuse it. Auxiliaries are numbered from `first_fresh`.
///
/// `num_vars` of the result is at least `first_fresh − 1`.
pub fn pb_to_cnf(constraint: &PbConstraint, first_fresh: Var) -> Result<Encoding> {
    if constraint.max_var() >= first_fresh.id() {
        return Err(Error::structure(format!(
            "first fresh variable {first_fresh} collides with constraint variables"
        )));
    }
    let base = first_fresh.id() - 1;
    let (terms, bound) = match constraint.normalize() {
        Normalized::Constant(true) => return Ok(Encoding::plain(CnfFormula::tautology(base))),
        Normalized::Constant(false) => return Ok(Encoding::plain(CnfFormula::contradiction(base))),
        Normalized::AtLeast { terms, bound } => (terms, bound),
    };
    let mut suffix = vec![0; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        suffix[i] = suffix[i + 1] + terms[i].0;
    }
    let mut bdd = Bdd {
        terms: &terms,
        suffix,
        memo: vec![Vec::new(); terms.len() + 1],
        unique: HashMap::new(),
        nodes: Vec::new(),
    };
    let (_, _, root) = bdd.build(0, bound);
    let Node::Inner(root) = root else {
        unreachable!("non-constant constraints have an inner root")
    };

    // Children are created before parents, so one forward pass suffices.
    // The root is nobody's child; its placeholder term is never read.
    let mut term_of: Vec<Term> = Vec::with_capacity(bdd.nodes.len());
    let mut aux = Vec::new();
    let mut clauses = Vec::new();
    let resolve = |n: Node, term_of: &[Term]| match n {
        Node::True => Term::Const(true),
        Node::False => Term::Const(false),
        Node::Inner(j) => term_of[j],
    };
    for (id, &(level, hi, lo)) in bdd.nodes.iter().enumerate() {
        let test = Term::Lit(terms[level].1);
        let (h, l) = (resolve(hi, &term_of), resolve(lo, &term_of));
        if id == root {
            push_clause(&mut clauses, &[!test, h]);
            push_clause(&mut clauses, &[test, l]);
            term_of.push(Term::Const(true));
            continue;
        }
        if hi == Node::True && lo == Node::False {
            term_of.push(test);
            continue;
        }
        let v = Var::new(base + 1 + aux.len() as u32).expect("positive");
        aux.push(v);
        let t = Term::Lit(v.positive());
        push_clause(&mut clauses, &[!test, !h, t]);
        push_clause(&mut clauses, &[!test, h, !t]);
        push_clause(&mut clauses, &[test, !l, t]);
        push_clause(&mut clauses, &[test, l, !t]);
        term_of.push(t);
    }
    let cnf = CnfFormula::new(base + aux.len() as u32, clauses)?;
    Ok(Encoding { cnf, aux })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(id: u32) -> Lit {
        Var::new(id).unwrap().positive()
    }

    fn fresh(id: u32) -> Var {
        Var::new(id).unwrap()
    }

    /// Satisfying assignments of the original variables, found by trying
    /// every auxiliary extension.
    fn projected_models(enc: &Encoding, n: u32) -> Vec<u32> {
        let k = enc.aux.len() as u32;
        (0u32..1 << n)
            .filter(|bits| {
                (0u32..1 << k).any(|aux_bits| {
                    enc.cnf.eval(|v| {
                        if v.id() <= n {
                            bits >> v.index() & 1 == 1
                        } else {
                            let j = enc.aux.iter().position(|&a| a == v).unwrap();
                            aux_bits >> j & 1 == 1
                        }
                    })
                })
            })
            .collect()
    }

    #[test]
    fn clause_constraint_has_no_aux() {
        let c = PbConstraint::at_least(vec![(1, x(1)), (1, x(2))], 1);
        let enc = pb_to_cnf(&c, fresh(3)).unwrap();
        assert!(enc.aux.is_empty());
        assert_eq!(enc.cnf.clauses(), CnfFormula::from_dimacs(2, &[&[1, 2]]).unwrap().clauses());
    }

    #[test]
    fn two_of_three() {
        let c = PbConstraint::at_least(vec![(1, x(1)), (1, x(2)), (1, x(3))], 2);
        let enc = pb_to_cnf(&c, fresh(4)).unwrap();
        let models = projected_models(&enc, 3);
        assert_eq!(models, vec![0b011, 0b101, 0b110, 0b111]);
    }

    #[test]
    fn negative_coefficient() {
        // 4x1 − 2x2 ≥ −1
        let c = PbConstraint::at_least(vec![(4, x(1)), (-2, x(2))], -1);
        let enc = pb_to_cnf(&c, fresh(3)).unwrap();
        assert_eq!(projected_models(&enc, 2), vec![0b00, 0b01, 0b11]);
    }

    #[test]
    fn constants() {
        let t = PbConstraint::at_least(vec![(1, x(1))], 0);
        assert_eq!(t.as_constant(), Some(true));
        assert!(pb_to_cnf(&t, fresh(2)).unwrap().cnf.is_true());
        let f = PbConstraint::at_least(vec![(1, x(1)), (2, x(2))], 4);
        assert_eq!(f.as_constant(), Some(false));
        assert!(pb_to_cnf(&f, fresh(3)).unwrap().cnf.is_false());
        assert_eq!(PbConstraint::constant(true).as_constant(), Some(true));
        assert_eq!(PbConstraint::constant(false).as_constant(), Some(false));
    }

    #[test]
    fn at_most_is_the_complement_of_at_least() {
        let terms = vec![(3, x(1)), (-2, x(2)), (5, !x(3)), (1, x(4))];
        let ge = PbConstraint::at_least(terms, 2);
        let le = ge.negate();
        let a = projected_models(&pb_to_cnf(&ge, fresh(5)).unwrap(), 4);
        let b = projected_models(&pb_to_cnf(&le, fresh(5)).unwrap(), 4);
        assert_eq!(a.len() + b.len(), 16);
        assert!(a.iter().all(|m| !b.contains(m)));
    }

    #[test]
    fn opposite_literals_of_one_variable_merge() {
        // 2x1 + 3¬x1 ≥ 3  ⇔  3 − x1 ≥ 3  ⇔  x1 = 0
        let c = PbConstraint::at_least(vec![(2, x(1)), (3, !x(1))], 3);
        let enc = pb_to_cnf(&c, fresh(2)).unwrap();
        assert_eq!(projected_models(&enc, 1), vec![0]);
    }

    #[test]
    fn fresh_variable_must_not_collide() {
        let c = PbConstraint::at_least(vec![(1, x(1)), (1, x(2))], 2);
        assert!(pb_to_cnf(&c, fresh(2)).is_err());
    }
}
