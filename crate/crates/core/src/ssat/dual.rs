use num::{BigRational, One};

use super::{
    evaluate, evaluate_exact, negate_tseitin, Clause, CnfFormula, ExactSolveResult, Negation,
    Quantifier, SolveResult, SsatFormula, Var,
};
use crate::error::{Error, Result};

/// `∀U ℝX. matrix`: the minimum over assignments of the universal variables
/// `U` of the probability that the matrix holds under the randomized `X`.
///
/// Two optional restrictions refine the question:
/// * `domain`, clauses over `U` only, limits the minimum to assignments
///   satisfying it (e.g. one-hot validity of protected attributes);
/// * `support`, clauses over `X` only, is conjoined to the matrix, so the
///   value is `min_u Pr[matrix ∧ support | u]`.
#[derive(Debug, Clone)]
pub struct UrFormula {
    universal: Vec<Var>,
    random: Vec<(Var, f64)>,
    matrix: CnfFormula,
    negation: Option<Negation>,
    domain: Vec<Clause>,
    support: Vec<Clause>,
}

impl UrFormula {
    pub fn new(universal: Vec<Var>, random: Vec<(Var, f64)>, matrix: CnfFormula) -> UrFormula {
        UrFormula {
            universal,
            random,
            matrix,
            negation: None,
            domain: Vec::new(),
            support: Vec::new(),
        }
    }

    /// Supplies a CNF for `¬matrix` directly (e.g. the negative-class
    /// encoding of a classifier) instead of deriving one with Tseitin.
    pub fn with_negation(mut self, negation: Negation) -> UrFormula {
        self.negation = Some(negation);
        self
    }

    pub fn with_domain(mut self, domain: Vec<Clause>) -> UrFormula {
        self.domain = domain;
        self
    }

    pub fn with_support(mut self, support: Vec<Clause>) -> UrFormula {
        self.support = support;
        self
    }

    pub fn universal(&self) -> &[Var] {
        &self.universal
    }

    pub fn random(&self) -> &[(Var, f64)] {
        &self.random
    }

    pub fn matrix(&self) -> &CnfFormula {
        &self.matrix
    }

    pub fn negation(&self) -> Option<&Negation> {
        self.negation.as_ref()
    }

    pub fn domain(&self) -> &[Clause] {
        &self.domain
    }

    pub fn support(&self) -> &[Clause] {
        &self.support
    }

    /// The dual `∃U ℝX ∃aux. ¬matrix ∧ domain ∧ support`, plus the support
    /// alone as a randomized-only formula when there is one.
    pub fn dual(&self) -> Result<(SsatFormula, Option<SsatFormula>)> {
        self.check_scopes()?;
        let negation = match &self.negation {
            Some(n) => n.clone(),
            None => negate_tseitin(&self.matrix),
        };
        let num_vars = self
            .universal
            .iter()
            .chain(self.random.iter().map(|(v, _)| v))
            .map(|v| v.id())
            .chain([negation.cnf.num_vars(), self.matrix.num_vars()])
            .max()
            .unwrap_or(0);
        let mut prefix: Vec<(Var, Quantifier)> = self
            .universal
            .iter()
            .map(|&v| (v, Quantifier::Exists))
            .collect();
        prefix.extend(self.random.iter().map(|&(v, p)| (v, Quantifier::Random(p))));
        prefix.extend(negation.aux.iter().map(|&v| (v, Quantifier::Exists)));
        let mut clauses = negation.cnf.clauses().to_vec();
        clauses.extend(self.domain.iter().cloned());
        clauses.extend(self.support.iter().cloned());
        let dual = SsatFormula::new(prefix, CnfFormula::new(num_vars, clauses)?)?;

        let support = if self.support.is_empty() {
            None
        } else {
            let prefix = self
                .random
                .iter()
                .map(|&(v, p)| (v, Quantifier::Random(p)))
                .collect();
            Some(SsatFormula::new(
                prefix,
                CnfFormula::new(num_vars, self.support.clone())?,
            )?)
        };
        Ok((dual, support))
    }

    fn check_scopes(&self) -> Result<()> {
        let is_universal = |v: Var| self.universal.contains(&v);
        let is_random = |v: Var| self.random.iter().any(|&(r, _)| r == v);
        // With a supplied negation the matrix itself is never solved and may
        // carry its own auxiliaries; only the negation's scope matters.
        let (scoped, aux): (&CnfFormula, &[Var]) = match &self.negation {
            Some(n) => (&n.cnf, &n.aux),
            None => (&self.matrix, &[]),
        };
        for v in scoped.occurring_vars() {
            if !is_universal(v) && !is_random(v) && !aux.contains(&v) {
                return Err(Error::structure(format!(
                    "matrix variable {v} is neither universal nor randomized"
                )));
            }
        }
        for c in &self.domain {
            if let Some(l) = c.lits().iter().find(|l| !is_universal(l.var())) {
                return Err(Error::structure(format!(
                    "domain clause mentions non-universal variable {}",
                    l.var()
                )));
            }
        }
        for c in &self.support {
            if let Some(l) = c.lits().iter().find(|l| !is_random(l.var())) {
                return Err(Error::structure(format!(
                    "support clause mentions non-randomized variable {}",
                    l.var()
                )));
            }
        }
        if !self.domain.is_empty() {
            let prefix = self.universal.iter().map(|&v| (v, Quantifier::Exists)).collect();
            let num_vars = self.universal.iter().map(|v| v.id()).max().unwrap_or(0);
            let domain = CnfFormula::new(num_vars, self.domain.clone())?;
            if evaluate(&SsatFormula::new(prefix, domain)?)?.probability == 0.0 {
                return Err(Error::validation("domain admits no universal assignment"));
            }
        }
        Ok(())
    }
}

/// Solves a universal-random formula through its existential-random dual:
/// `Pr[∀U ℝX. φ] = Pr[support] − Pr[∃U ℝX. ¬φ ∧ support]`, which is
/// `1 − Pr[dual]` without a support constraint. The dual's witness is the
/// minimizing universal assignment.
pub fn solve_ur(formula: &UrFormula) -> Result<SolveResult> {
    let (dual, support) = formula.dual()?;
    let mut result = evaluate(&dual)?;
    let total = match &support {
        Some(s) => evaluate(s)?.probability,
        None => 1.0,
    };
    result.probability = (total - result.probability).max(0.0);
    result.witness = formula
        .universal
        .iter()
        .map(|&v| (v, result.witness.get(v).unwrap_or(false)))
        .collect();
    Ok(result)
}

/// [`solve_ur`] in exact rational arithmetic.
pub fn solve_ur_exact(formula: &UrFormula) -> Result<ExactSolveResult> {
    let (dual, support) = formula.dual()?;
    let mut result = evaluate_exact(&dual)?;
    let total = match &support {
        Some(s) => evaluate_exact(s)?.probability,
        None => BigRational::one(),
    };
    result.probability = total - result.probability;
    result.witness = formula
        .universal
        .iter()
        .map(|&v| (v, result.witness.get(v).unwrap_or(false)))
        .collect();
    Ok(result)
}
