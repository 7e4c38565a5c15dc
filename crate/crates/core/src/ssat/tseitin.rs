use super::{Clause, CnfFormula, Var};

/// A CNF equisatisfiable with the complement of some matrix, together with
/// the auxiliary variables it introduced.
#[derive(Debug, Clone, PartialEq)]
pub struct Negation {
    pub cnf: CnfFormula,
    /// Fresh variables numbered after the original ones. Their values are
    /// determined by the original variables, so quantify them existentially
    /// and innermost.
    pub aux: Vec<Var>,
}

/// Tseitin-style negation.
///
/// Clause `C_j = (l_1 ∨ … ∨ l_k)` gets an auxiliary `t_j ≡ ¬l_1 ∧ … ∧ ¬l_k`
/// encoded as `(¬t_j ∨ ¬l_i)` for each `i` and `(t_j ∨ l_1 ∨ … ∨ l_k)`.
/// The final clause `(t_1 ∨ … ∨ t_m)` states that some clause is falsified.
/// Only sound for matrices whose variables are all quantified outside the
/// auxiliaries: negating a CNF that itself carries existential auxiliaries
/// does not negate its projection.
pub fn negate_tseitin(matrix: &CnfFormula) -> Negation {
    let base = matrix.num_vars();
    let m = matrix.clauses().len() as u32;
    let aux: Vec<Var> = (1..=m).map(|j| Var::new(base + j).expect("positive")).collect();
    let mut clauses = Vec::with_capacity(matrix.clauses().iter().map(|c| c.len() + 1).sum::<usize>() + 1);
    for (clause, &t) in matrix.clauses().iter().zip(&aux) {
        for &l in clause.lits() {
            clauses.extend(Clause::new([t.negative(), !l]));
        }
        clauses.extend(Clause::new(
            std::iter::once(t.positive()).chain(clause.lits().iter().copied()),
        ));
    }
    // With no clauses this is the empty clause: ¬TRUE = FALSE.
    clauses.extend(Clause::new(aux.iter().map(|t| t.positive())));
    let cnf = CnfFormula::new(base + m, clauses).expect("aux ids are in range");
    Negation { cnf, aux }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssat::Assignment;

    fn all_assignments(n: u32) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    /// Extends an assignment of the original variables with the forced
    /// auxiliary values.
    fn extend(matrix: &CnfFormula, neg: &Negation, values: &[bool]) -> Vec<bool> {
        let mut full = values.to_vec();
        for c in matrix.clauses() {
            full.push(!c.eval(|v| values[v.index()]));
        }
        assert_eq!(full.len(), neg.cnf.num_vars() as usize);
        full
    }

    #[test]
    fn two_units() {
        let m = CnfFormula::from_dimacs(2, &[&[1], &[2]]).unwrap();
        let neg = negate_tseitin(&m);
        assert_eq!(neg.aux.len(), 2);
        for values in all_assignments(2) {
            let full = extend(&m, &neg, &values);
            assert_eq!(neg.cnf.eval(|v| full[v.index()]), !(values[0] && values[1]));
        }
    }

    #[test]
    fn true_negates_to_false() {
        let neg = negate_tseitin(&CnfFormula::tautology(3));
        assert!(neg.cnf.is_false());
        assert!(neg.aux.is_empty());
    }

    #[test]
    fn auxiliaries_are_forced() {
        let m = CnfFormula::from_dimacs(3, &[&[-1, 2, 3], &[1, 3], &[-2]]).unwrap();
        let neg = negate_tseitin(&m);
        for values in all_assignments(3) {
            let partial: Assignment = values
                .iter()
                .enumerate()
                .map(|(i, &b)| (Var::from_index(i), b))
                .collect();
            let rest = neg.cnf.substitute(&partial);
            let satisfying_extensions = all_assignments(neg.aux.len() as u32)
                .filter(|aux_vals| {
                    rest.eval(|v| {
                        let k = neg.aux.iter().position(|&a| a == v).unwrap();
                        aux_vals[k]
                    })
                })
                .count();
            let expected = usize::from(!m.eval(|v| values[v.index()]));
            assert_eq!(satisfying_extensions, expected, "at {values:?}");
        }
    }
}
