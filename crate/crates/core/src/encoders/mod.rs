//! Classifier encodings: CNFs over feature variables that hold exactly
//! where a model predicts a given class.

pub mod linear;
pub mod model;
pub mod pb;
pub mod tree;

pub use linear::{encode_linear, quantize_linear, LinearModel, Polarity, DEFAULT_SCALE};
pub use model::{ClassifierModel, EncodeOptions, EncodedModel, ModelSpec, NodeSpec};
pub use pb::{pb_to_cnf, Comparison, Encoding, PbConstraint};
pub use tree::{encode_tree_negative, encode_tree_positive, DecisionTree, TreeNode};

use crate::ssat::{Clause, CnfFormula, Var};

/// The clauses `(¬stronger ∨ weaker)` for each adjacent pair of nested
/// threshold variables, given strongest first (e.g. `x≥0.69`, `x≥0.29`).
pub fn bin_implications(thresholds_descending: &[Var]) -> Vec<Clause> {
    thresholds_descending
        .windows(2)
        .map(|w| Clause::new([w[0].negative(), w[1].positive()]).expect("distinct variables"))
        .collect()
}

/// `cnf` with [`bin_implications`] appended.
pub fn add_bin_implications(cnf: &CnfFormula, thresholds_descending: &[Var]) -> CnfFormula {
    let extra = CnfFormula::new(
        thresholds_descending.iter().map(|v| v.id()).max().unwrap_or(0),
        bin_implications(thresholds_descending),
    )
    .expect("ids in range");
    cnf.and(&extra)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u32) -> Var {
        Var::new(id).unwrap()
    }

    #[test]
    fn j_implies_i() {
        let cnf = CnfFormula::from_dimacs(3, &[&[-1, 2], &[1, 3]]).unwrap();
        let out = add_bin_implications(&cnf, &[v(3), v(2)]);
        assert_eq!(out.clauses().len(), 3);
        assert!(out.clauses().contains(&Clause::new([v(3).negative(), v(2).positive()]).unwrap()));
    }

    #[test]
    fn single_bin_is_unchanged() {
        let cnf = CnfFormula::from_dimacs(2, &[&[1, 2]]).unwrap();
        assert_eq!(add_bin_implications(&cnf, &[v(1)]), cnf);
    }

    #[test]
    fn chain_of_three() {
        let clauses = bin_implications(&[v(3), v(2), v(1)]);
        assert_eq!(clauses.len(), 2);
        // v3 forces v1 through v2
        let cnf = CnfFormula::new(3, clauses).unwrap();
        let models: Vec<u32> = (0u32..8).filter(|b| cnf.eval(|x| b >> x.index() & 1 == 1)).collect();
        assert!(models.iter().all(|b| b & 0b100 == 0 || b & 0b001 != 0));
    }
}
