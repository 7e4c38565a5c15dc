use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ssat::{Clause, CnfFormula, Lit, Var};

/// A binary decision tree over Boolean features. A split tests a literal and
/// follows `yes` when it is true.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf(bool),
    Split {
        test: Lit,
        yes: Box<TreeNode>,
        no: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf(label: bool) -> TreeNode {
        TreeNode::Leaf(label)
    }

    pub fn split(test: Lit, yes: TreeNode, no: TreeNode) -> TreeNode {
        TreeNode::Split {
            test,
            yes: Box::new(yes),
            no: Box::new(no),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: TreeNode,
}

impl DecisionTree {
    /// Rejects trees that test a variable twice on one path.
    pub fn new(root: TreeNode) -> Result<DecisionTree> {
        fn check(node: &TreeNode, path: &mut Vec<Var>) -> Result<()> {
            if let TreeNode::Split { test, yes, no } = node {
                if path.contains(&test.var()) {
                    return Err(Error::structure(format!(
                        "variable {} tested twice on one path",
                        test.var()
                    )));
                }
                path.push(test.var());
                check(yes, path)?;
                check(no, path)?;
                path.pop();
            }
            Ok(())
        }
        check(&root, &mut Vec::new())?;
        Ok(DecisionTree { root })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn predict(&self, value: impl Fn(Var) -> bool) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(label) => return *label,
                TreeNode::Split { test, yes, no } => {
                    node = if test.eval(value(test.var())) { yes } else { no };
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            if let TreeNode::Split { test, yes, no } = node {
                out.insert(test.var());
                stack.push(yes);
                stack.push(no);
            }
        }
        out
    }

    pub fn max_var(&self) -> u32 {
        self.vars().last().map_or(0, |v| v.id())
    }

    /// Root-to-leaf paths ending in `label`, each as the literals that hold
    /// along it.
    pub fn paths_to(&self, label: bool) -> Vec<Vec<Lit>> {
        fn walk(node: &TreeNode, label: bool, path: &mut Vec<Lit>, out: &mut Vec<Vec<Lit>>) {
            match node {
                TreeNode::Leaf(l) => {
                    if *l == label {
                        out.push(path.clone());
                    }
                }
                TreeNode::Split { test, yes, no } => {
                    path.push(*test);
                    walk(yes, label, path, out);
                    path.pop();
                    path.push(!*test);
                    walk(no, label, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, label, &mut Vec::new(), &mut out);
        out
    }
}

fn block_paths(tree: &DecisionTree, blocked: bool, num_vars: u32) -> CnfFormula {
    let clauses = tree
        .paths_to(blocked)
        .into_iter()
        .map(|path| Clause::new(path.into_iter().map(|l| !l)).expect("paths never repeat a variable"))
        .collect();
    CnfFormula::new(num_vars.max(tree.max_var()), clauses).expect("tree variables are in range")
}

/// One clause per path to a 0-leaf, forbidding it. Satisfied exactly where
/// the tree predicts 1.
pub fn encode_tree_positive(tree: &DecisionTree, num_vars: u32) -> CnfFormula {
    block_paths(tree, false, num_vars)
}

/// One clause per path to a 1-leaf. Satisfied exactly where the tree
/// predicts 0.
pub fn encode_tree_negative(tree: &DecisionTree, num_vars: u32) -> CnfFormula {
    block_paths(tree, true, num_vars)
}
