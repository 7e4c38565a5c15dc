//! SDIMACS text format: DIMACS CNF extended with quantifier lines.
//!
//! ```text
//! c Example: R^0.41 F, R^0.93 I, R^0.09 J, ∃A
//! p cnf 4 3
//! r 0.41 1 0
//! r 0.93 2 0
//! r 0.09 3 0
//! e 4 0
//! -1 2 0
//! 1 3 0
//! 4 0
//! ```
//!
//! `e v1 v2 … 0` quantifies its variables existentially; `r p v1 … 0`
//! randomizes them with probability `p`. Quantifier lines precede clauses
//! and their order is the prefix order.

use std::fmt::Write as _;

use super::{Clause, CnfFormula, Lit, Quantifier, SsatFormula, Var};
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<SsatFormula> {
    let mut header: Option<(u32, usize)> = None;
    let mut prefix: Vec<(Var, Quantifier)> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().expect("non-empty line");
        let Some((num_vars, _)) = header else {
            if first != "p" || tokens.next() != Some("cnf") {
                return Err(Error::parse(line_no, "expected header `p cnf <vars> <clauses>`"));
            }
            let vars = parse_num::<u32>(tokens.next(), line_no, "variable count")?;
            let count = parse_num::<usize>(tokens.next(), line_no, "clause count")?;
            if tokens.next().is_some() {
                return Err(Error::parse(line_no, "trailing tokens after header"));
            }
            header = Some((vars, count));
            continue;
        };
        match first {
            "p" => return Err(Error::parse(line_no, "duplicate header")),
            "e" | "r" => {
                if !clauses.is_empty() || !pending.is_empty() {
                    return Err(Error::parse(line_no, "quantifier line after clauses"));
                }
                let q = if first == "e" {
                    Quantifier::Exists
                } else {
                    let p = parse_num::<f64>(tokens.next(), line_no, "probability")?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::parse(line_no, format!("probability {p} outside [0, 1]")));
                    }
                    Quantifier::Random(p)
                };
                let mut terminated = false;
                for tok in tokens.by_ref() {
                    let id = parse_num::<i64>(Some(tok), line_no, "variable")?;
                    if id == 0 {
                        terminated = true;
                        break;
                    }
                    let var = u32::try_from(id)
                        .ok()
                        .and_then(Var::new)
                        .filter(|v| v.id() <= num_vars)
                        .ok_or_else(|| Error::parse(line_no, format!("variable {id} out of range")))?;
                    if prefix.iter().any(|(v, _)| *v == var) {
                        return Err(Error::parse(line_no, format!("variable {id} quantified twice")));
                    }
                    prefix.push((var, q));
                }
                if !terminated || tokens.next().is_some() {
                    return Err(Error::parse(line_no, "quantifier line must end with a single 0"));
                }
            }
            _ => {
                for tok in std::iter::once(first).chain(tokens) {
                    let code = parse_num::<i64>(Some(tok), line_no, "literal")?;
                    if code == 0 {
                        clauses.extend(Clause::new(pending.drain(..)));
                        continue;
                    }
                    let lit = Lit::from_dimacs(code)
                        .filter(|l| l.var().id() <= num_vars)
                        .ok_or_else(|| Error::parse(line_no, format!("literal {code} out of range")))?;
                    pending.push(lit);
                }
            }
        }
    }

    let (num_vars, count) = header.ok_or_else(|| Error::parse(last_line.max(1), "missing header"))?;
    if !pending.is_empty() {
        return Err(Error::parse(last_line, "last clause is not terminated by 0"));
    }
    // Tautologies are dropped by Clause::new, so compare against what was read.
    let read = text_clause_count(text);
    if read != count {
        return Err(Error::parse(
            last_line,
            format!("header declares {count} clauses but {read} were found"),
        ));
    }
    let matrix = CnfFormula::new(num_vars, clauses)?;
    SsatFormula::new(prefix, matrix).map_err(|e| Error::parse(last_line, e.to_string()))
}

fn text_clause_count(text: &str) -> usize {
    text.lines()
        .map(str::trim)
        .filter(|l| {
            !l.is_empty()
                && !l.starts_with(['c', '%', 'p', 'e', 'r'])
        })
        .flat_map(str::split_whitespace)
        .filter(|t| *t == "0")
        .count()
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

/// Renders `formula`; consecutive existential variables share one `e` line.
pub fn write(formula: &SsatFormula) -> String {
    let mut out = String::new();
    let matrix = formula.matrix();
    let _ = writeln!(out, "p cnf {} {}", matrix.num_vars(), matrix.clauses().len());
    let mut exists_run: Vec<Var> = Vec::new();
    let flush = |out: &mut String, run: &mut Vec<Var>| {
        if !run.is_empty() {
            out.push('e');
            for v in run.drain(..) {
                let _ = write!(out, " {v}");
            }
            out.push_str(" 0\n");
        }
    };
    for &(v, q) in formula.prefix() {
        match q {
            Quantifier::Exists => exists_run.push(v),
            Quantifier::Random(p) => {
                flush(&mut out, &mut exists_run);
                let _ = writeln!(out, "r {p} {v} 0");
            }
        }
    }
    flush(&mut out, &mut exists_run);
    write_clauses(&mut out, matrix);
    out
}

/// Plain DIMACS rendering of a CNF.
pub fn write_cnf(matrix: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", matrix.num_vars(), matrix.clauses().len());
    write_clauses(&mut out, matrix);
    out
}

fn write_clauses(out: &mut String, matrix: &CnfFormula) {
    for c in matrix.clauses() {
        for l in c.lits() {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
}
