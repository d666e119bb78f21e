//! 3-CNF formulas: evaluation, brute-force solving, random generation and
//! DIMACS I/O.
//!
//! Assignments are `n`-bit integers with variable 1 as the most significant
//! bit, matching the amplitude ordering of [`crate::state::StateVector`].

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{format_bitstring, parse_bitstring};

pub const MAX_BRUTE_FORCE_VARS: usize = 24;
pub const MAX_RESAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    pub fn from_dimacs(v: i64) -> Option<Self> {
        if v == 0 {
            return None;
        }
        Some(Literal {
            var: v.unsigned_abs() as usize,
            negated: v < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

/// A disjunction of exactly three literals over distinct variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    literals: [Literal; 3],
}

impl Clause {
    pub fn new(literals: [Literal; 3]) -> Result<Self> {
        let [a, b, c] = literals;
        if a.var == 0 || b.var == 0 || c.var == 0 {
            return Err(Error::input("variable indices are 1-based"));
        }
        if a.var == b.var || a.var == c.var || b.var == c.var {
            return Err(Error::input(format!(
                "clause ({}, {}, {}) repeats a variable",
                a.to_dimacs(),
                b.to_dimacs(),
                c.to_dimacs()
            )));
        }
        Ok(Clause { literals })
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.literals
    }

    pub fn vars(&self) -> [usize; 3] {
        self.literals.map(|l| l.var)
    }

    /// The unique falsifying assignment of the clause's variables, first
    /// literal as the most significant bit.
    pub fn unsat_pattern(&self) -> u8 {
        self.literals
            .iter()
            .fold(0u8, |acc, l| (acc << 1) | l.negated as u8)
    }

    pub fn is_satisfied(&self, n: usize, assignment: usize) -> bool {
        self.literals.iter().any(|l| {
            let value = assignment >> (n - l.var) & 1 == 1;
            value != l.negated
        })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .literals
            .iter()
            .map(|l| format!("{}x{}", if l.negated { "¬" } else { "" }, l.var))
            .collect();
        write!(f, "({})", parts.join(" ∨ "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    n: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("formula needs at least one variable"));
        }
        if n >= usize::BITS as usize {
            return Err(Error::Capability(format!("{n} variables do not fit an assignment word")));
        }
        for c in &clauses {
            if let Some(v) = c.vars().iter().find(|&&v| v > n) {
                return Err(Error::input(format!("variable {v} outside [1, {n}]")));
            }
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn evaluate_index(&self, assignment: usize) -> bool {
        self.clauses
            .iter()
            .all(|c| c.is_satisfied(self.n, assignment))
    }

    /// Evaluates on a `0`/`1` string of length `n`.
    pub fn evaluate(&self, bits: &str) -> Result<bool> {
        if bits.chars().count() != self.n {
            return Err(Error::input(format!(
                "assignment `{bits}` has length {}, expected {}",
                bits.chars().count(),
                self.n
            )));
        }
        Ok(self.evaluate_index(parse_bitstring(bits)?))
    }

    /// Exhaustive enumeration of all satisfying assignments.
    pub fn solve_brute_force(&self) -> Result<SolutionSet> {
        if self.n > MAX_BRUTE_FORCE_VARS {
            return Err(Error::Capability(format!(
                "brute force limited to {MAX_BRUTE_FORCE_VARS} variables, formula has {}",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        const CHUNK: usize = 1 << 12;
        let members: Vec<usize> = (0..dim.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|k| {
                let lo = k * CHUNK;
                let hi = (lo + CHUNK).min(dim);
                (lo..hi).filter(|&a| self.evaluate_index(a))
            })
            .collect();
        Ok(SolutionSet {
            n: self.n,
            members: members.into_iter().collect(),
        })
    }

    pub fn is_satisfiable(&self) -> Result<bool> {
        if self.n > MAX_BRUTE_FORCE_VARS {
            return Err(Error::Capability(format!(
                "brute force limited to {MAX_BRUTE_FORCE_VARS} variables"
            )));
        }
        Ok((0..1usize << self.n).any(|a| self.evaluate_index(a)))
    }

    /// Uniform random 3-CNF with `round(ratio * n)` clauses, redrawn as a
    /// whole until satisfiable.
    pub fn random_3cnf(n: usize, ratio: f64, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::input(format!("3-CNF needs n >= 3, got {n}")));
        }
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::input(format!("clause ratio {ratio} must be positive")));
        }
        let m = (ratio * n as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_RESAMPLES {
            let f = Self::draw(n, m, &mut rng)?;
            if f.is_satisfiable()? {
                return Ok(f);
            }
        }
        Err(Error::Generation(format!(
            "{MAX_RESAMPLES} consecutive unsatisfiable draws (n = {n}, m = {m})"
        )))
    }

    fn draw<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        let clauses = (0..m)
            .map(|_| {
                let vars = rand::seq::index::sample(rng, n, 3);
                let lits = [0, 1, 2].map(|k| Literal {
                    var: vars.index(k) + 1,
                    negated: rng.random_bool(0.5),
                });
                Clause::new(lits)
            })
            .collect::<Result<Vec<_>>>()?;
        CnfFormula::new(n, clauses)
    }

    /// Parses DIMACS CNF. Clauses may span lines; every clause must have
    /// exactly three literals over distinct variables.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<(Literal, usize)> = Vec::new();
        let mut last_line = 0;

        'lines: for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                // SATLIB end marker
                break;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(Error::parse(lineno, "duplicate problem line"));
                }
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                    return Err(Error::parse(lineno, "expected `p cnf <vars> <clauses>`"));
                }
                let n: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad variable count `{}`", parts[2])))?;
                let m: usize = parts[3]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad clause count `{}`", parts[3])))?;
                if n == 0 {
                    return Err(Error::parse(lineno, "variable count must be positive"));
                }
                if n >= usize::BITS as usize {
                    return Err(Error::parse(lineno, format!("{n} variables not supported")));
                }
                header = Some((n, m));
                continue;
            }
            let Some((n, _)) = header else {
                return Err(Error::parse(lineno, "clause before problem line"));
            };
            for tok in line.split_whitespace() {
                if tok == "%" {
                    break 'lines;
                }
                let v: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad literal `{tok}`")))?;
                match Literal::from_dimacs(v) {
                    None => {
                        if pending.len() != 3 {
                            return Err(Error::parse(
                                lineno,
                                format!("clause has {} literals, only 3-CNF is supported", pending.len()),
                            ));
                        }
                        let lits = [pending[0].0, pending[1].0, pending[2].0];
                        let clause = Clause::new(lits).map_err(|e| Error::parse(lineno, e.to_string()))?;
                        clauses.push(clause);
                        pending.clear();
                    }
                    Some(lit) => {
                        if lit.var > n {
                            return Err(Error::parse(
                                lineno,
                                format!("variable {} outside [1, {n}]", lit.var),
                            ));
                        }
                        if pending.len() == 3 {
                            return Err(Error::parse(lineno, "clause has more than 3 literals"));
                        }
                        pending.push((lit, lineno));
                    }
                }
            }
        }

        let Some((n, m)) = header else {
            return Err(Error::parse(last_line.max(1), "missing problem line"));
        };
        if let Some(&(_, line)) = pending.first() {
            return Err(Error::parse(line, "unterminated clause (missing 0)"));
        }
        if clauses.len() != m {
            return Err(Error::parse(
                last_line.max(1),
                format!("header declares {m} clauses, found {}", clauses.len()),
            ));
        }
        CnfFormula::new(n, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for c in &self.clauses {
            let [a, b, d] = c.literals;
            let _ = writeln!(out, "{} {} {} 0", a.to_dimacs(), b.to_dimacs(), d.to_dimacs());
        }
        out
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" ∧ "))
    }
}

/// Satisfying assignments of a formula, as `n`-bit integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    n: usize,
    members: BTreeSet<usize>,
}

impl SolutionSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&m) = members.iter().next_back() {
            if n >= usize::BITS as usize || m >> n != 0 {
                return Err(Error::input(format!("assignment {m} does not fit {n} bits")));
            }
        }
        Ok(SolutionSet { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, assignment: usize) -> bool {
        self.members.contains(&assignment)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn bitstrings(&self) -> Vec<String> {
        self.iter().map(|m| format_bitstring(self.n, m)).collect()
    }
}

/// Conventional instance file name `<tag>_n<N>_r<ratio>_s<seed>.cnf`.
pub fn instance_file_name(tag: &str, n: usize, ratio: f64, seed: u64) -> String {
    format!("{tag}_n{n}_r{ratio}_s{seed}.cnf")
}
