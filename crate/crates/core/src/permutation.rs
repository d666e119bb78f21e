//! Qubit relabelling operators.
//!
//! A permutation `sigma` acts on basis states as
//! `|b_1 ... b_n> -> |b_sigma(1) ... b_sigma(n)>`: new qubit `i` carries the
//! bit old qubit `sigma(i)` had.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct QubitPermutation {
    // zero-based image of each position
    sigma: Vec<usize>,
}

impl QubitPermutation {
    pub fn identity(n: usize) -> Self {
        QubitPermutation {
            sigma: (0..n).collect(),
        }
    }

    /// From 1-based images `[sigma(1), ..., sigma(n)]`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let zero: Vec<usize> = images
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::input("permutation images are 1-based"))
            })
            .collect::<Result<_>>()?;
        Self::from_zero_based(zero)
    }

    pub fn from_zero_based(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::input(format!(
                    "{:?} is not a bijection on {n} qubits",
                    sigma.iter().map(|s| s + 1).collect::<Vec<_>>()
                )));
            }
        }
        Ok(QubitPermutation { sigma })
    }

    /// Transposition of two 1-based qubits.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || a > n || b > n {
            return Err(Error::input(format!("transposition ({a} {b}) outside [1, {n}]")));
        }
        let mut p = Self::identity(n);
        p.sigma.swap(a - 1, b - 1);
        Ok(p)
    }

    /// Reverses qubit order, the action of a full swap network.
    pub fn reversal(n: usize) -> Self {
        QubitPermutation {
            sigma: (0..n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn zero_based(&self) -> &[usize] {
        &self.sigma
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|s| s + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.sigma.len()];
        for (i, &s) in self.sigma.iter().enumerate() {
            inv[s] = i;
        }
        QubitPermutation { sigma: inv }
    }

    /// The permutation whose operator equals applying `self` first and `next`
    /// second, i.e. `next ∘ self` at the operator level.
    pub fn then(&self, next: &QubitPermutation) -> Result<Self> {
        if next.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: next.len(),
            });
        }
        Ok(QubitPermutation {
            sigma: next.sigma.iter().map(|&t| self.sigma[t]).collect(),
        })
    }

    /// Table mapping each old amplitude index to its new index, qubit 1 being
    /// the most significant bit of an index.
    pub fn index_map(&self) -> Vec<usize> {
        let n = self.sigma.len();
        // old qubit j lands at new position inv[j]
        let inv = self.inverse();
        let dest: Vec<usize> = (0..n)
            .map(|bit| {
                let old_qubit = n - 1 - bit;
                1usize << (n - 1 - inv.sigma[old_qubit])
            })
            .collect();
        let dim = 1usize << n;
        let mut table = vec![0usize; dim];
        for b in 1..dim {
            let low = b.trailing_zeros() as usize;
            table[b] = table[b & (b - 1)] | dest[low];
        }
        table
    }

    /// All permutations of `n` qubits in lexicographic order of their
    /// one-line notation, identity first.
    pub fn all(n: usize) -> impl Iterator<Item = QubitPermutation> {
        (0..n)
            .permutations(n)
            .map(|sigma| QubitPermutation { sigma })
    }
}

impl TryFrom<Vec<usize>> for QubitPermutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        QubitPermutation::from_one_based(&v)
    }
}

impl From<QubitPermutation> for Vec<usize> {
    fn from(p: QubitPermutation) -> Self {
        p.one_based()
    }
}

impl fmt::Display for QubitPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.one_based().iter().join(" "))
    }
}
