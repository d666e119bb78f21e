//! Target spaces, the solution-projector expectation and Fubini–Study
//! geodesic distances, including the minimum over qubit relabellings.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::QubitPermutation;
use crate::sat::{CnfFormula, SolutionSet};
use crate::state::{StateVector, C64};

/// Largest register for the exhaustive relabelling scan (8! = 40320).
pub const MAX_PERMUTATION_QUBITS: usize = 8;

const ORTHONORMAL_TOL: f64 = 1e-9;

/// How a projector expectation `<H_c>` is turned into an angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// `2 arccos(<H_c>)`.
    #[default]
    #[serde(rename = "paper_literal")]
    Literal,
    /// `2 arccos(sqrt(<H_c>))`, the Fubini–Study distance to the subspace.
    FubiniStudy,
}

impl DistanceMode {
    pub fn distance(self, hc: f64) -> f64 {
        match self {
            DistanceMode::Literal => 2.0 * hc.clamp(0.0, 1.0).acos(),
            DistanceMode::FubiniStudy => 2.0 * hc.clamp(0.0, 1.0).sqrt().acos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceMode::Literal => "paper_literal",
            DistanceMode::FubiniStudy => "fubini_study",
        }
    }
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_literal" => Ok(DistanceMode::Literal),
            "fubini_study" => Ok(DistanceMode::FubiniStudy),
            _ => Err(Error::input(format!(
                "distance mode must be `paper_literal` or `fubini_study`, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Basis {
    /// Computational basis states, with a per-index membership mask.
    Computational { members: Vec<usize>, mask: Vec<bool> },
    General(Vec<StateVector>),
}

/// Span of an orthonormal set of states.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSpace {
    n: usize,
    basis: Basis,
}

impl TargetSpace {
    /// Span of explicit states; they must be pairwise orthonormal.
    pub fn from_states(states: Vec<StateVector>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::Construction {
                what: "target space",
                reason: "basis is empty".into(),
            });
        };
        let n = first.n();
        if states.len() > 1usize << n {
            return Err(Error::Construction {
                what: "target space",
                reason: format!("{} states cannot be independent in 2^{n} dimensions", states.len()),
            });
        }
        for (i, a) in states.iter().enumerate() {
            if a.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: a.n(),
                });
            }
            for b in &states[..=i] {
                let ov = a.inner(b)?;
                let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                if (ov - C64::new(expect, 0.0)).norm() > ORTHONORMAL_TOL {
                    return Err(Error::Construction {
                        what: "target space",
                        reason: "basis states are not orthonormal".into(),
                    });
                }
            }
        }
        Ok(TargetSpace {
            n,
            basis: Basis::General(states),
        })
    }

    pub fn single(state: StateVector) -> Self {
        TargetSpace {
            n: state.n(),
            basis: Basis::General(vec![state]),
        }
    }

    /// Span of computational basis states given as `n`-bit indices.
    pub fn computational(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n == 0 || n > crate::state::MAX_QUBITS {
            return Err(Error::Capability(format!("{n} qubits not supported")));
        }
        let dim = 1usize << n;
        let mut mask = vec![false; dim];
        for i in indices {
            if i >= dim {
                return Err(Error::input(format!("basis index {i} >= 2^{n}")));
            }
            mask[i] = true;
        }
        let members: Vec<usize> = (0..dim).filter(|&i| mask[i]).collect();
        if members.is_empty() {
            return Err(Error::Construction {
                what: "target space",
                reason: "basis is empty".into(),
            });
        }
        Ok(TargetSpace {
            n,
            basis: Basis::Computational { members, mask },
        })
    }

    /// Target space spanned by the classical solutions of a formula.
    pub fn from_solutions(solutions: &SolutionSet) -> Result<Self> {
        if solutions.is_empty() {
            return Err(Error::Construction {
                what: "target space",
                reason: "unsatisfiable instance".into(),
            });
        }
        Self::computational(solutions.n(), solutions.iter())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        match &self.basis {
            Basis::Computational { members, .. } => members.len(),
            Basis::General(states) => states.len(),
        }
    }

    /// Membership mask over basis indices when the space is computational.
    pub fn diagonal_mask(&self) -> Option<&[bool]> {
        match &self.basis {
            Basis::Computational { mask, .. } => Some(mask),
            Basis::General(_) => None,
        }
    }

    pub fn basis_states(&self) -> Vec<StateVector> {
        match &self.basis {
            Basis::Computational { members, .. } => members
                .iter()
                .map(|&i| StateVector::basis_index(self.n, i).expect("index in range"))
                .collect(),
            Basis::General(states) => states.clone(),
        }
    }

    fn check_n(&self, psi: &StateVector) -> Result<()> {
        if psi.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: psi.n(),
            });
        }
        Ok(())
    }

    /// `<psi|H_c|psi>` where `H_c` projects onto the space.
    pub fn verifier_expectation(&self, psi: &StateVector) -> Result<f64> {
        self.check_n(psi)?;
        Ok(self.expectation_unchecked(psi.amps()).min(1.0))
    }

    fn expectation_unchecked(&self, amps: &[C64]) -> f64 {
        match &self.basis {
            Basis::Computational { members, .. } => members.iter().map(|&i| amps[i].norm_sqr()).sum(),
            Basis::General(states) => states
                .iter()
                .map(|t| {
                    t.amps()
                        .iter()
                        .zip(amps)
                        .map(|(a, b)| a.conj() * b)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .sum(),
        }
    }

    /// `<psi|sigma^† H_c sigma|psi>` given the relabelling's index map.
    fn expectation_relabelled(&self, psi: &StateVector, probs: &[f64], map: &[usize]) -> f64 {
        match &self.basis {
            Basis::Computational { mask, .. } => probs
                .iter()
                .zip(map)
                .filter(|(_, &m)| mask[m])
                .map(|(p, _)| p)
                .sum(),
            Basis::General(states) => {
                let amps = psi.amps();
                states
                    .iter()
                    .map(|t| {
                        let ta = t.amps();
                        amps.iter()
                            .zip(map)
                            .map(|(a, &m)| ta[m].conj() * a)
                            .sum::<C64>()
                            .norm_sqr()
                    })
                    .sum()
            }
        }
    }
}

/// `2 arccos |<psi|t>|`.
pub fn geodesic_to_state(psi: &StateVector, t: &StateVector) -> Result<f64> {
    let ov = psi.inner(t)?.norm();
    Ok(2.0 * ov.clamp(0.0, 1.0).acos())
}

pub fn geodesic_to_space(psi: &StateVector, target: &TargetSpace, mode: DistanceMode) -> Result<f64> {
    Ok(mode.distance(target.verifier_expectation(psi)?))
}

/// Result of the exhaustive relabelling scan.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationMinimum {
    pub distance: f64,
    pub hc: f64,
    pub sigma: QubitPermutation,
}

/// All relabellings of `n` qubits with their index maps, reusable across
/// many states of the same size.
#[derive(Clone, Debug)]
pub struct PermutationScan {
    n: usize,
    perms: Vec<QubitPermutation>,
    maps: Vec<Vec<usize>>,
}

impl PermutationScan {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_PERMUTATION_QUBITS {
            let fact: u128 = (1..=n as u128).product();
            return Err(Error::Capability(format!(
                "relabelling scan over {n}! = {fact} permutations exceeds the {MAX_PERMUTATION_QUBITS}! = 40320 bound"
            )));
        }
        let perms: Vec<QubitPermutation> = QubitPermutation::all(n).collect();
        let maps = perms.iter().map(|p| p.index_map()).collect();
        Ok(PermutationScan { n, perms, maps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn permutation(&self, idx: usize) -> &QubitPermutation {
        &self.perms[idx]
    }

    /// Maximises `<H_c>` of `sigma psi` over all relabellings. Ties go to the
    /// lexicographically smallest permutation.
    pub fn best(&self, psi: &StateVector, target: &TargetSpace) -> Result<(usize, f64)> {
        target.check_n(psi)?;
        if psi.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: psi.n(),
            });
        }
        let probs = psi.probabilities();
        let values: Vec<f64> = self
            .maps
            .par_iter()
            .map(|map| target.expectation_relabelled(psi, &probs, map))
            .collect();
        let mut best = (0, values[0]);
        for (i, &v) in values.iter().enumerate().skip(1) {
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok((best.0, best.1.min(1.0)))
    }

    pub fn minimum(&self, psi: &StateVector, target: &TargetSpace, mode: DistanceMode) -> Result<PermutationMinimum> {
        let (idx, hc) = self.best(psi, target)?;
        Ok(PermutationMinimum {
            distance: mode.distance(hc),
            hc,
            sigma: self.perms[idx].clone(),
        })
    }
}

/// Distance from `psi` to the relabelling closure of the target space.
pub fn geodesic_perm_min(
    psi: &StateVector,
    target: &TargetSpace,
    mode: DistanceMode,
) -> Result<PermutationMinimum> {
    PermutationScan::new(psi.n())?.minimum(psi, target, mode)
}

/// Sum of Fubini–Study angles between consecutive snapshots.
pub fn path_length(trace: &[StateVector]) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::input("path length of an empty trace"));
    }
    let mut total = 0.0;
    for pair in trace.windows(2) {
        total += geodesic_to_state(&pair[0], &pair[1])?;
    }
    Ok(total)
}

/// Net distance closed towards the target space per unit path length,
/// clamped to `[0, 1]`.
pub fn geodesic_efficiency(trace: &[StateVector], target: &TargetSpace, mode: DistanceMode) -> Result<f64> {
    let travelled = path_length(trace)?;
    if travelled <= 0.0 {
        return Err(Error::Undefined("geodesic efficiency of a path with zero length".into()));
    }
    let first = geodesic_to_space(&trace[0], target, mode)?;
    let last = geodesic_to_space(&trace[trace.len() - 1], target, mode)?;
    Ok(((first - last).max(0.0) / travelled).clamp(0.0, 1.0))
}

/// Diagonal of the solution projector from direct evaluation of the formula.
pub fn solution_projector_diagonal(formula: &CnfFormula) -> Vec<f64> {
    (0..1usize << formula.n())
        .map(|a| if formula.evaluate_index(a) { 1.0 } else { 0.0 })
        .collect()
}

/// Diagonal of `prod_i (1 - |t_i><t_i| ⊗ 1)` over clauses, `t_i` the clause's
/// falsifying pattern.
pub fn clause_product_diagonal(formula: &CnfFormula) -> Vec<f64> {
    let n = formula.n();
    let mut diag = vec![1.0; 1usize << n];
    for clause in formula.clauses() {
        let vars = clause.vars();
        let pattern = clause.unsat_pattern();
        for (a, d) in diag.iter_mut().enumerate() {
            let vals = vars
                .iter()
                .fold(0u8, |acc, &v| (acc << 1) | ((a >> (n - v)) & 1) as u8);
            let factor = if vals == pattern { 0.0 } else { 1.0 };
            *d *= factor;
        }
    }
    diag
}
