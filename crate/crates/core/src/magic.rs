//! Pauli strings, the Pauli spectrum of a pure state and stabiliser Rényi
//! entropies.
//!
//! Pauli strings are signless: an `(x_mask, z_mask)` pair with qubit `q`
//! mapped to bit `n - q` of each mask (qubit 1 is the most significant bit,
//! as for amplitude indices). On a qubit the pair `(x, z)` selects
//! `I = (0,0)`, `X = (1,0)`, `Z = (0,1)` and `Y = (1,1)`.
//!
//! The spectrum `xi[P] = <psi|P|psi>^2 / 2^n` over all `4^n` strings is a
//! probability distribution for normalised `psi`. For a fixed `x_mask`, the
//! expectations over all `z_mask` values are a Walsh–Hadamard transform of
//! `conj(psi[b ^ x]) * psi[b]`, which brings a full spectrum down to
//! `O(n 4^n)` instead of the `O(8^n)` direct sum.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x_mask: usize,
    z_mask: usize,
}

impl PauliString {
    pub fn new(n: usize, x_mask: usize, z_mask: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Capability(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let limit = 1usize << n;
        if x_mask >= limit || z_mask >= limit {
            return Err(Error::input(format!(
                "masks ({x_mask:#b}, {z_mask:#b}) do not fit in {n} bits"
            )));
        }
        Ok(PauliString { n, x_mask, z_mask })
    }

    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Parses labels such as `"XIZY"`, qubit 1 first.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        let mut x = 0;
        let mut z = 0;
        for (i, c) in label.chars().enumerate() {
            let bit = 1usize << (n - 1 - i);
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                _ => return Err(Error::input(format!("`{label}` is not a Pauli label"))),
            }
        }
        Self::new(n, x, z)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> usize {
        self.x_mask
    }

    pub fn z_mask(&self) -> usize {
        self.z_mask
    }

    /// Position in [`enumerate_paulis`] order and in [`xi_distribution`].
    pub fn index(&self) -> usize {
        (self.x_mask << self.n) | self.z_mask
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn label(&self) -> String {
        (0..self.n)
            .map(|i| {
                let bit = 1usize << (self.n - 1 - i);
                match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (false, true) => 'Z',
                    (true, true) => 'Y',
                }
            })
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All `4^n` signless Pauli strings, `x_mask` major and `z_mask` minor.
pub fn enumerate_paulis(n: usize) -> impl Iterator<Item = PauliString> {
    let dim = 1usize << n;
    (0..dim).flat_map(move |x_mask| (0..dim).map(move |z_mask| PauliString { n, x_mask, z_mask }))
}

/// `<psi|P|psi>` by direct summation over basis states.
pub fn pauli_expectation(psi: &StateVector, p: &PauliString) -> Result<f64> {
    if psi.n() != p.n {
        return Err(Error::Dimension {
            expected: psi.n(),
            got: p.n,
        });
    }
    let amps = psi.amps();
    // Y = i X Z on each qubit carrying both bits
    let y_phase = match (p.x_mask & p.z_mask).count_ones() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let sum: Complex64 = (0..amps.len())
        .map(|b| {
            let sign = if (b & p.z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            amps[b ^ p.x_mask].conj() * amps[b] * sign
        })
        .sum();
    Ok((y_phase * sum).re)
}

/// In-place unnormalised Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [Complex64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let a = v[i];
                let b = v[i + h];
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Squared expectations `<psi|P|psi>^2` for every `z_mask` at fixed `x_mask`.
fn squared_expectations_row(amps: &[Complex64], x_mask: usize) -> Vec<f64> {
    let mut f: Vec<Complex64> = (0..amps.len())
        .map(|b| amps[b ^ x_mask].conj() * amps[b])
        .collect();
    walsh_hadamard(&mut f);
    f.into_iter().map(|w| w.norm_sqr()).collect()
}

fn rows<T, F>(psi: &StateVector, per_row: F) -> Vec<T>
where
    T: Send,
    F: Fn(Vec<f64>) -> T + Sync + Send,
{
    let amps = psi.amps();
    let scale = 1.0 / amps.len() as f64;
    (0..amps.len())
        .into_par_iter()
        .map(|x| {
            let mut row = squared_expectations_row(amps, x);
            for v in &mut row {
                *v *= scale;
            }
            per_row(row)
        })
        .collect()
}

/// The Pauli spectrum `xi[P] = 2^-n <psi|P|psi>^2`, indexed by
/// [`PauliString::index`].
pub fn xi_distribution(psi: &StateVector) -> Vec<f64> {
    rows(psi, |row| row).into_iter().flatten().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::E => 1.0,
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        })
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" | "E" => Ok(LogBase::E),
            _ => Err(Error::input(format!("log base must be `2` or `e`, got `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SreConfig {
    pub alpha: f64,
    pub log_base: LogBase,
}

impl Default for SreConfig {
    fn default() -> Self {
        SreConfig {
            alpha: 2.0,
            log_base: LogBase::Two,
        }
    }
}

impl SreConfig {
    pub fn new(alpha: f64, log_base: LogBase) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::input(format!("Renyi order {alpha} must be finite and >= 0")));
        }
        Ok(SreConfig { alpha, log_base })
    }
}

// Entries at or below this are treated as exact zeros when counting support
// for alpha = 0.
const SUPPORT_EPS: f64 = 1e-14;

/// Stabiliser Rényi entropy of order `cfg.alpha`. Order 1 uses the Shannon
/// limit with `0 log 0 = 0`.
pub fn sre(psi: &StateVector, cfg: &SreConfig) -> f64 {
    let n = psi.n() as f64;
    let alpha = cfg.alpha;
    let nats = if (alpha - 1.0).abs() < 1e-12 {
        let per_row = rows(psi, |row| {
            row.iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| -x * x.ln())
                .sum::<f64>()
        });
        per_row.iter().sum::<f64>() - n * std::f64::consts::LN_2
    } else {
        let per_row = rows(psi, |row| {
            row.iter()
                .filter(|&&x| if alpha == 0.0 { x > SUPPORT_EPS } else { x > 0.0 })
                .map(|&x| x.powf(alpha))
                .sum::<f64>()
        });
        let power_sum: f64 = per_row.iter().sum();
        power_sum.ln() / (1.0 - alpha) - n * std::f64::consts::LN_2
    };
    nats / cfg.log_base.ln_base()
}

/// Same quantity as [`sre`] evaluated from a precomputed spectrum.
pub fn sre_from_xi(xi: &[f64], n: usize, cfg: &SreConfig) -> f64 {
    let alpha = cfg.alpha;
    let offset = n as f64 * std::f64::consts::LN_2;
    let nats = if (alpha - 1.0).abs() < 1e-12 {
        xi.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -x * x.ln())
            .sum::<f64>()
            - offset
    } else {
        let s: f64 = xi
            .iter()
            .filter(|&&x| if alpha == 0.0 { x > SUPPORT_EPS } else { x > 0.0 })
            .map(|&x| x.powf(alpha))
            .sum();
        s.ln() / (1.0 - alpha) - offset
    };
    nats / cfg.log_base.ln_base()
}
