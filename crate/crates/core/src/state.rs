//! Dense state vectors.
//!
//! Amplitude index `b` is read as the bitstring `b_1 ... b_n` with qubit 1 the
//! most significant bit, so `|10>` on two qubits is index 2.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::permutation::QubitPermutation;

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 12;

/// Bit mask of a 1-based qubit in an `n`-qubit amplitude index.
#[inline]
pub(crate) fn qubit_mask(n: usize, q: usize) -> usize {
    1usize << (n - q)
}

/// Parses a `0`/`1` string into an index, first character most significant.
pub fn parse_bitstring(bits: &str) -> Result<usize> {
    if bits.len() > usize::BITS as usize - 1 {
        return Err(Error::input(format!("bitstring `{bits}` too long")));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::input(format!("`{bits}` is not a bitstring"))),
    })
}

pub fn format_bitstring(n: usize, index: usize) -> String {
    (1..=n)
        .map(|q| if index & qubit_mask(n, q) != 0 { '1' } else { '0' })
        .collect()
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capability(format!(
            "qubit count {n} outside supported range [1, {MAX_QUBITS}]"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis_index(n, 0)
    }

    /// Computational basis state `|b>` from a bitstring of length `n`.
    pub fn basis(n: usize, bits: &str) -> Result<Self> {
        if bits.chars().count() != n {
            return Err(Error::input(format!(
                "bitstring `{bits}` has length {}, expected {n}",
                bits.chars().count()
            )));
        }
        Self::basis_index(n, parse_bitstring(bits)?)
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::input(format!("basis index {index} >= 2^{n}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes after normalising them. The length must be a power
    /// of two and the vector must not vanish.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::input(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubit_count(n)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::input("amplitudes must be finite"));
        }
        let mut s = StateVector { n, amps };
        let norm = s.norm_sqr().sqrt();
        if norm < 1e-300 {
            return Err(Error::input("zero vector is not a state"));
        }
        s.scale(1.0 / norm);
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn scale(&mut self, k: f64) {
        for a in &mut self.amps {
            *a *= k;
        }
    }

    pub(crate) fn renormalise(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.scale(1.0 / norm);
        }
    }

    fn check_same_n(&self, other: &StateVector) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_n(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|self> ⊗ |other>`, `self` occupying the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n + other.n;
        check_qubit_count(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { n, amps })
    }

    /// Applies `gate` and renormalises.
    pub fn apply_gate(&self, gate: &Gate) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_gates<'a>(&self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<StateVector> {
        let mut out = self.clone();
        for g in gates {
            out.apply_gate_in_place(g)?;
        }
        Ok(out)
    }

    pub(crate) fn apply_gate_in_place(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.apply_unnormalised(gate);
        self.renormalise();
        Ok(())
    }

    /// Gate action without the trailing renormalisation. Assumes `gate` is
    /// valid for this register.
    pub(crate) fn apply_unnormalised(&mut self, gate: &Gate) {
        let n = self.n;
        let m = |q: usize| qubit_mask(n, q);
        let i = C64::i();
        match *gate {
            Gate::H(q) => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_1q(m(q), [[h, h], [h, -h]]);
            }
            Gate::X(q) => {
                let mask = m(q);
                for b in 0..self.amps.len() {
                    if b & mask == 0 {
                        self.amps.swap(b, b | mask);
                    }
                }
            }
            Gate::Y(q) => {
                let z = C64::new(0.0, 0.0);
                self.apply_1q(m(q), [[z, -i], [i, z]]);
            }
            Gate::Z(q) => self.phase_where(m(q), C64::new(-1.0, 0.0)),
            Gate::S(q) => self.phase_where(m(q), i),
            Gate::T(q) => self.phase_where(m(q), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Gate::Rx(q, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let c = C64::new(c, 0.0);
                let ms = C64::new(0.0, -s);
                self.apply_1q(m(q), [[c, ms], [ms, c]]);
            }
            Gate::Ry(q, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                self.apply_1q(
                    m(q),
                    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]],
                );
            }
            Gate::Rz(q, t) => {
                let mask = m(q);
                let lo = C64::from_polar(1.0, -t / 2.0);
                let hi = C64::from_polar(1.0, t / 2.0);
                for (b, a) in self.amps.iter_mut().enumerate() {
                    *a *= if b & mask == 0 { lo } else { hi };
                }
            }
            Gate::Cnot { control, target } => {
                let (cm, tm) = (m(control), m(target));
                for b in 0..self.amps.len() {
                    if b & cm != 0 && b & tm == 0 {
                        self.amps.swap(b, b | tm);
                    }
                }
            }
            Gate::Cz(a, b) => self.phase_where(m(a) | m(b), C64::new(-1.0, 0.0)),
            Gate::Cphase {
                control,
                target,
                angle,
            } => self.phase_where(m(control) | m(target), C64::from_polar(1.0, angle)),
            Gate::Swap(a, b) => {
                let (am, bm) = (m(a), m(b));
                for idx in 0..self.amps.len() {
                    if idx & am != 0 && idx & bm == 0 {
                        self.amps.swap(idx, idx ^ am ^ bm);
                    }
                }
            }
            Gate::ClausePhase {
                qubits,
                pattern,
                angle,
            } => {
                let mask = m(qubits[0]) | m(qubits[1]) | m(qubits[2]);
                let mut want = 0;
                for (k, &q) in qubits.iter().enumerate() {
                    if pattern & (0b100 >> k) != 0 {
                        want |= m(q);
                    }
                }
                let phase = C64::from_polar(1.0, -angle);
                for (b, a) in self.amps.iter_mut().enumerate() {
                    if b & mask == want {
                        *a *= phase;
                    }
                }
            }
        }
    }

    fn apply_1q(&mut self, mask: usize, u: [[C64; 2]; 2]) {
        for b in 0..self.amps.len() {
            if b & mask == 0 {
                let a0 = self.amps[b];
                let a1 = self.amps[b | mask];
                self.amps[b] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[b | mask] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Multiplies by `phase` every amplitude whose index has all bits of `mask` set.
    fn phase_where(&mut self, mask: usize, phase: C64) {
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b & mask == mask {
                *a *= phase;
            }
        }
    }

    /// Relabels qubits by `sigma` (see [`QubitPermutation`]).
    pub fn apply_permutation(&self, sigma: &QubitPermutation) -> Result<StateVector> {
        if sigma.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: sigma.len(),
            });
        }
        let map = sigma.index_map();
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            amps[map[b]] = *a;
        }
        Ok(StateVector { n: self.n, amps })
    }

    /// Reduced density matrix of qubit `q` (1-based), row/column 0 = `|0>`.
    pub fn reduced_density_1q(&self, q: usize) -> Result<[[C64; 2]; 2]> {
        if q == 0 || q > self.n {
            return Err(Error::input(format!("qubit {q} outside [1, {}]", self.n)));
        }
        let mask = qubit_mask(self.n, q);
        let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
        for b in 0..self.amps.len() {
            if b & mask == 0 {
                let a0 = self.amps[b];
                let a1 = self.amps[b | mask];
                rho[0][0] += a0.norm_sqr();
                rho[1][1] += a1.norm_sqr();
                rho[0][1] += a0 * a1.conj();
            }
        }
        rho[1][0] = rho[0][1].conj();
        Ok(rho)
    }

    pub fn qubit_colour(&self, q: usize) -> Result<QubitColour> {
        let rho = self.reduced_density_1q(q)?;
        Ok(QubitColour::from_density(&rho))
    }

    /// One colour per qubit, sorted descending by `(p0, pplus, pplusi)`.
    pub fn colour_spectrum(&self) -> Vec<QubitColour> {
        let mut colours: Vec<QubitColour> = (1..=self.n)
            .map(|q| self.qubit_colour(q).expect("qubit in range"))
            .collect();
        colours.sort_by(|a, b| b.sort_key_cmp(a));
        colours
    }

    /// Haar-random state: i.i.d. standard complex Gaussians, normalised.
    pub fn haar_random(n: usize, seed: u64) -> Result<StateVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random_with(n, &mut rng)
    }

    pub fn haar_random_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
        check_qubit_count(n)?;
        let amps = (0..1usize << n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    /// `depth` uniformly random gates from {H, S, CNOT} applied to `|0...0>`.
    pub fn random_stabilizer(n: usize, depth: usize, seed: u64) -> Result<StateVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = random_clifford_gates(n, depth, &mut rng)?;
        Self::zero(n)?.apply_gates(&gates)
    }
}

/// Uniformly random gates from {H, S, CNOT}; CNOT only offered when `n >= 2`.
pub fn random_clifford_gates<R: Rng + ?Sized>(
    n: usize,
    depth: usize,
    rng: &mut R,
) -> Result<Vec<Gate>> {
    check_qubit_count(n)?;
    let kinds: &[u8] = if n >= 2 { &[0, 1, 2] } else { &[0, 1] };
    Ok((0..depth)
        .map(|_| match kinds.choose(rng).copied().unwrap_or(0) {
            0 => Gate::H(rng.random_range(1..=n)),
            1 => Gate::S(rng.random_range(1..=n)),
            _ => {
                let pair = rand::seq::index::sample(rng, n, 2);
                Gate::Cnot {
                    control: pair.index(0) + 1,
                    target: pair.index(1) + 1,
                }
            }
        })
        .collect())
}

/// Probabilities of a qubit's reduced state being `|0>`, `|+>` and `|+i>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitColour {
    pub p0: f64,
    pub pplus: f64,
    pub pplusi: f64,
}

impl QubitColour {
    pub fn from_density(rho: &[[C64; 2]; 2]) -> QubitColour {
        let clamp = |x: f64| x.clamp(0.0, 1.0);
        QubitColour {
            p0: clamp(rho[0][0].re),
            pplus: clamp(0.5 + rho[0][1].re),
            pplusi: clamp(0.5 - rho[0][1].im),
        }
    }

    fn sort_key_cmp(&self, other: &QubitColour) -> std::cmp::Ordering {
        self.p0
            .total_cmp(&other.p0)
            .then(self.pplus.total_cmp(&other.pplus))
            .then(self.pplusi.total_cmp(&other.pplusi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_state(s: &StateVector, expect: &[C64]) {
        assert_eq!(s.amps().len(), expect.len());
        for (a, e) in s.amps().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, e.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, e.im, epsilon = 1e-12);
        }
    }

    /// Equal up to a global phase.
    fn assert_same_ray(a: &StateVector, b: &StateVector) {
        let ov = a.inner(b).unwrap().norm();
        assert_abs_diff_eq!(ov, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_states() {
        assert_state(&StateVector::basis(1, "0").unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = StateVector::basis(2, "10").unwrap();
        assert_eq!(s.amp(2), c(1.0, 0.0));
        assert_abs_diff_eq!(s.norm_sqr(), 1.0);
        let s = StateVector::basis(3, "111").unwrap();
        assert_eq!(s.amp(7), c(1.0, 0.0));
    }

    #[test]
    fn basis_length_mismatch_is_input_error() {
        assert!(matches!(StateVector::basis(3, "10"), Err(Error::Input(_))));
        assert!(matches!(StateVector::basis(2, "1x"), Err(Error::Input(_))));
        assert!(matches!(StateVector::basis(13, &"0".repeat(13)), Err(Error::Capability(_))));
    }

    #[test]
    fn hadamard_on_zero() {
        let s = StateVector::zero(1).unwrap().apply_gate(&Gate::H(1)).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_state(&s, &[c(h, 0.0), c(h, 0.0)]);
    }

    #[test]
    fn cnot_builds_bell_pair() {
        let h = FRAC_1_SQRT_2;
        let plus0 = StateVector::from_amplitudes(vec![c(h, 0.0), c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0)])
            .unwrap();
        let bell = plus0
            .apply_gate(&Gate::Cnot { control: 1, target: 2 })
            .unwrap();
        assert_state(&bell, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    }

    #[test]
    fn ry_pi_flips_up_to_phase() {
        let s = StateVector::zero(1).unwrap().apply_gate(&Gate::Ry(1, PI)).unwrap();
        assert_same_ray(&s, &StateVector::basis(1, "1").unwrap());
    }

    #[test]
    fn rotation_conventions() {
        let zero = StateVector::zero(1).unwrap();
        // RX(pi)|0> = -i|1>
        let s = zero.apply_gate(&Gate::Rx(1, PI)).unwrap();
        assert_abs_diff_eq!(s.amp(1).im, -1.0, epsilon = 1e-12);
        // RZ(t) = diag(e^{-it/2}, e^{it/2})
        let plus = zero.apply_gate(&Gate::H(1)).unwrap();
        let s = plus.apply_gate(&Gate::Rz(1, 0.8)).unwrap();
        let rel = s.amp(1) / s.amp(0);
        assert_abs_diff_eq!(rel.arg(), 0.8, epsilon = 1e-12);
        // CPHASE only touches |11>
        let all = StateVector::from_amplitudes(vec![c(0.5, 0.0); 4]).unwrap();
        let s = all
            .apply_gate(&Gate::Cphase { control: 1, target: 2, angle: 0.3 })
            .unwrap();
        assert_abs_diff_eq!(s.amp(3).arg(), 0.3, epsilon = 1e-12);
        for b in 0..3 {
            assert_abs_diff_eq!(s.amp(b).arg(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn y_and_s_act_as_expected() {
        let zero = StateVector::zero(1).unwrap();
        let s = zero.apply_gate(&Gate::Y(1)).unwrap();
        assert_state(&s, &[c(0.0, 0.0), c(0.0, 1.0)]);
        let s = zero.apply_gate(&Gate::X(1)).unwrap().apply_gate(&Gate::S(1)).unwrap();
        assert_state(&s, &[c(0.0, 0.0), c(0.0, 1.0)]);
    }

    #[test]
    fn clause_phase_hits_only_its_pattern() {
        let n = 4;
        let uniform = StateVector::from_amplitudes(vec![c(1.0, 0.0); 16]).unwrap();
        let g = Gate::ClausePhase { qubits: [3, 1, 4], pattern: 0b101, angle: 0.7 };
        let s = uniform.apply_gate(&g).unwrap();
        let mut touched = 0;
        for b in 0..16usize {
            let bit = |q: usize| (b >> (n - q)) & 1;
            let hit = bit(3) == 1 && bit(1) == 0 && bit(4) == 1;
            let expect = if hit { -0.7 } else { 0.0 };
            assert_abs_diff_eq!(s.amp(b).arg(), expect, epsilon = 1e-12);
            touched += hit as usize;
        }
        assert_eq!(touched, 1 << (n - 3));
    }

    #[test]
    fn out_of_range_gate_is_input_error() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_gate(&Gate::H(3)), Err(Error::Input(_))));
        assert!(matches!(s.apply_gate(&Gate::H(0)), Err(Error::Input(_))));
    }

    #[test]
    fn long_random_sequences_keep_norm_before_renormalising() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 5;
        let mut s = StateVector::haar_random(n, 1).unwrap();
        for _ in 0..1000 {
            let q = rng.random_range(1..=n);
            let mut r = rng.random_range(1..=n);
            if r == q {
                r = q % n + 1;
            }
            let t: f64 = rng.random_range(-PI..PI);
            let g = match rng.random_range(0..10) {
                0 => Gate::H(q),
                1 => Gate::T(q),
                2 => Gate::Rx(q, t),
                3 => Gate::Ry(q, t),
                4 => Gate::Rz(q, t),
                5 => Gate::Cnot { control: q, target: r },
                6 => Gate::Cphase { control: q, target: r, angle: t },
                7 => Gate::Swap(q, r),
                8 => Gate::Y(q),
                _ => {
                    let mut third = 1;
                    while third == q || third == r {
                        third += 1;
                    }
                    Gate::ClausePhase { qubits: [q, r, third], pattern: rng.random_range(0..8), angle: t }
                }
            };
            s.apply_unnormalised(&g);
            assert!((s.norm_sqr().sqrt() - 1.0).abs() < 1e-9);
            s.renormalise();
        }
    }

    #[test]
    fn permutation_examples() {
        let s = StateVector::haar_random(3, 3).unwrap();
        assert_eq!(s.apply_permutation(&QubitPermutation::identity(3)).unwrap(), s);

        let swap = QubitPermutation::transposition(2, 1, 2).unwrap();
        let s01 = StateVector::basis(2, "01").unwrap();
        assert_eq!(s01.apply_permutation(&swap).unwrap(), StateVector::basis(2, "10").unwrap());

        // alpha|01> + beta|11> -> alpha|10> + beta|11>
        let (al, be) = (c(0.6, 0.0), c(0.0, 0.8));
        let z = c(0.0, 0.0);
        let s = StateVector::from_amplitudes(vec![z, al, z, be]).unwrap();
        let p = s.apply_permutation(&swap).unwrap();
        assert_state(&p, &[z, z, al, be]);
    }

    #[test]
    fn permutation_size_mismatch() {
        let s = StateVector::zero(3).unwrap();
        assert!(matches!(
            s.apply_permutation(&QubitPermutation::identity(2)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn permutation_group_law_and_inverse() {
        let s = StateVector::haar_random(4, 11).unwrap();
        let perms: Vec<_> = QubitPermutation::all(4).collect();
        for sigma in perms.iter().step_by(5) {
            let back = s
                .apply_permutation(sigma)
                .unwrap()
                .apply_permutation(&sigma.inverse())
                .unwrap();
            assert_eq!(back, s);
            for tau in perms.iter().step_by(7) {
                let two_step = s.apply_permutation(sigma).unwrap().apply_permutation(tau).unwrap();
                let one_step = s.apply_permutation(&sigma.then(tau).unwrap()).unwrap();
                assert_eq!(two_step, one_step);
            }
        }
    }

    #[test]
    fn permutation_matches_swap_gates() {
        let s = StateVector::haar_random(3, 5).unwrap();
        let via_gate = s.apply_gate(&Gate::Swap(1, 3)).unwrap();
        let via_perm = s
            .apply_permutation(&QubitPermutation::transposition(3, 1, 3).unwrap())
            .unwrap();
        assert_same_ray(&via_gate, &via_perm);
    }

    #[test]
    fn inner_products() {
        let zero = StateVector::basis(1, "0").unwrap();
        let one = StateVector::basis(1, "1").unwrap();
        let plus = zero.apply_gate(&Gate::H(1)).unwrap();
        assert_abs_diff_eq!(zero.inner(&zero).unwrap().re, 1.0);
        assert_abs_diff_eq!(zero.inner(&one).unwrap().norm(), 0.0);
        assert_abs_diff_eq!(zero.inner(&plus).unwrap().re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(matches!(
            zero.inner(&StateVector::zero(2).unwrap()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn reduced_density_examples() {
        let rho = StateVector::zero(2).unwrap().reduced_density_1q(1).unwrap();
        assert_abs_diff_eq!(rho[0][0].re, 1.0);
        assert_abs_diff_eq!(rho[1][1].re, 0.0);

        let bell = StateVector::zero(2)
            .unwrap()
            .apply_gates(&[Gate::H(1), Gate::Cnot { control: 1, target: 2 }])
            .unwrap();
        let rho = bell.reduced_density_1q(1).unwrap();
        assert_abs_diff_eq!(rho[0][0].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[1][1].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[0][1].norm(), 0.0, epsilon = 1e-12);

        let plus0 = StateVector::zero(2).unwrap().apply_gate(&Gate::H(1)).unwrap();
        let rho = plus0.reduced_density_1q(1).unwrap();
        for r in rho.iter().flatten() {
            assert_abs_diff_eq!(r.re, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-12);
        }
        assert!(plus0.reduced_density_1q(3).is_err());
    }

    #[test]
    fn reduced_density_is_a_density_matrix_for_haar_states() {
        for seed in 0..100 {
            let s = StateVector::haar_random(1 + (seed as usize % 5), seed).unwrap();
            for q in 1..=s.n() {
                let rho = s.reduced_density_1q(q).unwrap();
                let tr = rho[0][0].re + rho[1][1].re;
                assert_abs_diff_eq!(tr, 1.0, epsilon = 1e-9);
                assert!((rho[0][1] - rho[1][0].conj()).norm() < 1e-15);
                // eigenvalues of a 2x2 Hermitian matrix
                let det = rho[0][0].re * rho[1][1].re - rho[0][1].norm_sqr();
                let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
                for ev in [tr / 2.0 - disc, tr / 2.0 + disc] {
                    assert!((-1e-9..=1.0 + 1e-9).contains(&ev));
                }
            }
        }
    }

    #[test]
    fn colour_examples() {
        let zero = StateVector::zero(1).unwrap();
        let col = zero.qubit_colour(1).unwrap();
        assert_abs_diff_eq!(col.p0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(col.pplus, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(col.pplusi, 0.5, epsilon = 1e-12);

        let plus = zero.apply_gate(&Gate::H(1)).unwrap();
        let col = plus.qubit_colour(1).unwrap();
        assert_abs_diff_eq!(col.p0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(col.pplus, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(col.pplusi, 0.5, epsilon = 1e-12);

        let plus_i = plus.apply_gate(&Gate::S(1)).unwrap();
        let col = plus_i.qubit_colour(1).unwrap();
        assert_abs_diff_eq!(col.p0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(col.pplus, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(col.pplusi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn colour_spectrum_examples() {
        let zp = StateVector::zero(2).unwrap().apply_gate(&Gate::H(2)).unwrap();
        let pz = StateVector::zero(2).unwrap().apply_gate(&Gate::H(1)).unwrap();
        assert_eq!(zp.colour_spectrum(), pz.colour_spectrum());

        let spectrum = StateVector::zero(2).unwrap().colour_spectrum();
        assert_eq!(spectrum.len(), 2);
        for col in spectrum {
            assert_eq!((col.p0, col.pplus, col.pplusi), (1.0, 0.5, 0.5));
        }

        let ghz = StateVector::zero(3)
            .unwrap()
            .apply_gates(&[
                Gate::H(1),
                Gate::Cnot { control: 1, target: 2 },
                Gate::Cnot { control: 2, target: 3 },
            ])
            .unwrap();
        for col in ghz.colour_spectrum() {
            assert_abs_diff_eq!(col.p0, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(col.pplus, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(col.pplusi, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn colour_spectrum_is_sorted_descending() {
        let s = StateVector::haar_random(5, 9).unwrap();
        let spectrum = s.colour_spectrum();
        assert!(spectrum.windows(2).all(|w| w[0].sort_key_cmp(&w[1]).is_ge()));
    }

    #[test]
    fn colour_spectrum_permutation_invariant() {
        for n in 1..=5 {
            let s = StateVector::haar_random(n, 100 + n as u64).unwrap();
            let base = s.colour_spectrum();
            for sigma in QubitPermutation::all(n) {
                let got = s.apply_permutation(&sigma).unwrap().colour_spectrum();
                for (a, b) in got.iter().zip(&base) {
                    assert!((a.p0 - b.p0).abs() < 1e-12);
                    assert!((a.pplus - b.pplus).abs() < 1e-12);
                    assert!((a.pplusi - b.pplusi).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_determinism_and_norm() {
        let a = StateVector::haar_random(4, 42).unwrap();
        let b = StateVector::haar_random(4, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        assert_ne!(a, StateVector::haar_random(4, 43).unwrap());
    }

    #[test]
    fn haar_overlaps_concentrate_near_inverse_dimension() {
        // E|<a|b>|^2 = 1/d for independent Haar states; Var = (d-1)/(d^2 (d+1)).
        let n = 4;
        let d = 16.0;
        let pairs = 100;
        let overlaps: Vec<f64> = (0..pairs)
            .map(|k| {
                let a = StateVector::haar_random(n, 1000 + 2 * k).unwrap();
                let b = StateVector::haar_random(n, 1001 + 2 * k).unwrap();
                a.inner(&b).unwrap().norm_sqr()
            })
            .collect();
        let mean = overlaps.iter().sum::<f64>() / pairs as f64;
        let var = overlaps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (pairs as f64 - 1.0);
        let se = (var / pairs as f64).sqrt();
        assert!((mean - 1.0 / d).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn stabilizer_sampler_depth_zero_and_determinism() {
        assert_eq!(
            StateVector::random_stabilizer(3, 0, 1).unwrap(),
            StateVector::zero(3).unwrap()
        );
        assert_eq!(
            StateVector::random_stabilizer(4, 30, 5).unwrap(),
            StateVector::random_stabilizer(4, 30, 5).unwrap()
        );
        // single qubit never asks for a CNOT
        StateVector::random_stabilizer(1, 50, 2).unwrap();
    }

    #[test]
    fn tensor_product_ordering() {
        let one = StateVector::basis(1, "1").unwrap();
        let zero = StateVector::basis(2, "00").unwrap();
        assert_eq!(one.tensor(&zero).unwrap(), StateVector::basis(3, "100").unwrap());
    }
}
