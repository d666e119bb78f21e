//! Circuit IR, its line-oriented text form, and the QFT / hardware-efficient /
//! QAOA builders.
//!
//! Text form, one gate per line after a header:
//!
//! ```text
//! # n=3 label=demo
//! H 1
//! CPHASE 2 1 1.5707963267948966
//! CLAUSE_PHASE 1 2 3 0.25 010
//! ```
//!
//! Angles are written as shortest round-trip decimals. Blank lines and further
//! `#` lines are ignored.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};
use crate::sat::CnfFormula;
use crate::state::{StateVector, MAX_QUBITS};

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    label: String,
}

impl Circuit {
    pub fn new(n: usize, label: impl Into<String>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "qubit count {n} outside supported range [1, {MAX_QUBITS}]"
            )));
        }
        let label = label.into();
        if label.contains('\n') {
            return Err(Error::input("circuit label must be a single line"));
        }
        Ok(Circuit {
            n,
            gates: Vec::new(),
            label,
        })
    }

    pub fn with_gates(n: usize, label: impl Into<String>, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(n, label)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must act on the same register.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn run(&self, initial: &StateVector) -> Result<StateVector> {
        if initial.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: initial.n(),
            });
        }
        initial.apply_gates(&self.gates)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# n={} label={}\n", self.n, self.label);
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if circuit.is_none() {
                    circuit = Some(parse_header(rest.trim(), lineno)?);
                }
                continue;
            }
            let Some(c) = circuit.as_mut() else {
                return Err(Error::parse(lineno, "gate before `# n=<n> label=<label>` header"));
            };
            let gate = parse_gate_line(line).map_err(|e| match e {
                Error::Input(msg) => Error::parse(lineno, msg),
                other => other,
            })?;
            c.push(gate).map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        circuit.ok_or_else(|| Error::parse(1, "missing `# n=<n> label=<label>` header"))
    }
}

fn parse_header(rest: &str, lineno: usize) -> Result<Circuit> {
    let Some(after_n) = rest.strip_prefix("n=") else {
        return Err(Error::parse(lineno, "header must start with `n=`"));
    };
    let (n_str, label) = match after_n.split_once(char::is_whitespace) {
        Some((n_str, tail)) => {
            let tail = tail.trim_start();
            let Some(label) = tail.strip_prefix("label=") else {
                return Err(Error::parse(lineno, "expected `label=` after qubit count"));
            };
            (n_str, label)
        }
        None => (after_n, ""),
    };
    let n: usize = n_str
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad qubit count `{n_str}`")))?;
    Circuit::new(n, label).map_err(|e| Error::parse(lineno, e.to_string()))
}

fn parse_gate_line(line: &str) -> Result<Gate> {
    let mut toks = line.split_whitespace();
    let kind: GateKind = toks.next().unwrap_or_default().parse()?;
    let rest: Vec<&str> = toks.collect();
    let arity = kind.arity();
    let extra = kind.has_angle() as usize + (kind == GateKind::ClausePhase) as usize;
    if rest.len() != arity + extra {
        return Err(Error::input(format!(
            "{kind} expects {} operand(s), got {}",
            arity + extra,
            rest.len()
        )));
    }
    let qubits = rest[..arity]
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::input(format!("bad qubit index `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let angle = if kind.has_angle() {
        let t = rest[arity];
        Some(
            t.parse::<f64>()
                .map_err(|_| Error::input(format!("bad angle `{t}`")))?,
        )
    } else {
        None
    };
    let pattern = if kind == GateKind::ClausePhase {
        let t = rest[arity + 1];
        if t.len() != 3 || !t.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::input(format!("pattern `{t}` is not a 3-bit string")));
        }
        Some(u8::from_str_radix(t, 2).map_err(|_| Error::input(format!("bad pattern `{t}`")))?)
    } else {
        None
    };
    Gate::from_parts(kind, &qubits, angle, pattern)
}

/// Quantum Fourier transform on `n` qubits, qubit 1 most significant. With
/// `include_final_swaps` the circuit equals the DFT matrix
/// `F[a, b] = 2^{-n/2} exp(2 pi i a b / 2^n)`.
pub fn build_qft(n: usize, include_final_swaps: bool) -> Result<Circuit> {
    let mut c = Circuit::new(n, if include_final_swaps { "qft" } else { "qft_noswap" })?;
    for j in 1..=n {
        c.push(Gate::H(j))?;
        for k in j + 1..=n {
            c.push(Gate::Cphase {
                control: k,
                target: j,
                angle: PI / (1u64 << (k - j)) as f64,
            })?;
        }
    }
    if include_final_swaps {
        for j in 1..=n / 2 {
            c.push(Gate::Swap(j, n + 1 - j))?;
        }
    }
    Ok(c)
}

/// Number of gates before the qubit-reversal block of [`build_qft`].
pub fn qft_swap_block_start(n: usize) -> usize {
    n + n * (n - 1) / 2
}

/// Rotation angles of a hardware-efficient ansatz, indexed `[layer][qubit]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeaParams {
    pub thetas_y: Vec<Vec<f64>>,
    pub thetas_z: Vec<Vec<f64>>,
}

impl HeaParams {
    pub fn zeros(n: usize, p: usize) -> Self {
        HeaParams {
            thetas_y: vec![vec![0.0; n]; p],
            thetas_z: vec![vec![0.0; n]; p],
        }
    }

    /// Flat layout: per layer, `n` RY angles then `n` RZ angles.
    pub fn from_flat(n: usize, p: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != 2 * n * p {
            return Err(Error::input(format!(
                "hardware-efficient ansatz with n = {n}, p = {p} takes {} parameters, got {}",
                2 * n * p,
                flat.len()
            )));
        }
        let mut params = HeaParams::zeros(n, p);
        for layer in 0..p {
            let base = 2 * n * layer;
            params.thetas_y[layer].copy_from_slice(&flat[base..base + n]);
            params.thetas_z[layer].copy_from_slice(&flat[base + n..base + 2 * n]);
        }
        Ok(params)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.thetas_y
            .iter()
            .zip(&self.thetas_z)
            .flat_map(|(y, z)| y.iter().chain(z).copied())
            .collect()
    }

    fn check_shape(&self, n: usize, p: usize) -> Result<()> {
        let ok = self.thetas_y.len() == p
            && self.thetas_z.len() == p
            && self.thetas_y.iter().chain(&self.thetas_z).all(|row| row.len() == n);
        if !ok {
            return Err(Error::input(format!("parameters are not shaped {p} x {n}")));
        }
        if self.thetas_y.iter().chain(&self.thetas_z).flatten().any(|t| !t.is_finite()) {
            return Err(Error::input("parameters must be finite"));
        }
        Ok(())
    }
}

/// `p` layers of RY on every qubit, RZ on every qubit, then a CNOT ladder
/// with control `q` and target `q + 1`.
pub fn build_hea(n: usize, p: usize, params: &HeaParams) -> Result<Circuit> {
    params.check_shape(n, p)?;
    let mut c = Circuit::new(n, "hea")?;
    for layer in 0..p {
        for q in 1..=n {
            c.push(Gate::Ry(q, params.thetas_y[layer][q - 1]))?;
        }
        for q in 1..=n {
            c.push(Gate::Rz(q, params.thetas_z[layer][q - 1]))?;
        }
        for q in 1..n {
            c.push(Gate::Cnot {
                control: q,
                target: q + 1,
            })?;
        }
    }
    Ok(c)
}

/// Cost-layer angles `gammas` and mixer angles `betas`, one per layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn zeros(p: usize) -> Self {
        QaoaParams {
            gammas: vec![0.0; p],
            betas: vec![0.0; p],
        }
    }

    /// `gamma_i = (i/p) gamma_max`, `beta_i = (1 - i/p) beta_max` for `i = 1..p`.
    pub fn linear_ramp(p: usize, gamma_max: f64, beta_max: f64) -> Self {
        let frac = |i: usize| i as f64 / p as f64;
        QaoaParams {
            gammas: (1..=p).map(|i| frac(i) * gamma_max).collect(),
            betas: (1..=p).map(|i| (1.0 - frac(i)) * beta_max).collect(),
        }
    }

    /// Flat layout: all gammas, then all betas.
    pub fn from_flat(p: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != 2 * p {
            return Err(Error::input(format!(
                "QAOA with p = {p} takes {} parameters, got {}",
                2 * p,
                flat.len()
            )));
        }
        Ok(QaoaParams {
            gammas: flat[..p].to_vec(),
            betas: flat[p..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }
}

/// `H` on every qubit, then per layer one `CLAUSE_PHASE(gamma)` per clause
/// followed by `RX(2 beta)` on every qubit.
pub fn build_qaoa(formula: &CnfFormula, params: &QaoaParams) -> Result<Circuit> {
    if params.gammas.len() != params.betas.len() {
        return Err(Error::input(format!(
            "{} gammas but {} betas",
            params.gammas.len(),
            params.betas.len()
        )));
    }
    if params.gammas.iter().chain(&params.betas).any(|t| !t.is_finite()) {
        return Err(Error::input("parameters must be finite"));
    }
    let n = formula.n();
    let mut c = Circuit::new(n, "qaoa")?;
    for q in 1..=n {
        c.push(Gate::H(q))?;
    }
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for clause in formula.clauses() {
            c.push(Gate::ClausePhase {
                qubits: clause.vars(),
                pattern: clause.unsat_pattern(),
                angle: gamma,
            })?;
        }
        for q in 1..=n {
            c.push(Gate::Rx(q, 2.0 * beta))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{Clause, Literal};
    use crate::state::C64;
    use approx::assert_abs_diff_eq;

    /// Dense unitary by running every basis state through the circuit.
    fn dense_unitary(c: &Circuit) -> Vec<Vec<C64>> {
        let dim = 1usize << c.n();
        let mut cols = Vec::with_capacity(dim);
        for b in 0..dim {
            let out = c.run(&StateVector::basis_index(c.n(), b).unwrap()).unwrap();
            cols.push(out.amps().to_vec());
        }
        // cols[b][a] = U[a][b]
        (0..dim).map(|a| (0..dim).map(|b| cols[b][a]).collect()).collect()
    }

    #[test]
    fn qft_equals_dft_matrix() {
        for n in 1..=6 {
            let u = dense_unitary(&build_qft(n, true).unwrap());
            let dim = 1usize << n;
            let norm = (dim as f64).sqrt().recip();
            for a in 0..dim {
                for b in 0..dim {
                    let phase = 2.0 * PI * (a * b % dim) as f64 / dim as f64;
                    let expect = C64::from_polar(norm, phase);
                    assert!((u[a][b] - expect).norm() < 1e-9, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn qft_examples() {
        let c = build_qft(1, true).unwrap();
        assert_eq!(c.gates(), &[Gate::H(1)]);
        let out = build_qft(3, true).unwrap().run(&StateVector::zero(3).unwrap()).unwrap();
        for a in out.amps() {
            assert_abs_diff_eq!(a.re, 2f64.powf(-1.5), epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
        let c = build_qft(4, true).unwrap();
        assert_eq!(c.count(GateKind::H), 4);
        assert_eq!(c.count(GateKind::Cphase), 6);
        assert_eq!(c.count(GateKind::Swap), 2);
        assert_eq!(qft_swap_block_start(4), 10);
        assert!(c.gates()[10..].iter().all(|g| g.kind() == GateKind::Swap));
        assert!(c.gates()[..10].iter().all(|g| g.kind() != GateKind::Swap));
    }

    #[test]
    fn hea_identity_on_zero_state() {
        for p in 1..4 {
            let c = build_hea(3, p, &HeaParams::zeros(3, p)).unwrap();
            let out = c.run(&StateVector::zero(3).unwrap()).unwrap();
            assert_abs_diff_eq!(out.amp(0).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hea_counts() {
        let params = HeaParams::zeros(7, 7);
        assert_eq!(params.to_flat().len(), 98);
        let c = build_hea(7, 7, &params).unwrap();
        assert_eq!(c.len(), 140);
        assert_eq!(c.count(GateKind::Cnot), 42);
        // ladder orientation
        assert_eq!(c.gates()[14], Gate::Cnot { control: 1, target: 2 });
    }

    #[test]
    fn hea_single_layer_hand_trace() {
        let params = HeaParams {
            thetas_y: vec![vec![PI, 0.0]],
            thetas_z: vec![vec![0.0, 0.0]],
        };
        let out = build_hea(2, 1, &params).unwrap().run(&StateVector::zero(2).unwrap()).unwrap();
        assert_abs_diff_eq!(out.amp(0b11).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hea_shape_errors() {
        assert!(build_hea(3, 2, &HeaParams::zeros(3, 1)).is_err());
        assert!(build_hea(3, 1, &HeaParams::zeros(2, 1)).is_err());
        assert!(HeaParams::from_flat(3, 2, &[0.0; 11]).is_err());
        let flat: Vec<f64> = (0..12).map(f64::from).collect();
        let p = HeaParams::from_flat(3, 2, &flat).unwrap();
        assert_eq!(p.thetas_y[1], vec![6.0, 7.0, 8.0]);
        assert_eq!(p.thetas_z[0], vec![3.0, 4.0, 5.0]);
        assert_eq!(p.to_flat(), flat);
    }

    fn clause(a: i64, b: i64, c: i64) -> Clause {
        Clause::new([a, b, c].map(|v| Literal::from_dimacs(v).unwrap())).unwrap()
    }

    #[test]
    fn qaoa_zero_angles_give_uniform_state() {
        let f = CnfFormula::random_3cnf(5, 3.0, 2).unwrap();
        let out = build_qaoa(&f, &QaoaParams::zeros(3))
            .unwrap()
            .run(&StateVector::zero(5).unwrap())
            .unwrap();
        for a in out.amps() {
            assert_abs_diff_eq!(a.re, 32f64.sqrt().recip(), epsilon = 1e-12);
        }
    }

    #[test]
    fn qaoa_single_clause_phase() {
        let f = CnfFormula::new(4, vec![clause(1, -3, 4)]).unwrap();
        let params = QaoaParams {
            gammas: vec![0.9],
            betas: vec![0.0],
        };
        let out = build_qaoa(&f, &params).unwrap().run(&StateVector::zero(4).unwrap()).unwrap();
        let mut hit = 0;
        for b in 0..16usize {
            let bit = |q: usize| (b >> (4 - q)) & 1;
            let violated = bit(1) == 0 && bit(3) == 1 && bit(4) == 0;
            let expect = if violated { -0.9 } else { 0.0 };
            assert_abs_diff_eq!(out.amp(b).arg(), expect, epsilon = 1e-12);
            hit += violated as usize;
        }
        assert_eq!(hit, 2);
    }

    #[test]
    fn qaoa_counts() {
        let f = CnfFormula::random_3cnf(7, 3.0, 1).unwrap();
        let c = build_qaoa(&f, &QaoaParams::zeros(7)).unwrap();
        assert_eq!(c.len(), 203);
        assert!(build_qaoa(
            &f,
            &QaoaParams {
                gammas: vec![0.0; 2],
                betas: vec![0.0; 3]
            }
        )
        .is_err());
    }

    #[test]
    fn qaoa_cost_layer_matches_dense_exponential() {
        // exp(-i gamma sum_c P_c) is diagonal with phase -gamma * (#violated clauses)
        for seed in 0..10 {
            let n = 3 + seed as usize % 3;
            let f = CnfFormula::random_3cnf(n, 2.0, seed).unwrap();
            let gamma = 0.37 + seed as f64 * 0.1;
            let mut layer = Circuit::new(n, "cost").unwrap();
            for c in f.clauses() {
                layer
                    .push(Gate::ClausePhase { qubits: c.vars(), pattern: c.unsat_pattern(), angle: gamma })
                    .unwrap();
            }
            let u = dense_unitary(&layer);
            for a in 0..1usize << n {
                let violated = f.clauses().iter().filter(|c| !c.is_satisfied(n, a)).count();
                for b in 0..1usize << n {
                    let expect = if a == b {
                        C64::from_polar(1.0, -gamma * violated as f64)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    assert!((u[a][b] - expect).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ramp_shape() {
        let r = QaoaParams::linear_ramp(4, 1.0, 1.0);
        assert_eq!(r.gammas, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(r.betas, vec![0.75, 0.5, 0.25, 0.0]);
        assert_eq!(QaoaParams::from_flat(4, &r.to_flat()).unwrap(), r);
    }

    #[test]
    fn text_round_trip() {
        let f = CnfFormula::random_3cnf(5, 3.0, 9).unwrap();
        let c = build_qaoa(&f, &QaoaParams::linear_ramp(2, 0.7, 0.3)).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("# n=5 label=qaoa\n"));
        let back = Circuit::parse_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);

        let qft = build_qft(4, true).unwrap();
        assert_eq!(Circuit::parse_text(&qft.to_text()).unwrap(), qft);
    }

    #[test]
    fn text_parsing_details() {
        let c = Circuit::parse_text("\n# n=2 label=two words\n# comment\nh 1\nCNOT 1 2\nRZ 2 -1e-7\n").unwrap();
        assert_eq!(c.label(), "two words");
        assert_eq!(c.gates()[2], Gate::Rz(2, -1e-7));
        let c = Circuit::parse_text("# n=1\nX 1\n").unwrap();
        assert_eq!(c.label(), "");
    }

    #[test]
    fn text_parse_errors() {
        let bad = [
            "H 1",
            "# n=x label=a\nH 1",
            "# q=2\nH 1",
            "# n=2 label=a\nH 3",
            "# n=2 label=a\nCNOT 1",
            "# n=2 label=a\nCNOT 1 1",
            "# n=2 label=a\nRX 1",
            "# n=2 label=a\nRX 1 abc",
            "# n=3 label=a\nCLAUSE_PHASE 1 2 3 0.5 01",
            "# n=3 label=a\nCLAUSE_PHASE 1 2 3 0.5 012",
            "# n=2 label=a\nFOO 1",
            "# n=13 label=a\n",
            "# n=2 label=a\nRX 1 inf",
            "",
        ];
        for text in bad {
            assert!(matches!(Circuit::parse_text(text), Err(Error::Parse { .. })), "{text:?}");
        }
    }

    #[test]
    fn append_requires_same_register() {
        let mut a = build_qft(3, false).unwrap();
        assert!(a.append(&build_qft(2, false).unwrap()).is_err());
        let b = build_qft(3, true).unwrap();
        a.append(&b).unwrap();
        assert_eq!(a.len(), 6 + 7);
    }
}
