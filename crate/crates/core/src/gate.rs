//! Gate set understood by the simulator.
//!
//! Qubits are 1-based. Angles are radians with the conventions
//! `RX(t) = exp(-i t X/2)`, `RY(t) = exp(-i t Y/2)`, `RZ(t) = exp(-i t Z/2)`,
//! `CPHASE(t) = diag(1, 1, 1, e^{it})` and `CLAUSE_PHASE(t, pattern)`
//! multiplying by `e^{-it}` every basis state whose three qubits read `pattern`
//! (first listed qubit = most significant pattern bit).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Cphase,
    Swap,
    ClausePhase,
}

impl GateKind {
    pub const ALL: [GateKind; 14] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::T,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cnot,
        GateKind::Cz,
        GateKind::Cphase,
        GateKind::Swap,
        GateKind::ClausePhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Cphase => "CPHASE",
            GateKind::Swap => "SWAP",
            GateKind::ClausePhase => "CLAUSE_PHASE",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Cphase | GateKind::Swap => 2,
            GateKind::ClausePhase => 3,
            _ => 1,
        }
    }

    pub fn has_angle(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cphase | GateKind::ClausePhase
        )
    }

    /// Members of the Clifford generating set used for invariance checks.
    pub fn is_clifford(self) -> bool {
        matches!(
            self,
            GateKind::H
                | GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::S
                | GateKind::Cnot
                | GateKind::Cz
                | GateKind::Swap
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == upper)
            .ok_or_else(|| Error::input(format!("unknown gate kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    T(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Cphase { control: usize, target: usize, angle: f64 },
    Swap(usize, usize),
    ClausePhase { qubits: [usize; 3], pattern: u8, angle: f64 },
}

impl Gate {
    /// Builds a gate from its generic description, checking arity and
    /// required parameters (but not the qubit range, see [`Gate::validate`]).
    pub fn from_parts(
        kind: GateKind,
        qubits: &[usize],
        angle: Option<f64>,
        pattern: Option<u8>,
    ) -> Result<Gate> {
        if qubits.len() != kind.arity() {
            return Err(Error::input(format!(
                "{kind} takes {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        let angle_val = match (kind.has_angle(), angle) {
            (true, Some(a)) if a.is_finite() => a,
            (true, Some(a)) => return Err(Error::input(format!("{kind} angle {a} is not finite"))),
            (true, None) => return Err(Error::input(format!("{kind} requires an angle"))),
            (false, Some(_)) => return Err(Error::input(format!("{kind} takes no angle"))),
            (false, None) => 0.0,
        };
        match (kind, pattern) {
            (GateKind::ClausePhase, None) => {
                return Err(Error::input("CLAUSE_PHASE requires a 3-bit pattern"))
            }
            (GateKind::ClausePhase, Some(p)) if p > 0b111 => {
                return Err(Error::input(format!("pattern {p} does not fit in 3 bits")))
            }
            (GateKind::ClausePhase, Some(_)) => {}
            (_, Some(_)) => return Err(Error::input(format!("{kind} takes no pattern"))),
            (_, None) => {}
        }
        let q = qubits;
        Ok(match kind {
            GateKind::H => Gate::H(q[0]),
            GateKind::X => Gate::X(q[0]),
            GateKind::Y => Gate::Y(q[0]),
            GateKind::Z => Gate::Z(q[0]),
            GateKind::S => Gate::S(q[0]),
            GateKind::T => Gate::T(q[0]),
            GateKind::Rx => Gate::Rx(q[0], angle_val),
            GateKind::Ry => Gate::Ry(q[0], angle_val),
            GateKind::Rz => Gate::Rz(q[0], angle_val),
            GateKind::Cnot => Gate::Cnot {
                control: q[0],
                target: q[1],
            },
            GateKind::Cz => Gate::Cz(q[0], q[1]),
            GateKind::Cphase => Gate::Cphase {
                control: q[0],
                target: q[1],
                angle: angle_val,
            },
            GateKind::Swap => Gate::Swap(q[0], q[1]),
            GateKind::ClausePhase => Gate::ClausePhase {
                qubits: [q[0], q[1], q[2]],
                pattern: pattern.unwrap_or_default(),
                angle: angle_val,
            },
        })
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Y(_) => GateKind::Y,
            Gate::Z(_) => GateKind::Z,
            Gate::S(_) => GateKind::S,
            Gate::T(_) => GateKind::T,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cz(..) => GateKind::Cz,
            Gate::Cphase { .. } => GateKind::Cphase,
            Gate::Swap(..) => GateKind::Swap,
            Gate::ClausePhase { .. } => GateKind::ClausePhase,
        }
    }

    /// Qubits in declaration order (control before target).
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::S(q)
            | Gate::T(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } | Gate::Cphase { control, target, .. } => {
                vec![control, target]
            }
            Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
            Gate::ClausePhase { qubits, .. } => qubits.to_vec(),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            Gate::Cphase { angle, .. } | Gate::ClausePhase { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn pattern(&self) -> Option<u8> {
        match *self {
            Gate::ClausePhase { pattern, .. } => Some(pattern),
            _ => None,
        }
    }

    pub fn is_clifford(&self) -> bool {
        self.kind().is_clifford()
    }

    /// Checks that every qubit index lies in `[1, n]` and indices are distinct.
    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q == 0 || q > n {
                return Err(Error::input(format!(
                    "{} qubit index {q} outside [1, {n}]",
                    self.kind()
                )));
            }
            if qs[..i].contains(&q) {
                return Err(Error::input(format!(
                    "{} repeats qubit {q}",
                    self.kind()
                )));
            }
        }
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::input(format!("{} angle is not finite", self.kind())));
            }
        }
        if let Some(p) = self.pattern() {
            if p > 0b111 {
                return Err(Error::input(format!("pattern {p} does not fit in 3 bits")));
            }
        }
        Ok(())
    }

    /// Short descriptor used in trace files, e.g. `RY(0.5)` or `CNOT`.
    pub fn descriptor(&self) -> String {
        match (self.angle(), self.pattern()) {
            (Some(a), Some(p)) => format!("{}({a};{p:03b})", self.kind()),
            (Some(a), None) => format!("{}({a})", self.kind()),
            _ => self.kind().name().to_string(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        if let Some(a) = self.angle() {
            write!(f, " {a:?}")?;
        }
        if let Some(p) = self.pattern() {
            write!(f, " {p:03b}")?;
        }
        Ok(())
    }
}
