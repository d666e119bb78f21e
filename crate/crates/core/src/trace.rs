//! Gate-by-gate evolution tracer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::geometry::{geodesic_to_state, DistanceMode, PermutationScan, TargetSpace};
use crate::magic::{sre, LogBase, SreConfig};
use crate::permutation::QubitPermutation;
use crate::state::{QubitColour, StateVector};

/// Which metrics to evaluate at every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    /// `None` skips the magic computation entirely.
    pub sre: Option<SreConfig>,
    pub permutation_min: bool,
    pub colours: bool,
    pub keep_states: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            sre: Some(SreConfig::default()),
            permutation_min: true,
            colours: false,
            keep_states: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub instance_id: String,
    pub ansatz: String,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub log_base: LogBase,
    /// Free-form metadata such as the ladder orientation or cost encoding.
    pub notes: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Gate applied to reach this step; `None` at step 0.
    pub gate: Option<Gate>,
    pub rel_depth: f64,
    pub hc: f64,
    pub sre: Option<f64>,
    pub d_sre: Option<f64>,
    pub s0_t_literal: f64,
    pub s0_t_fs: f64,
    pub s0_tperm_literal: Option<f64>,
    pub s0_tperm_fs: Option<f64>,
    pub d_s0_perm_literal: Option<f64>,
    pub best_sigma: Option<QubitPermutation>,
    pub colours: Option<Vec<QubitColour>>,
    /// Fubini–Study angle from the previous snapshot.
    pub step_length: f64,
}

impl StepRecord {
    pub fn s0_t(&self, mode: DistanceMode) -> f64 {
        match mode {
            DistanceMode::Literal => self.s0_t_literal,
            DistanceMode::FubiniStudy => self.s0_t_fs,
        }
    }

    pub fn s0_tperm(&self, mode: DistanceMode) -> Option<f64> {
        match mode {
            DistanceMode::Literal => self.s0_tperm_literal,
            DistanceMode::FubiniStudy => self.s0_tperm_fs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub header: TraceHeader,
    pub records: Vec<StepRecord>,
    pub final_state: StateVector,
    /// Every snapshot, present when requested via [`TraceOptions::keep_states`].
    pub states: Option<Vec<StateVector>>,
}

impl EvolutionTrace {
    pub fn gate_count(&self) -> usize {
        self.records.len() - 1
    }

    pub fn path_length(&self) -> f64 {
        self.records.iter().map(|r| r.step_length).sum()
    }

    /// Net distance closed towards the target per unit path length, clamped
    /// to `[0, 1]`.
    pub fn geodesic_efficiency(&self, mode: DistanceMode) -> Result<f64> {
        let travelled = self.path_length();
        if travelled <= 0.0 {
            return Err(Error::Undefined("geodesic efficiency of a path with zero length".into()));
        }
        let first = self.records[0].s0_t(mode);
        let last = self.records[self.records.len() - 1].s0_t(mode);
        Ok(((first - last).max(0.0) / travelled).clamp(0.0, 1.0))
    }
}

struct Snapshot {
    hc: f64,
    sre: Option<f64>,
    perm_hc: Option<(usize, f64)>,
    colours: Option<Vec<QubitColour>>,
}

fn snapshot(
    psi: &StateVector,
    target: &TargetSpace,
    scan: Option<&PermutationScan>,
    opts: &TraceOptions,
) -> Result<Snapshot> {
    Ok(Snapshot {
        hc: target.verifier_expectation(psi)?,
        sre: opts.sre.as_ref().map(|cfg| sre(psi, cfg)),
        perm_hc: scan.map(|s| s.best(psi, target)).transpose()?,
        colours: opts.colours.then(|| psi.colour_spectrum()),
    })
}

/// Runs `circuit` from `initial`, recording metrics at step 0 and after every
/// gate. The header is filled from the circuit; callers overwrite the
/// instance fields.
pub fn run_trace(
    circuit: &Circuit,
    initial: &StateVector,
    target: &TargetSpace,
    opts: &TraceOptions,
) -> Result<EvolutionTrace> {
    let n = circuit.n();
    for got in [initial.n(), target.n()] {
        if got != n {
            return Err(Error::Dimension { expected: n, got });
        }
    }
    let scan = if opts.permutation_min {
        Some(PermutationScan::new(n)?)
    } else {
        None
    };

    let k_total = circuit.len();
    let mut records = Vec::with_capacity(k_total + 1);
    let mut states = opts.keep_states.then(|| Vec::with_capacity(k_total + 1));
    let mut psi = initial.clone();
    let mut prev: Option<(Option<f64>, Option<f64>)> = None;

    for step in 0..=k_total {
        let gate = if step == 0 {
            None
        } else {
            Some(circuit.gates()[step - 1])
        };
        let step_length = match &gate {
            Some(g) => {
                let next = psi.apply_gate(g)?;
                let len = geodesic_to_state(&psi, &next)?;
                psi = next;
                len
            }
            None => 0.0,
        };
        let snap = snapshot(&psi, target, scan.as_ref(), opts)?;
        let s0_tperm_literal = snap.perm_hc.map(|(_, hc)| DistanceMode::Literal.distance(hc));
        let delta = |now: Option<f64>, before: Option<Option<f64>>| match (now, before) {
            (Some(a), Some(Some(b))) => Some(a - b),
            _ => None,
        };
        let record = StepRecord {
            step,
            gate,
            rel_depth: if k_total == 0 { 0.0 } else { step as f64 / k_total as f64 },
            hc: snap.hc,
            sre: snap.sre,
            d_sre: delta(snap.sre, prev.map(|p| p.0)),
            s0_t_literal: DistanceMode::Literal.distance(snap.hc),
            s0_t_fs: DistanceMode::FubiniStudy.distance(snap.hc),
            s0_tperm_literal,
            s0_tperm_fs: snap.perm_hc.map(|(_, hc)| DistanceMode::FubiniStudy.distance(hc)),
            d_s0_perm_literal: delta(s0_tperm_literal, prev.map(|p| p.1)),
            best_sigma: match (&scan, snap.perm_hc) {
                (Some(s), Some((idx, _))) => Some(s.permutation(idx).clone()),
                _ => None,
            },
            colours: snap.colours,
            step_length,
        };
        prev = Some((record.sre, record.s0_tperm_literal));
        records.push(record);
        if let Some(s) = states.as_mut() {
            s.push(psi.clone());
        }
    }

    let sre_cfg = opts.sre.unwrap_or_default();
    let header = TraceHeader {
        instance_id: String::new(),
        ansatz: circuit.label().to_string(),
        seed: 0,
        n,
        p: 0,
        alpha: sre_cfg.alpha,
        log_base: sre_cfg.log_base,
        notes: BTreeMap::new(),
    };
    Ok(EvolutionTrace {
        header,
        records,
        final_state: psi,
        states,
    })
}
