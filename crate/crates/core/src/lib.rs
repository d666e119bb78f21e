//! State-vector simulation of small circuits with magic (stabiliser Rényi
//! entropy) and target-space geometry tracking, plus a random 3-SAT workload
//! and an experiment harness.

pub mod circuit;
pub mod error;
pub mod gate;
pub mod geometry;
pub mod harness;
pub mod magic;
pub mod optimize;
pub mod permutation;
pub mod sat;
pub mod state;
pub mod trace;

pub use circuit::{build_hea, build_qaoa, build_qft, Circuit, HeaParams, QaoaParams};
pub use error::{Error, Result};
pub use gate::{Gate, GateKind};
pub use geometry::{DistanceMode, PermutationScan, TargetSpace};
pub use optimize::{minimize, MinimizeResult, OptimizerConfig};
pub use magic::{sre, LogBase, PauliString, SreConfig};
pub use permutation::QubitPermutation;
pub use sat::{CnfFormula, SolutionSet};
pub use state::{QubitColour, StateVector};
pub use trace::{run_trace, EvolutionTrace, TraceOptions};
