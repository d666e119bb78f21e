//! Implementations of the `sat-gen`, `qft-demo`, `evolve`, `stats` and
//! `spectrum` subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_hea, build_qaoa, build_qft, qft_swap_block_start, Circuit, HeaParams, QaoaParams};
use crate::error::{Error, Result};
use crate::geometry::TargetSpace;
use crate::optimize::{hea_initial, minimize, qaoa_cost, vqe_cost, MinimizeResult};
use crate::sat::{instance_file_name, CnfFormula};
use crate::state::{format_bitstring, parse_bitstring, StateVector};
use crate::trace::{run_trace, EvolutionTrace, TraceHeader, TraceOptions};

use super::io::{read_trace_csv, spectrum_csv_string, trace_rows, write_atomic, write_json, write_trace_csv, TraceRow, TRACE_COLUMNS};
use super::stats::StepStats;
use super::{Ansatz, ExperimentConfig};

pub fn instance_tag(i: usize) -> String {
    format!("inst{i:03}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub instance_id: String,
    pub file: String,
    pub seed: u64,
    pub n: usize,
    pub clauses: usize,
    pub solutions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatGenOutput {
    #[serde(skip)]
    pub dir: PathBuf,
    pub ratio: f64,
    pub instances: Vec<ManifestEntry>,
}

struct Instance {
    id: String,
    seed: u64,
    formula: CnfFormula,
    source: Option<PathBuf>,
}

fn generate_instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            Ok(Instance {
                id: instance_tag(i),
                seed,
                formula: CnfFormula::random_3cnf(cfg.n, cfg.ratio, seed)?,
                source: None,
            })
        })
        .collect()
}

fn load_instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    if cfg.instance_files.is_empty() {
        return generate_instances(cfg);
    }
    cfg.instance_files
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(Instance {
                id: instance_tag(i),
                seed: cfg.seed.wrapping_add(i as u64),
                formula: CnfFormula::parse_dimacs(&text)?,
                source: Some(path.clone()),
            })
        })
        .collect()
}

/// Writes `instances` satisfiable formulas and a manifest to
/// `<output_dir>/instances/`.
pub fn cmd_sat_gen(cfg: &ExperimentConfig) -> Result<SatGenOutput> {
    cfg.validate()?;
    let dir = cfg.output_dir.join("instances");
    let instances = generate_instances(cfg)?;
    let mut entries = Vec::with_capacity(instances.len());
    for inst in &instances {
        let file = instance_file_name(&inst.id, cfg.n, cfg.ratio, inst.seed);
        write_atomic(&dir.join(&file), inst.formula.to_dimacs().as_bytes())?;
        entries.push(ManifestEntry {
            instance_id: inst.id.clone(),
            file,
            seed: inst.seed,
            n: inst.formula.n(),
            clauses: inst.formula.num_clauses(),
            solutions: inst.formula.solve_brute_force()?.len(),
        });
    }
    let out = SatGenOutput {
        dir: dir.clone(),
        ratio: cfg.ratio,
        instances: entries,
    };
    write_json(&dir.join("manifest.json"), &out)?;
    Ok(out)
}

fn run_notes(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    let o = &cfg.optimizer;
    BTreeMap::from([
        ("step_unit".into(), "one gate".into()),
        ("distance_mode".into(), cfg.distance_mode.name().into()),
        ("cost_encoding".into(), "sum of clause projectors, one CLAUSE_PHASE per clause".into()),
        ("cnot_ladder".into(), "control q -> target q+1, ascending".into()),
        (
            "optimizer".into(),
            format!(
                "nelder-mead (1, 2, 0.5, 0.5); max_evals={} ftol={} restarts={} initial_step={} restart_jitter={}",
                o.max_evals, o.ftol, o.restarts, o.initial_step, o.restart_jitter
            ),
        ),
        (
            "qaoa_start".into(),
            format!("linear ramp gamma_max={} beta_max={}", cfg.gamma_max, cfg.beta_max),
        ),
        ("hea_start".into(), format!("uniform in [-{0}, {0}]", o.init_scale)),
    ])
}

fn trace_options(cfg: &ExperimentConfig) -> Result<TraceOptions> {
    Ok(TraceOptions {
        sre: Some(cfg.sre_config()?),
        permutation_min: cfg.permutation_min,
        colours: false,
        keep_states: false,
    })
}

/// Optimises the ansatz for one instance and returns the optimised circuit.
fn optimise(
    ansatz: Ansatz,
    formula: &CnfFormula,
    target: &TargetSpace,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<(Circuit, MinimizeResult)> {
    let (n, p) = (formula.n(), cfg.p);
    let mut opt = cfg.optimizer.clone();
    opt.seed = opt.seed.wrapping_add(seed);
    match ansatz {
        Ansatz::Structured => {
            let x0 = QaoaParams::linear_ramp(p, cfg.gamma_max, cfg.beta_max).to_flat();
            let result = if x0.is_empty() {
                let cost = qaoa_cost(formula, target, 0)(&[]);
                MinimizeResult {
                    x_best: Vec::new(),
                    f_best: cost,
                    evals_used: 1,
                    restarts_run: 0,
                    aborted_restarts: Vec::new(),
                    converged: true,
                }
            } else {
                minimize(qaoa_cost(formula, target, p), &x0, &opt)?
            };
            let circuit = build_qaoa(formula, &QaoaParams::from_flat(p, &result.x_best)?)?;
            Ok((circuit, result))
        }
        Ansatz::Unstructured => {
            if p == 0 {
                return Err(Error::input("the hardware-efficient ansatz needs p >= 1"));
            }
            let x0 = hea_initial(n, p, opt.init_scale, seed);
            let result = minimize(vqe_cost(target, n, p), &x0, &opt)?;
            let circuit = build_hea(n, p, &HeaParams::from_flat(n, p, &result.x_best)?)?;
            Ok((circuit, result))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub instance_id: String,
    pub seed: u64,
    pub source: Option<PathBuf>,
    /// Reason the instance was not run, e.g. an unsatisfiable input file.
    pub skipped: Option<String>,
    pub solutions: usize,
    pub gates: usize,
    pub final_hc: f64,
    pub final_sre: Option<f64>,
    /// Geodesic efficiency under the configured distance mode; `None` for a
    /// path of zero length.
    pub mu_gd: Option<f64>,
    pub path_length: f64,
    pub f_best: f64,
    pub evals_used: usize,
    pub restarts_run: usize,
    pub aborted_restarts: Vec<usize>,
    pub converged: bool,
    pub params: Vec<f64>,
    pub trace_file: Option<String>,
}

impl InstanceSummary {
    fn skipped(inst: &Instance, reason: String) -> Self {
        InstanceSummary {
            instance_id: inst.id.clone(),
            seed: inst.seed,
            source: inst.source.clone(),
            skipped: Some(reason),
            solutions: 0,
            gates: 0,
            final_hc: 0.0,
            final_sre: None,
            mu_gd: None,
            path_length: 0.0,
            f_best: 1.0,
            evals_used: 0,
            restarts_run: 0,
            aborted_restarts: Vec::new(),
            converged: false,
            params: Vec::new(),
            trace_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub ansatz: Ansatz,
    pub config: ExperimentConfig,
    pub notes: BTreeMap<String, String>,
    pub instances: Vec<InstanceSummary>,
}

#[derive(Serialize)]
struct TraceSidecar<'a> {
    header: &'a TraceHeader,
    summary: &'a InstanceSummary,
}

fn evolve_one(ansatz: Ansatz, inst: &Instance, dir: &Path, cfg: &ExperimentConfig) -> Result<InstanceSummary> {
    if inst.formula.n() > 8 && cfg.permutation_min {
        return Err(Error::Capability(format!(
            "{}: relabelling scan needs n <= 8, got {}",
            inst.id,
            inst.formula.n()
        )));
    }
    let solutions = inst.formula.solve_brute_force()?;
    if solutions.is_empty() {
        return Ok(InstanceSummary::skipped(inst, "unsatisfiable instance".into()));
    }
    let target = TargetSpace::from_solutions(&solutions)?;
    let (circuit, opt) = optimise(ansatz, &inst.formula, &target, inst.seed, cfg)?;
    let zero = StateVector::zero(inst.formula.n())?;
    let mut trace = run_trace(&circuit, &zero, &target, &trace_options(cfg)?)?;
    trace.header = TraceHeader {
        instance_id: inst.id.clone(),
        ansatz: ansatz.name().into(),
        seed: inst.seed,
        n: inst.formula.n(),
        p: cfg.p,
        alpha: cfg.alpha,
        log_base: cfg.log_base,
        notes: run_notes(cfg),
    };
    let file = format!("{}.csv", inst.id);
    write_trace_csv(&dir.join(&file), &trace_rows(&trace))?;
    let last = trace.records.last().expect("trace has a step-0 record");
    let summary = InstanceSummary {
        instance_id: inst.id.clone(),
        seed: inst.seed,
        source: inst.source.clone(),
        skipped: None,
        solutions: solutions.len(),
        gates: trace.gate_count(),
        final_hc: last.hc,
        final_sre: last.sre,
        mu_gd: trace.geodesic_efficiency(cfg.distance_mode).ok(),
        path_length: trace.path_length(),
        f_best: opt.f_best,
        evals_used: opt.evals_used,
        restarts_run: opt.restarts_run,
        aborted_restarts: opt.aborted_restarts,
        converged: opt.converged,
        params: opt.x_best,
        trace_file: Some(file),
    };
    write_json(
        &dir.join(format!("{}.json", inst.id)),
        &TraceSidecar {
            header: &trace.header,
            summary: &summary,
        },
    )?;
    Ok(summary)
}

/// Optimises and traces every instance, writing
/// `<output_dir>/<ansatz>/instNNN.{csv,json}` and `summary.json`.
pub fn cmd_evolve(ansatz: Ansatz, cfg: &ExperimentConfig) -> Result<EvolveSummary> {
    cfg.validate()?;
    let dir = cfg.output_dir.join(ansatz.name());
    let instances = load_instances(cfg)?;
    let rows = instances
        .par_iter()
        .map(|inst| evolve_one(ansatz, inst, &dir, cfg))
        .collect::<Result<Vec<_>>>()?;
    let summary = EvolveSummary {
        ansatz,
        config: cfg.clone(),
        notes: run_notes(cfg),
        instances: rows,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct QftDemoOutput {
    pub csv: PathBuf,
    pub input: String,
    /// Index of the last record before the qubit-reversal block.
    pub pre_swap_step: usize,
    pub trace: EvolutionTrace,
}

fn default_qft_input(n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.random_range(1..1usize << n)
}

/// Traces the QFT from `|x>` towards `{QFT |x>}`; without an explicit input a
/// nonzero `x` is drawn from the seed.
pub fn cmd_qft_demo(n: usize, input: Option<&str>, cfg: &ExperimentConfig) -> Result<QftDemoOutput> {
    let circuit = build_qft(n, true)?;
    let x = match input {
        Some(bits) => {
            if bits.len() != n {
                return Err(Error::input(format!("input `{bits}` has {} bits, expected {n}", bits.len())));
            }
            parse_bitstring(bits)?
        }
        None => default_qft_input(n, cfg.seed),
    };
    let bits = format_bitstring(n, x);
    let initial = StateVector::basis_index(n, x)?;
    let target = TargetSpace::single(circuit.run(&initial)?);
    let mut trace = run_trace(&circuit, &initial, &target, &trace_options(cfg)?)?;
    let mut notes = BTreeMap::from([
        ("step_unit".to_string(), "one gate".to_string()),
        ("target".to_string(), format!("QFT|{bits}>")),
    ]);
    notes.insert("distance_mode".into(), cfg.distance_mode.name().into());
    trace.header = TraceHeader {
        instance_id: format!("qft_n{n}_x{bits}"),
        ansatz: "qft".into(),
        seed: cfg.seed,
        n,
        p: 0,
        alpha: cfg.alpha,
        log_base: cfg.log_base,
        notes,
    };
    let dir = cfg.output_dir.join("qft");
    let csv = dir.join(format!("{}.csv", trace.header.instance_id));
    write_trace_csv(&csv, &trace_rows(&trace))?;
    write_json(&dir.join(format!("{}.json", trace.header.instance_id)), &trace.header)?;
    Ok(QftDemoOutput {
        csv,
        input: bits,
        pre_swap_step: qft_swap_block_start(n),
        trace,
    })
}

fn collect_csvs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_csvs(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(path);
        }
    }
    Ok(())
}

fn is_trace_file(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().next() == Some(TRACE_COLUMNS.join(",").as_str()))
}

/// Pools all trace files under `trace_dir` by ansatz label, writes
/// `<trace_dir>/stats/stats.json` and one pooled increment CSV per label.
pub fn cmd_stats(trace_dir: &Path) -> Result<Vec<StepStats>> {
    let mut files = Vec::new();
    collect_csvs(trace_dir, &mut files)?;
    let mut by_ansatz: BTreeMap<String, Vec<TraceRow>> = BTreeMap::new();
    let mut traces = 0;
    for path in files {
        if !is_trace_file(&path)? {
            continue;
        }
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let rows = read_trace_csv(file).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })?;
        traces += 1;
        for row in rows {
            by_ansatz.entry(row.ansatz.clone()).or_default().push(row);
        }
    }
    if traces == 0 {
        return Err(Error::input(format!("no trace files under {}", trace_dir.display())));
    }
    let out_dir = trace_dir.join("stats");
    let mut all = Vec::new();
    for (ansatz, rows) in &by_ansatz {
        all.push(StepStats::from_rows(ansatz, rows)?);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["instance_id", "step", "d_s0_perm_literal", "d_sre", "abs_d_sre"])?;
        for r in rows {
            if let (Some(ds0), Some(dsre)) = (r.d_s0_perm_literal, r.d_sre) {
                w.write_record([
                    r.instance_id.clone(),
                    r.step.to_string(),
                    super::format_float(ds0),
                    super::format_float(dsre),
                    super::format_float(dsre.abs()),
                ])?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::input(format!("csv buffer: {}", e.error())))?;
        write_atomic(&out_dir.join(format!("pooled_{ansatz}.csv")), &bytes)?;
    }
    write_json(&out_dir.join("stats.json"), &all)?;
    Ok(all)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumSource {
    CircuitFile(PathBuf),
    /// QFT on a seed-drawn nonzero basis input.
    Qft(usize),
    /// Optimised circuit for the first configured instance.
    Ansatz(Ansatz),
}

/// Writes the sorted per-qubit colour triples at every step to
/// `<output_dir>/spectrum/<name>.csv` and returns that path.
pub fn cmd_spectrum(source: &SpectrumSource, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let (name, circuit, initial) = match source {
        SpectrumSource::CircuitFile(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let circuit = Circuit::parse_text(&text)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "circuit".into());
            let zero = StateVector::zero(circuit.n())?;
            (stem, circuit, zero)
        }
        SpectrumSource::Qft(n) => {
            let x = default_qft_input(*n, cfg.seed);
            let name = format!("qft_n{n}_x{}", format_bitstring(*n, x));
            (name, build_qft(*n, true)?, StateVector::basis_index(*n, x)?)
        }
        SpectrumSource::Ansatz(ansatz) => {
            cfg.validate()?;
            let inst = load_instances(&ExperimentConfig {
                instances: 1,
                ..cfg.clone()
            })?
            .into_iter()
            .next()
            .ok_or_else(|| Error::input("no instance available"))?;
            let solutions = inst.formula.solve_brute_force()?;
            let target = TargetSpace::from_solutions(&solutions)?;
            let (circuit, _) = optimise(*ansatz, &inst.formula, &target, inst.seed, cfg)?;
            let zero = StateVector::zero(inst.formula.n())?;
            (format!("{}_{}", ansatz.name(), inst.id), circuit, zero)
        }
    };
    let mut psi = initial;
    let mut slices = Vec::with_capacity(circuit.len() + 1);
    slices.push(psi.colour_spectrum());
    for g in circuit.gates() {
        psi = psi.apply_gate(g)?;
        slices.push(psi.colour_spectrum());
    }
    let path = cfg.output_dir.join("spectrum").join(format!("{name}.csv"));
    write_atomic(&path, spectrum_csv_string(&slices)?.as_bytes())?;
    Ok(path)
}
