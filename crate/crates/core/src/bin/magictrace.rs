use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use magictrace::harness::{
    cmd_evolve, cmd_qft_demo, cmd_sat_gen, cmd_spectrum, cmd_stats, Ansatz, ExperimentConfig, SpectrumSource,
};
use magictrace::{DistanceMode, LogBase, Result};

#[derive(Parser)]
#[command(name = "magictrace", version, about = "Gate-by-gate magic and target-distance traces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override fields of the JSON config.
#[derive(Args)]
struct Common {
    /// JSON file with any subset of the experiment fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    p: Option<usize>,
    #[arg(long, global = true)]
    ratio: Option<f64>,
    #[arg(long, global = true)]
    instances: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// `2` or `e`.
    #[arg(long, global = true)]
    log_base: Option<LogBase>,
    /// `paper_literal` or `fubini_study`.
    #[arg(long, global = true)]
    distance_mode: Option<DistanceMode>,
    #[arg(long, global = true)]
    permutation_min: Option<bool>,
    #[arg(long, global = true, env = "MAGICTRACE_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    max_evals: Option<usize>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnsatzArg {
    Structured,
    Unstructured,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Generate satisfiable random 3-CNF instances as DIMACS files.
    SatGen,
    /// Trace the QFT with and without qubit relabelling.
    QftDemo {
        /// Input basis state, qubit 1 first; drawn from the seed when absent.
        #[arg(long)]
        input: Option<String>,
    },
    /// Optimise an ansatz per instance and write full traces.
    Evolve {
        #[arg(long, value_enum, default_value = "both")]
        ansatz: AnsatzArg,
        /// DIMACS files to run instead of generated instances.
        #[arg(long = "instance-file")]
        instance_files: Vec<PathBuf>,
    },
    /// Pool per-step increments from trace CSVs and summarise them.
    Stats {
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Per-step sorted colour triples of every qubit.
    Spectrum {
        /// Circuit in the line-oriented text format.
        #[arg(long, conflicts_with = "ansatz")]
        circuit: Option<PathBuf>,
        /// `qft`, `structured` or `unstructured`.
        #[arg(long, default_value = "qft")]
        ansatz: String,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| magictrace::Error::Io { path: path.clone(), source: e })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = c.$field.clone() { cfg.$field = v; } )* };
    }
    set!(n, p, ratio, instances, seed, alpha, log_base, distance_mode, permutation_min, output_dir);
    if let Some(v) = c.max_evals {
        cfg.optimizer.max_evals = v;
    }
    if let Some(v) = c.restarts {
        cfg.optimizer.restarts = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::SatGen => {
            let out = cmd_sat_gen(&cfg)?;
            println!("wrote {} instances to {}", out.instances.len(), out.dir.display());
        }
        Command::QftDemo { input } => {
            let out = cmd_qft_demo(cfg.n, input.as_deref(), &cfg)?;
            let pre = &out.trace.records[out.pre_swap_step];
            let last = out.trace.records.last().expect("step 0 always present");
            println!(
                "input {}: before swaps s0(T)={:.6} s0([T])={:.6}; final s0(T)={:.3e}",
                out.input,
                pre.s0_t(cfg.distance_mode),
                pre.s0_tperm(cfg.distance_mode).unwrap_or(f64::NAN),
                last.s0_t(cfg.distance_mode),
            );
            println!("wrote {}", out.csv.display());
        }
        Command::Evolve { ansatz, instance_files } => {
            if !instance_files.is_empty() {
                cfg.instance_files = instance_files;
            }
            let which: &[Ansatz] = match ansatz {
                AnsatzArg::Structured => &[Ansatz::Structured],
                AnsatzArg::Unstructured => &[Ansatz::Unstructured],
                AnsatzArg::Both => &Ansatz::ALL,
            };
            for &a in which {
                let summary = cmd_evolve(a, &cfg)?;
                let ran: Vec<_> = summary.instances.iter().filter(|s| s.skipped.is_none()).collect();
                let reached = ran.iter().filter(|s| s.final_hc > 0.5).count();
                println!(
                    "{a}: {} traces, {reached} with final <H_c> > 0.5, {} skipped",
                    ran.len(),
                    summary.instances.len() - ran.len()
                );
            }
        }
        Command::Stats { trace_dir } => {
            let dir = trace_dir.unwrap_or_else(|| cfg.output_dir.clone());
            for s in cmd_stats(&dir)? {
                println!(
                    "{}: steps={} Q1={:.4} Q2={:.4} Q3={:.4} neg={:.3} pos={:.3} r={}",
                    s.ansatz,
                    s.steps,
                    s.q1,
                    s.q2,
                    s.q3,
                    s.fraction_negative,
                    s.fraction_positive,
                    s.pearson_r.map_or("null".into(), |r| format!("{r:.3}"))
                );
            }
        }
        Command::Spectrum { circuit, ansatz } => {
            let source = match circuit {
                Some(path) => SpectrumSource::CircuitFile(path),
                None if ansatz.eq_ignore_ascii_case("qft") => SpectrumSource::Qft(cfg.n),
                None => SpectrumSource::Ansatz(ansatz.parse()?),
            };
            println!("wrote {}", cmd_spectrum(&source, &cfg)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
