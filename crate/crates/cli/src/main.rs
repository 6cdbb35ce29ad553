use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use loopdec::bp::{decode_bp, BpParams};
use loopdec::channel::{awgn_sample, effective_distance, llr_from_output, LlrVector};
use loopdec::code::{build_tanner_155, emit_alist, parse_alist, Codeword};
use loopdec::effective::{decode_loop_corrected_bp, LoopCorrectedParams};
use loopdec::exact::exact_marginals;
use loopdec::experiments::{self as exp, CampaignKind, CorrectionInput, ExperimentConfig};
use loopdec::instanton::{build_instanton_catalog, read_catalog, write_catalog};
use loopdec::loops::{
    enumerate_generalized_loops, filtered_triads, find_critical_loop, partition_function_series, CriticalLoopParams,
    LoopBudget,
};
use loopdec::lp::{decode_lp, decode_lp_erasure, LoopSelector, LpDecodeResult};
use loopdec::{testgraphs, ParityCheckCode};

/// Worker threads for parallel campaigns; defaults to all cores.
const THREADS_ENV: &str = "LOOPDEC_THREADS";

#[derive(Parser)]
#[command(name = "loopdec", version, about = "BP, LP and loop-calculus decoding of binary LDPC codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parity-check code utilities.
    #[command(subcommand)]
    Code(CodeCmd),
    /// AWGN channel samples.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Belief propagation decoders.
    #[command(subcommand)]
    Bp(BpCmd),
    /// Loop series and critical loops.
    #[command(subcommand)]
    Loops(LoopsCmd),
    /// Linear-programming decoding.
    #[command(subcommand)]
    Lp(LpCmd),
    /// Pseudo-codeword search.
    #[command(subcommand)]
    Instanton(InstantonCmd),
    /// Campaigns writing a run directory.
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Sizes, degrees, rank and girth of an alist code.
    Info { file: PathBuf },
    /// Writes the quasi-cyclic (155, 64, 20) Tanner code as alist.
    MakeTanner155 {
        #[arg(short)]
        o: PathBuf,
    },
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Log-likelihoods of one all-(+1) transmission, one value per line.
    Sample {
        #[arg(long)]
        code: String,
        #[arg(long)]
        s2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// alist file, or `tanner155` for the built-in code.
    #[arg(long)]
    code: String,
    /// Log-likelihoods, one per line.
    #[arg(long)]
    llr: PathBuf,
}

#[derive(Args)]
struct BpArgs {
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    damping: Option<f64>,
}

impl BpArgs {
    fn params(&self) -> BpParams {
        let d = BpParams::default();
        BpParams {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            damping: self.damping.unwrap_or(d.damping),
        }
    }
}

#[derive(Subcommand)]
enum BpCmd {
    Decode {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        bp: BpArgs,
    },
    /// Bare BP, then BP with critical loops in the free energy.
    DecodeLoop {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 3)]
        max_loops: usize,
        #[command(flatten)]
        bp: BpArgs,
    },
}

#[derive(Subcommand)]
enum LoopsCmd {
    /// Triads and critical loops at the BP state.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Only report triads at or above this amplitude.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[command(flatten)]
        bp: BpArgs,
    },
    /// Loop series against brute force (small codes).
    ZCheck {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Subcommand)]
enum LpCmd {
    Decode {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        erasure: bool,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
}

#[derive(Subcommand)]
enum InstantonCmd {
    Search {
        #[arg(long, default_value = "tanner155")]
        code: String,
        #[arg(long, default_value_t = 500)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(short)]
        o: PathBuf,
    },
}

#[derive(Args)]
struct ExpArgs {
    /// Flat JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short)]
    o: Option<PathBuf>,
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_instantons: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    s2: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
}

#[derive(Subcommand)]
enum ExpCmd {
    /// LP-erasure on catalog instantons and their rescalings.
    Correct(ExpArgs),
    /// LP vs LP-erasure frame errors over an s2 grid.
    Fer(ExpArgs),
    /// Loop series vs brute force on the bundled small graphs.
    Zcheck(ExpArgs),
}

fn load_code(arg: &str) -> Result<ParityCheckCode> {
    if arg == "tanner155" {
        return Ok(build_tanner_155());
    }
    let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    Ok(parse_alist(&text)?)
}

fn load_input(input: &Input) -> Result<(ParityCheckCode, Vec<f64>)> {
    let code = load_code(&input.code)?;
    let h = LlrVector::read_csv(&input.llr)?.h;
    if h.len() != code.n_bits() {
        bail!("{} log-likelihoods for a code of length {}", h.len(), code.n_bits());
    }
    Ok((code, h))
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn bits(c: &Codeword) -> String {
    c.bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn code_info(file: &Path) -> Result<Value> {
    let code = load_code(&file.to_string_lossy())?;
    let degrees = |d: Vec<usize>| {
        let (lo, hi) = (d.iter().min().copied(), d.iter().max().copied());
        json!({"min": lo, "max": hi})
    };
    Ok(json!({
        "n_bits": code.n_bits(),
        "n_checks": code.n_checks(),
        "n_edges": code.n_edges(),
        "bit_degree": degrees((0..code.n_bits()).map(|i| code.bit_degree(i)).collect()),
        "check_degree": degrees((0..code.n_checks()).map(|a| code.check_degree(a)).collect()),
        "rank": code.rank(),
        "dimension": code.dimension(),
        "girth": code.girth(),
    }))
}

fn lp_json(code: &ParityCheckCode, r: &LpDecodeResult) -> Value {
    let pc = r.pseudo_codeword();
    json!({
        "status": if r.is_success() { "success" } else { "failure" },
        "x": pc.omega,
        "integral": pc.is_integral,
        "objective": pc.objective_value,
        "d_eff": effective_distance(&pc.omega).ok(),
        "codeword": match r { LpDecodeResult::Success { codeword, .. } => Some(bits(codeword)), _ => None },
        "valid": match r { LpDecodeResult::Success { codeword, .. } => code.is_codeword_bits(&codeword.bits), _ => false },
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Code(CodeCmd::Info { file }) => print(&code_info(&file)?),
        Cmd::Code(CodeCmd::MakeTanner155 { o }) => {
            fs::write(&o, emit_alist(&build_tanner_155())).with_context(|| format!("writing {}", o.display()))?;
            Ok(())
        }
        Cmd::Channel(ChannelCmd::Sample { code, s2, seed, o }) => {
            let code = load_code(&code)?;
            let noise = awgn_sample(&Codeword::zero(code.n_bits()), s2, seed)?;
            let llr = llr_from_output(&noise);
            match o {
                Some(p) => llr.write_csv(&p)?,
                None => print!("{}", llr.to_csv()),
            }
            Ok(())
        }
        Cmd::Bp(BpCmd::Decode { input, bp }) => {
            let (code, h) = load_input(&input)?;
            let r = decode_bp(&code, &h, &bp.params())?;
            print(&json!({
                "converged": r.state.converged,
                "iterations": r.state.iterations_run,
                "magnetizations": r.beliefs.bit_magnetizations,
                "free_energy": r.free_energy,
                "decoded": bits(&r.decoded),
                "success": r.success,
            }))
        }
        Cmd::Bp(BpCmd::DecodeLoop { input, max_loops, bp }) => {
            let (code, h) = load_input(&input)?;
            let params = LoopCorrectedParams {
                bp: bp.params(),
                max_loops,
                ..LoopCorrectedParams::default()
            };
            let r = decode_loop_corrected_bp(&code, &h, &params)?;
            print(&json!({
                "success": r.success,
                "bare_success": r.bare_success,
                "decoded": bits(&r.decoded),
                "m_eff": r.magnetizations,
                "attempts": r.attempts,
            }))
        }
        Cmd::Loops(LoopsCmd::Analyze { input, threshold, bp }) => {
            let (code, h) = load_input(&input)?;
            let r = decode_bp(&code, &h, &bp.params())?;
            let crit = CriticalLoopParams::default();
            let triads: Vec<_> = filtered_triads(&code, &r.beliefs, None)
                .into_iter()
                .filter(|t| t.amplitude.abs() >= threshold)
                .collect();
            let found = find_critical_loop(&code, &r.beliefs, &crit)?;
            print(&json!({
                "bp_converged": r.state.converged,
                "m": r.beliefs.bit_magnetizations,
                "triads": triads,
                "critical": found.as_ref().map(|f| json!({
                    "threshold": f.threshold,
                    "loops": f.maximal(),
                    "candidates": f.candidates.len(),
                })),
            }))
        }
        Cmd::Loops(LoopsCmd::ZCheck { input }) => {
            let (code, h) = load_input(&input)?;
            let exact = exact_marginals(&code, &h)?;
            let (state, beliefs) = loopdec::bp::run_bp(&code, &h, &testgraphs::tight_bp())?;
            let loops = enumerate_generalized_loops(&code, LoopBudget::default())?;
            let s = partition_function_series(&code, &h, &beliefs, &loops)?;
            print(&json!({
                "bp_converged": state.converged,
                "n_loops": loops.len(),
                "ln_z0": s.ln_z0,
                "sum_r": s.sum_r,
                "ln_z_series": s.ln_z,
                "ln_z_bruteforce": exact.ln_z,
                "rel_err": (s.ln_z - exact.ln_z).exp_m1().abs(),
            }))
        }
        Cmd::Lp(LpCmd::Decode { input, erasure, epsilon }) => {
            let (code, h) = load_input(&input)?;
            if erasure {
                let out = decode_lp_erasure(&code, &h, epsilon, &LoopSelector::default())?;
                let mut v = lp_json(&code, &out.result);
                v["bare_success"] = json!(out.bare_success);
                v["loops_tried"] = serde_json::to_value(&out.trail)?;
                print(&v)
            } else {
                print(&lp_json(&code, &decode_lp(&code, &h)?))
            }
        }
        Cmd::Instanton(InstantonCmd::Search { code, seeds, first_seed, o }) => {
            let code = load_code(&code)?;
            let seeds: Vec<u64> = (first_seed..first_seed + seeds).collect();
            let cat = build_instanton_catalog(&code, &seeds, &Default::default());
            write_catalog(&cat, &o)?;
            print(&json!({
                "raw_count": cat.raw_count,
                "distinct_count": cat.entries.len(),
                "below_20": cat.entries.iter().filter(|e| e.record.effective_distance < 20.0).count(),
                "min_effective_distance": cat.min_effective_distance(),
                "output": o,
            }))
        }
        Cmd::Exp(cmd) => run_exp(cmd),
    }
}

fn exp_config(kind: CampaignKind, a: &ExpArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.kind = kind;
    cfg.code = a.code.clone().or(cfg.code);
    cfg.catalog = a.catalog.clone().or(cfg.catalog);
    cfg.output = a.o.clone().or(cfg.output);
    cfg.n_seeds = a.seeds.unwrap_or(cfg.n_seeds);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.epsilon = a.epsilon.unwrap_or(cfg.epsilon);
    cfg.max_instantons = a.max_instantons.or(cfg.max_instantons);
    cfg.s2_grid = a.s2.clone().unwrap_or(cfg.s2_grid);
    cfg.trials = a.trials.unwrap_or(cfg.trials);
    cfg.draws = a.draws.unwrap_or(cfg.draws);
    cfg.validate()?;
    Ok(cfg)
}

fn run_exp(cmd: ExpCmd) -> Result<()> {
    let (kind, args) = match &cmd {
        ExpCmd::Correct(a) => (CampaignKind::InstantonCorrection, a),
        ExpCmd::Fer(a) => (CampaignKind::FerSweep, a),
        ExpCmd::Zcheck(a) => (CampaignKind::ZCheckSuite, a),
    };
    let cfg = exp_config(kind, args)?;
    let Some(dir) = cfg.output.clone() else {
        bail!("an output directory is required (-o or \"output\" in the config)");
    };
    let code = match &cfg.code {
        Some(p) => load_code(&p.to_string_lossy())?,
        None => build_tanner_155(),
    };
    let summary = match kind {
        CampaignKind::InstantonCorrection => {
            let inputs: Vec<CorrectionInput> = match &cfg.catalog {
                Some(c) => read_catalog(c)?
                    .into_iter()
                    .map(|(seed, omega, _)| CorrectionInput { seed, omega })
                    .collect(),
                None => {
                    let seeds: Vec<u64> = (cfg.seed..cfg.seed + cfg.n_seeds).collect();
                    let cat = build_instanton_catalog(&code, &seeds, &cfg.instanton);
                    write_catalog(&cat, &dir.join("catalog"))?;
                    cat.entries
                        .into_iter()
                        .map(|e| CorrectionInput {
                            seed: e.record.seed,
                            omega: e.record.pseudo_codeword.omega,
                        })
                        .collect()
                }
            };
            let report = exp::run_instanton_correction(&code, &inputs, &cfg)?;
            exp::write_run(&dir, &cfg, Some(&code), &report, &report.rows, &exp::correction_csv(&report))?;
            json!({
                "rows": report.rows.len(),
                "corrected_fraction": report.corrected_fraction,
                "probe_corrected_fraction": report.probe_corrected_fraction,
                "by_scale": report.by_scale,
            })
        }
        CampaignKind::FerSweep => {
            let report = exp::run_fer_sweep(&code, &cfg)?;
            exp::write_run(&dir, &cfg, Some(&code), &report, &report.rows, &exp::fer_csv(&report))?;
            json!(report
                .rows
                .iter()
                .map(|r| json!({"s2": r.s2, "trials": r.trials, "lp_failures": r.lp_failures, "erasure_failures": r.erasure_failures}))
                .collect::<Vec<_>>())
        }
        CampaignKind::ZCheckSuite => {
            let report = exp::run_zcheck_suite(&testgraphs::zcheck_suite(), &cfg)?;
            exp::write_run(&dir, &cfg, None, &report, &report.rows, &exp::zcheck_csv(&report))?;
            serde_json::to_value(&report)?
        }
    };
    print(&json!({"output": dir, "summary": summary}))
}

fn main() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
