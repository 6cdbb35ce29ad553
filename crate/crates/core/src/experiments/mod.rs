//! Campaign runners: instanton correction tables, LP vs LP-erasure frame
//! error sweeps, and the loop-series regression suite. Reports are plain
//! serde structs; [`write_run`] lays them out in a run directory.

use std::fs;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bp::BpParams;
use crate::channel::{awgn_sample, effective_distance, llr_from_output};
use crate::code::{emit_alist, Codeword, ParityCheckCode};
use crate::error::{Error, Result};
use crate::exact::exact_marginals;
use crate::instanton::{pushed_noise, InstantonParams};
use crate::loops::{enumerate_generalized_loops, partition_function_series, LoopBudget};
use crate::lp::{decode_lp, decode_lp_erasure, LoopSelector, LpDecodeResult};
use crate::testgraphs::{self, TestGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    InstantonCorrection,
    FerSweep,
    ZCheckSuite,
}

/// One JSON document for every campaign; unused fields are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub kind: CampaignKind,
    /// alist file; the built-in Tanner (155, 64, 20) code when absent.
    pub code: Option<PathBuf>,
    /// Instanton catalog directory; built inline from `n_seeds` when absent.
    pub catalog: Option<PathBuf>,
    pub n_seeds: u64,
    pub seed: u64,
    pub instanton: InstantonParams,
    /// Only instantons below this effective distance are tested.
    pub d_eff_max: f64,
    /// Use at most this many instantons (lowest `d_eff` first).
    pub max_instantons: Option<usize>,
    pub rescalings: Vec<f64>,
    pub epsilon: f64,
    /// Second erasure strength whose corrected fraction is reported alongside.
    pub probe_epsilon: Option<f64>,
    pub selector: LoopSelector,
    pub s2_grid: Vec<f64>,
    pub trials: usize,
    pub draws: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: CampaignKind::InstantonCorrection,
            code: None,
            catalog: None,
            n_seeds: 500,
            seed: 0,
            instanton: InstantonParams::default(),
            d_eff_max: 20.0,
            max_instantons: None,
            rescalings: vec![1.0, 1.05, 1.1, 1.15, 1.2],
            epsilon: 0.0,
            probe_epsilon: Some(0.99),
            selector: LoopSelector::default(),
            s2_grid: vec![2.0, 3.0, 4.0],
            trials: 1000,
            draws: 50,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if let Some(p) = self.code.iter().chain(&self.catalog).find(|p| !p.exists()) {
            return Err(Error::InvalidArgument(format!("{} does not exist", p.display())));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1)");
        }
        match self.kind {
            CampaignKind::InstantonCorrection if self.rescalings.is_empty() => bad("rescalings must be non-empty"),
            CampaignKind::FerSweep if self.s2_grid.is_empty() || self.trials == 0 => {
                bad("s2 grid and trial count must be non-empty")
            }
            CampaignKind::ZCheckSuite if self.draws == 0 => bad("draws must be positive"),
            _ => Ok(()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// A pseudo-codeword to test, with the seed that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionInput {
    pub seed: u64,
    pub omega: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRow {
    pub instanton: usize,
    pub seed: u64,
    pub d_eff: f64,
    pub scale: f64,
    pub bare_lp_failed: bool,
    pub attempts: usize,
    /// Loops of the successful attempt, or of the last one on failure.
    pub loop_bits: Vec<Vec<usize>>,
    pub loop_r: Vec<f64>,
    pub erasure_success: bool,
    pub decoded_correctly: bool,
    pub probe_decoded_correctly: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSummary {
    pub scale: f64,
    pub corrected: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub rows: Vec<CorrectionRow>,
    /// `None` for an empty catalog.
    pub corrected_fraction: Option<f64>,
    pub probe_corrected_fraction: Option<f64>,
    pub by_scale: Vec<ScaleSummary>,
}

impl CorrectionReport {
    pub fn failures(&self) -> impl Iterator<Item = &CorrectionRow> {
        self.rows.iter().filter(|r| !r.decoded_correctly)
    }
}

fn decodes_to_zero(r: &LpDecodeResult) -> bool {
    matches!(r, LpDecodeResult::Success { codeword, .. } if codeword.weight() == 0)
}

/// Instanton noise rescaled about the all-(+1) signal: `h = 1 - s (1 - h_inst)`.
pub fn rescaled_instanton(omega: &[f64], push: f64, scale: f64) -> Result<Vec<f64>> {
    Ok(pushed_noise(omega, push)?.iter().map(|v| 1.0 - scale * (1.0 - v)).collect())
}

/// LP-erasure on every instanton below `d_eff_max` and its rescalings.
pub fn run_instanton_correction(
    code: &ParityCheckCode,
    catalog: &[CorrectionInput],
    cfg: &ExperimentConfig,
) -> Result<CorrectionReport> {
    let mut chosen: Vec<(usize, &CorrectionInput, f64)> = catalog
        .iter()
        .enumerate()
        .map(|(k, c)| Ok((k, c, effective_distance(&c.omega)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, _, d)| *d < cfg.d_eff_max)
        .collect();
    chosen.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    if let Some(m) = cfg.max_instantons {
        chosen.truncate(m);
    }
    let jobs: Vec<(usize, &CorrectionInput, f64, f64)> = chosen
        .iter()
        .flat_map(|&(k, c, d)| cfg.rescalings.iter().map(move |&s| (k, c, d, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(k, c, d, s)| -> Result<CorrectionRow> {
            let h = rescaled_instanton(&c.omega, cfg.instanton.push, s)?;
            let out = decode_lp_erasure(code, &h, cfg.epsilon, &cfg.selector)?;
            let last = out.trail.iter().rev().find(|a| a.success).or(out.trail.last());
            let probe = match cfg.probe_epsilon {
                Some(eps) => Some(decodes_to_zero(&decode_lp_erasure(code, &h, eps, &cfg.selector)?.result)),
                None => None,
            };
            Ok(CorrectionRow {
                instanton: k,
                seed: c.seed,
                d_eff: d,
                scale: s,
                bare_lp_failed: !out.bare_success,
                attempts: out.trail.len(),
                loop_bits: last.map(|a| a.loops.iter().map(|l| l.0.clone()).collect()).unwrap_or_default(),
                loop_r: last.map(|a| a.loops.iter().map(|l| l.1).collect()).unwrap_or_default(),
                erasure_success: out.is_success(),
                decoded_correctly: decodes_to_zero(&out.result),
                probe_decoded_correctly: probe,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fraction = |n: usize| (!rows.is_empty()).then(|| n as f64 / rows.len() as f64);
    let corrected = rows.iter().filter(|r| r.decoded_correctly).count();
    let probe = cfg
        .probe_epsilon
        .and_then(|_| fraction(rows.iter().filter(|r| r.probe_decoded_correctly == Some(true)).count()));
    let by_scale = cfg
        .rescalings
        .iter()
        .map(|&s| {
            let at: Vec<&CorrectionRow> = rows.iter().filter(|r| r.scale == s).collect();
            ScaleSummary {
                scale: s,
                corrected: at.iter().filter(|r| r.decoded_correctly).count(),
                total: at.len(),
            }
        })
        .collect();
    Ok(CorrectionReport {
        corrected_fraction: fraction(corrected),
        probe_corrected_fraction: probe,
        rows,
        by_scale,
    })
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Per-trial seed from the master seed, the grid index and the trial index.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((point as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerRow {
    pub s2: f64,
    pub trials: usize,
    pub lp_failures: usize,
    pub erasure_failures: usize,
    pub lp_ci: (f64, f64),
    pub erasure_ci: (f64, f64),
    pub lp_failed_trials: Vec<usize>,
    pub erasure_failed_trials: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerReport {
    pub rows: Vec<FerRow>,
}

/// All-(+1) transmission over AWGN at each `s2`; a trial fails when the
/// decoder does not return the transmitted word.
pub fn run_fer_sweep(code: &ParityCheckCode, cfg: &ExperimentConfig) -> Result<FerReport> {
    let zero = Codeword::zero(code.n_bits());
    let mut rows = Vec::with_capacity(cfg.s2_grid.len());
    for (p, &s2) in cfg.s2_grid.iter().enumerate() {
        let outcomes = (0..cfg.trials)
            .into_par_iter()
            .map(|t| -> Result<(bool, bool)> {
                let noise = awgn_sample(&zero, s2, trial_seed(cfg.seed, p, t))?;
                let h = llr_from_output(&noise).h;
                let lp = decode_lp(code, &h)?;
                if decodes_to_zero(&lp) {
                    return Ok((false, false));
                }
                let er = decode_lp_erasure(code, &h, cfg.epsilon, &cfg.selector)?;
                Ok((true, !decodes_to_zero(&er.result)))
            })
            .collect::<Result<Vec<_>>>()?;
        let lp_failed_trials: Vec<usize> = (0..outcomes.len()).filter(|&t| outcomes[t].0).collect();
        let erasure_failed_trials: Vec<usize> = (0..outcomes.len()).filter(|&t| outcomes[t].1).collect();
        rows.push(FerRow {
            s2,
            trials: cfg.trials,
            lp_failures: lp_failed_trials.len(),
            erasure_failures: erasure_failed_trials.len(),
            lp_ci: wilson_interval(lp_failed_trials.len(), cfg.trials, 1.96),
            erasure_ci: wilson_interval(erasure_failed_trials.len(), cfg.trials, 1.96),
            lp_failed_trials,
            erasure_failed_trials,
        });
    }
    Ok(FerReport { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZCheckRow {
    pub graph: String,
    pub n_bits: usize,
    pub n_loops: usize,
    pub draws: usize,
    /// Field draws discarded for lack of an interior BP fixed point.
    pub rejected: usize,
    /// `max |Z_series / Z - 1|`.
    pub max_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZCheckReport {
    pub rows: Vec<ZCheckRow>,
    /// Generalized loops of the four-check example graph.
    pub k4_loop_count: usize,
}

/// Loop series against brute force on `graphs` with `h ~ N(0, 0.5^2)`.
pub fn run_zcheck_suite(graphs: &[TestGraph], cfg: &ExperimentConfig) -> Result<ZCheckReport> {
    let bp: BpParams = testgraphs::tight_bp();
    let rows = graphs
        .par_iter()
        .enumerate()
        .map(|(k, g)| -> Result<ZCheckRow> {
            let loops = enumerate_generalized_loops(&g.code, LoopBudget::default())?;
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, k, 0));
            let mut max_rel_err: f64 = 0.0;
            let mut rejected = 0;
            for _ in 0..cfg.draws {
                let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &bp, 1000, &mut rng)?;
                rejected += d.rejected;
                let exact = exact_marginals(&g.code, &d.h)?;
                let s = partition_function_series(&g.code, &d.h, &d.beliefs, &loops)?;
                let err = (s.ln_z - exact.ln_z).exp_m1().abs();
                max_rel_err = max_rel_err.max(if err.is_nan() { f64::INFINITY } else { err });
            }
            Ok(ZCheckRow {
                graph: g.name.to_string(),
                n_bits: g.code.n_bits(),
                n_loops: loops.len(),
                draws: cfg.draws,
                rejected,
                max_rel_err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k4_loop_count = enumerate_generalized_loops(&testgraphs::k4_cycle_code(), LoopBudget::default())?.len();
    Ok(ZCheckReport { rows, k4_loop_count })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: CampaignKind,
    pub config_sha256: String,
    pub code_sha256: Option<String>,
    pub version: String,
}

/// Writes `config.json`, `manifest.json`, `report.json`, `rows.jsonl` (one
/// line per row) and `summary.csv` into `dir`.
pub fn write_run<R: Serialize, T: Serialize>(
    dir: &Path,
    cfg: &ExperimentConfig,
    code: Option<&ParityCheckCode>,
    report: &R,
    rows: &[T],
    summary_csv: &str,
) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(p, e))
    };
    let cfg_text = serde_json::to_string_pretty(cfg)?;
    let manifest = Manifest {
        kind: cfg.kind,
        config_sha256: sha256_hex(cfg_text.as_bytes()),
        code_sha256: code.map(|c| sha256_hex(emit_alist(c).as_bytes())),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write("config.json", &cfg_text)?;
    write("manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
    write("report.json", &serde_json::to_string_pretty(report)?)?;
    let mut lines = String::new();
    for r in rows {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    write("rows.jsonl", &lines)?;
    write("summary.csv", summary_csv)?;
    Ok(manifest)
}

pub fn correction_csv(report: &CorrectionReport) -> String {
    let mut s = String::from("scale,corrected,total\n");
    for b in &report.by_scale {
        s.push_str(&format!("{},{},{}\n", b.scale, b.corrected, b.total));
    }
    s
}

pub fn fer_csv(report: &FerReport) -> String {
    let mut s = String::from("s2,trials,lp_failures,erasure_failures,lp_lo,lp_hi,erasure_lo,erasure_hi\n");
    for r in &report.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.s2, r.trials, r.lp_failures, r.erasure_failures, r.lp_ci.0, r.lp_ci.1, r.erasure_ci.0, r.erasure_ci.1
        ));
    }
    s
}

pub fn zcheck_csv(report: &ZCheckReport) -> String {
    let mut s = String::from("graph,n_bits,n_loops,draws,rejected,max_rel_err\n");
    for r in &report.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{:e}\n",
            r.graph, r.n_bits, r.n_loops, r.draws, r.rejected, r.max_rel_err
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_rate() {
        let (lo, hi) = wilson_interval(10, 100, 1.96);
        assert!(lo < 0.1 && 0.1 < hi);
        assert!((lo - 0.0552).abs() < 1e-3 && (hi - 0.1744).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
        assert_eq!(wilson_interval(0, 50, 1.96).0, 0.0);
    }

    #[test]
    fn empty_catalog_gives_empty_report() {
        let code = testgraphs::hamming74();
        let r = run_instanton_correction(&code, &[], &ExperimentConfig::default()).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.corrected_fraction, None);
    }

    #[test]
    fn config_round_trips_and_fills_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"kind": "fer-sweep", "trials": 7}"#).unwrap();
        assert_eq!(cfg.kind, CampaignKind::FerSweep);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.rescalings.len(), 5);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig { s2_grid: vec![], ..cfg }.validate().is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(0, 0, 0), trial_seed(0, 0, 1));
        assert_ne!(trial_seed(0, 1, 0), trial_seed(0, 0, 1));
        assert_eq!(trial_seed(5, 2, 3), trial_seed(5, 2, 3));
    }
}
