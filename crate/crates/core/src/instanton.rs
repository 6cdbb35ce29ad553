//! Pseudo-codeword search by alternating LP decoding and equal-cost noise.
//!
//! From noise `h`, LP decoding returns a pseudo-codeword `w`; the noise
//! `h_i = 1 - w_i (sum w) / (sum w^2)` ties `w` with the zero codeword, and a
//! tiny push past that surface makes `w` (or a better pseudo-codeword) win the
//! next LP. The fixed point is an instanton.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{instanton_noise_for, write_csv_column, LlrVector};
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::lp::{decode_lp, PseudoCodeword};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantonParams {
    pub max_steps: usize,
    /// Standard deviation of the initial noise around the all-(+1) signal.
    pub initial_sd: f64,
    /// The equal-cost noise is pushed by `1 + push` toward the pseudo-codeword.
    pub push: f64,
    /// When LP decodes the initial noise correctly, the noise is redrawn with
    /// its deviation multiplied by `escalation`, at most this many times.
    pub max_escalations: usize,
    pub escalation: f64,
    /// Two pseudo-codewords closer than this (max norm) are the same.
    pub repeat_tol: f64,
}

impl Default for InstantonParams {
    fn default() -> Self {
        InstantonParams {
            max_steps: 100,
            initial_sd: 1.0,
            push: 1e-6,
            max_escalations: 20,
            escalation: 1.25,
            repeat_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantonRecord {
    pub seed: u64,
    pub pseudo_codeword: PseudoCodeword,
    /// Equal-cost noise of the final pseudo-codeword (without the push).
    pub instanton_llr: LlrVector,
    pub effective_distance: f64,
    /// `(step, d_eff)` for every LP failure, starting with the initial noise.
    pub trajectory: Vec<(usize, f64)>,
    /// The pseudo-codeword repeated before `max_steps`.
    pub converged: bool,
    /// Initial deviation actually used.
    pub initial_sd: f64,
}

impl InstantonRecord {
    pub fn steps(&self) -> usize {
        self.trajectory.len()
    }

    /// `d_eff` never increased along the trajectory.
    pub fn is_monotone(&self) -> bool {
        self.trajectory.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Equal-cost noise pushed by `1 + push` past the tie toward `omega`.
pub fn pushed_noise(omega: &[f64], push: f64) -> Result<Vec<f64>> {
    let tied = instanton_noise_for(omega)?;
    Ok(tied.h.iter().map(|h| 1.0 - (1.0 - h) * (1.0 + push)).collect())
}

pub fn search_instanton(code: &ParityCheckCode, seed: u64, params: &InstantonParams) -> Result<InstantonRecord> {
    if params.max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    let n = code.n_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sd = params.initial_sd;
    let mut first = None;
    for _ in 0..=params.max_escalations {
        let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let h: Vec<f64> = (0..n).map(|_| 1.0 + normal.sample(&mut rng)).collect();
        let r = decode_lp(code, &h)?;
        let pc = r.pseudo_codeword();
        if pc.omega.iter().any(|&w| w > 0.0) {
            first = Some(pc.clone());
            break;
        }
        sd *= params.escalation;
    }
    let Some(mut pc) = first else {
        return Err(Error::InvalidArgument(format!(
            "seed {seed}: LP never failed on the initial noise"
        )));
    };
    let mut trajectory = vec![(0, pc.effective_distance)];
    let mut converged = false;
    for step in 1..params.max_steps {
        let h = pushed_noise(&pc.omega, params.push)?;
        let next = decode_lp(code, &h)?.pseudo_codeword().clone();
        if next.omega.iter().all(|&w| w <= 0.0) {
            // The push was too small to break the tie; keep the current point.
            converged = true;
            break;
        }
        let same = max_diff(&next.omega, &pc.omega) < params.repeat_tol;
        pc = next;
        if same {
            converged = true;
            break;
        }
        trajectory.push((step, pc.effective_distance));
    }
    Ok(InstantonRecord {
        seed,
        instanton_llr: instanton_noise_for(&pc.omega)?,
        effective_distance: pc.effective_distance,
        pseudo_codeword: pc,
        trajectory,
        converged,
        initial_sd: sd,
    })
}

/// Support plus values rounded to `1e-6`.
pub fn dedup_key(omega: &[f64]) -> Vec<(usize, i64)> {
    omega
        .iter()
        .enumerate()
        .map(|(i, &w)| (i, (w * 1e6).round() as i64))
        .filter(|&(_, v)| v != 0)
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub record: InstantonRecord,
    /// Seeds that reached the same pseudo-codeword (including `record.seed`).
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstantonCatalog {
    /// Distinct pseudo-codewords, ascending by `d_eff`.
    pub entries: Vec<CatalogEntry>,
    pub raw_count: usize,
    pub converged_count: usize,
    /// Seeds whose search returned an error, with the message.
    pub failed_seeds: Vec<(u64, String)>,
}

impl InstantonCatalog {
    pub fn min_effective_distance(&self) -> Option<f64> {
        self.entries.first().map(|e| e.record.effective_distance)
    }
}

/// Runs the search over `seeds` in parallel; results are independent of the
/// thread count.
pub fn build_instanton_catalog(code: &ParityCheckCode, seeds: &[u64], params: &InstantonParams) -> InstantonCatalog {
    let results: Vec<(u64, Result<InstantonRecord>)> = seeds
        .par_iter()
        .map(|&s| (s, search_instanton(code, s, params)))
        .collect();
    let mut groups: BTreeMap<Vec<(usize, i64)>, CatalogEntry> = BTreeMap::new();
    let mut failed_seeds = Vec::new();
    let mut raw_count = 0;
    let mut converged_count = 0;
    for (seed, r) in results {
        match r {
            Ok(rec) => {
                raw_count += 1;
                converged_count += usize::from(rec.converged);
                groups
                    .entry(dedup_key(&rec.pseudo_codeword.omega))
                    .and_modify(|e| e.seeds.push(seed))
                    .or_insert(CatalogEntry {
                        record: rec,
                        seeds: vec![seed],
                    });
            }
            Err(e) => failed_seeds.push((seed, e.to_string())),
        }
    }
    let mut entries: Vec<CatalogEntry> = groups.into_values().collect();
    entries.sort_by(|a, b| {
        a.record
            .effective_distance
            .total_cmp(&b.record.effective_distance)
            .then(a.record.seed.cmp(&b.record.seed))
    });
    InstantonCatalog {
        entries,
        raw_count,
        converged_count,
        failed_seeds,
    }
}

#[derive(Serialize, Deserialize)]
struct CatalogLine {
    seed: u64,
    d_eff: f64,
    omega: String,
    h: String,
    steps: usize,
    converged: bool,
    seeds: Vec<u64>,
}

/// Writes `catalog.jsonl`, `omega/NNNN.csv`, `h/NNNN.csv` and `summary.json`.
pub fn write_catalog(catalog: &InstantonCatalog, dir: &Path) -> Result<()> {
    for sub in ["omega", "h"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut lines = String::new();
    for (k, e) in catalog.entries.iter().enumerate() {
        let omega = format!("omega/{k:04}.csv");
        let h = format!("h/{k:04}.csv");
        for (rel, values) in [(&omega, &e.record.pseudo_codeword.omega), (&h, &e.record.instanton_llr.h)] {
            let p = dir.join(rel);
            fs::write(&p, write_csv_column(values)).map_err(|err| Error::io(&p, err))?;
        }
        let line = CatalogLine {
            seed: e.record.seed,
            d_eff: e.record.effective_distance,
            omega,
            h,
            steps: e.record.steps(),
            converged: e.record.converged,
            seeds: e.seeds.clone(),
        };
        lines.push_str(&serde_json::to_string(&line)?);
        lines.push('\n');
    }
    let p = dir.join("catalog.jsonl");
    fs::write(&p, lines).map_err(|e| Error::io(&p, e))?;
    let summary = serde_json::json!({
        "raw_count": catalog.raw_count,
        "distinct_count": catalog.entries.len(),
        "converged_count": catalog.converged_count,
        "failed_seeds": catalog.failed_seeds,
        "min_effective_distance": catalog.min_effective_distance(),
    });
    let p = dir.join("summary.json");
    fs::write(&p, serde_json::to_string_pretty(&summary)?).map_err(|e| Error::io(&p, e))?;
    Ok(())
}

/// Reads back a catalog written by [`write_catalog`] as `(seed, omega, h)`.
pub fn read_catalog(dir: &Path) -> Result<Vec<(u64, Vec<f64>, Vec<f64>)>> {
    let p = dir.join("catalog.jsonl");
    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let l: CatalogLine = serde_json::from_str(line)?;
        let read = |rel: &str| -> Result<Vec<f64>> {
            let p = dir.join(rel);
            let t = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            crate::channel::read_csv_column(&t)
        };
        out.push((l.seed, read(&l.omega)?, read(&l.h)?));
    }
    Ok(out)
}
