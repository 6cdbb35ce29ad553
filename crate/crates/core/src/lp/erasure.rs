//! LP decoding with erasure of the log-likelihoods along a critical loop.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::decoder::{decode_lp, LpDecodeResult};
use super::limit::lp_limit_beliefs;
use crate::bp::{run_bp, Beliefs, BpParams};
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::loops::{filtered_triads, rank_loops, simple_loops_above, CriticalLoopParams};

/// Which beliefs the triads are computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopSource {
    /// Zero-temperature beliefs of the failed LP optimum.
    LpLimit,
    /// BP run on `llr_scale * h`.
    Bp { params: BpParams, llr_scale: f64 },
}

/// Loop selection. Sources are tried in order; within a source, thresholds
/// descend and each threshold offers the union of maximal loops, then single
/// candidates in rank order, then unions of the top `2..=max_union` candidates.
/// If all of that fails, up to `accumulate_rounds` rounds re-derive the loops
/// from the latest LP failure and add the maximal ones to the erased set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSelector {
    pub sources: Vec<LoopSource>,
    pub critical: CriticalLoopParams,
    pub max_candidates: usize,
    pub max_union: usize,
    pub accumulate_rounds: usize,
}

impl Default for LoopSelector {
    fn default() -> Self {
        let bp = |llr_scale| LoopSource::Bp {
            params: BpParams::default(),
            llr_scale,
        };
        LoopSelector {
            sources: vec![LoopSource::LpLimit, bp(2.0), bp(4.0), bp(1.0), bp(0.5)],
            critical: CriticalLoopParams::default(),
            max_candidates: 20,
            max_union: 4,
            accumulate_rounds: 12,
        }
    }
}

impl LoopSelector {
    /// First source only, single candidates only.
    pub fn single(source: LoopSource) -> Self {
        LoopSelector {
            sources: vec![source],
            max_candidates: 1,
            max_union: 1,
            accumulate_rounds: 0,
            ..LoopSelector::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureAttempt {
    /// Index into `LoopSelector::sources`; `None` for accumulation rounds.
    pub source: Option<usize>,
    pub threshold: f64,
    /// `(bits, r)` of the loops whose bits were erased.
    pub loops: Vec<(Vec<usize>, f64)>,
    pub erased_bits: Vec<usize>,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureOutcome {
    /// Final result: the first successful decode, else the bare LP failure.
    pub result: LpDecodeResult,
    pub bare_success: bool,
    pub trail: Vec<ErasureAttempt>,
}

impl ErasureOutcome {
    pub fn is_success(&self) -> bool {
        self.result.is_success()
    }
}

fn beliefs_for(code: &ParityCheckCode, h: &[f64], bare: &LpDecodeResult, source: &LoopSource) -> Result<Beliefs> {
    match source {
        LoopSource::LpLimit => lp_limit_beliefs(code, &bare.pseudo_codeword().omega),
        LoopSource::Bp { params, llr_scale } => {
            let scaled: Vec<f64> = h.iter().map(|v| v * llr_scale).collect();
            Ok(run_bp(code, &scaled, params)?.1)
        }
    }
}

/// Bare LP; on failure, erase (`h_i <- epsilon h_i`) the bits of critical-loop
/// candidates and decode again until LP returns a codeword or the retry
/// budget is spent.
pub fn decode_lp_erasure(
    code: &ParityCheckCode,
    h: &[f64],
    epsilon: f64,
    selector: &LoopSelector,
) -> Result<ErasureOutcome> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in [0, 1)")));
    }
    selector.critical.validate()?;
    let bare = decode_lp(code, h)?;
    if bare.is_success() {
        return Ok(ErasureOutcome {
            result: bare,
            bare_success: true,
            trail: Vec::new(),
        });
    }
    if selector.sources.is_empty() {
        return Err(Error::InvalidArgument("loop selector has no sources".into()));
    }
    let crit = &selector.critical;
    let mut trail = Vec::new();
    let mut tried: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (source_idx, source) in selector.sources.iter().enumerate() {
        let beliefs = beliefs_for(code, h, &bare, source)?;
        let triads = filtered_triads(code, &beliefs, crit.llr_threshold);
        for &threshold in &crit.thresholds {
            let mut loops = simple_loops_above(code, &triads, threshold, crit.max_loop_bits, crit.max_cycles);
            if loops.is_empty() {
                continue;
            }
            let n_max = rank_loops(&mut loops, crit.tie_tolerance);
            let mut groups: Vec<Vec<usize>> = vec![(0..n_max).collect()];
            groups.extend((0..loops.len()).take(selector.max_candidates).map(|k| vec![k]));
            groups.extend((2..=selector.max_union.min(loops.len())).map(|k| (0..k).collect()));
            for group in groups {
                let erased: BTreeSet<usize> = group.iter().flat_map(|&k| loops[k].bits.iter().copied()).collect();
                let erased: Vec<usize> = erased.into_iter().collect();
                if !tried.insert(erased.clone()) {
                    continue;
                }
                let mut h2 = h.to_vec();
                for &i in &erased {
                    h2[i] *= epsilon;
                }
                let r = decode_lp(code, &h2)?;
                let success = r.is_success();
                trail.push(ErasureAttempt {
                    source: Some(source_idx),
                    threshold,
                    loops: group.iter().map(|&k| (loops[k].bits.clone(), loops[k].r)).collect(),
                    erased_bits: erased,
                    success,
                });
                if success {
                    return Ok(ErasureOutcome {
                        result: r,
                        bare_success: false,
                        trail,
                    });
                }
            }
        }
    }
    let mut erased: BTreeSet<usize> = BTreeSet::new();
    let mut current = bare.clone();
    for _ in 0..selector.accumulate_rounds {
        let beliefs = lp_limit_beliefs(code, &current.pseudo_codeword().omega)?;
        let triads = filtered_triads(code, &beliefs, crit.llr_threshold);
        let mut added = None;
        for &threshold in &crit.thresholds {
            let mut loops = simple_loops_above(code, &triads, threshold, crit.max_loop_bits, crit.max_cycles);
            let n_max = rank_loops(&mut loops, crit.tie_tolerance);
            let maximal = &loops[..n_max];
            if maximal.iter().flat_map(|l| &l.bits).any(|i| !erased.contains(i)) {
                erased.extend(maximal.iter().flat_map(|l| l.bits.iter().copied()));
                added = Some((threshold, maximal.iter().map(|l| (l.bits.clone(), l.r)).collect::<Vec<_>>()));
                break;
            }
        }
        let Some((threshold, loops)) = added else { break };
        let mut h2 = h.to_vec();
        for &i in &erased {
            h2[i] *= epsilon;
        }
        current = decode_lp(code, &h2)?;
        let success = current.is_success();
        trail.push(ErasureAttempt {
            source: None,
            threshold,
            loops,
            erased_bits: erased.iter().copied().collect(),
            success,
        });
        if success {
            return Ok(ErasureOutcome {
                result: current,
                bare_success: false,
                trail,
            });
        }
    }
    Ok(ErasureOutcome {
        result: bare,
        bare_success: false,
        trail,
    })
}
