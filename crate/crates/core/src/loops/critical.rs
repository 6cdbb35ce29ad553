//! Triad amplitudes and the search for the critical simple loop.
//!
//! A triad is a pair of bits `(i, j)` sharing a check `a`. Its amplitude is the
//! correlation coefficient of `s_i, s_j` under the check belief:
//! `(b++ b-- - b+- b-+) / sqrt(b_i(+) b_i(-) b_j(+) b_j(-))`.
//! For a simple loop `r(C)` is the product of its triads.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bp::Beliefs;
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::local::{even_masks, spin};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triad {
    pub check: usize,
    pub bit_a: usize,
    pub bit_b: usize,
    pub amplitude: f64,
}

/// All triads with a finite amplitude; pairs involving a saturated bit are
/// skipped.
pub fn triad_amplitudes(code: &ParityCheckCode, beliefs: &Beliefs) -> Vec<Triad> {
    let mut out = Vec::new();
    for a in 0..code.n_checks() {
        let bits = code.check_neighbors(a);
        let masks = even_masks(bits.len());
        let b = &beliefs.check_beliefs[a];
        for x in 0..bits.len() {
            for y in x + 1..bits.len() {
                let mut joint = [[0.0; 2]; 2];
                for (&m, &p) in masks.iter().zip(b) {
                    joint[usize::from(spin(m, x) < 0.0)][usize::from(spin(m, y) < 0.0)] += p;
                }
                let px = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
                let py = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
                let denom = (px[0] * px[1] * py[0] * py[1]).sqrt();
                if !(denom > 0.0) {
                    continue;
                }
                let amp = (joint[0][0] * joint[1][1] - joint[0][1] * joint[1][0]) / denom;
                out.push(Triad {
                    check: a,
                    bit_a: bits[x],
                    bit_b: bits[y],
                    amplitude: amp.clamp(-1.0, 1.0),
                });
            }
        }
    }
    out
}

/// A simple Tanner cycle `bits[0] - checks[0] - bits[1] - ... - checks[k-1] - bits[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleLoop {
    pub bits: Vec<usize>,
    pub checks: Vec<usize>,
    pub triads: Vec<f64>,
    pub r: f64,
}

impl SimpleLoop {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalLoopParams {
    /// Triad thresholds tried in order until some cycle exists.
    pub thresholds: Vec<f64>,
    pub max_loop_bits: usize,
    /// Stop collecting cycles at this many.
    pub max_cycles: usize,
    /// Loops within this distance of the best `|r|` count as tied.
    pub tie_tolerance: f64,
    /// Only bits whose a-posteriori field `|H_i|` reaches this take part.
    pub llr_threshold: Option<f64>,
}

impl CriticalLoopParams {
    pub fn validate(&self) -> Result<()> {
        let ok = !self.thresholds.is_empty()
            && self.thresholds.iter().all(|&t| t > 0.0 && t <= 1.0)
            && self.thresholds.windows(2).all(|w| w[0] > w[1]);
        if !ok {
            return Err(Error::InvalidArgument(
                "thresholds must be strictly descending in (0, 1]".into(),
            ));
        }
        if self.max_loop_bits < 3 {
            return Err(Error::InvalidArgument("max_loop_bits must be at least 3".into()));
        }
        Ok(())
    }
}

impl Default for CriticalLoopParams {
    fn default() -> Self {
        CriticalLoopParams {
            thresholds: vec![0.999, 0.99, 0.95, 0.9, 0.8, 0.7, 0.5],
            max_loop_bits: 12,
            max_cycles: 20_000,
            tie_tolerance: 1e-6,
            llr_threshold: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalLoopSearch {
    /// Threshold at which cycles were first found.
    pub threshold: f64,
    /// All loops found at that threshold, best first.
    pub candidates: Vec<SimpleLoop>,
    /// Number of leading candidates tied for the maximum `|r|`.
    pub n_maximal: usize,
}

impl CriticalLoopSearch {
    pub fn maximal(&self) -> &[SimpleLoop] {
        &self.candidates[..self.n_maximal]
    }
}

struct CycleSearch<'a> {
    adj: &'a [Vec<(usize, usize, f64)>],
    max_bits: usize,
    max_cycles: usize,
    start: usize,
    bits: Vec<usize>,
    checks: Vec<usize>,
    amps: Vec<f64>,
    on_path: Vec<bool>,
    used_check: HashSet<usize>,
    seen: HashSet<(Vec<usize>, Vec<usize>)>,
    out: Vec<SimpleLoop>,
}

impl CycleSearch<'_> {
    fn extend(&mut self, v: usize) {
        if self.out.len() >= self.max_cycles {
            return;
        }
        for &(w, c, amp) in &self.adj[v] {
            if self.used_check.contains(&c) {
                continue;
            }
            if w == self.start && self.bits.len() >= 2 {
                let mut checks = self.checks.clone();
                checks.push(c);
                let mut amps = self.amps.clone();
                amps.push(amp);
                self.record(checks, amps);
                continue;
            }
            if w <= self.start || self.on_path[w] || self.bits.len() >= self.max_bits {
                continue;
            }
            self.on_path[w] = true;
            self.used_check.insert(c);
            self.bits.push(w);
            self.checks.push(c);
            self.amps.push(amp);
            self.extend(w);
            self.amps.pop();
            self.checks.pop();
            self.bits.pop();
            self.used_check.remove(&c);
            self.on_path[w] = false;
        }
    }

    fn record(&mut self, checks: Vec<usize>, amps: Vec<f64>) {
        // The reverse traversal visits the same cycle; keep one orientation.
        let k = self.bits.len();
        let rev_bits: Vec<usize> = std::iter::once(self.bits[0])
            .chain(self.bits[1..].iter().rev().copied())
            .collect();
        let rev_checks: Vec<usize> = checks.iter().rev().copied().collect();
        let fwd = (self.bits.clone(), checks.clone());
        let rev = (rev_bits, rev_checks);
        let key = if fwd <= rev { fwd } else { rev };
        if k >= 2 && self.seen.insert(key.clone()) && self.out.len() < self.max_cycles {
            let r = amps.iter().product();
            self.out.push(SimpleLoop {
                bits: key.0,
                checks: key.1,
                triads: amps,
                r,
            });
        }
    }
}

/// Simple cycles of at most `max_bits` bits using only triads with
/// `|amplitude| >= threshold`.
pub fn simple_loops_above(
    code: &ParityCheckCode,
    triads: &[Triad],
    threshold: f64,
    max_bits: usize,
    max_cycles: usize,
) -> Vec<SimpleLoop> {
    let mut adj = vec![Vec::new(); code.n_bits()];
    for t in triads.iter().filter(|t| t.amplitude.abs() >= threshold) {
        adj[t.bit_a].push((t.bit_b, t.check, t.amplitude));
        adj[t.bit_b].push((t.bit_a, t.check, t.amplitude));
    }
    let mut search = CycleSearch {
        adj: &adj,
        max_bits,
        max_cycles,
        start: 0,
        bits: Vec::new(),
        checks: Vec::new(),
        amps: Vec::new(),
        on_path: vec![false; code.n_bits()],
        used_check: HashSet::new(),
        seen: HashSet::new(),
        out: Vec::new(),
    };
    for s in 0..code.n_bits() {
        if adj[s].len() < 2 {
            continue;
        }
        search.start = s;
        search.bits = vec![s];
        search.on_path[s] = true;
        search.extend(s);
        search.on_path[s] = false;
    }
    search.out
}

/// Sorts by `|r|` descending, then length, then bits and checks; returns the
/// number of leading loops within `tie_tolerance` of the best.
pub fn rank_loops(loops: &mut [SimpleLoop], tie_tolerance: f64) -> usize {
    loops.sort_by(|a, b| {
        b.r.abs()
            .total_cmp(&a.r.abs())
            .then(a.len().cmp(&b.len()))
            .then_with(|| a.bits.cmp(&b.bits))
            .then_with(|| a.checks.cmp(&b.checks))
    });
    match loops.first() {
        None => 0,
        Some(l) => {
            let best = l.r.abs();
            loops.iter().take_while(|l| best - l.r.abs() <= tie_tolerance).count()
        }
    }
}

/// Triads passing the optional a-posteriori field filter.
pub fn filtered_triads(code: &ParityCheckCode, beliefs: &Beliefs, llr_threshold: Option<f64>) -> Vec<Triad> {
    let triads = triad_amplitudes(code, beliefs);
    match llr_threshold {
        None => triads,
        Some(t) => triads
            .into_iter()
            .filter(|x| beliefs.bit_fields[x.bit_a].abs() >= t && beliefs.bit_fields[x.bit_b].abs() >= t)
            .collect(),
    }
}

/// Finds the single-connected loop(s) with the largest `|r|` at the first
/// threshold that admits any loop; `None` if no threshold does.
pub fn find_critical_loop(
    code: &ParityCheckCode,
    beliefs: &Beliefs,
    params: &CriticalLoopParams,
) -> Result<Option<CriticalLoopSearch>> {
    params.validate()?;
    if beliefs.check_beliefs.len() != code.n_checks() || beliefs.bit_fields.len() != code.n_bits() {
        return Err(Error::InvalidBelief("belief vector sizes".into()));
    }
    let triads = filtered_triads(code, beliefs, params.llr_threshold);
    for &threshold in &params.thresholds {
        let mut loops = simple_loops_above(code, &triads, threshold, params.max_loop_bits, params.max_cycles);
        if loops.is_empty() {
            continue;
        }
        let n_maximal = rank_loops(&mut loops, params.tie_tolerance);
        return Ok(Some(CriticalLoopSearch {
            threshold,
            candidates: loops,
            n_maximal,
        }));
    }
    Ok(None)
}
