//! Loop-corrected BP: BP gauges modified so that the free energy accounts for
//! a few critical loops, and the four-step decoder built on it.
//!
//! Everything runs on a generic [`VertexModel`] (vertices carry weights over
//! their allowed local configurations, edges carry binary spins). An LDPC code
//! maps to bit (equality) and check (parity) vertices; gauges live on directed
//! edges, `eta[2e + side]` being the field that vertex `edge_ends[e][side]`
//! puts on edge `e`.

use serde::{Deserialize, Serialize};

use crate::bp::{run_bp, BpParams, MESSAGE_CLIP};
use crate::code::{Codeword, ParityCheckCode};
use crate::error::{Error, Result};
use crate::local::{even_masks, spin};
use crate::loops::{rank_loops, simple_loops_above, triad_amplitudes, CriticalLoopParams, GeneralizedLoop, SimpleLoop};

const SATURATION_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub edges: Vec<usize>,
    /// Allowed configurations; bit `k` set means spin -1 on `edges[k]`.
    pub configs: Vec<u32>,
    pub log_weights: Vec<f64>,
}

/// What a code bit became in the vertex model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BitRole {
    Vertex(usize),
    /// Degree-0 bit with its channel field.
    Isolated(f64),
    /// Degree-1 bit folded into a check vertex.
    Absorbed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexModel {
    pub vertices: Vec<Vertex>,
    pub edge_ends: Vec<[usize; 2]>,
    /// Position of the edge in each end's `edges`.
    edge_pos: Vec<[usize; 2]>,
    pub bits: Vec<BitRole>,
    /// Model edge of each code edge (`None` for absorbed leaves).
    pub code_edges: Vec<Option<usize>>,
}

impl VertexModel {
    /// Every edge must be attached to exactly two distinct vertices.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        let n_edges = vertices.iter().flat_map(|v| &v.edges).map(|&e| e + 1).max().unwrap_or(0);
        let mut ends: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_edges];
        for (v, vx) in vertices.iter().enumerate() {
            if vx.configs.len() != vx.log_weights.len() || vx.configs.is_empty() {
                return Err(Error::InvalidArgument(format!("vertex {v}: bad configuration table")));
            }
            if vx.edges.len() >= 31 || vx.configs.iter().any(|&c| c >> vx.edges.len() != 0) {
                return Err(Error::InvalidArgument(format!("vertex {v}: configuration out of range")));
            }
            if vx.log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
                return Err(Error::InvalidArgument(format!("vertex {v}: invalid weight")));
            }
            for (k, &e) in vx.edges.iter().enumerate() {
                ends[e].push((v, k));
            }
        }
        let mut edge_ends = Vec::with_capacity(n_edges);
        let mut edge_pos = Vec::with_capacity(n_edges);
        for (e, list) in ends.iter().enumerate() {
            match list.as_slice() {
                [(a, ka), (b, kb)] if a != b => {
                    edge_ends.push([*a, *b]);
                    edge_pos.push([*ka, *kb]);
                }
                _ => return Err(Error::InvalidArgument(format!("edge {e} does not join two vertices"))),
            }
        }
        Ok(VertexModel {
            vertices,
            edge_ends,
            edge_pos,
            bits: Vec::new(),
            code_edges: Vec::new(),
        })
    }

    /// Bits become equality vertices weighted by `exp(h s)`, checks parity
    /// vertices. Model edge ids equal code edge ids.
    pub fn from_code(code: &ParityCheckCode, h: &[f64]) -> Result<Self> {
        Self::build(code, h, false)
    }

    /// As [`VertexModel::from_code`], but degree-1 bits are summed out into
    /// their check, which then carries their channel fields.
    pub fn from_code_absorbing_leaves(code: &ParityCheckCode, h: &[f64]) -> Result<Self> {
        Self::build(code, h, true)
    }

    fn build(code: &ParityCheckCode, h: &[f64], absorb: bool) -> Result<Self> {
        if h.len() != code.n_bits() {
            return Err(Error::LengthMismatch {
                expected: code.n_bits(),
                got: h.len(),
            });
        }
        let absorbed = |i: usize| absorb && code.bit_degree(i) == 1;
        let mut code_edges = vec![None; code.n_edges()];
        let mut next = 0;
        for (e, slot) in code_edges.iter_mut().enumerate() {
            if !absorbed(code.edge_bit(e)) {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut vertices = Vec::new();
        let mut bits = Vec::with_capacity(code.n_bits());
        for i in 0..code.n_bits() {
            if code.bit_degree(i) == 0 {
                bits.push(BitRole::Isolated(h[i]));
            } else if absorbed(i) {
                bits.push(BitRole::Absorbed);
            } else {
                let edges: Vec<usize> = code.bit_edges(i).iter().map(|&e| code_edges[e].unwrap()).collect();
                let all = (1u32 << edges.len()) - 1;
                bits.push(BitRole::Vertex(vertices.len()));
                vertices.push(Vertex {
                    edges,
                    configs: vec![0, all],
                    log_weights: vec![h[i], -h[i]],
                });
            }
        }
        for a in 0..code.n_checks() {
            let nbrs = code.check_neighbors(a);
            let kept: Vec<usize> = (0..nbrs.len()).filter(|&k| !absorbed(nbrs[k])).collect();
            if kept.is_empty() {
                continue;
            }
            let leaves: Vec<usize> = (0..nbrs.len()).filter(|&k| absorbed(nbrs[k])).collect();
            let edges: Vec<usize> = kept
                .iter()
                .map(|&k| code_edges[code.check_edges(a).start + k].unwrap())
                .collect();
            let (configs, log_weights) = if leaves.is_empty() {
                let masks = even_masks(kept.len());
                let w = vec![0.0; masks.len()];
                (masks, w)
            } else {
                // Leaves absorb the parity: the kept spins are free, and the
                // leaf sum depends only on the parity of the kept part.
                let fields: Vec<f64> = leaves.iter().map(|&k| h[nbrs[k]]).collect();
                let ln_even = leaf_parity_log_sum(&fields, false);
                let ln_odd = leaf_parity_log_sum(&fields, true);
                let configs: Vec<u32> = (0..1u32 << kept.len()).collect();
                let w = configs
                    .iter()
                    .map(|c| if c.count_ones() % 2 == 0 { ln_even } else { ln_odd })
                    .collect();
                (configs, w)
            };
            vertices.push(Vertex {
                edges,
                configs,
                log_weights,
            });
        }
        let mut model = Self::new(vertices)?;
        model.bits = bits;
        model.code_edges = code_edges;
        Ok(model)
    }

    pub fn n_edges(&self) -> usize {
        self.edge_ends.len()
    }

    /// Directed slot of `(vertex, edge)`.
    pub fn slot(&self, vertex: usize, edge: usize) -> Option<usize> {
        self.edge_ends[edge].iter().position(|&v| v == vertex).map(|side| 2 * edge + side)
    }

    /// Gauges of an LDPC BP state (`eta` indexed by code edge) for a model
    /// built by [`VertexModel::from_code`].
    pub fn gauges_from_bp(&self, code: &ParityCheckCode, eta: &[f64]) -> Result<Vec<f64>> {
        if eta.len() != code.n_edges() || self.code_edges.len() != code.n_edges() {
            return Err(Error::LengthMismatch {
                expected: code.n_edges(),
                got: eta.len(),
            });
        }
        let u = crate::bp::check_messages(code, eta);
        let mut g = vec![0.0; 2 * self.n_edges()];
        for e in 0..code.n_edges() {
            let Some(me) = self.code_edges[e] else {
                return Err(Error::InvalidArgument("model has absorbed leaves".into()));
            };
            let BitRole::Vertex(bv) = self.bits[code.edge_bit(e)] else {
                return Err(Error::InvalidArgument("bit without vertex".into()));
            };
            let bit_side = usize::from(self.edge_ends[me][1] == bv);
            g[2 * me + bit_side] = u[e];
            g[2 * me + 1 - bit_side] = eta[e];
        }
        Ok(g)
    }

    /// Loop given by model edges; every touched vertex needs degree >= 2.
    pub fn model_loop(&self, edges: &[usize]) -> Result<ModelLoop> {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let mut per_vertex: Vec<(usize, Vec<usize>)> = Vec::new();
        for &e in &edges {
            if e >= self.n_edges() {
                return Err(Error::InvalidArgument(format!("edge {e} out of range")));
            }
            for side in 0..2 {
                let v = self.edge_ends[e][side];
                let k = self.edge_pos[e][side];
                match per_vertex.iter_mut().find(|(w, _)| *w == v) {
                    Some((_, ks)) => ks.push(k),
                    None => per_vertex.push((v, vec![k])),
                }
            }
        }
        if edges.is_empty() || per_vertex.iter().any(|(_, ks)| ks.len() < 2) {
            return Err(Error::InvalidArgument("not a generalized loop".into()));
        }
        per_vertex.sort_unstable();
        Ok(ModelLoop { edges, per_vertex })
    }

    /// Maps a loop of the code onto the model edges.
    pub fn loop_from_code(&self, lp: &GeneralizedLoop) -> Result<ModelLoop> {
        let edges = lp
            .edges
            .iter()
            .map(|&e| {
                self.code_edges
                    .get(e)
                    .copied()
                    .flatten()
                    .ok_or_else(|| Error::InvalidArgument(format!("code edge {e} has no model edge")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.model_loop(&edges)
    }

    fn local(&self, v: usize, eta: &[f64]) -> Vec<f64> {
        let vx = &self.vertices[v];
        let fields: Vec<f64> = vx
            .edges
            .iter()
            .map(|&e| eta[self.slot(v, e).unwrap()])
            .collect();
        let ex: Vec<f64> = vx
            .configs
            .iter()
            .zip(&vx.log_weights)
            .map(|(&c, &w)| w + fields.iter().enumerate().map(|(k, f)| f * spin(c, k)).sum::<f64>())
            .collect();
        let max = ex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = ex.iter().map(|x| (x - max).exp()).collect();
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= z);
        p
    }
}

fn leaf_parity_log_sum(fields: &[f64], odd: bool) -> f64 {
    // sum over leaf spins with prod = +1 (even) or -1 (odd) of exp(sum h s)
    // = (prod 2cosh h) (1 +- prod tanh h) / 2
    let ln_cosh: f64 = fields.iter().map(|&f| crate::local::ln_2cosh(f)).sum();
    let t: f64 = fields.iter().map(|f| f.tanh()).product();
    let sign = if odd { -1.0 } else { 1.0 };
    ln_cosh + ((1.0 + sign * t) / 2.0).ln()
}

/// A generalized loop on a [`VertexModel`]: sorted edges plus, per touched
/// vertex, the positions of its loop edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelLoop {
    pub edges: Vec<usize>,
    per_vertex: Vec<(usize, Vec<usize>)>,
}

impl ModelLoop {
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_vertex.iter().map(|(v, _)| *v)
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.positions(v).is_some()
    }

    fn positions(&self, v: usize) -> Option<&[usize]> {
        self.per_vertex
            .binary_search_by_key(&v, |(w, _)| *w)
            .ok()
            .map(|i| self.per_vertex[i].1.as_slice())
    }

    fn contains_edge(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

/// Local quantities at a gauge point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopMoments {
    /// `<s_e>_a` per directed slot.
    pub vertex_magnetizations: Vec<f64>,
    /// `tanh(eta_ab + eta_ba)` per edge.
    pub edge_magnetizations: Vec<f64>,
    /// Per loop, `(vertex, mu)` for each loop vertex.
    pub mu: Vec<Vec<(usize, f64)>>,
    /// Per loop, `prod mu / prod (1 - m^2)`.
    pub r: Vec<f64>,
    /// Per directed slot, the loop correction to the consistency condition.
    pub rhs: Vec<f64>,
    /// Per directed slot, numerator of the effective magnetization.
    pub numerator: Vec<f64>,
}

pub fn loop_moments(model: &VertexModel, eta: &[f64], loops: &[ModelLoop]) -> Result<LoopMoments> {
    let n_slots = 2 * model.n_edges();
    if eta.len() != n_slots {
        return Err(Error::LengthMismatch {
            expected: n_slots,
            got: eta.len(),
        });
    }
    if eta.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite gauge".into()));
    }
    let locals: Vec<Vec<f64>> = (0..model.vertices.len()).map(|v| model.local(v, eta)).collect();
    let mut vm = vec![0.0; n_slots];
    for (e, ends) in model.edge_ends.iter().enumerate() {
        for side in 0..2 {
            let v = ends[side];
            let k = model.edge_pos[e][side];
            vm[2 * e + side] = expect(model, v, &locals[v], |c| spin(c, k));
        }
    }
    let em: Vec<f64> = (0..model.n_edges())
        .map(|e| (eta[2 * e] + eta[2 * e + 1]).tanh())
        .collect();
    let m_clip = |e: usize| em[e].clamp(-1.0 + SATURATION_MARGIN, 1.0 - SATURATION_MARGIN);

    let mut rhs = vm.iter().map(|_| 0.0).collect::<Vec<f64>>();
    let mut numerator = vm.clone();
    let mut all_mu = Vec::with_capacity(loops.len());
    let mut all_r = Vec::with_capacity(loops.len());
    for lp in loops {
        // Centered spin at position k of vertex v.
        let centered = |v: usize, c: u32, k: usize| spin(c, k) - m_clip(model.vertices[v].edges[k]);
        let prod_centered = |v: usize, c: u32, skip: Option<usize>| -> f64 {
            lp.positions(v)
                .unwrap()
                .iter()
                .filter(|&&k| Some(k) != skip)
                .map(|&k| centered(v, c, k))
                .product()
        };
        let mu: Vec<(usize, f64)> = lp
            .vertices()
            .map(|v| (v, expect(model, v, &locals[v], |c| prod_centered(v, c, None))))
            .collect();
        let denom: f64 = lp.edges.iter().map(|&e| 1.0 - m_clip(e).powi(2)).product();
        let mu_all: f64 = mu.iter().map(|(_, x)| x).product();
        // Product of mu over loop vertices other than `v`, without dividing by mu_v.
        let mu_without = |v: usize| -> f64 { mu.iter().filter(|(w, _)| *w != v).map(|(_, x)| x).product() };
        all_r.push(mu_all / denom);
        for (e, ends) in model.edge_ends.iter().enumerate() {
            for side in 0..2 {
                let (a, b) = (ends[side], ends[1 - side]);
                let (ka, kb) = (model.edge_pos[e][side], model.edge_pos[e][1 - side]);
                let slot = 2 * e + side;
                let m_e = m_clip(e);
                if lp.contains_edge(e) {
                    let avg = expect(model, b, &locals[b], |c| prod_centered(b, c, Some(kb)));
                    rhs[slot] += mu_without(b) / denom * (1.0 - m_e * m_e) * avg;
                } else if lp.contains_vertex(a) {
                    let avg = expect(model, a, &locals[a], |c| centered(a, c, ka) * prod_centered(a, c, None));
                    rhs[slot] += mu_without(a) / denom * (1.0 - m_e * m_e) * avg;
                }
                if lp.contains_vertex(a) {
                    let avg = expect(model, a, &locals[a], |c| spin(c, ka) * prod_centered(a, c, None));
                    numerator[slot] += avg * mu_without(a) / denom;
                } else {
                    numerator[slot] += vm[slot] * mu_all / denom;
                }
            }
        }
        all_mu.push(mu);
    }
    Ok(LoopMoments {
        vertex_magnetizations: vm,
        edge_magnetizations: em,
        mu: all_mu,
        r: all_r,
        rhs,
        numerator,
    })
}

fn expect(model: &VertexModel, v: usize, p: &[f64], f: impl Fn(u32) -> f64) -> f64 {
    model.vertices[v].configs.iter().zip(p).map(|(&c, &q)| q * f(c)).sum()
}

/// Per directed slot, `<s>_a - tanh(eta_ab + eta_ba) - rhs`.
pub fn residual_system(model: &VertexModel, eta: &[f64], loops: &[ModelLoop]) -> Result<Vec<f64>> {
    let mom = loop_moments(model, eta, loops)?;
    Ok(residuals(&mom))
}

fn residuals(mom: &LoopMoments) -> Vec<f64> {
    mom.vertex_magnetizations
        .iter()
        .enumerate()
        .map(|(s, &m)| m - mom.edge_magnetizations[s / 2] - mom.rhs[s])
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub max_iters: usize,
    pub tol: f64,
    pub damping: f64,
}

impl Default for EffectiveParams {
    fn default() -> Self {
        EffectiveParams {
            max_iters: 2000,
            tol: 1e-10,
            damping: 0.7,
        }
    }
}

impl EffectiveParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidArgument("damping must lie in [0, 1)".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument("tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveBpState {
    pub eta: Vec<f64>,
    pub loops: Vec<ModelLoop>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Max residual per iteration.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveBpResult {
    pub state: EffectiveBpState,
    /// Effective magnetization per directed slot.
    pub slot_magnetizations: Vec<f64>,
    /// Per code bit; `None` for absorbed leaves.
    pub bit_magnetizations: Vec<Option<f64>>,
    pub r: Vec<f64>,
}

/// Damped fixed-point iteration of
/// `eta_ba <- atanh(<s>_a - rhs_ab) - eta_ab` from `init` (zeros if `None`).
/// Returns the iterate with the smallest residual.
pub fn solve_effective_bp(
    model: &VertexModel,
    loops: &[ModelLoop],
    init: Option<&[f64]>,
    params: &EffectiveParams,
) -> Result<EffectiveBpResult> {
    params.validate()?;
    let n_slots = 2 * model.n_edges();
    let mut eta = match init {
        Some(g) if g.len() == n_slots => g.to_vec(),
        Some(g) => {
            return Err(Error::LengthMismatch {
                expected: n_slots,
                got: g.len(),
            })
        }
        None => vec![0.0; n_slots],
    };
    let lim = 1.0 - 1e-15;
    let mut best: Option<(f64, Vec<f64>, LoopMoments)> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let mom = loop_moments(model, &eta, loops)?;
        let res = residuals(&mom).iter().fold(0.0_f64, |a, r| a.max(r.abs()));
        let res = if res.is_nan() { f64::INFINITY } else { res };
        history.push(res);
        if best.as_ref().is_none_or(|(b, _, _)| res < *b) {
            best = Some((res, eta.clone(), mom.clone()));
        }
        if res <= params.tol || iterations >= params.max_iters {
            break;
        }
        let mut next = eta.clone();
        for s in 0..n_slots {
            let target = (mom.vertex_magnetizations[s] - mom.rhs[s]).clamp(-lim, lim);
            let other = s ^ 1;
            let new = (target.atanh() - eta[s]).clamp(-MESSAGE_CLIP, MESSAGE_CLIP);
            next[other] = (1.0 - params.damping) * new + params.damping * eta[other];
        }
        eta = next;
        iterations += 1;
    }
    let (residual, eta, mom) = best.unwrap();
    let total: f64 = 1.0 + mom.r.iter().sum::<f64>();
    let slot_magnetizations: Vec<f64> = mom.numerator.iter().map(|x| x / total).collect();
    let bit_magnetizations = model
        .bits
        .iter()
        .map(|role| match *role {
            BitRole::Isolated(h) => Some(h.tanh()),
            BitRole::Absorbed => None,
            BitRole::Vertex(v) => {
                let e = model.vertices[v].edges[0];
                Some(slot_magnetizations[model.slot(v, e).unwrap()])
            }
        })
        .collect();
    Ok(EffectiveBpResult {
        state: EffectiveBpState {
            eta,
            loops: loops.to_vec(),
            residual,
            converged: residual <= params.tol,
            iterations,
            history,
        },
        slot_magnetizations,
        bit_magnetizations,
        r: mom.r,
    })
}

/// Code edges of a simple Tanner cycle.
pub fn simple_loop_edges(code: &ParityCheckCode, lp: &SimpleLoop) -> Result<Vec<usize>> {
    let k = lp.bits.len();
    let mut edges = Vec::with_capacity(2 * k);
    for j in 0..k {
        for bit in [lp.bits[j], lp.bits[(j + 1) % k]] {
            edges.push(
                code.edge_id(bit, lp.checks[j])
                    .ok_or_else(|| Error::InvalidArgument(format!("bit {bit} not on check {}", lp.checks[j])))?,
            );
        }
    }
    Ok(edges)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopCorrectedParams {
    pub bp: BpParams,
    pub effective: EffectiveParams,
    pub critical: CriticalLoopParams,
    /// Loops accumulated in step 4 before giving up.
    pub max_loops: usize,
}

impl Default for LoopCorrectedParams {
    fn default() -> Self {
        LoopCorrectedParams {
            bp: BpParams::default(),
            effective: EffectiveParams::default(),
            critical: CriticalLoopParams::default(),
            max_loops: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopCorrectedAttempt {
    /// `(bits, r at bare BP)` of the loops in the effective free energy.
    pub loops: Vec<(Vec<usize>, f64)>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopCorrectedOutcome {
    pub decoded: Codeword,
    pub success: bool,
    pub bare_success: bool,
    pub magnetizations: Vec<f64>,
    pub attempts: Vec<LoopCorrectedAttempt>,
}

/// Bare BP; on failure, add critical loops one at a time (best `|r|` first,
/// thresholds descending) to the effective free energy and re-solve.
pub fn decode_loop_corrected_bp(code: &ParityCheckCode, h: &[f64], params: &LoopCorrectedParams) -> Result<LoopCorrectedOutcome> {
    params.critical.validate()?;
    let (state, beliefs) = run_bp(code, h, &params.bp)?;
    let bare = beliefs.hard_decision();
    if code.is_codeword_bits(&bare.bits) {
        return Ok(LoopCorrectedOutcome {
            decoded: bare,
            success: true,
            bare_success: true,
            magnetizations: beliefs.bit_magnetizations,
            attempts: Vec::new(),
        });
    }
    let triads = triad_amplitudes(code, &beliefs);
    let mut candidates: Vec<SimpleLoop> = Vec::new();
    for &thr in &params.critical.thresholds {
        if candidates.len() >= params.max_loops {
            break;
        }
        let mut loops = simple_loops_above(
            code,
            &triads,
            thr,
            params.critical.max_loop_bits,
            params.critical.max_cycles,
        );
        rank_loops(&mut loops, params.critical.tie_tolerance);
        for l in loops {
            if candidates.len() < params.max_loops && !candidates.iter().any(|c| c.bits == l.bits && c.checks == l.checks) {
                candidates.push(l);
            }
        }
    }
    let model = VertexModel::from_code(code, h)?;
    let init = model.gauges_from_bp(code, &state.eta)?;
    let mut attempts = Vec::new();
    let mut model_loops = Vec::new();
    let mut last_m = beliefs.bit_magnetizations.clone();
    for k in 0..candidates.len() {
        model_loops.push(model.loop_from_code(&GeneralizedLoop::from_edges(
            code,
            &simple_loop_edges(code, &candidates[k])?,
        )?)?);
        let res = solve_effective_bp(&model, &model_loops, Some(&init), &params.effective)?;
        let m: Vec<f64> = res.bit_magnetizations.iter().map(|x| x.unwrap_or(0.0)).collect();
        let decoded = Codeword {
            bits: m.iter().map(|&x| u8::from(x < 0.0)).collect(),
        };
        let success = m.iter().all(|x| x.is_finite()) && code.is_codeword_bits(&decoded.bits);
        attempts.push(LoopCorrectedAttempt {
            loops: candidates[..=k].iter().map(|c| (c.bits.clone(), c.r)).collect(),
            residual: res.state.residual,
            converged: res.state.converged,
            iterations: res.state.iterations,
            residual_history: res.state.history.clone(),
            success,
        });
        last_m = m;
        if success {
            return Ok(LoopCorrectedOutcome {
                decoded,
                success: true,
                bare_success: false,
                magnetizations: last_m,
                attempts,
            });
        }
    }
    Ok(LoopCorrectedOutcome {
        decoded: bare,
        success: false,
        bare_success: false,
        magnetizations: last_m,
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_parity_sums() {
        let f = [0.3, -1.1];
        let brute = |odd: bool| -> f64 {
            let mut s = 0.0;
            for a in [1.0, -1.0] {
                for b in [1.0, -1.0] {
                    if (a * b < 0.0) == odd {
                        s += f64::exp(f[0] * a + f[1] * b);
                    }
                }
            }
            s.ln()
        };
        assert!((leaf_parity_log_sum(&f, false) - brute(false)).abs() < 1e-13);
        assert!((leaf_parity_log_sum(&f, true) - brute(true)).abs() < 1e-13);
    }

    #[test]
    fn rejects_dangling_edges() {
        let v = Vertex {
            edges: vec![0],
            configs: vec![0, 1],
            log_weights: vec![0.0, 0.0],
        };
        assert!(VertexModel::new(vec![v]).is_err());
    }

    #[test]
    fn model_loop_needs_even_cover() {
        let code = crate::testgraphs::single_cycle();
        let model = VertexModel::from_code(&code, &[0.1; 6]).unwrap();
        assert!(model.model_loop(&[0]).is_err());
    }
}
