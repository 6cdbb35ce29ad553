//! Sum-product belief propagation in the bit-to-check message form
//!
//! `eta_{ia} = h_i + sum_{b in N(i), b != a} atanh(prod_{j in N(b), j != i} tanh eta_{jb})`
//!
//! with a flooding schedule, plus beliefs, magnetizations and the Bethe free energy.

use serde::{Deserialize, Serialize};

use crate::code::{Codeword, ParityCheckCode};
use crate::error::{Error, Result};
use crate::local::{check_distribution, even_masks, spin, xlnx};

/// Messages are clipped to this magnitude.
pub const MESSAGE_CLIP: f64 = 30.0;

/// `1 - tanh(x) < 1e-12` beyond this.
pub const SATURATED_FIELD: f64 = 14.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpParams {
    pub max_iters: usize,
    pub tol: f64,
    pub damping: f64,
}

impl Default for BpParams {
    fn default() -> Self {
        BpParams {
            max_iters: 200,
            tol: 1e-10,
            damping: 0.5,
        }
    }
}

impl BpParams {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidArgument("damping must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Bit-to-check messages `eta` indexed by edge id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpState {
    pub eta: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub residual: f64,
}

impl BpState {
    pub fn zeros(code: &ParityCheckCode) -> Self {
        BpState {
            eta: vec![0.0; code.n_edges()],
            iterations_run: 0,
            converged: false,
            residual: f64::INFINITY,
        }
    }

    /// Some message is so large that its tanh is within `1e-12` of `+-1`
    /// (this includes the clip), so the state is not a usable interior fixed point.
    pub fn is_saturated(&self) -> bool {
        self.eta.iter().any(|e| e.abs() >= SATURATED_FIELD)
    }
}

fn check_len(code: &ParityCheckCode, h: &[f64]) -> Result<()> {
    if h.len() != code.n_bits() {
        return Err(Error::LengthMismatch {
            expected: code.n_bits(),
            got: h.len(),
        });
    }
    Ok(())
}

// libm's tanh/atanh are not exactly odd; these are, so the channel symmetry
// holds bit for bit.
#[inline]
pub(crate) fn odd_tanh(x: f64) -> f64 {
    x.abs().tanh().copysign(x)
}

#[inline]
pub(crate) fn odd_atanh(x: f64) -> f64 {
    x.abs().atanh().copysign(x)
}

/// Check-to-bit messages `u_{ai} = atanh(prod_{j != i} tanh eta_{ja})` per edge.
pub fn check_messages(code: &ParityCheckCode, eta: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; code.n_edges()];
    let mut prefix = Vec::new();
    for a in 0..code.n_checks() {
        let edges = code.check_edges(a);
        let t: Vec<f64> = edges.clone().map(|e| odd_tanh(eta[e])).collect();
        prefix.clear();
        prefix.push(1.0);
        for &v in &t {
            let last = *prefix.last().unwrap();
            prefix.push(last * v);
        }
        let mut suffix = 1.0;
        for (k, e) in edges.enumerate().rev() {
            let p = prefix[k] * suffix;
            u[e] = odd_atanh(p).clamp(-MESSAGE_CLIP, MESSAGE_CLIP);
            suffix *= t[k];
        }
    }
    u
}

/// `h_i + sum_{a in N(i)} u_{ai}`: the full a-posteriori field at each bit.
pub fn posterior_fields(code: &ParityCheckCode, h: &[f64], u: &[f64]) -> Vec<f64> {
    let mut total = h.to_vec();
    for (e, &v) in u.iter().enumerate() {
        total[code.edge_bit(e)] += v;
    }
    total
}

/// One synchronous update with convex damping `(1-d) * rhs + d * old`.
pub fn bp_sweep(code: &ParityCheckCode, h: &[f64], state: &BpState, damping: f64) -> BpState {
    let u = check_messages(code, &state.eta);
    let total = posterior_fields(code, h, &u);
    let mut residual: f64 = 0.0;
    let eta = state
        .eta
        .iter()
        .enumerate()
        .map(|(e, &old)| {
            let rhs = (total[code.edge_bit(e)] - u[e]).clamp(-MESSAGE_CLIP, MESSAGE_CLIP);
            let new = (1.0 - damping) * rhs + damping * old;
            residual = residual.max((new - old).abs());
            new
        })
        .collect();
    BpState {
        eta,
        iterations_run: state.iterations_run + 1,
        converged: false,
        residual,
    }
}

/// Iterates [`bp_sweep`] from zero messages until `residual <= tol` or the
/// iteration budget runs out. Non-converged states are returned, flagged.
pub fn run_bp(code: &ParityCheckCode, h: &[f64], params: &BpParams) -> Result<(BpState, Beliefs)> {
    run_bp_from(code, h, BpState::zeros(code), params)
}

pub fn run_bp_from(
    code: &ParityCheckCode,
    h: &[f64],
    init: BpState,
    params: &BpParams,
) -> Result<(BpState, Beliefs)> {
    check_len(code, h)?;
    params.validate()?;
    if init.eta.len() != code.n_edges() {
        return Err(Error::LengthMismatch {
            expected: code.n_edges(),
            got: init.eta.len(),
        });
    }
    let mut state = init;
    for _ in 0..params.max_iters {
        state = bp_sweep(code, h, &state, params.damping);
        if state.residual <= params.tol {
            state.converged = true;
            break;
        }
    }
    let beliefs = beliefs_from_state(code, h, &state)?;
    Ok((state, beliefs))
}

/// Bit and check beliefs at a (possibly non-converged) BP state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beliefs {
    /// `H_i` with `b_i(s) ~ exp(s H_i)`, so `m_i = tanh H_i`.
    pub bit_fields: Vec<f64>,
    pub bit_magnetizations: Vec<f64>,
    /// Per check, probabilities over the even configurations of
    /// [`crate::local::even_masks`] for the check degree.
    pub check_beliefs: Vec<Vec<f64>>,
    /// `m_{ia} = sum_s b_a(s) s_i`, indexed by edge id.
    pub edge_magnetizations: Vec<f64>,
}

impl Beliefs {
    /// `[b_i(+1), b_i(-1)]`.
    pub fn bit_marginal(&self, bit: usize) -> [f64; 2] {
        let f = self.bit_fields[bit];
        let plus = 1.0 / (1.0 + (-2.0 * f).exp());
        let minus = 1.0 / (1.0 + (2.0 * f).exp());
        [plus, minus]
    }

    /// Hard decision `bit = 1` iff `m_i < 0`; ties go to spin +1.
    pub fn hard_decision(&self) -> Codeword {
        Codeword {
            bits: self
                .bit_magnetizations
                .iter()
                .map(|&m| u8::from(m < 0.0))
                .collect(),
        }
    }
}

/// Beliefs from messages.
///
/// Check beliefs are `b_a(s) ~ delta(prod s = 1) exp(sum_i eta_{ia} s_i)`.
/// Bits of degree `q >= 2` use `b_i(s) ~ exp(s (sum_a eta_{ia} - h_i) / (q - 1))`;
/// bits of degree 0 or 1 use the equivalent cavity form `exp(s (h_i + sum_a u_{ai}))`,
/// which agrees with the former at every fixed point where both are defined.
pub fn beliefs_from_state(code: &ParityCheckCode, h: &[f64], state: &BpState) -> Result<Beliefs> {
    check_len(code, h)?;
    let eta = &state.eta;
    let needs_cavity = (0..code.n_bits()).any(|i| code.bit_degree(i) < 2);
    let cavity = if needs_cavity {
        Some(posterior_fields(code, h, &check_messages(code, eta)))
    } else {
        None
    };
    let bit_fields: Vec<f64> = (0..code.n_bits())
        .map(|i| {
            let q = code.bit_degree(i);
            if q >= 2 {
                let s: f64 = code.bit_edges(i).iter().map(|&e| eta[e]).sum();
                (s - h[i]) / (q as f64 - 1.0)
            } else {
                cavity.as_ref().unwrap()[i]
            }
        })
        .collect();
    let bit_magnetizations = bit_fields.iter().map(|&f| odd_tanh(f)).collect();
    let mut check_beliefs = Vec::with_capacity(code.n_checks());
    let mut edge_magnetizations = vec![0.0; code.n_edges()];
    for a in 0..code.n_checks() {
        let edges = code.check_edges(a);
        let masks = even_masks(edges.len());
        let (probs, _) = check_distribution(&eta[edges.clone()], &masks);
        for (k, e) in edges.enumerate() {
            edge_magnetizations[e] = masks
                .iter()
                .zip(&probs)
                .map(|(&m, p)| p * spin(m, k))
                .sum();
        }
        check_beliefs.push(probs);
    }
    Ok(Beliefs {
        bit_fields,
        bit_magnetizations,
        check_beliefs,
        edge_magnetizations,
    })
}

/// Bethe free energy
/// `F = sum_a sum b_a ln(b_a / f_a) - sum_(edges) sum b_e ln b_e`
/// over bit and check vertices, with `f_i = exp(h_i s)` and `f_a = 1` on even
/// configurations. Edge beliefs `(1 + s m_{ia}) / 2` are marginalized from the
/// check beliefs.
pub fn bethe_free_energy(code: &ParityCheckCode, h: &[f64], beliefs: &Beliefs) -> Result<f64> {
    check_len(code, h)?;
    if beliefs.bit_fields.len() != code.n_bits() || beliefs.check_beliefs.len() != code.n_checks() {
        return Err(Error::InvalidBelief("belief vector sizes".into()));
    }
    let mut f = 0.0;
    for i in 0..code.n_bits() {
        let [p, q] = beliefs.bit_marginal(i);
        f += xlnx(p) + xlnx(q) - h[i] * (p - q);
    }
    for a in 0..code.n_checks() {
        let b = &beliefs.check_beliefs[a];
        let d = code.check_degree(a);
        if b.len() != 1 << (d - 1) {
            return Err(Error::InvalidBelief(format!("check {a}: wrong configuration count")));
        }
        let total: f64 = b.iter().sum();
        if b.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidBelief(format!("check {a}")));
        }
        f += b.iter().map(|&p| xlnx(p)).sum::<f64>();
        let masks = even_masks(d);
        for k in 0..d {
            // Marginal mass on s = -1, summed directly to keep precision.
            let minus: f64 = masks
                .iter()
                .zip(b)
                .filter(|(&m, _)| spin(m, k) < 0.0)
                .map(|(_, p)| p)
                .sum();
            let plus: f64 = masks
                .iter()
                .zip(b)
                .filter(|(&m, _)| spin(m, k) > 0.0)
                .map(|(_, p)| p)
                .sum();
            f -= xlnx(plus) + xlnx(minus);
        }
    }
    Ok(f)
}

#[derive(Clone, Debug, Serialize)]
pub struct BpDecodeResult {
    pub state: BpState,
    pub beliefs: Beliefs,
    pub decoded: Codeword,
    pub success: bool,
    pub free_energy: f64,
}

/// Runs BP and hard-decides on the bit magnetizations; success means every
/// check is satisfied.
pub fn decode_bp(code: &ParityCheckCode, h: &[f64], params: &BpParams) -> Result<BpDecodeResult> {
    let (state, beliefs) = run_bp(code, h, params)?;
    let decoded = beliefs.hard_decision();
    let success = code.is_codeword_bits(&decoded.bits);
    let free_energy = bethe_free_energy(code, h, &beliefs)?;
    Ok(BpDecodeResult {
        state,
        beliefs,
        decoded,
        success,
        free_energy,
    })
}
