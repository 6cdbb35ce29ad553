//! Directed edge gauges of the vertex-model view of a Tanner graph.
//!
//! Every edge `(i, a)` carries two gauges: `bit_side[e]` (at bit `i`) and
//! `check_side[e]` (at check `a`). Vertex weights are
//! `P_i(s) = exp(s (h_i + sum_e bit_side[e]))` and
//! `P_a(s) = delta(prod s = 1) exp(sum_e check_side[e] s_e)`.
//! At a BP fixed point `check_side` equals the bit-to-check messages and
//! `bit_side` equals the check-to-bit messages.

use crate::bp::check_messages;
use crate::code::ParityCheckCode;
use crate::local::{check_distribution, even_masks, ln_2cosh};

#[derive(Clone, Debug, PartialEq)]
pub struct Gauges {
    pub bit_side: Vec<f64>,
    pub check_side: Vec<f64>,
}

impl Gauges {
    pub fn from_bp_messages(code: &ParityCheckCode, eta: &[f64]) -> Self {
        Gauges {
            bit_side: check_messages(code, eta),
            check_side: eta.to_vec(),
        }
    }
}

/// `ln Z0(eta) = sum_v ln sum P_v - sum_(edges) ln 2cosh(eta_bit + eta_check)`.
pub fn ln_z0(code: &ParityCheckCode, h: &[f64], g: &Gauges) -> f64 {
    let mut total = 0.0;
    for (i, &hi) in h.iter().enumerate() {
        let field = hi + code.bit_edges(i).iter().map(|&e| g.bit_side[e]).sum::<f64>();
        total += ln_2cosh(field);
    }
    for a in 0..code.n_checks() {
        let edges = code.check_edges(a);
        let (_, lnz) = check_distribution(&g.check_side[edges.clone()], &even_masks(edges.len()));
        total += lnz;
    }
    for e in 0..code.n_edges() {
        total -= ln_2cosh(g.bit_side[e] + g.check_side[e]);
    }
    total
}
