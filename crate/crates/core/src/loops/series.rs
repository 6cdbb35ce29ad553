//! Loop-series corrections around a BP fixed point.
//!
//! With BP beliefs `b`, `Z = Z0 (1 + sum_C r(C))` where `Z0 = exp(-F_Bethe)` and
//! `r(C) = prod_(bits in C) mu_i * prod_(checks in C) mu_a`. The identity is exact
//! only at a fixed point.

use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_extended_loops, GeneralizedLoop, LoopBudget};
use crate::bp::{bethe_free_energy, Beliefs};
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::local::{even_masks, spin};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopAmplitude {
    pub r: f64,
    /// `(bit, mu_i)` in loop order.
    pub bit_factors: Vec<(usize, f64)>,
    /// `(check, mu_a)` in loop order.
    pub check_factors: Vec<(usize, f64)>,
}

fn marginal(beliefs: &Beliefs, bit: usize) -> Result<[f64; 2]> {
    let [p, q] = beliefs.bit_marginal(bit);
    if !(p * q > 0.0) {
        return Err(Error::Saturated { bit });
    }
    Ok([p, q])
}

/// `<(s - m)^q>_i / (1 - m^2)^q` for `q >= 2`, written with `1 +- m = 2 b(+-)`:
/// `[(1 - m)^(q-1) + (-1)^q (1 + m)^(q-1)] / (2 (1 - m^2)^(q-1))`.
fn bit_factor(beliefs: &Beliefs, bit: usize, q: usize) -> Result<f64> {
    let [p, n] = marginal(beliefs, bit)?;
    let k = (q - 1) as i32;
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    Ok(((2.0 * n).powi(k) + sign * (2.0 * p).powi(k)) / (2.0 * (4.0 * p * n).powi(k)))
}

/// `<s (s - m)^q>_i / (1 - m^2)^q` for the root of an extended loop.
fn root_factor(beliefs: &Beliefs, bit: usize, q: usize) -> Result<f64> {
    let [p, n] = marginal(beliefs, bit)?;
    let qi = q as i32;
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    Ok((p * (2.0 * n).powi(qi) - n * sign * (2.0 * p).powi(qi)) / (4.0 * p * n).powi(qi))
}

/// `mu_a = sum_s b_a(s) prod_(loop edges at a) (s_i - m_i)`.
fn check_factor(code: &ParityCheckCode, beliefs: &Beliefs, check: usize, loop_edges: &[usize]) -> f64 {
    let edges = code.check_edges(check);
    let masks = even_masks(edges.len());
    // s - m is 2 b(-) for s = +1 and -2 b(+) for s = -1; this keeps precision
    // when m rounds to +-1.
    let positions: Vec<(usize, [f64; 2])> = loop_edges
        .iter()
        .filter(|e| edges.contains(e))
        .map(|&e| {
            let [p, n] = beliefs.bit_marginal(code.edge_bit(e));
            (e - edges.start, [2.0 * n, -2.0 * p])
        })
        .collect();
    masks
        .iter()
        .zip(&beliefs.check_beliefs[check])
        .map(|(&mask, p)| {
            p * positions
                .iter()
                .map(|&(k, d)| d[usize::from(spin(mask, k) < 0.0)])
                .product::<f64>()
        })
        .sum()
}

/// Product of factors of wildly different magnitude without overflow.
fn signed_product<'a>(factors: impl Iterator<Item = &'a f64>) -> f64 {
    let mut sign = 1.0;
    let mut log = 0.0;
    for &f in factors {
        if f == 0.0 {
            return 0.0;
        }
        sign *= f.signum();
        log += f.abs().ln();
    }
    sign * log.exp()
}

fn amplitude(
    code: &ParityCheckCode,
    beliefs: &Beliefs,
    l: &GeneralizedLoop,
    root: Option<usize>,
) -> Result<LoopAmplitude> {
    let mut bit_factors = Vec::with_capacity(l.bits.len());
    for &(i, q) in &l.bits {
        let f = if Some(i) == root {
            root_factor(beliefs, i, q)?
        } else {
            bit_factor(beliefs, i, q)?
        };
        bit_factors.push((i, f));
    }
    let check_factors: Vec<(usize, f64)> = l
        .checks
        .iter()
        .map(|&(a, _)| (a, check_factor(code, beliefs, a, &l.edges)))
        .collect();
    let r = signed_product(bit_factors.iter().chain(&check_factors).map(|(_, f)| f));
    Ok(LoopAmplitude {
        r,
        bit_factors,
        check_factors,
    })
}

fn check_sizes(code: &ParityCheckCode, beliefs: &Beliefs) -> Result<()> {
    if beliefs.bit_fields.len() != code.n_bits() || beliefs.check_beliefs.len() != code.n_checks() {
        return Err(Error::InvalidBelief("belief vector sizes".into()));
    }
    Ok(())
}

/// Loop amplitude `r(C)` for a generalized loop `C`.
pub fn loop_amplitude(code: &ParityCheckCode, beliefs: &Beliefs, l: &GeneralizedLoop) -> Result<LoopAmplitude> {
    check_sizes(code, beliefs)?;
    if l.bits.iter().chain(&l.checks).any(|&(_, q)| q < 2) {
        return Err(Error::InvalidArgument("not a generalized loop".into()));
    }
    amplitude(code, beliefs, l, None)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesResult {
    pub ln_z0: f64,
    pub sum_r: f64,
    /// `ln Z0 + ln(1 + sum r)`; NaN when `1 + sum r <= 0`.
    pub ln_z: f64,
    pub amplitudes: Vec<f64>,
}

/// Truncated (or complete, if `loops` is exhaustive) loop series for `ln Z`.
pub fn partition_function_series(
    code: &ParityCheckCode,
    h: &[f64],
    beliefs: &Beliefs,
    loops: &[GeneralizedLoop],
) -> Result<SeriesResult> {
    let ln_z0 = -bethe_free_energy(code, h, beliefs)?;
    let amplitudes = loops
        .iter()
        .map(|l| loop_amplitude(code, beliefs, l).map(|a| a.r))
        .collect::<Result<Vec<f64>>>()?;
    let sum_r: f64 = amplitudes.iter().sum();
    let ln_z = if 1.0 + sum_r > 0.0 {
        ln_z0 + sum_r.ln_1p()
    } else {
        f64::NAN
    };
    Ok(SeriesResult {
        ln_z0,
        sum_r,
        ln_z,
        amplitudes,
    })
}

/// Where the extended loops for each bit come from.
#[derive(Clone, Copy, Debug)]
pub enum ExtendedLoops {
    /// Enumerate all of them under the budget; with an exhaustive `loops`
    /// list this makes the corrected magnetizations exact.
    Exhaustive(LoopBudget),
    /// Only the supplied loops that pass through the bit.
    FromSupplied,
}

/// Loop-corrected magnetizations
/// `m_i = [m_i (1 + sum_(C not at i) r) + sum_(extended C at i) dm] / (1 + sum_C r)`.
pub fn loop_corrected_magnetization(
    code: &ParityCheckCode,
    beliefs: &Beliefs,
    loops: &[GeneralizedLoop],
    extended: ExtendedLoops,
) -> Result<Vec<f64>> {
    check_sizes(code, beliefs)?;
    let r = loops
        .iter()
        .map(|l| loop_amplitude(code, beliefs, l).map(|a| a.r))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = r.iter().sum();
    let mut out = Vec::with_capacity(code.n_bits());
    for i in 0..code.n_bits() {
        let m = beliefs.bit_magnetizations[i];
        let away: f64 = loops
            .iter()
            .zip(&r)
            .filter(|(l, _)| !l.contains_bit(i))
            .map(|(_, r)| r)
            .sum();
        let dm: f64 = match extended {
            ExtendedLoops::Exhaustive(budget) => enumerate_extended_loops(code, i, budget)?
                .iter()
                .map(|l| amplitude(code, beliefs, l, Some(i)).map(|a| a.r))
                .sum::<Result<f64>>()?,
            ExtendedLoops::FromSupplied => loops
                .iter()
                .filter(|l| l.contains_bit(i))
                .map(|l| amplitude(code, beliefs, l, Some(i)).map(|a| a.r))
                .sum::<Result<f64>>()?,
        };
        out.push((m * (1.0 + away) + dm) / (1.0 + total));
    }
    Ok(out)
}
