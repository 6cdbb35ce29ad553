//! Beliefs in the zero-temperature (LP) limit of the Bethe free energy.
//!
//! Bit beliefs follow the LP optimum `omega` (`m_i = 1 - 2 omega_i`). Each
//! check belief is the maximum-entropy distribution over satisfying local
//! configurations with those bit marginals, fitted by iterative scaling.
//! Bits at 0 or 1 are pinned, so pairs confined to a two-state local support
//! come out perfectly correlated.

use crate::bp::{Beliefs, MESSAGE_CLIP};
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::local::{even_masks, spin};

use super::decoder::INTEGRALITY_TOL;

const FIT_SWEEPS: usize = 20_000;
const FIT_TOL: f64 = 1e-13;

fn fit_check(omega: &[f64], masks: &[u32]) -> Result<Vec<f64>> {
    let d = omega.len();
    let pinned: Vec<Option<f64>> = omega
        .iter()
        .map(|&w| {
            if w <= INTEGRALITY_TOL {
                Some(1.0)
            } else if w >= 1.0 - INTEGRALITY_TOL {
                Some(-1.0)
            } else {
                None
            }
        })
        .collect();
    let allowed: Vec<bool> = masks
        .iter()
        .map(|&m| (0..d).all(|k| pinned[k].is_none_or(|s| spin(m, k) == s)))
        .collect();
    if !allowed.iter().any(|&a| a) {
        return Err(Error::InvalidBelief("local marginals admit no parity configuration".into()));
    }
    let target: Vec<f64> = omega.iter().map(|w| 1.0 - 2.0 * w).collect();
    let mut lambda = vec![0.0; d];
    let probs = |lambda: &[f64]| -> Vec<f64> {
        let e: Vec<f64> = masks
            .iter()
            .zip(&allowed)
            .map(|(&m, &a)| {
                if a {
                    (0..d).map(|k| lambda[k] * spin(m, k)).sum::<f64>()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = e.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= z);
        p
    };
    let marg = |p: &[f64], k: usize| -> f64 { masks.iter().zip(p).map(|(&m, q)| q * spin(m, k)).sum() };
    for _ in 0..FIT_SWEEPS {
        let mut worst = 0.0f64;
        for k in (0..d).filter(|&k| pinned[k].is_none()) {
            let p = probs(&lambda);
            let cur = marg(&p, k).clamp(-1.0 + 1e-300, 1.0 - 1e-300);
            worst = worst.max((cur - target[k]).abs());
            lambda[k] = (lambda[k] + target[k].atanh() - cur.atanh()).clamp(-4.0 * MESSAGE_CLIP, 4.0 * MESSAGE_CLIP);
        }
        if worst <= FIT_TOL {
            break;
        }
    }
    Ok(probs(&lambda))
}

/// LP-limit beliefs for an LP optimum `omega` of `code`.
pub fn lp_limit_beliefs(code: &ParityCheckCode, omega: &[f64]) -> Result<Beliefs> {
    if omega.len() != code.n_bits() {
        return Err(Error::LengthMismatch {
            expected: code.n_bits(),
            got: omega.len(),
        });
    }
    let w: Vec<f64> = omega.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let bit_fields: Vec<f64> = w
        .iter()
        .map(|&v| (1.0 - 2.0 * v).clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh())
        .collect();
    let bit_magnetizations = w.iter().map(|v| 1.0 - 2.0 * v).collect();
    let mut check_beliefs = Vec::with_capacity(code.n_checks());
    let mut edge_magnetizations = vec![0.0; code.n_edges()];
    for a in 0..code.n_checks() {
        let bits = code.check_neighbors(a);
        let masks = even_masks(bits.len());
        let local: Vec<f64> = bits.iter().map(|&i| w[i]).collect();
        let p = fit_check(&local, &masks)?;
        for (k, e) in code.check_edges(a).enumerate() {
            edge_magnetizations[e] = masks.iter().zip(&p).map(|(&m, q)| q * spin(m, k)).sum();
        }
        check_beliefs.push(p);
    }
    Ok(Beliefs {
        bit_fields,
        bit_magnetizations,
        check_beliefs,
        edge_magnetizations,
    })
}
