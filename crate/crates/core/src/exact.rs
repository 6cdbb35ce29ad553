//! Exhaustive reference computations over all codewords of a small code.

use crate::code::{enumerate_codewords, Codeword, ParityCheckCode};
use crate::error::{Error, Result};

/// `ln Z` and per-bit magnetizations of `W(s) ~ prod delta(parity) exp(sum h_i s_i)`.
#[derive(Clone, Debug)]
pub struct ExactMarginals {
    pub ln_z: f64,
    pub magnetizations: Vec<f64>,
}

fn log_weights(words: &[Codeword], h: &[f64]) -> Vec<f64> {
    words
        .iter()
        .map(|w| {
            w.bits
                .iter()
                .zip(h)
                .map(|(&b, &hi)| if b == 0 { hi } else { -hi })
                .sum()
        })
        .collect()
}

pub fn exact_marginals(code: &ParityCheckCode, h: &[f64]) -> Result<ExactMarginals> {
    if h.len() != code.n_bits() {
        return Err(Error::LengthMismatch {
            expected: code.n_bits(),
            got: h.len(),
        });
    }
    let words = enumerate_codewords(code)?;
    let lw = log_weights(&words, h);
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = lw.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut mag = vec![0.0; code.n_bits()];
    for (w, p) in words.iter().zip(&weights) {
        for (m, &b) in mag.iter_mut().zip(&w.bits) {
            *m += if b == 0 { *p } else { -*p };
        }
    }
    for m in &mut mag {
        *m /= z;
    }
    Ok(ExactMarginals {
        ln_z: max + z.ln(),
        magnetizations: mag,
    })
}

/// Maximum-likelihood codeword `argmax_c sum_i h_i s_i(c)`; ties resolve to
/// the first codeword in enumeration order.
pub fn ml_decode(code: &ParityCheckCode, h: &[f64]) -> Result<Codeword> {
    let words = enumerate_codewords(code)?;
    let lw = log_weights(&words, h);
    let best = lw
        .iter()
        .enumerate()
        .fold(0, |b, (k, v)| if *v > lw[b] { k } else { b });
    Ok(words[best].clone())
}
