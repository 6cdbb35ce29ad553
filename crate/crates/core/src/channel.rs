//! AWGN channel simulation, log-likelihood vectors and pseudo-codeword geometry.
//!
//! Log-likelihoods are kept in SNR units: for the AWGN channel with density
//! `p(x|s) ~ exp(-s2 (x - s)^2 / 2)` the normalized log-likelihood is `h = x`.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::code::Codeword;
use crate::error::{Error, Result};

/// Per-bit log-likelihoods `h_i`, optionally tagged with the `s2` that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlrVector {
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_s2: Option<f64>,
}

impl LlrVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if let Some(i) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("log-likelihood {i} is not finite")));
        }
        Ok(LlrVector { h, snr_s2: None })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> LlrVector {
        LlrVector {
            h: self.h.iter().map(|v| v * factor).collect(),
            snr_s2: self.snr_s2,
        }
    }

    pub fn to_csv(&self) -> String {
        write_csv_column(&self.h)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::new(read_csv_column(text)?)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// One value per line; `{:?}` formatting keeps the round trip exact.
pub fn write_csv_column(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for v in values {
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn read_csv_column(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: not a number: {:?}", k + 1, l.trim())))
        })
        .collect()
}

/// Channel outputs for one transmitted word.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfiguration {
    pub x: Vec<f64>,
    pub transmitted: Codeword,
    pub s2: Option<f64>,
}

/// `x_i = s_i + g_i`, `g_i ~ N(0, 1/s2)` i.i.d., deterministic in `seed`.
pub fn awgn_sample(transmitted: &Codeword, s2: f64, seed: u64) -> Result<NoiseConfiguration> {
    if !(s2 > 0.0 && s2.is_finite()) {
        return Err(Error::InvalidArgument(format!("s2 must be positive, got {s2}")));
    }
    let normal = Normal::new(0.0, 1.0 / s2.sqrt()).expect("positive finite std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = transmitted
        .spins()
        .into_iter()
        .map(|s| f64::from(s) + normal.sample(&mut rng))
        .collect();
    Ok(NoiseConfiguration {
        x,
        transmitted: transmitted.clone(),
        s2: Some(s2),
    })
}

/// AWGN log-likelihoods in SNR units are the channel outputs themselves.
pub fn llr_from_output(noise: &NoiseConfiguration) -> LlrVector {
    LlrVector {
        h: noise.x.clone(),
        snr_s2: noise.s2,
    }
}

fn check_pseudo_codeword(omega: &[f64]) -> Result<(f64, f64)> {
    if omega.iter().any(|w| !(-1e-9..=1.0 + 1e-9).contains(w)) {
        return Err(Error::InvalidArgument(
            "pseudo-codeword entries must lie in [0, 1]".into(),
        ));
    }
    let sum: f64 = omega.iter().sum();
    let sq: f64 = omega.iter().map(|w| w * w).sum();
    if sq <= 0.0 {
        return Err(Error::ZeroPseudoCodeword);
    }
    Ok((sum, sq))
}

/// AWGN pseudo-weight `(sum w)^2 / sum w^2` relative to the zero codeword.
pub fn effective_distance(omega: &[f64]) -> Result<f64> {
    let (sum, sq) = check_pseudo_codeword(omega)?;
    Ok(sum * sum / sq)
}

/// Minimum-norm noise (around the all-(+1) signal) on which the LP costs of
/// `omega` and of the zero codeword tie:
/// `h_i = 1 - w_i * (sum w) / (sum w^2)`, so `sum_i h_i w_i = 0` and
/// `|h - 1|^2 = effective_distance(w)`.
pub fn instanton_noise_for(omega: &[f64]) -> Result<LlrVector> {
    let (sum, sq) = check_pseudo_codeword(omega)?;
    let t = sum / sq;
    Ok(LlrVector {
        h: omega.iter().map(|w| 1.0 - w * t).collect(),
        snr_s2: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vanishing_noise_reproduces_signal() {
        let tx = Codeword { bits: vec![0, 1, 1, 0] };
        let n = awgn_sample(&tx, 1e9, 7).unwrap();
        for (x, s) in n.x.iter().zip(tx.spins()) {
            assert!((x - f64::from(s)).abs() < 1e-3);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let tx = Codeword::zero(50);
        assert_eq!(awgn_sample(&tx, 2.0, 11).unwrap(), awgn_sample(&tx, 2.0, 11).unwrap());
        assert_ne!(awgn_sample(&tx, 2.0, 11).unwrap().x, awgn_sample(&tx, 2.0, 12).unwrap().x);
    }

    #[test]
    fn noise_moments_at_unit_snr() {
        let tx = Codeword::zero(100_000);
        let x = awgn_sample(&tx, 1.0, 3).unwrap().x;
        let n = x.len() as f64;
        let mean = x.iter().map(|v| v - 1.0).sum::<f64>() / n;
        let var = x.iter().map(|v| (v - 1.0 - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn nonpositive_s2_rejected() {
        assert!(awgn_sample(&Codeword::zero(3), 0.0, 1).is_err());
    }

    #[test]
    fn llr_is_channel_output() {
        let noise = NoiseConfiguration {
            x: vec![1.0, -0.3],
            transmitted: Codeword::zero(2),
            s2: None,
        };
        assert_eq!(llr_from_output(&noise).h, vec![1.0, -0.3]);
        let zero = NoiseConfiguration {
            x: vec![0.0; 3],
            transmitted: Codeword::zero(3),
            s2: None,
        };
        assert_eq!(llr_from_output(&zero).h, vec![0.0; 3]);
    }

    #[test]
    fn effective_distance_examples() {
        let mut w = vec![0.0; 155];
        w[..20].fill(1.0);
        assert_eq!(effective_distance(&w).unwrap(), 20.0);
        assert_eq!(effective_distance(&[0.5; 4]).unwrap(), 4.0);
        assert!(matches!(effective_distance(&[0.0; 4]), Err(Error::ZeroPseudoCodeword)));
    }

    #[test]
    fn integral_instanton_erases_support() {
        let w = [1.0, 0.0, 1.0, 1.0, 0.0];
        let h = instanton_noise_for(&w).unwrap().h;
        assert_eq!(h, vec![0.0, 1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let v = LlrVector::new(vec![0.1, -1.0 / 3.0, 1e-300, 5.0]).unwrap();
        assert_eq!(LlrVector::from_csv(&v.to_csv()).unwrap(), v);
    }

    proptest! {
        #[test]
        fn instanton_is_on_equal_cost_surface(w in proptest::collection::vec(0.0f64..=1.0, 1..40)) {
            prop_assume!(w.iter().any(|&v| v > 1e-3));
            let h = instanton_noise_for(&w).unwrap().h;
            let cost: f64 = h.iter().zip(&w).map(|(a, b)| a * b).sum();
            prop_assert!(cost.abs() < 1e-12 * (1.0 + w.len() as f64));
            let d2: f64 = h.iter().map(|v| (v - 1.0).powi(2)).sum();
            let d = effective_distance(&w).unwrap();
            prop_assert!((d2 - d).abs() < 1e-9 * d);
        }

        #[test]
        fn effective_distance_scale_invariant(w in proptest::collection::vec(0.0f64..=1.0, 1..40), c in 0.01f64..1.0) {
            prop_assume!(w.iter().any(|&v| v > 1e-3));
            let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
            let a = effective_distance(&w).unwrap();
            let b = effective_distance(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * a);
        }

        #[test]
        fn integral_vectors_give_hamming_weight(bits in proptest::collection::vec(0u8..=1, 1..60)) {
            prop_assume!(bits.contains(&1));
            let w: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
            let wt = bits.iter().filter(|&&b| b == 1).count() as f64;
            prop_assert_eq!(effective_distance(&w).unwrap(), wt);
        }
    }
}
