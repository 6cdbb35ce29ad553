//! Exact sums over the local configurations of a parity check.
//!
//! A check of degree `d` has `2^(d-1)` satisfying configurations, encoded as
//! bit masks with even popcount (bit `k` set means neighbor `k` has spin -1).

/// Even-parity masks over `d` positions in ascending order.
pub fn even_masks(d: usize) -> Vec<u32> {
    assert!(d < 31, "check degree {d} too large for exhaustive local sums");
    (0u32..(1u32 << d)).filter(|m| m.count_ones() % 2 == 0).collect()
}

#[inline]
pub fn spin(mask: u32, k: usize) -> f64 {
    if (mask >> k) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Distribution `b(s) ~ delta(prod s = 1) exp(sum_k field_k s_k)` over
/// `masks`, plus the log of its normalizer.
pub fn check_distribution(fields: &[f64], masks: &[u32]) -> (Vec<f64>, f64) {
    let exps: Vec<f64> = masks
        .iter()
        .map(|&m| {
            fields
                .iter()
                .enumerate()
                .map(|(k, f)| f * spin(m, k))
                .sum::<f64>()
        })
        .collect();
    let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = exps.iter().map(|e| (e - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= z;
    }
    (probs, max + z.ln())
}

/// `ln(2 cosh x)` without overflow.
#[inline]
pub fn ln_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `1 - tanh(x)^2` computed as `sech(x)^2`.
#[inline]
pub fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}
