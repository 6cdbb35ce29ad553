//! The quasi-cyclic (155, 64, 20) Tanner code and a randomized low-weight
//! codeword search used to probe its minimum distance.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Codeword, ParityCheckCode};
use crate::gf2::{popcount, BitMatrix};

const P: usize = 31;

/// 93 x 155 parity-check matrix built as a 3 x 5 array of 31 x 31 circulant
/// permutation matrices. Block `(a, b)` shifts the identity by
/// `5^a * 2^b mod 31`; 5 has order 3 and 2 has order 5 in GF(31).
pub fn build_tanner_155() -> ParityCheckCode {
    let mut checks = Vec::with_capacity(3 * P);
    for a in 0..3u32 {
        for r in 0..P {
            let bits = (0..5u32)
                .map(|b| {
                    let shift = (5usize.pow(a) * 2usize.pow(b)) % P;
                    b as usize * P + (r + shift) % P
                })
                .collect();
            checks.push(bits);
        }
    }
    ParityCheckCode::from_checks(5 * P, checks).expect("construction is well-formed")
}

/// Result of [`low_weight_codeword_search`].
#[derive(Clone, Debug)]
pub struct LowWeightSearch {
    /// Lowest-weight non-zero codeword found, if any.
    pub best: Option<Codeword>,
    pub trials_run: usize,
    /// Trials skipped because the punctured null space was too large.
    pub trials_skipped: usize,
}

/// Randomized search for low-weight codewords.
///
/// Each trial restricts the code to a random set of `support_size` bit
/// positions (all others forced to zero) and enumerates the null space of the
/// restricted parity-check matrix exhaustively when its dimension is at most
/// `max_subspace_dim`.
pub fn low_weight_codeword_search(
    code: &ParityCheckCode,
    support_size: usize,
    trials: usize,
    max_subspace_dim: usize,
    seed: u64,
) -> LowWeightSearch {
    let n = code.n_bits();
    let support_size = support_size.min(n);
    let full = code.to_bit_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(u32, Vec<usize>)> = None;
    let mut skipped = 0;
    for _ in 0..trials {
        let mut cols = index::sample(&mut rng, n, support_size).into_vec();
        cols.sort_unstable();
        let mut sub = BitMatrix::zeros(full.rows(), cols.len());
        for r in 0..full.rows() {
            for (k, &c) in cols.iter().enumerate() {
                if full.get(r, c) {
                    sub.set(r, k, true);
                }
            }
        }
        let basis = sub.nullspace();
        if basis.is_empty() {
            continue;
        }
        if basis.len() > max_subspace_dim {
            skipped += 1;
            continue;
        }
        // Gray-code walk over all non-zero combinations.
        let mut acc = vec![0u64; basis[0].len()];
        for step in 1u64..(1u64 << basis.len()) {
            let flip = step.trailing_zeros() as usize;
            for (a, b) in acc.iter_mut().zip(&basis[flip]) {
                *a ^= b;
            }
            let w = popcount(&acc);
            if w > 0 && best.as_ref().is_none_or(|(bw, _)| w < *bw) {
                let support = (0..cols.len())
                    .filter(|&k| (acc[k / 64] >> (k % 64)) & 1 == 1)
                    .map(|k| cols[k])
                    .collect();
                best = Some((w, support));
            }
        }
    }
    LowWeightSearch {
        best: best.map(|(_, support)| {
            let mut bits = vec![0u8; n];
            for i in support {
                bits[i] = 1;
            }
            Codeword { bits }
        }),
        trials_run: trials,
        trials_skipped: skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanner_structure() {
        let c = build_tanner_155();
        assert_eq!((c.n_bits(), c.n_checks(), c.n_edges()), (155, 93, 465));
        assert!((0..155).all(|i| c.bit_degree(i) == 3));
        assert!((0..93).all(|a| c.check_degree(a) == 5));
        assert_eq!(c.rank(), 91);
        assert_eq!(c.dimension(), 64);
    }
}
