//! Small bundled codes used by the exactness checks and the z-check suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bp::{run_bp, Beliefs, BpParams, BpState};
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};

/// A named small code.
#[derive(Clone, Debug)]
pub struct TestGraph {
    pub name: &'static str,
    pub code: ParityCheckCode,
}

fn code(n: usize, checks: &[&[usize]]) -> ParityCheckCode {
    ParityCheckCode::from_checks(n, checks.iter().map(|c| c.to_vec()).collect())
        .expect("bundled graph is well-formed")
}

/// Three-bit repetition code; its Tanner graph is a path.
pub fn repetition3() -> ParityCheckCode {
    code(3, &[&[0, 1], &[1, 2]])
}

/// A cycle-free code with mixed check degrees.
pub fn tree() -> ParityCheckCode {
    code(7, &[&[0, 1, 2], &[2, 3, 4], &[4, 5], &[3, 6]])
}

/// One Tanner cycle through three degree-3 checks; each check also holds a
/// pendant bit so the loop couplings stay finite.
pub fn single_cycle() -> ParityCheckCode {
    code(6, &[&[0, 1, 3], &[1, 2, 4], &[2, 0, 5]])
}

/// Two cycles sharing a path (a theta graph).
pub fn fused_cycles() -> ParityCheckCode {
    // Checks 0 and 1 are joined by three bit paths.
    code(
        7,
        &[&[0, 1, 3], &[0, 2, 4], &[1, 2, 5], &[3, 4, 6]],
    )
}

/// The loop-counting example: bits on the six edges of K4, checks on its four
/// vertices. It has exactly 14 generalized loops.
pub fn k4_cycle_code() -> ParityCheckCode {
    // K4 edges: 0:(0,1) 1:(0,2) 2:(0,3) 3:(1,2) 4:(1,3) 5:(2,3)
    code(6, &[&[0, 1, 2], &[0, 3, 4], &[1, 3, 5], &[2, 4, 5]])
}

/// 3 x 3 product code: bits on a grid, one check per row and per column.
pub fn grid3x3() -> ParityCheckCode {
    code(
        9,
        &[
            &[0, 1, 2],
            &[3, 4, 5],
            &[6, 7, 8],
            &[0, 3, 6],
            &[1, 4, 7],
            &[2, 5, 8],
        ],
    )
}

/// The (7, 4) Hamming code.
pub fn hamming74() -> ParityCheckCode {
    code(7, &[&[0, 2, 4, 6], &[1, 2, 5, 6], &[3, 4, 5, 6]])
}

/// Bits of degree 2, checks of degree 3: the cycle code of a random simple
/// cubic graph on `vertices` vertices (even, >= 4).
pub fn random_cycle_code_23(vertices: usize, seed: u64) -> ParityCheckCode {
    assert!(vertices >= 4 && vertices % 2 == 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut stubs: Vec<usize> = (0..vertices).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> = stubs
            .chunks(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        let simple = edges.iter().all(|(a, b)| a != b)
            && (0..edges.len()).all(|i| !edges[..i].contains(&edges[i]));
        if !simple {
            continue;
        }
        let mut checks = vec![Vec::new(); vertices];
        for (bit, &(a, b)) in edges.iter().enumerate() {
            checks[a].push(bit);
            checks[b].push(bit);
        }
        return ParityCheckCode::from_checks(edges.len(), checks).expect("simple cubic graph");
    }
}

/// Two disjoint copies of [`single_cycle`].
pub fn two_disjoint_cycles() -> ParityCheckCode {
    code(
        12,
        &[
            &[0, 1, 3],
            &[1, 2, 4],
            &[2, 0, 5],
            &[6, 7, 9],
            &[7, 8, 10],
            &[8, 6, 11],
        ],
    )
}

/// The graphs of the loop-series exactness suite (all at most 20 bits).
pub fn zcheck_suite() -> Vec<TestGraph> {
    vec![
        TestGraph { name: "tree", code: tree() },
        TestGraph { name: "single-cycle", code: single_cycle() },
        TestGraph { name: "fused-cycles", code: fused_cycles() },
        TestGraph { name: "k4-cycle-code", code: k4_cycle_code() },
        TestGraph { name: "random-23", code: random_cycle_code_23(8, 5) },
        TestGraph { name: "grid-3x3", code: grid3x3() },
        TestGraph { name: "hamming-7-4", code: hamming74() },
    ]
}

/// Cycle-free graphs only.
pub fn tree_suite() -> Vec<TestGraph> {
    vec![
        TestGraph { name: "repetition-3", code: repetition3() },
        TestGraph { name: "tree", code: tree() },
    ]
}

/// BP settings used when an accurate fixed point is needed.
pub fn tight_bp() -> BpParams {
    BpParams {
        max_iters: 20_000,
        tol: 1e-14,
        damping: 0.3,
    }
}

/// A field draw together with its interior BP fixed point.
#[derive(Clone, Debug)]
pub struct FixedPointDraw {
    pub h: Vec<f64>,
    pub state: BpState,
    pub beliefs: Beliefs,
    /// Earlier draws discarded because BP ran to the message clip or did not
    /// converge.
    pub rejected: usize,
}

/// Draws `h_i ~ N(0, sd^2)` until BP reaches an interior fixed point.
///
/// On codes whose bits all have degree 2 the messages can grow without bound,
/// and then no interior fixed point exists for that draw.
pub fn draw_with_fixed_point<R: Rng>(
    code: &ParityCheckCode,
    sd: f64,
    params: &BpParams,
    max_attempts: usize,
    rng: &mut R,
) -> Result<FixedPointDraw> {
    let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for rejected in 0..max_attempts {
        let h: Vec<f64> = (0..code.n_bits()).map(|_| normal.sample(rng)).collect();
        let (state, beliefs) = run_bp(code, &h, params)?;
        if state.converged && !state.is_saturated() {
            return Ok(FixedPointDraw {
                h,
                state,
                beliefs,
                rejected,
            });
        }
    }
    Err(Error::InvalidArgument(format!(
        "no interior BP fixed point in {max_attempts} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn girths() {
        assert_eq!(tree().girth(), None);
        assert_eq!(repetition3().girth(), None);
        assert_eq!(single_cycle().girth(), Some(6));
        assert_eq!(k4_cycle_code().girth(), Some(6));
        assert!(zcheck_suite().iter().all(|g| g.code.n_bits() <= 20));
    }

    #[test]
    fn random_cubic_is_regular() {
        let c = random_cycle_code_23(8, 5);
        assert_eq!(c.n_bits(), 12);
        assert!((0..12).all(|i| c.bit_degree(i) == 2));
        assert!((0..8).all(|a| c.check_degree(a) == 3));
    }
}
