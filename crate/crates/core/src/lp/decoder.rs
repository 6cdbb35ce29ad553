//! LP decoding over the relaxed codeword polytope.

use serde::{Deserialize, Serialize};

use super::simplex::{lp_solve, LpProblem, LpRow, LpSolution, Sense, SimplexParams};
use crate::channel::effective_distance;
use crate::code::{Codeword, ParityCheckCode};
use crate::error::{Error, Result};

/// Coordinates within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-7;

/// Objective `sum_i 2 h_i x_i` (bit domain, `s_i = 1 - 2 x_i`) with, for every
/// check `a` and odd `S` in `N(a)`:
/// `sum_(i in S) x_i - sum_(i in N(a)\S) x_i <= |S| - 1`.
pub fn build_decoding_lp(code: &ParityCheckCode, h: &[f64]) -> Result<LpProblem> {
    if h.len() != code.n_bits() {
        return Err(Error::LengthMismatch {
            expected: code.n_bits(),
            got: h.len(),
        });
    }
    let mut rows = Vec::new();
    for bits in code.checks() {
        let d = bits.len();
        if d >= 31 {
            return Err(Error::InvalidArgument(format!("check degree {d} too large")));
        }
        for s in (0u32..1 << d).filter(|s| s.count_ones() % 2 == 1) {
            let coeffs = bits
                .iter()
                .enumerate()
                .map(|(k, &i)| (i, if (s >> k) & 1 == 1 { 1.0 } else { -1.0 }))
                .collect();
            rows.push(LpRow {
                coeffs,
                sense: Sense::Le,
                rhs: f64::from(s.count_ones()) - 1.0,
            });
        }
    }
    Ok(LpProblem {
        objective: h.iter().map(|v| 2.0 * v).collect(),
        rows,
        upper: vec![1.0; code.n_bits()],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoCodeword {
    pub omega: Vec<f64>,
    pub is_integral: bool,
    pub objective_value: f64,
    /// NaN for the all-zero vector.
    pub effective_distance: f64,
}

impl PseudoCodeword {
    pub fn from_solution(s: &LpSolution) -> Self {
        let is_integral = s
            .x
            .iter()
            .all(|&v| v.abs() <= INTEGRALITY_TOL || (v - 1.0).abs() <= INTEGRALITY_TOL);
        PseudoCodeword {
            omega: s.x.clone(),
            is_integral,
            objective_value: s.objective,
            effective_distance: effective_distance(&s.x).unwrap_or(f64::NAN),
        }
    }

    /// Rounded bits, if integral.
    pub fn codeword(&self) -> Option<Codeword> {
        self.is_integral.then(|| Codeword {
            bits: self.omega.iter().map(|&v| u8::from(v > 0.5)).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LpDecodeResult {
    Success { codeword: Codeword, solution: PseudoCodeword },
    Failure { pseudo_codeword: PseudoCodeword },
}

impl LpDecodeResult {
    pub fn is_success(&self) -> bool {
        matches!(self, LpDecodeResult::Success { .. })
    }

    pub fn pseudo_codeword(&self) -> &PseudoCodeword {
        match self {
            LpDecodeResult::Success { solution, .. } => solution,
            LpDecodeResult::Failure { pseudo_codeword } => pseudo_codeword,
        }
    }
}

/// Integral optimum (that also satisfies every check) means success.
pub fn decode_lp(code: &ParityCheckCode, h: &[f64]) -> Result<LpDecodeResult> {
    let problem = build_decoding_lp(code, h)?;
    let s = lp_solve(&problem, &SimplexParams::default())?;
    let pc = PseudoCodeword::from_solution(&s);
    Ok(match pc.codeword() {
        Some(c) if code.is_codeword_bits(&c.bits) => LpDecodeResult::Success {
            codeword: c,
            solution: pc,
        },
        _ => LpDecodeResult::Failure { pseudo_codeword: pc },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_tanner_155;

    #[test]
    fn constraint_counts() {
        let t = build_tanner_155();
        assert_eq!(build_decoding_lp(&t, &vec![1.0; 155]).unwrap().rows.len(), 93 * 16);
        let c = ParityCheckCode::from_checks(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(build_decoding_lp(&c, &[1.0; 3]).unwrap().rows.len(), 4);
    }

    #[test]
    fn repetition_prefers_ones() {
        let c = ParityCheckCode::from_checks(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let r = decode_lp(&c, &[1.0, 1.0, -3.0]).unwrap();
        match r {
            LpDecodeResult::Success { codeword, solution } => {
                assert_eq!(codeword.bits, vec![1, 1, 1]);
                assert!((solution.objective_value + 2.0).abs() < 1e-12);
            }
            _ => panic!("expected success"),
        }
    }

    #[test]
    fn noiseless_tanner() {
        let t = build_tanner_155();
        let r = decode_lp(&t, &vec![1.0; 155]).unwrap();
        assert!(r.is_success());
        assert_eq!(r.pseudo_codeword().objective_value, 0.0);
        assert!(r.pseudo_codeword().omega.iter().all(|&v| v == 0.0));
    }
}
