//! Linear-programming decoding.

mod decoder;
mod erasure;
mod limit;
mod simplex;

pub use decoder::{build_decoding_lp, decode_lp, LpDecodeResult, PseudoCodeword, INTEGRALITY_TOL};
pub use erasure::{decode_lp_erasure, ErasureAttempt, ErasureOutcome, LoopSelector, LoopSource};
pub use limit::lp_limit_beliefs;
pub use simplex::{lp_solve, LpProblem, LpRow, LpSolution, LpStatus, Sense, SimplexParams};
