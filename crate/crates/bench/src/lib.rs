//! Shared fixtures for the benchmarks.

use loopdec::channel::{awgn_sample, llr_from_output};
use loopdec::code::build_tanner_155;
use loopdec::{Codeword, ParityCheckCode};

/// Tanner (155, 64, 20) code with one all-(+1) AWGN draw.
pub fn noisy_tanner(s2: f64, seed: u64) -> (ParityCheckCode, Vec<f64>) {
    let code = build_tanner_155();
    let noise = awgn_sample(&Codeword::zero(code.n_bits()), s2, seed).expect("valid s2");
    let h = llr_from_output(&noise).h;
    (code, h)
}
