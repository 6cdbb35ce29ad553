//! Generalized loops, the loop series and critical-loop detection.

mod critical;
mod enumerate;
mod series;

pub use critical::{
    filtered_triads, find_critical_loop, rank_loops, simple_loops_above, triad_amplitudes, CriticalLoopParams, CriticalLoopSearch, SimpleLoop,
    Triad,
};
pub use enumerate::{enumerate_extended_loops, enumerate_generalized_loops, GeneralizedLoop, LoopBudget};
pub use series::{
    loop_amplitude, loop_corrected_magnetization, partition_function_series, ExtendedLoops, LoopAmplitude,
    SeriesResult,
};
