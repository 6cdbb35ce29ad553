use loopdec::bp::{bethe_free_energy, run_bp, BpParams};
use loopdec::exact::exact_marginals;
use loopdec::gauge::{ln_z0, Gauges};
use loopdec::loops::*;
use loopdec::testgraphs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> BpParams {
    testgraphs::tight_bp()
}

fn fields(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0)).collect()
}

#[test]
fn series_reproduces_ln_z_on_small_graphs() {
    for g in testgraphs::zcheck_suite() {
        let loops = enumerate_generalized_loops(&g.code, LoopBudget::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &tight(), 100, &mut rng).unwrap();
            let (h, beliefs) = (d.h, d.beliefs);
            let exact = exact_marginals(&g.code, &h).unwrap();
            let s = partition_function_series(&g.code, &h, &beliefs, &loops).unwrap();
            assert!((s.ln_z - exact.ln_z).abs() <= 1e-10, "{}: {} vs {}", g.name, s.ln_z, exact.ln_z);
        }
    }
}

#[test]
fn corrected_magnetizations_are_exact() {
    for g in testgraphs::zcheck_suite() {
        let loops = enumerate_generalized_loops(&g.code, LoopBudget::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &tight(), 100, &mut rng).unwrap();
            let (h, beliefs) = (d.h, d.beliefs);
            let exact = exact_marginals(&g.code, &h).unwrap();
            let m = loop_corrected_magnetization(&g.code, &beliefs, &loops, ExtendedLoops::Exhaustive(LoopBudget::default())).unwrap();
            for (i, (a, b)) in m.iter().zip(&exact.magnetizations).enumerate() {
                assert!((a - b).abs() <= 1e-9, "{} bit {i}: {a} vs {b}", g.name);
            }
        }
    }
}

#[test]
fn gauge_ln_z0_matches_bethe() {
    for g in testgraphs::zcheck_suite() {
        let h = fields(g.code.n_bits(), 7, 0.5);
        let (state, beliefs) = run_bp(&g.code, &h, &tight()).unwrap();
        let gauges = Gauges::from_bp_messages(&g.code, &state.eta);
        let f = bethe_free_energy(&g.code, &h, &beliefs).unwrap();
        assert!((ln_z0(&g.code, &h, &gauges) + f).abs() < 1e-10, "{}", g.name);
    }
}

#[test]
fn simple_loop_amplitude_is_triad_product() {
    let code = testgraphs::k4_cycle_code();
    let h = fields(6, 3, 0.8);
    let params = BpParams { max_iters: 50_000, tol: 1e-15, damping: 0.0 };
    let (_, beliefs) = run_bp(&code, &h, &params).unwrap();
    let loops = enumerate_generalized_loops(&code, LoopBudget::default()).unwrap();
    let triads = triad_amplitudes(&code, &beliefs);
    let simple = simple_loops_above(&code, &triads, 0.0, 12, 1000);
    assert_eq!(simple.len(), 7);
    for s in &simple {
        let edges: Vec<usize> = (0..s.len())
            .flat_map(|k| [code.edge_id(s.bits[k], s.checks[k]).unwrap(), code.edge_id(s.bits[(k + 1) % s.len()], s.checks[k]).unwrap()])
            .collect();
        let l = GeneralizedLoop::from_edges(&code, &edges).unwrap();
        assert!(loops.contains(&l));
        let r = loop_amplitude(&code, &beliefs, &l).unwrap().r;
        assert!((r - s.r).abs() < 1e-12, "{r} vs {}", s.r);
    }
}
