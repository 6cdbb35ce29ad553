//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_GAPS` are still run at full strength and still
//! print FAIL when they fail; they only do not change the exit status.

use std::collections::BTreeSet;
use std::time::Instant;

use loopdec::bp::{bethe_free_energy, run_bp, BpParams};
use loopdec::code::build_tanner_155;
use loopdec::effective::{residual_system, solve_effective_bp, EffectiveParams, VertexModel};
use loopdec::exact::{exact_marginals, ml_decode};
use loopdec::experiments::{run_instanton_correction, run_zcheck_suite, CorrectionInput, ExperimentConfig};
use loopdec::instanton::{build_instanton_catalog, InstantonCatalog, InstantonParams};
use loopdec::loops::{
    enumerate_generalized_loops, find_critical_loop, loop_amplitude, simple_loops_above, triad_amplitudes,
    CriticalLoopParams, GeneralizedLoop, LoopBudget,
};
use loopdec::lp::{decode_lp, lp_limit_beliefs, LpDecodeResult};
use loopdec::testgraphs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const KNOWN_GAPS: &[u32] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let graphs = testgraphs::zcheck_suite();
    let cfg = ExperimentConfig {
        draws: 50,
        ..ExperimentConfig::default()
    };
    let report = run_zcheck_suite(&graphs, &cfg).expect("z-check suite");
    let worst = report.rows.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
    let small = report.rows.iter().all(|r| r.n_bits <= 20);
    outcome(
        graphs.len() >= 5 && small && worst <= 1e-8,
        format!("max |Z_series/Z - 1| = {worst:.2e} over {} graphs x 50 draws", graphs.len()),
    )
}

fn criterion_2() -> Outcome {
    let n = enumerate_generalized_loops(&testgraphs::k4_cycle_code(), LoopBudget::default())
        .expect("enumeration")
        .len();
    outcome(n == 14, format!("{n} generalized loops"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let (mut dm, mut df) = (0.0_f64, 0.0_f64);
    for g in testgraphs::tree_suite() {
        for _ in 0..50 {
            let h: Vec<f64> = (0..g.code.n_bits()).map(|_| normal.sample(&mut rng)).collect();
            let (state, beliefs) = run_bp(&g.code, &h, &testgraphs::tight_bp()).unwrap();
            assert!(state.converged);
            let exact = exact_marginals(&g.code, &h).unwrap();
            for (a, b) in beliefs.bit_magnetizations.iter().zip(&exact.magnetizations) {
                dm = dm.max((a - b).abs());
            }
            df = df.max((bethe_free_energy(&g.code, &h, &beliefs).unwrap() + exact.ln_z).abs());
        }
    }
    outcome(
        dm <= 1e-10 && df <= 1e-8,
        format!("max |m_bp - m| = {dm:.2e}, max |F + ln Z| = {df:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = BpParams {
        max_iters: 50_000,
        tol: 1e-15,
        damping: 0.3,
    };
    let (mut worst, mut max_triad, mut n) = (0.0_f64, 0.0_f64, 0);
    for g in testgraphs::zcheck_suite().into_iter().filter(|g| g.code.girth().is_some()) {
        for _ in 0..5 {
            let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &params, 200, &mut rng).unwrap();
            let triads = triad_amplitudes(&g.code, &d.beliefs);
            max_triad = triads.iter().map(|t| t.amplitude.abs()).fold(max_triad, f64::max);
            for c in simple_loops_above(&g.code, &triads, 0.0, 20, 10_000) {
                let edges: Vec<usize> = (0..c.len())
                    .flat_map(|k| {
                        [
                            g.code.edge_id(c.bits[k], c.checks[k]).unwrap(),
                            g.code.edge_id(c.bits[(k + 1) % c.len()], c.checks[k]).unwrap(),
                        ]
                    })
                    .collect();
                let l = GeneralizedLoop::from_edges(&g.code, &edges).unwrap();
                let r = loop_amplitude(&g.code, &d.beliefs, &l).unwrap().r;
                worst = worst.max((r - c.r).abs());
                n += 1;
            }
        }
    }
    outcome(
        worst <= 1e-12 && max_triad <= 1.0,
        format!("max |r - prod triads| = {worst:.2e} over {n} simple loops, max |triad| = {max_triad:.4}"),
    )
}

fn criterion_5(cat: &InstantonCatalog, seeds: usize) -> Outcome {
    let min = cat.min_effective_distance().unwrap_or(f64::NAN);
    let below = cat.entries.iter().filter(|e| e.record.effective_distance < 20.0).count();
    let mut steps: Vec<usize> = cat.entries.iter().flat_map(|e| std::iter::repeat_n(e.record.steps(), e.seeds.len())).collect();
    steps.sort_unstable();
    let median = steps.get(steps.len() / 2).copied().unwrap_or(0);
    outcome(
        seeds >= 500 && (min - 16.4037).abs() <= 0.05,
        format!("min d_eff = {min:.6} over {seeds} seeds; {below} distinct below 20; median steps {median}"),
    )
}

fn criterion_6(cat: &InstantonCatalog) -> Outcome {
    let code = build_tanner_155();
    let Some(lowest) = cat.entries.first() else {
        return outcome(false, "empty catalog".into());
    };
    let strict = CriticalLoopParams {
        thresholds: vec![0.999],
        ..CriticalLoopParams::default()
    };
    let beliefs = lp_limit_beliefs(&code, &lowest.record.pseudo_codeword.omega).unwrap();
    let found = find_critical_loop(&code, &beliefs, &strict).unwrap();
    let (r1, bits) = match &found {
        Some(f) => (f.maximal()[0].r, f.maximal()[0].bits.clone()),
        None => (f64::NAN, Vec::new()),
    };
    let degenerate = (r1.abs() - 1.0).abs() <= 1e-6;
    let mut intermediate = None;
    for e in cat.entries.iter().filter(|e| e.record.effective_distance < 20.0) {
        let b = lp_limit_beliefs(&code, &e.record.pseudo_codeword.omega).unwrap();
        if let Some(f) = find_critical_loop(&code, &b, &CriticalLoopParams::default()).unwrap() {
            let r = f.maximal()[0].r.abs();
            if r > 0.5 && r < 1.0 - 1e-6 {
                intermediate = Some((e.record.effective_distance, r));
                break;
            }
        }
    }
    outcome(
        degenerate && intermediate.is_some(),
        format!(
            "lowest family (d_eff {:.4}): |r| = {:.9} on bits {bits:?}; intermediate: {}",
            lowest.record.effective_distance,
            r1.abs(),
            intermediate.map_or("none".into(), |(d, r)| format!("|r| = {r:.6} at d_eff {d:.4}"))
        ),
    )
}

fn criterion_7(cat: &InstantonCatalog) -> Outcome {
    let code = build_tanner_155();
    let inputs: Vec<CorrectionInput> = cat
        .entries
        .iter()
        .map(|e| CorrectionInput {
            seed: e.record.seed,
            omega: e.record.pseudo_codeword.omega.clone(),
        })
        .collect();
    let cfg = ExperimentConfig {
        max_instantons: Some(50),
        probe_epsilon: None,
        ..ExperimentConfig::default()
    };
    let report = run_instanton_correction(&code, &inputs, &cfg).unwrap();
    let bare_ok = report.rows.iter().all(|r| r.bare_lp_failed);
    let frac = report.corrected_fraction.unwrap_or(0.0);
    let per_scale: Vec<String> = report
        .by_scale
        .iter()
        .map(|s| format!("{}:{}/{}", s.scale, s.corrected, s.total))
        .collect();
    let wrong = report.rows.iter().filter(|r| r.erasure_success && !r.decoded_correctly).count();
    for r in report.failures() {
        println!(
            "      unresolved: d_eff {:.4} x{} after {} attempts (last loops {:?})",
            r.d_eff, r.scale, r.attempts, r.loop_bits
        );
    }
    outcome(
        bare_ok && frac == 1.0,
        format!(
            "corrected {:.1}% of {} instanton cases ({}), wrong codewords {wrong}, bare LP failed on all: {bare_ok}",
            100.0 * frac,
            report.rows.len(),
            per_scale.join(" ")
        ),
    )
}

fn cycle_edges(code: &loopdec::ParityCheckCode, bits: &[usize], checks: &[usize]) -> Vec<usize> {
    (0..bits.len())
        .flat_map(|k| [code.edge_id(bits[k], checks[k]).unwrap(), code.edge_id(bits[(k + 1) % bits.len()], checks[k]).unwrap()])
        .collect()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let suite = testgraphs::zcheck_suite();
    let tight = EffectiveParams {
        max_iters: 20_000,
        tol: 1e-13,
        damping: 0.7,
    };
    // (a) empty loop set
    let mut a_worst = 0.0_f64;
    for k in 0..20 {
        let g = &suite[k % suite.len()];
        let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &testgraphs::tight_bp(), 100, &mut rng).unwrap();
        let model = VertexModel::from_code(&g.code, &d.h).unwrap();
        let gauges = model.gauges_from_bp(&g.code, &d.state.eta).unwrap();
        let res = residual_system(&model, &gauges, &[]).unwrap();
        a_worst = res.iter().map(|x| x.abs()).fold(a_worst, f64::max);
    }
    // (b) isolated cycle against brute force
    let code = testgraphs::single_cycle();
    let mut b_worst = 0.0_f64;
    for _ in 0..20 {
        let h: Vec<f64> = (0..code.n_bits()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let model = VertexModel::from_code_absorbing_leaves(&code, &h).unwrap();
        let ring = model.model_loop(&(0..model.n_edges()).collect::<Vec<_>>()).unwrap();
        let res = solve_effective_bp(&model, &[ring], None, &tight).unwrap();
        let exact = exact_marginals(&code, &h).unwrap();
        for i in 0..3 {
            let m = res.bit_magnetizations[i].unwrap_or(f64::NAN);
            b_worst = b_worst.max((m - exact.magnetizations[i]).abs());
        }
        if !res.state.converged {
            b_worst = f64::INFINITY;
        }
    }
    // (c) residual support on single-connected loops inside larger graphs
    let (mut c_ok, mut c_n) = (true, 0);
    for g in suite.iter().filter(|g| g.code.girth().is_some()) {
        let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &testgraphs::tight_bp(), 100, &mut rng).unwrap();
        let triads = triad_amplitudes(&g.code, &d.beliefs);
        let model = VertexModel::from_code(&g.code, &d.h).unwrap();
        let gauges = model.gauges_from_bp(&g.code, &d.state.eta).unwrap();
        for c in simple_loops_above(&g.code, &triads, 0.0, 12, 50).iter().filter(|c| c.r.abs() > 1e-3) {
            let lp = model.model_loop(&cycle_edges(&g.code, &c.bits, &c.checks)).unwrap();
            let res = residual_system(&model, &gauges, std::slice::from_ref(&lp)).unwrap();
            let side = |s: usize, k: usize| model.edge_ends[s / 2][(s + k) % 2];
            let expected: BTreeSet<usize> = (0..res.len())
                .filter(|&s| lp.contains_vertex(side(s, 0)) && !lp.contains_vertex(side(s, 1)))
                .collect();
            let support: BTreeSet<usize> = (0..res.len()).filter(|&s| res[s].abs() > 1e-11).collect();
            c_ok &= support == expected;
            c_n += 1;
        }
    }
    outcome(
        a_worst <= 1e-10 && b_worst <= 1e-8 && c_ok && c_n > 0,
        format!(
            "(a) max residual {a_worst:.1e} on 20 instances; (b) max |m_eff - m| = {b_worst:.1e}; (c) boundary support exact on {c_n} loops: {c_ok}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let normal = Normal::new(1.0, 1.0).unwrap();
    let mut graphs = testgraphs::zcheck_suite();
    graphs.extend(testgraphs::tree_suite());
    let (mut integral, mut mismatches, mut n_codes) = (0, 0, 0);
    for g in graphs.iter().filter(|g| g.code.dimension() <= 16) {
        n_codes += 1;
        for _ in 0..200 {
            let h: Vec<f64> = (0..g.code.n_bits()).map(|_| normal.sample(&mut rng)).collect();
            if let LpDecodeResult::Success { codeword, .. } = decode_lp(&g.code, &h).unwrap() {
                integral += 1;
                if codeword != ml_decode(&g.code, &h).unwrap() {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0 && integral > 0,
        format!("{integral} integral LP outputs on {n_codes} codes, {mismatches} differ from ML"),
    )
}

fn main() {
    let mut failed_hard = false;
    let mut report = |id: u32, name: &str, start: Instant, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let gap = if !o.pass && KNOWN_GAPS.contains(&id) { " (known gap)" } else { "" };
        println!(
            "[{tag}] {id} {name}: {}{gap} ({:.1} s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed_hard |= !o.pass && !KNOWN_GAPS.contains(&id);
    };
    let t = Instant::now();
    report(1, "loop-series exactness", t, criterion_1());
    let t = Instant::now();
    report(2, "four-check example loop count", t, criterion_2());
    let t = Instant::now();
    report(3, "tree exactness", t, criterion_3());
    let t = Instant::now();
    report(4, "triad identity", t, criterion_4());

    let t = Instant::now();
    let seeds: Vec<u64> = (0..500).collect();
    let cat = build_instanton_catalog(&build_tanner_155(), &seeds, &InstantonParams::default());
    report(5, "instanton reproduction", t, criterion_5(&cat, seeds.len()));
    let t = Instant::now();
    report(6, "degenerate critical loops", t, criterion_6(&cat));
    let t = Instant::now();
    report(7, "LP-erasure correction", t, criterion_7(&cat));
    let t = Instant::now();
    report(8, "effective-BP properties", t, criterion_8());
    let t = Instant::now();
    report(9, "LP/ML agreement on small codes", t, criterion_9());
    if failed_hard {
        std::process::exit(1);
    }
}
