use loopdec::effective::*;
use loopdec::exact::exact_marginals;
use loopdec::loops::{simple_loops_above, triad_amplitudes};
use loopdec::testgraphs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn tight() -> EffectiveParams {
    EffectiveParams { max_iters: 20_000, tol: 1e-13, damping: 0.7 }
}

#[test]
fn empty_loop_set_reduces_to_bare_bp() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let suite = testgraphs::zcheck_suite();
    for k in 0..20 {
        let g = &suite[k % suite.len()];
        let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &testgraphs::tight_bp(), 100, &mut rng).unwrap();
        let model = VertexModel::from_code(&g.code, &d.h).unwrap();
        let gauges = model.gauges_from_bp(&g.code, &d.state.eta).unwrap();
        let res = residual_system(&model, &gauges, &[]).unwrap();
        assert!(max_abs(&res) < 1e-12, "{}: {}", g.name, max_abs(&res));

        let solved = solve_effective_bp(&model, &[], None, &tight()).unwrap();
        assert!(solved.state.converged, "{}", g.name);
        for (i, (a, b)) in solved.bit_magnetizations.iter().zip(&d.beliefs.bit_magnetizations).enumerate() {
            assert!((a.unwrap() - b).abs() < 1e-9, "{} bit {i}: {a:?} vs {b}", g.name);
        }
    }
}

#[test]
fn effective_magnetization_without_loops_is_vertex_magnetization() {
    let code = testgraphs::fused_cycles();
    let h: Vec<f64> = (0..code.n_bits()).map(|i| 0.2 * i as f64 - 0.5).collect();
    let model = VertexModel::from_code(&code, &h).unwrap();
    let eta: Vec<f64> = (0..2 * model.n_edges()).map(|s| ((s * 7) % 5) as f64 * 0.1 - 0.2).collect();
    let m = loop_moments(&model, &eta, &[]).unwrap();
    assert_eq!(m.numerator, m.vertex_magnetizations);
}

fn cycle_edges(code: &loopdec::ParityCheckCode, bits: &[usize], checks: &[usize]) -> Vec<usize> {
    (0..bits.len())
        .flat_map(|k| [code.edge_id(bits[k], checks[k]).unwrap(), code.edge_id(bits[(k + 1) % bits.len()], checks[k]).unwrap()])
        .collect()
}

#[test]
fn single_cycle_is_exact() {
    let code = testgraphs::single_cycle();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let h: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
        let model = VertexModel::from_code_absorbing_leaves(&code, &h).unwrap();
        let ring = model.model_loop(&(0..model.n_edges()).collect::<Vec<_>>()).unwrap();
        let res = solve_effective_bp(&model, &[ring], None, &tight()).unwrap();
        assert!(res.state.converged, "residual {}", res.state.residual);
        let exact = exact_marginals(&code, &h).unwrap();
        for i in 0..3 {
            let m = res.bit_magnetizations[i].unwrap();
            assert!((m - exact.magnetizations[i]).abs() < 1e-8, "bit {i}: {m} vs {}", exact.magnetizations[i]);
        }
        assert!(res.bit_magnetizations[3..].iter().all(Option::is_none));
    }
}

#[test]
fn two_disjoint_cycles_are_exact_with_union_term() {
    let code = testgraphs::two_disjoint_cycles();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let h: Vec<f64> = (0..12).map(|_| rng.random_range(-1.5..1.5)).collect();
        let model = VertexModel::from_code_absorbing_leaves(&code, &h).unwrap();
        let first = cycle_edges(&code, &[0, 1, 2], &[0, 1, 2]);
        let second = cycle_edges(&code, &[6, 7, 8], &[3, 4, 5]);
        let to_model = |e: &[usize]| e.iter().map(|&x| model.code_edges[x].unwrap()).collect::<Vec<_>>();
        let union: Vec<usize> = first.iter().chain(&second).copied().collect();
        let loops = [
            model.model_loop(&to_model(&first)).unwrap(),
            model.model_loop(&to_model(&second)).unwrap(),
            model.model_loop(&to_model(&union)).unwrap(),
        ];
        let res = solve_effective_bp(&model, &loops, None, &tight()).unwrap();
        assert!(res.state.converged);
        let exact = exact_marginals(&code, &h).unwrap();
        for i in [0, 1, 2, 6, 7, 8] {
            let m = res.bit_magnetizations[i].unwrap();
            assert!((m - exact.magnetizations[i]).abs() < 1e-8, "bit {i}: {m} vs {}", exact.magnetizations[i]);
        }
    }
}

/// Ising ring as spin vertices joined through coupling vertices.
fn ising_ring(h: &[f64], j: &[f64]) -> VertexModel {
    let n = h.len();
    let mut vertices = Vec::new();
    for i in 0..n {
        // spin i touches edges 2i (to coupling i-1) and 2i+1 (to coupling i)
        vertices.push(Vertex { edges: vec![2 * i, 2 * i + 1], configs: vec![0, 3], log_weights: vec![h[i], -h[i]] });
    }
    for i in 0..n {
        let left = 2 * i + 1;
        let right = 2 * ((i + 1) % n);
        vertices.push(Vertex {
            edges: vec![left, right],
            configs: vec![0, 1, 2, 3],
            log_weights: vec![j[i], -j[i], -j[i], j[i]],
        });
    }
    VertexModel::new(vertices).unwrap()
}

fn ising_oracle(h: &[f64], j: &[f64]) -> Vec<f64> {
    let n = h.len();
    let mut z = 0.0;
    let mut m = vec![0.0; n];
    for c in 0u32..1 << n {
        let s: Vec<f64> = (0..n).map(|i| if c >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let e: f64 = (0..n).map(|i| h[i] * s[i] + j[i] * s[i] * s[(i + 1) % n]).sum();
        let w = e.exp();
        z += w;
        for i in 0..n {
            m[i] += w * s[i];
        }
    }
    m.iter().map(|x| x / z).collect()
}

#[test]
fn ising_ring_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [3, 5, 8] {
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8)).collect();
        let j: Vec<f64> = (0..n).map(|_| rng.random_range(-0.9..0.9)).collect();
        let model = ising_ring(&h, &j);
        let ring = model.model_loop(&(0..model.n_edges()).collect::<Vec<_>>()).unwrap();
        let res = solve_effective_bp(&model, &[ring], None, &tight()).unwrap();
        assert!(res.state.converged, "n={n}");
        let oracle = ising_oracle(&h, &j);
        for i in 0..n {
            let m = res.slot_magnetizations[model.slot(i, 2 * i).unwrap()];
            assert!((m - oracle[i]).abs() < 1e-8, "n={n} spin {i}: {m} vs {}", oracle[i]);
        }
    }
}

#[test]
fn residual_support_is_the_loop_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in testgraphs::zcheck_suite().into_iter().filter(|g| g.code.girth().is_some()) {
        let mut tested = 0;
        for _ in 0..3 {
            let d = testgraphs::draw_with_fixed_point(&g.code, 0.5, &testgraphs::tight_bp(), 100, &mut rng).unwrap();
            let triads = triad_amplitudes(&g.code, &d.beliefs);
            let cycles = simple_loops_above(&g.code, &triads, 0.0, 12, 50);
            let model = VertexModel::from_code(&g.code, &d.h).unwrap();
            let gauges = model.gauges_from_bp(&g.code, &d.state.eta).unwrap();
            // Residuals scale with the loop amplitude; tiny loops sit below round-off.
            for c in cycles.iter().filter(|c| c.r.abs() > 1e-3) {
                tested += 1;
                let lp = model.model_loop(&cycle_edges(&g.code, &c.bits, &c.checks)).unwrap();
                let res = residual_system(&model, &gauges, std::slice::from_ref(&lp)).unwrap();
                let expected: BTreeSet<usize> = (0..2 * model.n_edges())
                    .filter(|&s| lp.contains_vertex(model.edge_ends[s / 2][s % 2]) && !lp.contains_vertex(model.edge_ends[s / 2][1 - s % 2]))
                    .collect();
                let support: BTreeSet<usize> = (0..res.len()).filter(|&s| res[s].abs() > 1e-11).collect();
                assert_eq!(support, expected, "{} loop {:?}", g.name, c.bits);
            }
        }
        assert!(tested > 0, "{}", g.name);
    }
}

#[test]
fn isolated_cycle_keeps_bare_bp_fixed_point() {
    // On a graph that is one cycle the bare fixed point already solves the
    // modified system.
    let code = testgraphs::single_cycle();
    let h = [0.3, -0.2, 0.5, 0.9, -0.4, 0.7];
    let model = VertexModel::from_code_absorbing_leaves(&code, &h).unwrap();
    let bare = solve_effective_bp(&model, &[], None, &tight()).unwrap();
    let ring = model.model_loop(&(0..model.n_edges()).collect::<Vec<_>>()).unwrap();
    let res = residual_system(&model, &bare.state.eta, &[ring]).unwrap();
    assert!(max_abs(&res) < 1e-12);
}


