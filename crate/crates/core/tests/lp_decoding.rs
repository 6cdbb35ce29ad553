use loopdec::code::enumerate_codewords;
use loopdec::lp::{lp_solve, LpProblem, LpRow, Sense, SimplexParams};
use loopdec::lp::{build_decoding_lp, decode_lp};
use loopdec::testgraphs;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn row_value(row: &LpRow, x: &[f64]) -> f64 {
    row.coeffs.iter().map(|&(i, a)| a * x[i]).sum()
}

/// Minimum over all basic feasible points, by brute force.
fn vertex_oracle(p: &LpProblem) -> f64 {
    let n = p.n_vars();
    // Every constraint as `a.x <= b`.
    let mut cons: Vec<(Vec<f64>, f64)> = p
        .rows
        .iter()
        .map(|r| {
            let mut a = vec![0.0; n];
            for &(i, v) in &r.coeffs {
                a[i] += v;
            }
            match r.sense {
                Sense::Le => (a, r.rhs),
                Sense::Ge => (a.iter().map(|v| -v).collect(), -r.rhs),
            }
        })
        .collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        cons.push((e.clone(), p.upper[i]));
        e[i] = -1.0;
        cons.push((e, 0.0));
    }
    let mut best = f64::INFINITY;
    let m = cons.len();
    for mask in 0u32..1 << m {
        if mask.count_ones() as usize != n {
            continue;
        }
        let act: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
        let a = DMatrix::from_fn(n, n, |r, c| cons[act[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| cons[act[r]].1);
        let Some(x) = a.lu().solve(&b) else { continue };
        let feasible = cons
            .iter()
            .all(|(a, b)| a.iter().zip(x.iter()).map(|(u, v)| u * v).sum::<f64>() <= b + 1e-9);
        if feasible {
            best = best.min(p.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum());
        }
    }
    best
}

fn random_lp() -> impl Strategy<Value = LpProblem> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-2.0..2.0f64, n),
                prop::collection::vec(0.2..3.0f64, n),
                prop::collection::vec((prop::collection::vec(-2.0..2.0f64, n), 0.0..3.0f64), 0..5),
            )
        })
        .prop_map(|(objective, upper, rows)| LpProblem {
            rows: rows
                .into_iter()
                .map(|(a, rhs)| LpRow {
                    coeffs: a.into_iter().enumerate().collect(),
                    sense: Sense::Le,
                    rhs,
                })
                .collect(),
            objective,
            upper,
        })
}

fn graph_and_fields() -> impl Strategy<Value = (usize, Vec<f64>)> {
    let n_graphs = testgraphs::zcheck_suite().len();
    (0..n_graphs, prop::collection::vec(-1.0..3.0f64, 20))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(p in random_lp()) {
        let s = lp_solve(&p, &SimplexParams::default()).unwrap();
        let oracle = vertex_oracle(&p);
        prop_assert!((s.objective - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()), "{} vs {}", s.objective, oracle);
        prop_assert!(s.primal_residual <= 1e-9);
        for (x, u) in s.x.iter().zip(&p.upper) {
            prop_assert!(*x >= -1e-12 && *x <= u + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_output_is_feasible_and_beats_every_codeword((g, h) in graph_and_fields()) {
        let code = &testgraphs::zcheck_suite()[g].code;
        let h = &h[..code.n_bits()];
        let pc = decode_lp(code, h).unwrap().pseudo_codeword().clone();
        let lp = build_decoding_lp(code, h).unwrap();
        for row in &lp.rows {
            prop_assert!(row_value(row, &pc.omega) <= row.rhs + 1e-9);
        }
        prop_assert!(pc.omega.iter().all(|&w| (-1e-12..=1.0 + 1e-12).contains(&w)));
        for c in enumerate_codewords(code).unwrap() {
            let cost: f64 = c.bits.iter().zip(h).map(|(&b, v)| 2.0 * v * f64::from(b)).sum();
            prop_assert!(pc.objective_value <= cost + 1e-9);
        }
    }

    #[test]
    fn lp_output_is_scale_invariant((g, h) in graph_and_fields(), c in 0.05..20.0f64) {
        let code = &testgraphs::zcheck_suite()[g].code;
        let h = &h[..code.n_bits()];
        let scaled: Vec<f64> = h.iter().map(|v| c * v).collect();
        let a = decode_lp(code, h).unwrap();
        let b = decode_lp(code, &scaled).unwrap();
        prop_assert_eq!(a.is_success(), b.is_success());
        let (wa, wb) = (&a.pseudo_codeword().omega, &b.pseudo_codeword().omega);
        prop_assert!(wa.iter().zip(wb).all(|(x, y)| (x - y).abs() <= 1e-9));
    }
}

#[test]
fn codeword_polytope_is_integral_on_a_single_check() {
    let code = loopdec::ParityCheckCode::from_checks(4, vec![vec![0, 1, 2, 3]]).unwrap();
    for h in [[1.0, -0.5, 0.3, 2.0], [-1.0, -0.5, -0.3, 0.2], [-1.0, -0.5, -0.3, -0.2]] {
        let r = decode_lp(&code, &h).unwrap();
        assert!(r.is_success());
    }
}
