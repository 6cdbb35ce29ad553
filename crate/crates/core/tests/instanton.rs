use loopdec::channel::{effective_distance, instanton_noise_for};
use loopdec::code::build_tanner_155;
use loopdec::instanton::{search_instanton, InstantonParams};
use loopdec::ParityCheckCode;
use proptest::prelude::*;

#[test]
fn single_check_instanton_has_distance_two() {
    let code = ParityCheckCode::from_checks(4, vec![vec![0, 1, 2, 3]]).unwrap();
    for seed in 0..20 {
        let r = search_instanton(&code, seed, &InstantonParams::default()).unwrap();
        assert!((r.effective_distance - 2.0).abs() < 1e-9, "seed {seed}: {}", r.effective_distance);
        assert_eq!(r.pseudo_codeword.omega.iter().filter(|&&w| w > 0.5).count(), 2);
        assert!(r.is_monotone());
    }
}

#[test]
fn search_is_deterministic_per_seed() {
    let code = build_tanner_155();
    let p = InstantonParams::default();
    for seed in [3, 17] {
        let a = search_instanton(&code, seed, &p).unwrap();
        let b = search_instanton(&code, seed, &p).unwrap();
        assert_eq!(a, b);
        assert!(a.converged && a.is_monotone());
    }
}

proptest! {
    #[test]
    fn tied_noise_has_squared_norm_equal_to_effective_distance(
        w in prop::collection::vec(0.0..1.0f64, 1..30).prop_filter("nonzero", |w| w.iter().any(|&x| x > 1e-3))
    ) {
        let d = effective_distance(&w).unwrap();
        let h = instanton_noise_for(&w).unwrap().h;
        let norm: f64 = h.iter().map(|v| (v - 1.0).powi(2)).sum();
        let cost: f64 = h.iter().zip(&w).map(|(a, b)| a * b).sum();
        prop_assert!((norm - d).abs() <= 1e-9 * d);
        prop_assert!(cost.abs() <= 1e-9 * w.len() as f64);
        prop_assert!(d <= w.iter().filter(|&&x| x > 0.0).count() as f64 + 1e-9);
    }
}
