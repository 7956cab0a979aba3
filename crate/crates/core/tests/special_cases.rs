mod common;

use approx::assert_abs_diff_eq;
use common::*;
use equiregion::prob::compose;
use equiregion::region::SweepAxis;
use equiregion::special::{drop_decoder_side_info, lemma1_identities, lossless_region, no_key_region, no_si_region};
use equiregion::{evaluate_bounds, region_sweep, DistortionMeasure, JointDist, SearchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lemma_forms_agree_on_random_joints() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n: Vec<usize> = (0..5).map(|_| rng.gen_range(2..=4)).collect();
        let source = random_source(&mut rng, n[0], n[1], n[2]);
        let scheme = random_scheme(&mut rng, n[0], n[1], n[3], n[4]);
        let joint = compose(&source, scheme.vx(), scheme.uv()).unwrap();
        worst = worst.max(lemma1_identities(&joint).unwrap().spread());
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn lemma_form_b_is_the_key_free_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let source = random_source(&mut rng, 2, 3, 2);
        let scheme = random_scheme(&mut rng, 2, 3, 3, 2);
        let joint = compose(&source, scheme.vx(), scheme.uv()).unwrap();
        let forms = lemma1_identities(&joint).unwrap();
        let b = evaluate_bounds(&source, &scheme, &DistortionMeasure::hamming(&bin("X")), 0.0).unwrap();
        assert_abs_diff_eq!(b.equiv_max, forms.form_b.min(b.diagnostics.h_x_given_zu), epsilon = 1e-12);
        // at zero key the first term never exceeds the second
        assert!(forms.form_b <= b.diagnostics.h_x_given_zu + 1e-12);
    }
}

#[test]
fn lossless_matches_general_search_with_v_pinned() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let keys: Vec<f64> = (0..=5).map(|i| i as f64 * 0.2).collect();
    for _ in 0..3 {
        let source = dsbs(rng.gen_range(0.05..0.45), rng.gen_range(0.05..0.45));
        let search = SearchConfig { pin_v_identity: true, ..SearchConfig::default() };
        let lossless = lossless_region(&source, &keys, &search).unwrap();
        let rate = lossless.rate_min + 1e-9;
        let axis = SweepAxis::KeyRate { key_rates: keys.clone(), rate_cap: rate, dist_cap: 0.0 };
        let general = region_sweep(&source, &DistortionMeasure::hamming(&bin("X")), &axis, &search).unwrap();
        for (a, b) in lossless.points.iter().zip(&general) {
            assert!((a.point.equivocation - b.point.equivocation).abs() <= 0.02);
        }
    }
}

#[test]
fn lossless_with_identical_side_information() {
    // Y = Z: the bound is min(R0, H(X|Z))
    let mut w = vec![0.0; 8];
    for x in 0..2 {
        for y in 0..2 {
            w[x * 4 + y * 2 + y] = 0.5 * if x == y { 0.8 } else { 0.2 };
        }
    }
    let source = JointDist::new(vec![bin("X"), bin("Y"), bin("Z")], w).unwrap();
    let h = source.cond_entropy(&["X"], &["Z"]).unwrap();
    let keys = [0.0, 0.3, 0.6, 1.0];
    let lossless = lossless_region(&source, &keys, &SearchConfig::default()).unwrap();
    for (p, k) in lossless.points.iter().zip(keys) {
        assert!((p.point.equivocation - k.min(h)).abs() <= 0.02);
    }
}

#[test]
fn key_free_matches_general_at_zero_key() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = DistortionMeasure::hamming(&bin("X"));
    for _ in 0..3 {
        let source = dsbs(rng.gen_range(0.05..0.45), rng.gen_range(0.05..0.45));
        let axis = SweepAxis::Rate { caps: vec![0.1, 0.3, 0.6, 1.0], key_rate: 0.0, dist_cap: 0.2 };
        let a = no_key_region(&source, &d, &axis, &SearchConfig::default()).unwrap();
        let b = region_sweep(&source, &d, &axis, &SearchConfig::default()).unwrap();
        for (p, q) in a.iter().zip(&b) {
            let (x, y) = (p.point.equivocation, q.point.equivocation);
            assert!((x.is_nan() && y.is_nan()) || (x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }
}

#[test]
fn no_side_information_matches_general() {
    let d = DistortionMeasure::hamming(&bin("X"));
    let source = no_si_source(0.3);
    let axis = SweepAxis::Distortion { caps: vec![0.05, 0.1, 0.2, 0.3], key_rate: 0.2, rate_cap: 1.0 };
    let a = no_si_region(&source, &d, &axis, &SearchConfig { u_size: Some(2), ..SearchConfig::default() }).unwrap();
    let general = SearchConfig { v_size: Some(4), u_size: Some(2), ..SearchConfig::default() };
    let b = region_sweep(&source, &d, &axis, &general).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p.point.equivocation - q.point.equivocation).abs() <= 0.02);
    }
}

#[test]
fn dropping_side_information_keeps_xz() {
    let source = dsbs(0.2, 0.3);
    let dropped = drop_decoder_side_info(&source).unwrap();
    assert_eq!(dropped.sizes(), vec![2, 1, 2]);
    let a = source.marginalize(&["X", "Z"]).unwrap();
    let b = dropped.marginalize(&["X", "Z"]).unwrap();
    assert!(a.tv_distance(&b).unwrap() < 1e-15);
    let d = DistortionMeasure::hamming(&bin("X"));
    let axis = SweepAxis::Distortion { caps: vec![0.2], key_rate: 0.0, rate_cap: 1.0 };
    assert!(no_si_region(&source, &d, &axis, &SearchConfig::default()).is_err());
    assert!(no_si_region(&dropped, &d, &axis, &SearchConfig::default()).is_ok());
}
