use std::f64::consts::PI;

use proptest::collection::vec;
use proptest::prelude::*;

use frobrace::zeros::{
    bundled, load_from_cache, parse_zeros, store_in_cache, synthesize_zeros, zero_count_mainterm, SynthesisMode,
    ZeroSet, BUNDLED, DEFAULT_SLACK,
};

#[test]
fn bundled_sets_pass_count_validation() {
    for label in BUNDLED {
        let z = bundled(label).unwrap_or_else(|| panic!("{label} missing"));
        assert!(z.len() >= 100, "{label}: {} zeros", z.len());
        assert_eq!(z.central_multiplicity, 0);
        assert!(z.is_simple());
        let check = z.validate_count(DEFAULT_SLACK).unwrap();
        assert!(check.ok, "{label}: {check:?}");
        let half = z.truncate_height(z.height / 2.0).validate_count(DEFAULT_SLACK).unwrap();
        assert!(half.ok, "{label} at T/2: {half:?}");
    }
}

#[test]
fn first_zeros() {
    let first = |l: &str| bundled(l).unwrap().ordinates()[0];
    assert!((first("zeta") - 14.134725142).abs() < 1e-8);
    assert!((first("dirichlet_3") - 8.039737156).abs() < 1e-6);
    assert!((first("dirichlet_4") - 6.020948905).abs() < 1e-6);
}

/// Σ_ρ 1/|ρ|² over all zeros of ζ is 2 + γ − log 4π; the tail past T is about
/// log(T/2π)/(πT).
#[test]
fn zeta_b0_matches_closed_form() {
    let z = bundled("zeta").unwrap();
    let full = 2.0 + 0.577_215_664_901_532_9 - (4.0 * PI).ln();
    let s = z.b_sums();
    assert!(!s.empty);
    assert_eq!(s.b, s.b0);
    let tail = (z.height / (2.0 * PI)).ln() / (PI * z.height);
    let missing = full - s.b0;
    assert!(missing > 0.5 * tail && missing < 1.5 * tail, "missing {missing}, tail {tail}");
}

#[test]
fn synthetic_sets_validate() {
    for (log_a, deg) in [(0.0, 1), (4f64.ln(), 1), (5f64.ln(), 1), (12.0, 2), (30.0, 4)] {
        let z = synthesize_zeros(log_a, deg, 300.0, 7, SynthesisMode::UnfoldedUniform).unwrap();
        assert!(z.synthetic);
        let check = z.validate_count(DEFAULT_SLACK).unwrap();
        assert!(check.ok, "logA {log_a}, degree {deg}: {check:?}");
        let again = synthesize_zeros(log_a, deg, 300.0, 7, SynthesisMode::UnfoldedUniform).unwrap();
        assert_eq!(z.ordinates(), again.ordinates());
    }
    assert!(synthesize_zeros(1.0, 0, 100.0, 1, SynthesisMode::UnfoldedUniform).is_err());
    assert!(synthesize_zeros(1.0, 1, 0.5, 1, SynthesisMode::UnfoldedUniform).is_err());
}

#[test]
fn mainterm_grows() {
    let a = zero_count_mainterm(0.0, 1, 100.0);
    let b = zero_count_mainterm(0.0, 1, 200.0);
    assert!(b > 2.0 * a);
    assert_eq!(zero_count_mainterm(3.0, 2, 0.0), 0.0);
}

#[test]
fn cache_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let z = synthesize_zeros(2.0, 1, 120.0, 3, SynthesisMode::UnfoldedUniform).unwrap();
    let path = store_in_cache(dir.path(), &z).unwrap();
    assert!(path.starts_with(dir.path()));
    let back = load_from_cache(dir.path(), &z.label, z.height).unwrap();
    assert_eq!(back.label, z.label);
    assert_eq!(back.len(), z.len());
    for (a, b) in back.ordinates().iter().zip(z.ordinates()) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(back.synthetic);
    assert!(load_from_cache(dir.path(), "absent", 1.0).is_err());
}

#[test]
fn missing_conductor_is_missing_data() {
    let z = ZeroSet::new("bare", &[(3.0, 1)], 4.0, 0).unwrap();
    assert!(matches!(z.validate_count(3.0), Err(frobrace::Error::MissingData(_))));
}

#[test]
fn malformed_files_are_rejected() {
    assert!(parse_zeros("1.0 1\n0.5 1\n", "x").is_err());
    assert!(parse_zeros("-2.0\n", "x").is_err());
    assert!(parse_zeros("2.0 0\n", "x").is_err());
    assert!(parse_zeros("2.0 1 9\n", "x").is_err());
    assert!(parse_zeros("# height: 1.0\n2.0\n", "x").is_err());
}

fn zero_list() -> impl Strategy<Value = Vec<(f64, u32)>> {
    vec((0.01..5.0f64, 1u32..4), 0..40).prop_map(|steps| {
        let mut g = 0.0;
        steps
            .into_iter()
            .map(|(d, m)| {
                g += d;
                (g, m)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn text_roundtrip(zs in zero_list(), c in 0u32..3, extra in 0.0..10.0f64, log_a in proptest::option::of(0.0..20.0f64)) {
        let top = zs.last().map(|z| z.0).unwrap_or(0.0);
        let mut z = ZeroSet::new("prop", &zs, top + extra, c).unwrap();
        if let Some(a) = log_a {
            z = z.with_conductor(a, 2);
        }
        let back = parse_zeros(&z.to_text(), "other").unwrap();
        prop_assert_eq!(&back.label, "prop");
        prop_assert_eq!(back.multiplicities(), z.multiplicities());
        prop_assert_eq!(back.central_multiplicity, c);
        prop_assert!((back.height - z.height).abs() < 1e-8);
        for (a, b) in back.ordinates().iter().zip(z.ordinates()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        match (back.log_conductor, log_a) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
            (None, None) => {}
            _ => prop_assert!(false, "conductor lost"),
        }
    }

    #[test]
    fn truncation_is_monotone(zs in zero_list(), t in 0.0..200.0f64) {
        let top = zs.last().map(|z| z.0).unwrap_or(0.0);
        let z = ZeroSet::new("prop", &zs, top, 0).unwrap();
        let cut = z.truncate_height(t);
        prop_assert!(cut.b_sums().b0 <= z.b_sums().b0 + 1e-15);
        prop_assert_eq!(cut.count_up_to(f64::INFINITY), z.count_up_to(t));
    }
}
