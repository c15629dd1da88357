use proptest::prelude::*;

use frobrace::catalog::{
    bellaiche_ratio, chebotarev_error_bound, class_group_imaginary, conductor_bounds, cyclotomic_extension,
    dihedral_kluners, hilbert_class_field, kronecker, multiquadratic_extension, murty_least_prime_bound,
    quadratic_extension, radical_extension, ExtensionSpec,
};
use frobrace::race::{sieve_classify, Classifier};
use frobrace::{build_group, race_function, GroupSpec, RaceSpec};

const RADICAL: [(u64, u64); 4] = [(3, 5), (3, 7), (5, 7), (7, 11)];

#[test]
fn radical_exponents_and_conductors() {
    for (a, p) in RADICAL {
        let spec = radical_extension(a, p).unwrap();
        let g = spec.group_plus();
        let eta = g.char_index("eta").unwrap();
        let lp = (p as f64).ln();
        let la = (a as f64).ln();
        assert_eq!(spec.conductor_exponent(p, eta).unwrap(), p as f64);
        assert_eq!(spec.conductor_exponent(a, eta).unwrap(), (p - 1) as f64);
        let want = (p - 1) as f64 * la + p as f64 * lp;
        assert!((spec.log_conductor(eta).unwrap() - want).abs() < 1e-12);
        for x in 1..g.num_chars() {
            if g.degree(x) == 1 {
                assert_eq!(spec.conductor_exponent(p, x).unwrap(), 1.0);
                assert_eq!(spec.conductor_exponent(a, x).unwrap(), 0.0);
                assert!((spec.log_conductor(x).unwrap() - lp).abs() < 1e-12);
            }
        }
        assert_eq!(spec.log_conductor(0).unwrap(), 0.0);
        let rows = spec.conductor_discriminant_check().unwrap();
        let at = |q: u64| rows.iter().find(|r| r.prime == q).unwrap();
        assert!(at(p).ok && at(p).valuation == p * p - 2);
        assert!(at(a).ok && at(a).valuation == (p - 1) * (p - 1));
        for q in [a, p] {
            assert_eq!(spec.regular_exponent(q).unwrap(), at(q).sum);
        }
        let ld = (p * p - 2) as f64 * lp + ((p - 1) * (p - 1)) as f64 * la;
        assert!((spec.log_disc - ld).abs() < 1e-9);
    }
}

#[test]
fn radical_preconditions() {
    assert!(radical_extension(2, 3).is_err());
    assert!(radical_extension(5, 5).is_err());
    // 7^4 ≡ 1 mod 25
    assert!(radical_extension(7, 5).is_err());
}

#[test]
fn multiquadratic_exponents() {
    let spec = multiquadratic_extension(&[3, 5]).unwrap();
    let g = spec.group_plus();
    let at3: Vec<f64> = (0..g.num_chars()).map(|x| spec.conductor_exponent(3, x).unwrap()).collect();
    assert_eq!(at3.iter().filter(|&&e| e == 1.0).count(), 2);
    assert_eq!(at3[0], 0.0);
    for row in spec.conductor_discriminant_check().unwrap() {
        assert!(row.ok, "{row:?}");
    }
    for p in [3, 5] {
        let s: f64 = (0..g.num_chars()).map(|x| spec.conductor_exponent(p, x).unwrap()).sum();
        assert_eq!(s, g.order() as f64 / 2.0);
    }
    assert!(multiquadratic_extension(&[3, 3]).is_err());
    assert!(multiquadratic_extension(&[2, 3]).is_err());
}

#[test]
fn hilbert_class_fields() {
    assert_eq!(class_group_imaginary(-23).unwrap(), vec![3]);
    assert_eq!(class_group_imaginary(-47).unwrap(), vec![5]);
    assert!(class_group_imaginary(-4).unwrap().is_empty());
    let spec = hilbert_class_field(-23, None).unwrap();
    let gp = spec.group_plus();
    assert_eq!(gp.order(), 6);
    assert_eq!(spec.group().order(), 3);
    assert!((spec.log_rd() - 23f64.ln() / 2.0).abs() < 1e-12);
    for x in 0..gp.num_chars() {
        assert_eq!(gp.fs_indicator(x).unwrap(), 1);
    }
    let s3 = build_group(&GroupSpec::Symmetric(3)).unwrap();
    let mut d1: Vec<u64> = gp.degrees().to_vec();
    let mut d2: Vec<u64> = s3.degrees().to_vec();
    d1.sort_unstable();
    d2.sort_unstable();
    assert_eq!(d1, d2);
    assert_eq!(hilbert_class_field(-4, None).unwrap().group_plus().order(), 2);
    assert!(hilbert_class_field(-12, None).is_err());
}

#[test]
fn kluners_bound() {
    let r = dihedral_kluners(7, 5, 71, 211).unwrap();
    let want = 7.0 * 5f64.ln() + 12.0 * (71.0f64 * 211.0).ln();
    assert!((r.log_disc_bound - want).abs() < 1e-9);
    assert!(r.spec.log_disc_is_bound);
    assert!(dihedral_kluners(7, 5, 71, 72).is_err());
    assert!(dihedral_kluners(7, 5, 23, 211).is_err());
}

fn catalog() -> Vec<ExtensionSpec> {
    let mut v: Vec<ExtensionSpec> = RADICAL.iter().map(|&(a, p)| radical_extension(a, p).unwrap()).collect();
    v.push(multiquadratic_extension(&[3, 5]).unwrap());
    v.push(multiquadratic_extension(&[3, 5, 7]).unwrap());
    v.push(multiquadratic_extension(&[5, 13]).unwrap());
    v.push(hilbert_class_field(-23, None).unwrap());
    v.push(hilbert_class_field(-47, None).unwrap());
    for q in [3, 4, 5, 7, 8, 12, 15] {
        v.push(cyclotomic_extension(q).unwrap());
    }
    v.push(quadratic_extension(-3).unwrap());
    v.push(quadratic_extension(5).unwrap());
    v
}

#[test]
fn exact_conductors_within_bounds() {
    for spec in catalog() {
        assert!(spec.log_rd() >= 0.0);
        for x in 1..spec.group_plus().num_chars() {
            let Ok(la) = spec.log_conductor(x) else { continue };
            let b = conductor_bounds(&spec, x).unwrap();
            assert!(b.lower <= b.upper + 1e-12, "{}", spec.family);
            assert!(la <= b.upper + 1e-9, "{} chi {x}: {la} > {}", spec.family, b.upper);
            assert!(la >= b.refined.0 - 1e-9, "{} chi {x}", spec.family);
        }
        assert!(conductor_bounds(&spec, 0).is_none());
    }
}

#[test]
fn spec_text_roundtrip() {
    for spec in catalog() {
        let back = ExtensionSpec::from_text(&spec.to_text()).unwrap();
        assert_eq!(back.family, spec.family);
        assert!((back.log_disc - spec.log_disc).abs() < 1e-9);
        assert_eq!(back.log_conductors().unwrap().len(), spec.log_conductors().unwrap().len());
        for (a, b) in back.log_conductors().unwrap().iter().zip(spec.log_conductors().unwrap()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn bellaiche_invariants() {
    let s6 = build_group(&GroupSpec::Symmetric(6)).unwrap();
    for c in 0..s6.num_classes() {
        let lhs = bellaiche_ratio(&s6, c, 1);
        assert!(lhs <= s6.order() as f64 / (s6.class_size(c) as f64).sqrt() + 1e-9);
    }
    let s5 = build_group(&GroupSpec::Symmetric(5)).unwrap();
    for c in 0..s5.num_classes() {
        for l in [2, 3, 5] {
            let lhs = bellaiche_ratio(&s5, c, l);
            assert!(lhs <= (s5.order() as f64).powf(1.5) / s5.class_size(c) as f64 + 1e-9);
        }
    }
}

#[test]
fn murty_first_bound_identity_class() {
    let spec = radical_extension(3, 5).unwrap();
    let id = spec.group().class_index("id").unwrap();
    let m = murty_least_prime_bound(&spec, id).unwrap();
    assert!((m.first - spec.log_disc.powi(2)).abs() < 1e-9);
    assert!(m.shape_only);
}

#[test]
fn chebotarev_bound_dominates_radical_race() {
    let spec = radical_extension(3, 5).unwrap();
    let g = spec.group();
    let t = race_function(g, &RaceSpec::Classes(g.class_index("U").unwrap(), Some(g.class_index("id").unwrap()))).unwrap();
    let x = 1e6;
    let counts = sieve_classify(&Classifier::new(&spec).unwrap(), x as u64, &[x]).unwrap();
    let observed: f64 = counts.counts[0].iter().zip(t.real_values()).map(|(&n, v)| n as f64 * v).sum();
    let bound = chebotarev_error_bound(&spec, &t, x).unwrap();
    assert!(bound >= observed.abs(), "{bound} < {observed}");
    assert!(chebotarev_error_bound(&spec, &t, 2.0 * x).unwrap() > bound);
}

proptest! {
    #[test]
    fn kronecker_is_multiplicative_in_d(a in -200i64..200, b in -200i64..200, p in prop::sample::select(vec![3u64, 5, 7, 11, 13, 101, 1009])) {
        prop_assert_eq!(kronecker(a * b, p), kronecker(a, p) * kronecker(b, p));
    }

    #[test]
    fn class_numbers_are_consistent(k in 1i64..2000) {
        let d = -(4 * k + 3);
        if let Ok(orders) = class_group_imaginary(d) {
            let h: u64 = orders.iter().product();
            prop_assert!(h >= 1);
            for w in orders.windows(2) {
                prop_assert!(w[1] % w[0] == 0);
            }
        }
    }
}
