use std::collections::BTreeMap;

use proptest::collection::vec;
use proptest::prelude::*;

use frobrace::bias::{
    assemble, build_model, clt_sandwich, default_zero_sets, density_chebyshev_bound, density_gaussian,
    density_inversion, density_monte_carlo, density_monte_carlo_with, large_deviation_bounds, model_input,
    random_model, required_characters, Assumptions, BiasFactor, BiasModel, Component, McOptions, ModelInput,
    RandomModelConfig,
};
use frobrace::catalog::{kronecker, radical_extension};
use frobrace::zeros::ZeroSet;
use frobrace::{race_function, ClassFunction, RaceSpec, SubgroupEmbedding, C64};

fn radical_mean(a: u64, p: u64, c1: &str, c2: &str) -> f64 {
    let spec = radical_extension(a, p).unwrap();
    let g = spec.group();
    let t = race_function(g, &RaceSpec::Classes(g.class_index(c1).unwrap(), Some(g.class_index(c2).unwrap()))).unwrap();
    let chars = required_characters(&spec, &t);
    let zeros = default_zero_sets(&spec, &chars, 30.0, 1).unwrap();
    let m = build_model(&spec, &t, &zeros, &Assumptions::default()).unwrap();
    assert_eq!(m.mean_central, 0.0);
    m.mean
}

#[test]
fn radical_means() {
    for (a, p) in [(3, 5), (3, 7), (7, 11)] {
        let pf = p as f64;
        assert!((radical_mean(a, p, "U", "id") - pf).abs() < 1e-9, "p = {p}");
        for x in 2..p {
            let leg = kronecker(x as i64, p) as f64;
            let tx = format!("T{x}");
            assert!((radical_mean(a, p, &tx, "id") - (pf - leg)).abs() < 1e-9, "p = {p}, x = {x}");
            assert!((radical_mean(a, p, "U", &tx) - leg).abs() < 1e-9, "p = {p}, x = {x}");
        }
    }
}

fn component(chi: usize, coeff: f64, gammas: &[f64]) -> Component {
    let zs: Vec<(f64, u32)> = gammas.iter().map(|&g| (g, 1)).collect();
    Component {
        chi,
        label: format!("c{chi}"),
        coeff: C64::new(coeff, 0.0),
        zeros: ZeroSet::new(&format!("z{chi}"), &zs, 100.0, 0).unwrap(),
        log_conductor: Some(1.0),
        symplectic: false,
    }
}

#[test]
fn shared_zero_variance() {
    let gamma = 14.134725142;
    for (c1, c2) in [(1.0, 1.0), (0.5, -2.0), (1.5, 0.25)] {
        let input = ModelInput {
            id: "shared".into(),
            inner_tr: 0.0,
            norm1_plus: 1.0,
            norm2_plus: 1.0,
            components: vec![component(1, c1, &[gamma, 30.0]), component(2, c2, &[gamma, 40.0])],
        };
        let m = assemble(&input, &Assumptions::parse("AC,GRH").unwrap()).unwrap();
        assert_eq!(m.merged_ordinates, 1);
        assert_eq!(m.terms.len(), 3);
        let want = 4.0 * c1 * c2 / (0.25 + gamma * gamma);
        assert!((m.variance - m.variance_naive - want).abs() < 1e-14, "{c1} {c2}");
        assert!(m.variance_closed.is_none());
        assert!(assemble(&input, &Assumptions::default()).is_err());
    }
}

#[test]
fn kernel_race_is_dirac() {
    let e = SubgroupEmbedding::cyclic_in_dihedral(5).unwrap();
    let sub = e.sub().clone();
    let mut v = vec![0.0; sub.num_classes()];
    v[1] = 1.0;
    v[4] = -1.0;
    let t = ClassFunction::from_real(sub, &v).unwrap();
    let input = model_input("dirac", &e, &t, &BTreeMap::new(), &|_| None).unwrap();
    assert!(input.components.is_empty());
    let m = assemble(&input, &Assumptions::default()).unwrap();
    assert!(m.is_dirac());
    assert_eq!(m.variance, 0.0);
    assert!(m.mean.abs() < 1e-12);
    assert_eq!(m.bias, BiasFactor::Undefined);
    assert!(density_inversion(&m, 1e-6).is_err());
}

#[test]
fn missing_zero_data_is_reported() {
    let spec = radical_extension(3, 5).unwrap();
    let g = spec.group();
    let t = race_function(g, &RaceSpec::Classes(g.class_index("U").unwrap(), Some(g.class_index("id").unwrap()))).unwrap();
    let r = build_model(&spec, &t, &BTreeMap::new(), &Assumptions::default());
    assert!(matches!(r, Err(frobrace::Error::MissingData(_))));
}

#[test]
fn routes_agree_on_random_models() {
    for seed in 1..=6 {
        let (m, _) = random_model(seed, &RandomModelConfig::default()).unwrap();
        let inv = density_inversion(&m, 1e-6).unwrap();
        assert!(inv.error <= 1e-6, "seed {seed}: {inv:?}");
        let mc = density_monte_carlo(&m, 200_000, seed).unwrap();
        let tol = 4.0 * mc.se + 1e-3;
        assert!((inv.delta - mc.delta).abs() < tol, "seed {seed}: {} vs {}", inv.delta, mc.delta);
        assert!((mc.sample_variance / m.variance - 1.0).abs() < 0.05, "seed {seed}");
        let g = density_gaussian(&m);
        assert!((0.0..=1.0).contains(&g.phi_b));
        assert!(!g.certified);
    }
}

#[test]
fn monte_carlo_ignores_worker_count() {
    let (m, _) = random_model(11, &RandomModelConfig::default()).unwrap();
    let run = |w: usize| {
        let mut o = McOptions::new(100_000, 5);
        o.workers = w;
        o.thresholds = vec![0.5, 1.0];
        density_monte_carlo_with(&m, &o).unwrap()
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(16));
    assert!(density_monte_carlo(&m, 100, 1).is_err());
}

#[test]
fn tail_bounds_against_sampling() {
    let amps = vec![0.1; 200];
    let m = BiasModel::from_amplitudes("flat", 0.0, &amps);
    let mut o = McOptions::new(400_000, 2);
    o.thresholds = vec![1.0, 2.0, 4.0];
    let mc = density_monte_carlo_with(&m, &o).unwrap();
    for &(v, p) in &mc.tails {
        let ld = large_deviation_bounds(&m, v, 0.5, (0.1, 1.0)).unwrap();
        let upper = ld.upper.expect("all amplitudes are small");
        assert!(p <= upper, "V = {v}: {p} > {upper}");
        assert!(ld.lower.is_none());
    }
    let shifted = m.shifted(5.0);
    let bound = density_chebyshev_bound(&shifted).unwrap();
    let d = density_monte_carlo(&shifted, 200_000, 3).unwrap().delta;
    assert!(d >= bound, "{d} < {bound}");
    assert!(density_chebyshev_bound(&m).is_err());
}

#[test]
fn clt_upper_bound_holds() {
    for seed in [2, 3, 4] {
        let (m, _) = random_model(seed, &RandomModelConfig::default()).unwrap();
        let r = clt_sandwich(&m, 64).unwrap();
        assert!(r.upper_holds, "seed {seed}");
        assert!(r.needed_c.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn density_is_a_monotone_probability(amps in vec(0.1..2.0f64, 3..9), mean in -2.0..2.0f64, shift in 0.01..1.0f64) {
        let m = BiasModel::from_amplitudes("prop", mean, &amps);
        let a = density_inversion(&m, 1e-6).unwrap();
        let b = density_inversion(&m.shifted(shift), 1e-6).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.delta));
        prop_assert!(b.delta >= a.delta - 2e-6, "{} then {}", a.delta, b.delta);
        let flipped = density_inversion(&BiasModel::from_amplitudes("prop", -mean, &amps), 1e-6).unwrap();
        prop_assert!((a.delta + flipped.delta - 1.0).abs() < 2e-6);
    }
}
