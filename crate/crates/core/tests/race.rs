use frobrace::catalog::{cyclotomic_extension, multiquadratic_extension, radical_extension, ExtensionSpec};
use frobrace::race::{
    empirical_density, explicit_formula_check, least_prime_search, least_primes, log_checkpoints, primes_up_to,
    pth_power_roots, race_series, sieve_classify, Classifier, RaceSeries,
};
use frobrace::zeros::bundled;
use frobrace::{race_function, ClassFunction, RaceSpec};

fn mod4_t(spec: &ExtensionSpec) -> ClassFunction {
    let g = spec.group();
    race_function(g, &RaceSpec::Classes(g.class_index("3").unwrap(), Some(g.class_index("1").unwrap()))).unwrap()
}

#[test]
fn prime_counting() {
    let spec = cyclotomic_extension(4).unwrap();
    let cl = Classifier::new(&spec).unwrap();
    let cps = log_checkpoints(1e3, 1e8, 200);
    let c = sieve_classify(&cl, 100_000_000, &cps).unwrap();
    assert_eq!(c.pi[0], 168);
    assert_eq!(*c.pi.last().unwrap(), 5_761_455);
    let at_1e6 = cps.iter().position(|&x| (x - 1e6).abs() < 1.0);
    if let Some(i) = at_1e6 {
        assert_eq!(c.pi[i], 78_498);
    }
    assert_eq!(primes_up_to(1_000_000).unwrap().len(), 78_498);
    assert_eq!(c.ramified, vec![2]);
    for (row, &pi) in c.counts.iter().zip(&c.pi) {
        assert_eq!(row.iter().sum::<u64>(), pi - 1);
    }
}

#[test]
fn small_primes_match_trial_division() {
    let naive: Vec<u64> = (2..2000u64).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect();
    assert_eq!(primes_up_to(1999).unwrap(), naive);
    assert!(primes_up_to(1).unwrap().is_empty());
}

#[test]
fn chebotarev_equidistribution_to_1e8() {
    let mut specs: Vec<ExtensionSpec> = [5, 7, 8, 12, 15].iter().map(|&q| cyclotomic_extension(q).unwrap()).collect();
    specs.push(radical_extension(3, 5).unwrap());
    specs.push(multiquadratic_extension(&[3, 5]).unwrap());
    for spec in specs {
        let g = spec.group();
        assert!(g.order() <= 20);
        let cl = Classifier::new(&spec).unwrap();
        let c = sieve_classify(&cl, 100_000_000, &[1e8]).unwrap();
        let row = &c.counts[0];
        let total: u64 = row.iter().sum();
        for (k, &n) in row.iter().enumerate() {
            let want = g.class_size(k) as f64 / g.order() as f64;
            let got = n as f64 / total as f64;
            assert!((got / want - 1.0).abs() < 0.01, "{} class {k}: {got} vs {want}", spec.family);
        }
        assert_eq!(total + c.ramified.len() as u64, c.pi[0]);
    }
}

#[test]
fn race_value_at_26() {
    let spec = cyclotomic_extension(4).unwrap();
    let cl = Classifier::new(&spec).unwrap();
    let c = sieve_classify(&cl, 26, &[10.0, 26.0]).unwrap();
    let g = spec.group();
    assert_eq!(c.counts[1][g.class_index("3").unwrap()], 5);
    assert_eq!(c.counts[1][g.class_index("1").unwrap()], 3);
    let s = race_series(&c, "mod4", &mod4_t(&spec), 0.5).unwrap();
    let y = 26f64.ln();
    assert!((s.e_values[1] - 4.0 * y / 26f64.sqrt()).abs() < 1e-12);
}

#[test]
fn scaling_t_keeps_the_sign_pattern() {
    let spec = cyclotomic_extension(4).unwrap();
    let cl = Classifier::new(&spec).unwrap();
    let c = sieve_classify(&cl, 10_000_000, &log_checkpoints(1e3, 1e7, 400)).unwrap();
    let t = mod4_t(&spec);
    let base = race_series(&c, "mod4", &t, 0.5).unwrap();
    let d = empirical_density(&base).unwrap();
    for k in [0.5, 3.0] {
        let scaled = ClassFunction::from_real(t.group().clone(), &t.real_values().iter().map(|v| v * k).collect::<Vec<_>>()).unwrap();
        let s = race_series(&c, "mod4", &scaled, 0.5).unwrap();
        for (a, b) in s.e_values.iter().zip(&base.e_values) {
            assert!((a - k * b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
        assert_eq!(empirical_density(&s).unwrap().value, d.value);
    }
    assert!(d.value > 0.95, "{}", d.value);
    assert!(d.band_min <= d.value && d.value <= d.band_max);
}

#[test]
fn radical_classes_match_root_counts() {
    for (a, p) in [(3u64, 5u64), (3, 7)] {
        let spec = radical_extension(a, p).unwrap();
        let cl = Classifier::new(&spec).unwrap();
        let g = spec.group();
        let primes = primes_up_to(200_000).unwrap();
        let mut checked = 0;
        for &l in primes.iter().filter(|&&l| l != a && l != p).take(10_000) {
            let c = cl.classify(l).unwrap();
            let label = g.classes()[c].label.as_str();
            let roots = pth_power_roots(a, p, l);
            let want = match roots {
                r if r == p as usize => "id".to_string(),
                0 => "U".to_string(),
                1 => format!("T{}", l % p),
                r => panic!("{r} roots of X^{p} - {a} mod {l}"),
            };
            assert_eq!(label, want, "ell = {l}");
            checked += 1;
        }
        assert_eq!(checked, 10_000);
        assert_eq!(cl.classify(a), None);
        assert_eq!(cl.classify(p), None);
    }
}

#[test]
fn least_prime_fixtures() {
    let c4 = cyclotomic_extension(4).unwrap();
    let cl = Classifier::new(&c4).unwrap();
    let g = c4.group();
    assert_eq!(least_prime_search(&cl, g.class_index("3").unwrap(), 1000).unwrap(), 3);
    assert_eq!(least_prime_search(&cl, g.class_index("1").unwrap(), 1000).unwrap(), 5);

    let rad = radical_extension(3, 5).unwrap();
    let cl = Classifier::new(&rad).unwrap();
    assert_eq!(least_prime_search(&cl, rad.group().class_index("id").unwrap(), 1000).unwrap(), 41);
    assert!(matches!(
        least_prime_search(&cl, rad.group().class_index("id").unwrap(), 40),
        Err(frobrace::Error::MissingData(_))
    ));

    // 3 and 5 are both squares mod 11.
    let mq = multiquadratic_extension(&[3, 5]).unwrap();
    let cl = Classifier::new(&mq).unwrap();
    let id = (0..mq.group().num_classes()).find(|&c| mq.group().classes()[c].element_order == 1).unwrap();
    assert_eq!(least_prime_search(&cl, id, 1000).unwrap(), 11);
}

#[test]
fn least_primes_agree_with_direct_scan() {
    for spec in [cyclotomic_extension(15).unwrap(), radical_extension(3, 7).unwrap(), multiquadratic_extension(&[3, 5, 7]).unwrap()] {
        let cl = Classifier::new(&spec).unwrap();
        let found = least_primes(&cl, 1_000_000).unwrap();
        assert_eq!(found.len(), cl.num_classes());
        let mut direct = vec![None; cl.num_classes()];
        for p in primes_up_to(1_000_000).unwrap() {
            if let Some(c) = cl.classify(p) {
                direct[c].get_or_insert(p);
            }
        }
        for (c, p) in found {
            assert_eq!(Some(p), direct[c], "{} class {c}", spec.family);
        }
    }
}

#[test]
fn explicit_formula_for_zeta() {
    let z = bundled("zeta").unwrap();
    let xs: Vec<f64> = (1..=200).map(|k| 500.0 * k as f64).collect();
    let full = explicit_formula_check(None, 0, &z, &xs).unwrap();
    let short = explicit_formula_check(None, 0, &z.truncate_height(200.0), &xs).unwrap();
    let worst = |r: &frobrace::race::ExplicitFormulaReport| r.rows.iter().map(|row| row.3 / row.0.sqrt()).fold(0.0, f64::max);
    assert!(worst(&full) < worst(&short), "{} vs {}", worst(&full), worst(&short));
    assert!(full.constant < 1.0, "{}", full.constant);
    let last = full.rows.last().unwrap();
    assert!(last.3 / last.1 < 1e-3);
}

#[test]
fn explicit_formula_mod_4() {
    let spec = cyclotomic_extension(4).unwrap();
    let cl = Classifier::new(&spec).unwrap();
    let g = spec.group();
    let chi = (1..g.num_chars()).next().unwrap();
    let z = bundled("dirichlet_4").unwrap();
    let r = explicit_formula_check(Some(&cl), chi, &z, &[1e4, 1e5]).unwrap();
    let (x, _, _, residual, _) = r.rows[1];
    assert!(residual < 5.0 * x.ln().powi(2), "{residual}");
    assert!(explicit_formula_check(Some(&cl), chi, &z.truncate_height(5.0), &[1e4]).is_err());
}

fn toy_series(f: impl Fn(f64) -> f64, n: usize, y_max: f64) -> RaceSeries {
    let y: Vec<f64> = (0..n).map(|i| 1.0 + (y_max - 1.0) * i as f64 / (n - 1) as f64).collect();
    RaceSeries {
        family: "toy".into(),
        checkpoints: y.iter().map(|v| v.exp()).collect(),
        counts: vec![Vec::new(); n],
        e_values: y.iter().map(|&v| f(v)).collect(),
        y,
        beta: 0.5,
    }
}

#[test]
fn toy_densities() {
    let half = empirical_density(&toy_series(|y| (3.0 * y).sin(), 20_000, 600.0)).unwrap();
    assert!((half.value - 0.5).abs() < 2e-3, "{}", half.value);
    let all = empirical_density(&toy_series(|_| 1.0, 200, 20.0)).unwrap();
    assert_eq!(all.value, 1.0);
    let none = empirical_density(&toy_series(|_| -1.0, 200, 20.0)).unwrap();
    assert_eq!(none.value, 0.0);
    // Positive on [1, 11) out of [1, 21].
    let step = empirical_density(&toy_series(|y| 11.0 - y, 2001, 21.0)).unwrap();
    assert!((step.value - 0.5).abs() < 1e-9, "{}", step.value);
    assert!(empirical_density(&toy_series(|_| 1.0, 50, 20.0)).is_err());
}

#[test]
fn checkpoints_are_pinned() {
    let cps = log_checkpoints(1e3, 1e8, 1000);
    assert_eq!(cps.len(), 1000);
    assert_eq!(cps[0], 1e3);
    assert_eq!(cps[999], 1e8);
    assert!(cps.windows(2).all(|w| w[0] < w[1]));
}
