use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use frobrace::classfn::root_count_from_characters;
use frobrace::{build_group, root_count, ClassFunction, Group, GroupSpec, SubgroupEmbedding, C64};

const TOL: f64 = 1e-10;

fn groups() -> Vec<Group> {
    let mut specs: Vec<GroupSpec> = (3..=7).map(GroupSpec::Symmetric).collect();
    specs.extend([
        GroupSpec::Dihedral(5),
        GroupSpec::Dihedral(7),
        GroupSpec::Affine(5),
        GroupSpec::Affine(7),
        GroupSpec::Abelian(vec![2, 2, 2, 2]),
    ]);
    specs.iter().map(|s| build_group(s).unwrap()).collect()
}

fn embeddings() -> Vec<SubgroupEmbedding> {
    vec![
        SubgroupEmbedding::cyclic_in_dihedral(5).unwrap(),
        SubgroupEmbedding::cyclic_in_dihedral(7).unwrap(),
        SubgroupEmbedding::cyclic_in_dihedral(8).unwrap(),
        SubgroupEmbedding::unipotent_in_affine(5).unwrap(),
        SubgroupEmbedding::diagonal_in_affine(7).unwrap(),
        SubgroupEmbedding::abelian_in_generalized_dihedral(&[3, 4]).unwrap(),
    ]
}

fn class_function(g: &Group) -> impl Strategy<Value = ClassFunction> {
    let g = g.clone();
    vec((-3.0..3.0f64, -3.0..3.0f64), g.num_classes())
        .prop_map(move |v| ClassFunction::new(g.clone(), v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn close(a: C64, b: C64, what: &str) -> Result<(), TestCaseError> {
    prop_assert!((a - b).norm() <= TOL * (1.0 + b.norm()), "{what}: {a} vs {b}");
    Ok(())
}

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: 100, ..Config::default() })
}

#[test]
fn orthogonality_and_burnside() {
    for g in groups() {
        for x in 0..g.num_chars() {
            let cx = ClassFunction::character(g.clone(), x);
            for y in 0..g.num_chars() {
                let want = if x == y { 1.0 } else { 0.0 };
                let ip = cx.inner(&ClassFunction::character(g.clone(), y));
                assert!((ip - want).norm() < TOL, "{}: <{x},{y}> = {ip}", g.name());
            }
        }
        let burnside: u64 = g.degrees().iter().map(|d| d * d).sum();
        assert_eq!(burnside, g.order());
    }
}

#[test]
fn parseval_and_roundtrip() {
    for g in groups() {
        runner()
            .run(&class_function(&g), |t| {
                let f = t.fourier();
                let energy: f64 = f.iter().map(|c| c.norm_sqr()).sum();
                close(C64::new(energy, 0.0), t.inner(&t), "parseval")?;
                let back = ClassFunction::inverse_fourier(g.clone(), &f).unwrap();
                prop_assert!((&back - &t).is_zero(TOL * (1.0 + t.max_abs())));
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn root_counts_from_indicators() {
    for g in groups() {
        for k in 1..=4 {
            let direct = root_count(&g, k);
            let chars = root_count_from_characters(&g, k);
            assert!((&direct - &chars).is_zero(1e-8), "{} k = {k}", g.name());
            let total: f64 = (0..g.num_classes()).map(|c| direct.value(c).re * g.class_size(c) as f64).sum();
            assert!((total - g.order() as f64).abs() < 1e-8);
        }
    }
}

#[test]
fn inner_with_r_matches_indicator_sum() {
    for g in groups() {
        let r = root_count(&g, 2);
        let eps: Vec<f64> = (0..g.num_chars()).map(|x| g.fs_indicator(x).unwrap() as f64).collect();
        runner()
            .run(&class_function(&g), |t| {
                let side: C64 = t.fourier().iter().zip(&eps).map(|(c, e)| c.conj() * *e).sum();
                close(t.inner(&r), side, "<t,r>")
            })
            .unwrap();
    }
}

#[test]
fn frobenius_reciprocity() {
    for e in embeddings() {
        runner()
            .run(&class_function(e.sub()), |t| {
                let tp = e.induce(&t);
                let by_cosets = e.induce_by_cosets(&t).unwrap();
                prop_assert!((&tp - &by_cosets).is_zero(TOL * (1.0 + tp.max_abs())));
                for x in 0..e.sup().num_chars() {
                    close(e.induced_fourier(&t, x), tp.fourier_at(x), "reciprocity")?;
                }
                Ok(())
            })
            .unwrap();
    }
}

/// Random elements of the kernel of induction: combinations of
/// 1_{C1}/|C1| − 1_{C2}/|C2| over pairs of classes fusing in G⁺.
#[test]
fn kernel_of_induction_is_orthogonal_to_root_counts() {
    for e in embeddings() {
        let g = e.sub().clone();
        let map = e.class_map().to_vec();
        let pairs: Vec<(usize, usize)> = (0..map.len())
            .flat_map(|a| (a + 1..map.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| map[a] == map[b])
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let strat = vec(-2.0..2.0f64, pairs.len());
        runner()
            .run(&strat, |w| {
                let mut values = vec![C64::new(0.0, 0.0); g.num_classes()];
                for (&(a, b), &c) in pairs.iter().zip(&w) {
                    values[a] += c / g.class_size(a) as f64;
                    values[b] -= c / g.class_size(b) as f64;
                }
                let t = ClassFunction::new(g.clone(), values).unwrap();
                prop_assert!(e.induce(&t).is_zero(1e-12));
                for k in 1..=6 {
                    close(t.inner(&root_count(&g, k)), C64::new(0.0, 0.0), "corollary")?;
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn s6_class_data() {
    let g = build_group(&GroupSpec::Symmetric(6)).unwrap();
    let r = root_count(&g, 2);
    let rows: [(&str, u64, f64, u64); 11] = [
        ("1.1.1.1.1.1", 1, -75.0, 1),
        ("2.1.1.1.1", 15, 1.0, 5),
        ("2.2.1.1", 45, -3.0, 9),
        ("2.2.2", 15, 1.0, 5),
        ("3.1.1.1", 40, -3.0, 10),
        ("3.2.1", 120, 1.0, 16),
        ("3.3", 40, -3.0, 5),
        ("4.1.1", 90, 1.0, 10),
        ("4.2", 90, 1.0, 9),
        ("5.1", 144, 0.0, 5),
        ("6", 120, 1.0, 1),
    ];
    for (label, size, one_minus_r, degree) in rows {
        let c = g.class_index(label).unwrap();
        assert_eq!(g.class_size(c), size, "{label}");
        assert_eq!(1.0 - r.value(c).re, one_minus_r, "{label}");
        let x = g.char_index(&format!("[{label}]")).unwrap();
        assert_eq!(g.degree(x), degree, "{label}");
    }
}
