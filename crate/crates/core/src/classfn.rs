//! Class functions: Fourier transform, norms, root counts and race functions.
//!
//! Convention: t̂(χ) = ⟨χ, t⟩_G = (1/|G|)Σ_g χ(g)·conj(t(g)), so that
//! t = Σ_χ conj(t̂(χ))·χ.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{invalid, Result};
use crate::group::{Group, C64};

#[derive(Clone, Debug)]
pub struct ClassFunction {
    group: Group,
    values: Vec<C64>,
}

/// ‖t‖₁, ‖t‖₂ and the Littlewood norm λ(t) = Σ χ(1)|t̂(χ)|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub norm1: f64,
    pub norm2: f64,
    pub littlewood: f64,
}

impl ClassFunction {
    pub fn new(group: Group, values: Vec<C64>) -> Result<Self> {
        if values.len() != group.num_classes() {
            return invalid(format!(
                "class function has {} values, group has {} classes",
                values.len(),
                group.num_classes()
            ));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("class function values must be finite");
        }
        Ok(ClassFunction { group, values })
    }

    pub fn from_real(group: Group, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn constant(group: Group, c: f64) -> Self {
        let n = group.num_classes();
        ClassFunction { group, values: vec![C64::new(c, 0.0); n] }
    }

    pub fn zero(group: Group) -> Self {
        Self::constant(group, 0.0)
    }

    /// 1_C for a single class.
    pub fn indicator(group: Group, class: usize) -> Self {
        let mut t = Self::zero(group);
        t.values[class] = C64::new(1.0, 0.0);
        t
    }

    /// The character χ viewed as a class function.
    pub fn character(group: Group, chi: usize) -> Self {
        let values = group.char_row(chi);
        ClassFunction { group, values }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, class: usize) -> C64 {
        self.values[class]
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn same_group(&self, other: &ClassFunction) -> bool {
        Arc::ptr_eq(&self.group, &other.group)
    }

    /// ⟨t₁, t₂⟩_G = (1/|G|)Σ_g t₁(g)·conj(t₂(g)).
    pub fn inner(&self, other: &ClassFunction) -> C64 {
        assert!(self.same_group(other), "inner product across different groups");
        let g = &self.group;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .zip(g.classes())
            .map(|((a, b), c)| a * b.conj() * c.size as f64)
            .sum();
        s / g.order() as f64
    }

    /// t̂(χ) for every irreducible character, in character order.
    pub fn fourier(&self) -> Vec<C64> {
        (0..self.group.num_chars()).map(|x| self.fourier_at(x)).collect()
    }

    pub fn fourier_at(&self, chi: usize) -> C64 {
        let g = &self.group;
        let s: C64 = (0..g.num_classes())
            .map(|c| g.chi(chi, c) * self.values[c].conj() * g.class_size(c) as f64)
            .sum();
        s / g.order() as f64
    }

    /// t = Σ_χ conj(t̂(χ))·χ.
    pub fn inverse_fourier(group: Group, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() != group.num_chars() {
            return invalid(format!(
                "{} coefficients for {} characters",
                coeffs.len(),
                group.num_chars()
            ));
        }
        let values = (0..group.num_classes())
            .map(|c| coeffs.iter().enumerate().map(|(x, a)| a.conj() * group.chi(x, c)).sum())
            .collect();
        Ok(ClassFunction { group, values })
    }

    pub fn norms(&self) -> Norms {
        let g = &self.group;
        let ord = g.order() as f64;
        let norm1 = self
            .values
            .iter()
            .zip(g.classes())
            .map(|(v, c)| v.norm() * c.size as f64)
            .sum::<f64>()
            / ord;
        let norm2 = self.inner(self).re.max(0.0).sqrt();
        let littlewood = self
            .fourier()
            .iter()
            .enumerate()
            .map(|(x, a)| g.degree(x) as f64 * a.norm())
            .sum();
        Norms { norm1, norm2, littlewood }
    }

    /// The class function g ↦ t(g^k).
    pub fn compose_power(&self, k: u64) -> ClassFunction {
        let g = &self.group;
        let values = (0..g.num_classes()).map(|c| self.values[g.power_class(c, k)]).collect();
        ClassFunction { group: g.clone(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn scale(&self, c: f64) -> ClassFunction {
        ClassFunction { group: self.group.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Characters χ with |t̂(χ)| > tol.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.fourier().iter().enumerate().filter(|(_, a)| a.norm() > tol).map(|(x, _)| x).collect()
    }
}

impl Add for &ClassFunction {
    type Output = ClassFunction;
    fn add(self, rhs: &ClassFunction) -> ClassFunction {
        assert!(self.same_group(rhs));
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        ClassFunction { group: self.group.clone(), values }
    }
}

impl Sub for &ClassFunction {
    type Output = ClassFunction;
    fn sub(self, rhs: &ClassFunction) -> ClassFunction {
        assert!(self.same_group(rhs));
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        ClassFunction { group: self.group.clone(), values }
    }
}

impl Neg for &ClassFunction {
    type Output = ClassFunction;
    fn neg(self) -> ClassFunction {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &ClassFunction {
    type Output = ClassFunction;
    fn mul(self, c: f64) -> ClassFunction {
        self.scale(c)
    }
}

/// r_k(h) = #{g : g^k = h}, from class sizes and the power map.
pub fn root_count(group: &Group, k: u64) -> ClassFunction {
    let mut acc = vec![0u64; group.num_classes()];
    for (c, cl) in group.classes().iter().enumerate() {
        acc[group.power_class(c, k)] += cl.size;
    }
    let values = acc
        .iter()
        .zip(group.classes())
        .map(|(&n, cl)| C64::new(n as f64 / cl.size as f64, 0.0))
        .collect();
    ClassFunction { group: group.clone(), values }
}

/// Σ_χ conj(ε_k(χ))·χ, the character-side expression of r_k.
pub fn root_count_from_characters(group: &Group, k: u64) -> ClassFunction {
    let eps: Vec<C64> = (0..group.num_chars()).map(|x| group.epsilon_k(x, k)).collect();
    ClassFunction::inverse_fourier(group.clone(), &eps).expect("one coefficient per character")
}

/// r = r₂.
pub fn square_root_count(group: &Group) -> ClassFunction {
    root_count(group, 2)
}

/// Which race function to build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RaceSpec {
    /// t_{C1,C2}; `None` is the sentinel C₂ = 0.
    Classes(usize, Option<usize>),
    OneMinusR,
}

/// t_{C1,C2} = |G|/|C₁|·1_{C1} − |G|/|C₂|·1_{C2}, or 1 − r.
pub fn race_function(group: &Group, spec: &RaceSpec) -> Result<ClassFunction> {
    match *spec {
        RaceSpec::OneMinusR => {
            let r = square_root_count(group);
            Ok(&ClassFunction::constant(group.clone(), 1.0) - &r)
        }
        RaceSpec::Classes(c1, c2) => {
            let n = group.num_classes();
            if c1 >= n || c2.is_some_and(|c| c >= n) {
                return invalid("race class index out of range");
            }
            if Some(c1) == c2 {
                return invalid("race needs two distinct classes");
            }
            let ord = group.order() as f64;
            let mut values = vec![C64::zero(); n];
            values[c1] = C64::new(ord / group.class_size(c1) as f64, 0.0);
            if let Some(c2) = c2 {
                values[c2] = C64::new(-ord / group.class_size(c2) as f64, 0.0);
            }
            ClassFunction::new(group.clone(), values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec};

    #[test]
    fn indicator_of_transpositions_in_s3() {
        let g = build_group(&GroupSpec::Symmetric(3)).unwrap();
        let c = g.class_index("2.1").unwrap();
        let t = ClassFunction::indicator(g.clone(), c);
        let f = t.fourier();
        let triv = 0;
        let sign = g.char_index("[1.1.1]").unwrap();
        let std = g.char_index("[2.1]").unwrap();
        assert!((f[triv] - 0.5).norm() < 1e-12);
        assert!((f[sign] + 0.5).norm() < 1e-12);
        assert!(f[std].norm() < 1e-12);
    }

    #[test]
    fn race_rejects_equal_classes() {
        let g = build_group(&GroupSpec::Cyclic(4)).unwrap();
        assert!(race_function(&g, &RaceSpec::Classes(1, Some(1))).is_err());
        let t = race_function(&g, &RaceSpec::Classes(3, None)).unwrap();
        assert_eq!(t.real_values(), vec![0.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn one_minus_r_vanishes_for_odd_order() {
        let g = build_group(&GroupSpec::Dihedral(5)).unwrap();
        assert!(!race_function(&g, &RaceSpec::OneMinusR).unwrap().is_zero(1e-12));
        let c = build_group(&GroupSpec::Abelian(vec![3, 5])).unwrap();
        assert!(race_function(&c, &RaceSpec::OneMinusR).unwrap().is_zero(1e-12));
    }
}
