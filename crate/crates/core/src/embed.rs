//! Subgroup embeddings G ≤ G⁺ and induction of class functions.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::classfn::ClassFunction;
use crate::error::{invalid, invariant, Result};
use crate::group::{build_group, primitive_root, Group, GroupSpec, C64};

#[derive(Clone, Debug)]
pub struct SubgroupEmbedding {
    sub: Group,
    sup: Group,
    injection: Option<Vec<usize>>,
    coset_reps: Option<Vec<usize>>,
    class_map: Vec<usize>,
}

impl SubgroupEmbedding {
    /// Validates that `injection` is an injective homomorphism and computes
    /// left coset representatives and the class fusion map.
    pub fn new(sub: Group, sup: Group, injection: Vec<usize>) -> Result<Self> {
        let (Some(n), Some(m)) = (sub.element_count(), sup.element_count()) else {
            return invalid("embedding needs element models on both groups");
        };
        if injection.len() != n {
            return invalid(format!("injection has {} images for {n} elements", injection.len()));
        }
        if m % n != 0 {
            return invalid("subgroup order does not divide group order");
        }
        let mut seen = vec![false; m];
        for &x in &injection {
            if x >= m || seen[x] {
                return invalid("injection is not injective");
            }
            seen[x] = true;
        }
        for a in 0..n {
            for b in 0..n {
                if injection[sub.mul(a, b)] != sup.mul(injection[a], injection[b]) {
                    return invalid(format!("injection is not a homomorphism at ({a},{b})"));
                }
            }
        }
        let mut covered = vec![false; m];
        let mut reps = Vec::with_capacity(m / n);
        for x in 0..m {
            if covered[x] {
                continue;
            }
            reps.push(x);
            for &h in &injection {
                covered[sup.mul(x, h)] = true;
            }
        }
        if reps.len() != m / n {
            return invariant("coset enumeration inconsistent with the index");
        }
        let class_map = (0..sub.num_classes())
            .map(|c| sup.class_of(injection[sub.classes()[c].rep.unwrap()]))
            .collect();
        Ok(SubgroupEmbedding { sub, sup, injection: Some(injection), coset_reps: Some(reps), class_map })
    }

    /// G = G⁺ with the identity map (no element model needed).
    pub fn identity(group: Group) -> Self {
        let class_map = (0..group.num_classes()).collect();
        SubgroupEmbedding { sub: group.clone(), sup: group, injection: None, coset_reps: None, class_map }
    }

    pub fn sub(&self) -> &Group {
        &self.sub
    }

    pub fn sup(&self) -> &Group {
        &self.sup
    }

    pub fn index(&self) -> u64 {
        self.sup.order() / self.sub.order()
    }

    pub fn injection(&self) -> Option<&[usize]> {
        self.injection.as_deref()
    }

    pub fn coset_reps(&self) -> Option<&[usize]> {
        self.coset_reps.as_deref()
    }

    /// G⁺-class containing the G-class `c`.
    pub fn class_map(&self) -> &[usize] {
        &self.class_map
    }

    /// C⁺ = ∪ aCa⁻¹; verified to be a single G⁺-class when elements exist.
    pub fn induce_conjugacy_class(&self, c: usize) -> Result<usize> {
        let target = self.class_map[c];
        if let (Some(inj), Some(reps)) = (&self.injection, &self.coset_reps) {
            let mut union = BTreeSet::new();
            for &a in reps {
                let ai = self.sup.inv(a);
                for g in self.sub.class_elements(c) {
                    union.insert(self.sup.mul(self.sup.mul(a, inj[g]), ai));
                }
            }
            let want: BTreeSet<usize> = self.sup.class_elements(target).into_iter().collect();
            if union != want {
                return invariant("induced class is not a single conjugacy class");
            }
        }
        Ok(target)
    }

    /// t⁺ by class fusion: t⁺(D) = Σ_{C ⊂ D} t(C)·|C||G⁺|/(|G||D|).
    pub fn induce(&self, t: &ClassFunction) -> ClassFunction {
        assert!(std::sync::Arc::ptr_eq(t.group(), &self.sub), "class function lives on another group");
        let mut values = vec![C64::zero(); self.sup.num_classes()];
        let ratio = self.sup.order() as f64 / self.sub.order() as f64;
        for (c, &d) in self.class_map.iter().enumerate() {
            values[d] += t.value(c) * (self.sub.class_size(c) as f64 * ratio / self.sup.class_size(d) as f64);
        }
        ClassFunction::new(self.sup.clone(), values).expect("sizes match")
    }

    /// t⁺(g) = Σ_{xG : x⁻¹gx ∈ G} t(x⁻¹gx), by explicit coset enumeration.
    pub fn induce_by_cosets(&self, t: &ClassFunction) -> Result<ClassFunction> {
        let (Some(inj), Some(reps)) = (&self.injection, &self.coset_reps) else {
            return Ok(t.clone());
        };
        let m = self.sup.element_count().unwrap();
        let mut preimage = vec![usize::MAX; m];
        for (g, &x) in inj.iter().enumerate() {
            preimage[x] = g;
        }
        let mut values = Vec::with_capacity(self.sup.num_classes());
        for cl in self.sup.classes() {
            let g = cl.rep.unwrap();
            let mut s = C64::zero();
            for &x in reps {
                let y = self.sup.mul(self.sup.mul(self.sup.inv(x), g), x);
                if preimage[y] != usize::MAX {
                    s += t.value(self.sub.class_of(preimage[y]));
                }
            }
            values.push(s);
        }
        ClassFunction::new(self.sup.clone(), values)
    }

    /// χ|_G for a character of G⁺.
    pub fn restrict(&self, chi: usize) -> ClassFunction {
        let values = self.class_map.iter().map(|&d| self.sup.chi(chi, d)).collect();
        ClassFunction::new(self.sub.clone(), values).expect("sizes match")
    }

    /// t̂⁺(χ) = ⟨χ|_G, t⟩_G by Frobenius reciprocity.
    pub fn induced_fourier(&self, t: &ClassFunction, chi: usize) -> C64 {
        self.restrict(chi).inner(t)
    }

    /// All coefficients t̂⁺(χ), χ ∈ Irr(G⁺).
    pub fn induced_fourier_all(&self, t: &ClassFunction) -> Vec<C64> {
        (0..self.sup.num_chars()).map(|x| self.induced_fourier(t, x)).collect()
    }

    // ---- standard embeddings ----

    /// ⟨r⟩ ≅ C_n inside D_n.
    pub fn cyclic_in_dihedral(n: u64) -> Result<Self> {
        let sub = build_group(&GroupSpec::Cyclic(n))?;
        let sup = build_group(&GroupSpec::Dihedral(n))?;
        let inj = (0..n as usize).collect();
        Self::new(sub, sup, inj)
    }

    /// The translations {x ↦ x + d} ≅ C_p inside affine(p).
    pub fn unipotent_in_affine(p: u64) -> Result<Self> {
        let sub = build_group(&GroupSpec::Cyclic(p))?;
        let sup = build_group(&GroupSpec::Affine(p))?;
        let inj = (0..p as usize).collect();
        Self::new(sub, sup, inj)
    }

    /// The diagonal {x ↦ cx} ≅ C_{p−1} inside affine(p), generated by the
    /// smallest primitive root.
    pub fn diagonal_in_affine(p: u64) -> Result<Self> {
        let sub = build_group(&GroupSpec::Cyclic(p - 1))?;
        let sup = build_group(&GroupSpec::Affine(p))?;
        let g = primitive_root(p);
        let mut inj = Vec::with_capacity(p as usize - 1);
        let mut c = 1u64;
        for _ in 0..p - 1 {
            inj.push(((c - 1) * p) as usize);
            c = c * g % p;
        }
        Self::new(sub, sup, inj)
    }

    /// The abelian group A inside A ⋊ ⟨τ⟩ (τ acting by inversion).
    pub fn abelian_in_generalized_dihedral(orders: &[u64]) -> Result<Self> {
        let sub = build_group(&GroupSpec::Abelian(orders.to_vec()))?;
        let sup = build_group(&GroupSpec::GeneralizedDihedral(orders.to_vec()))?;
        let inj = (0..sub.order() as usize).collect();
        Self::new(sub, sup, inj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induce_constant_from_a3() {
        let e = SubgroupEmbedding::cyclic_in_dihedral(3).unwrap();
        let t = ClassFunction::constant(e.sub().clone(), 1.0);
        let tp = e.induce(&t);
        let s = e.sup().class_index("s").unwrap();
        for c in 0..e.sup().num_classes() {
            let want = if c == s { 0.0 } else { 2.0 };
            assert!((tp.value(c) - want).norm() < 1e-12);
        }
        let tc = e.induce_by_cosets(&t).unwrap();
        assert!((&tp - &tc).is_zero(1e-12));
    }

    #[test]
    fn rejects_non_homomorphism() {
        let sub = build_group(&GroupSpec::Cyclic(3)).unwrap();
        let sup = build_group(&GroupSpec::Dihedral(3)).unwrap();
        assert!(SubgroupEmbedding::new(sub.clone(), sup.clone(), vec![0, 2, 1]).is_ok());
        assert!(SubgroupEmbedding::new(sub.clone(), sup.clone(), vec![0, 3, 4]).is_err());
        assert!(SubgroupEmbedding::new(sub, sup, vec![0, 1, 1]).is_err());
    }
}
