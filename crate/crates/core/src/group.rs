//! Finite groups with conjugacy classes and complete complex character tables.
//!
//! Class 0 is always the identity class and character 0 is always trivial.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, invariant, Error, Result};
use crate::sn::{self, Partition};

pub type C64 = Complex64;
pub type Group = Arc<FiniteGroup>;

/// Structural tolerance for orthogonality checks.
pub const TABLE_TOL: f64 = 1e-10;
/// Largest group given by an explicit multiplication table.
pub const MAX_TABLE_ORDER: usize = 2000;
/// Largest abelian group whose classes are materialized.
pub const MAX_ABELIAN_ORDER: u64 = 1 << 22;
/// Largest n for full symmetric-group tables.
pub const MAX_SYMMETRIC_N: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Explicit(String),
    Abelian(Vec<u64>),
    Dihedral(u64),
    Affine(u64),
    Symmetric(usize),
    Units(u64),
}

/// Frobenius–Schur type of an irreducible character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsType {
    Orthogonal,
    Unitary,
    Symplectic,
}

#[derive(Clone, Debug)]
pub struct ConjClass {
    pub label: String,
    pub size: u64,
    /// Representative element index when elements are available.
    pub rep: Option<usize>,
    pub element_order: u64,
}

#[derive(Clone, Debug)]
pub(crate) struct ElementTable {
    n: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    class_of: Vec<u32>,
    identity: usize,
}

impl ElementTable {
    fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let c = f(a, b);
                if c >= n {
                    return invalid(format!("product {a}*{b} = {c} out of range"));
                }
                mul[a * n + b] = c as u32;
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e * n + x] as usize == x && mul[x * n + e] as usize == x))
            .ok_or_else(|| Error::InvalidParameter("multiplication table has no identity".into()))?;
        let mut inv = vec![u32::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if mul[a * n + b] as usize == identity {
                    inv[a] = b as u32;
                    break;
                }
            }
            if inv[a] == u32::MAX {
                return invalid(format!("element {a} has no inverse"));
            }
        }
        Ok(ElementTable { n, mul, inv, class_of: vec![0; n], identity })
    }

    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                let ab = self.mul(a, b);
                for c in 0..n {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return invalid(format!("table not associative at ({a},{b},{c})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Conjugacy classes by orbit computation, as element lists in discovery order.
    fn orbit_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for g in 0..self.n {
            if seen[g] {
                continue;
            }
            let mut orbit = Vec::new();
            for x in 0..self.n {
                let c = self.mul(self.mul(x, g), self.inv[x] as usize);
                if !seen[c] {
                    seen[c] = true;
                    orbit.push(c);
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    fn order_of(&self, g: usize) -> u64 {
        let mut k = 1u64;
        let mut x = g;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }
}

#[derive(Clone, Debug)]
enum Elements {
    None,
    Table(ElementTable),
    Abelian(Vec<u64>),
}

#[derive(Clone, Debug)]
enum CharStore {
    Dense(Vec<Vec<C64>>),
    Abelian(Vec<u64>),
}

/// A finite group with its conjugacy classes and irreducible characters.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    kind: GroupKind,
    order: u64,
    classes: Vec<ConjClass>,
    degrees: Vec<u64>,
    char_labels: Vec<String>,
    chars: CharStore,
    elements: Elements,
    partitions: Option<Vec<Partition>>,
    class_index: HashMap<String, usize>,
}

/// Parameters accepted by [`build_group`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Abelian(Vec<u64>),
    Cyclic(u64),
    Dihedral(u64),
    Affine(u64),
    Symmetric(usize),
    Quaternion,
    /// Abelian group extended by an involution acting by inversion.
    GeneralizedDihedral(Vec<u64>),
    Table { name: String, table: Vec<Vec<usize>> },
    /// (Z/q)^×, classes labeled by residue.
    Units(u64),
}

impl GroupSpec {
    /// Parses a group description: a header `kind <name> <params>` followed,
    /// for `kind table <name>`, by rows of element indices.
    pub fn parse(text: &str) -> Result<GroupSpec> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty group description".into() })?;
        let mut words = header.split_whitespace();
        if words.next() != Some("kind") {
            return Err(Error::Parse { line: 1, msg: "expected `kind <name> <params>`".into() });
        }
        let name = words.next().unwrap_or("");
        let params: Vec<&str> = words.collect();
        let list = |p: &[&str]| -> Result<Vec<u64>> {
            p.iter()
                .flat_map(|s| s.split(','))
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>().map_err(|_| Error::Parse { line: 1, msg: format!("bad parameter '{s}'") }))
                .collect()
        };
        let one = |p: &[&str]| -> Result<u64> {
            match list(p)?.as_slice() {
                [x] => Ok(*x),
                _ => Err(Error::Parse { line: 1, msg: format!("{name} takes one parameter") }),
            }
        };
        Ok(match name {
            "abelian" => GroupSpec::Abelian(list(&params)?),
            "cyclic" => GroupSpec::Cyclic(one(&params)?),
            "dihedral" => GroupSpec::Dihedral(one(&params)?),
            "affine" => GroupSpec::Affine(one(&params)?),
            "symmetric" => GroupSpec::Symmetric(one(&params)? as usize),
            "quaternion" => GroupSpec::Quaternion,
            "gendihedral" => GroupSpec::GeneralizedDihedral(list(&params)?),
            "units" => GroupSpec::Units(one(&params)?),
            "table" => {
                let mut table = Vec::new();
                for (i, l) in lines.enumerate() {
                    let row: std::result::Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
                    table.push(row.map_err(|_| Error::Parse { line: i + 2, msg: "bad table row".into() })?);
                }
                GroupSpec::Table { name: params.first().copied().unwrap_or("table").to_string(), table }
            }
            other => return Err(Error::Parse { line: 1, msg: format!("unknown group kind '{other}'") }),
        })
    }
}

/// Builds a group and verifies its character table.
pub fn build_group(spec: &GroupSpec) -> Result<Group> {
    let g = match spec {
        GroupSpec::Abelian(orders) => FiniteGroup::abelian(orders)?,
        GroupSpec::Cyclic(n) => FiniteGroup::abelian(&[*n])?,
        GroupSpec::Dihedral(n) => FiniteGroup::dihedral(*n)?,
        GroupSpec::Affine(p) => FiniteGroup::affine(*p)?,
        GroupSpec::Symmetric(n) => FiniteGroup::symmetric(*n)?,
        GroupSpec::Quaternion => FiniteGroup::quaternion()?,
        GroupSpec::GeneralizedDihedral(orders) => FiniteGroup::generalized_dihedral(orders)?,
        GroupSpec::Table { name, table } => FiniteGroup::from_table(name, table)?,
        GroupSpec::Units(q) => FiniteGroup::units(*q)?,
    };
    g.verify()?;
    Ok(Arc::new(g))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut r = 1u128 % m128;
    let mut x = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * x % m128;
        }
        x = x * x % m128;
        e >>= 1;
    }
    r as u64
}

/// Smallest primitive root modulo the odd prime p.
pub fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .unwrap_or(1)
}

fn unit_root(k: i64, n: u64) -> C64 {
    let k = k.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * k / n as f64)
}

impl FiniteGroup {
    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::Explicit(name) => name.clone(),
            GroupKind::Abelian(o) => {
                let s: Vec<String> = o.iter().map(|x| x.to_string()).collect();
                format!("abelian({})", s.join(","))
            }
            GroupKind::Dihedral(n) => format!("dihedral({n})"),
            GroupKind::Affine(p) => format!("affine({p})"),
            GroupKind::Symmetric(n) => format!("symmetric({n})"),
            GroupKind::Units(q) => format!("units({q})"),
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn classes(&self) -> &[ConjClass] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_size(&self, c: usize) -> u64 {
        self.classes[c].size
    }

    pub fn num_chars(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn degree(&self, chi: usize) -> u64 {
        self.degrees[chi]
    }

    pub fn char_labels(&self) -> &[String] {
        &self.char_labels
    }

    pub fn char_index(&self, label: &str) -> Option<usize> {
        self.char_labels.iter().position(|l| l == label)
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        if let Some(&i) = self.class_index.get(label) {
            return Some(i);
        }
        if let Some(parts) = &self.partitions {
            let lam = Partition::parse(label).ok()?;
            return parts.iter().position(|p| *p == lam);
        }
        None
    }

    /// Cycle types indexing classes and characters of a symmetric group.
    pub fn partitions(&self) -> Option<&[Partition]> {
        self.partitions.as_deref()
    }

    /// Character value χ(C).
    pub fn chi(&self, chi: usize, class: usize) -> C64 {
        match &self.chars {
            CharStore::Dense(t) => t[chi][class],
            CharStore::Abelian(orders) => {
                let a = mixed_radix(chi as u64, orders);
                let b = mixed_radix(class as u64, orders);
                let phase: f64 = a
                    .iter()
                    .zip(&b)
                    .zip(orders)
                    .map(|((&j, &x), &n)| ((j * x) % n) as f64 / n as f64)
                    .sum();
                C64::from_polar(1.0, 2.0 * PI * phase)
            }
        }
    }

    pub fn char_row(&self, chi: usize) -> Vec<C64> {
        (0..self.num_classes()).map(|c| self.chi(chi, c)).collect()
    }

    /// The full table as rows indexed by character.
    pub fn character_table(&self) -> Vec<Vec<C64>> {
        (0..self.num_chars()).map(|x| self.char_row(x)).collect()
    }

    pub fn has_elements(&self) -> bool {
        !matches!(self.elements, Elements::None)
    }

    pub fn identity(&self) -> Option<usize> {
        match &self.elements {
            Elements::None => None,
            Elements::Table(t) => Some(t.identity),
            Elements::Abelian(_) => Some(0),
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.elements {
            Elements::Table(t) => t.mul(a, b),
            Elements::Abelian(orders) => {
                let x = mixed_radix(a as u64, orders);
                let y = mixed_radix(b as u64, orders);
                let z: Vec<u64> = x.iter().zip(&y).zip(orders).map(|((p, q), n)| (p + q) % n).collect();
                from_mixed_radix(&z, orders) as usize
            }
            Elements::None => panic!("group {} has no element model", self.name()),
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match &self.elements {
            Elements::Table(t) => t.inv[a] as usize,
            Elements::Abelian(orders) => {
                let x = mixed_radix(a as u64, orders);
                let z: Vec<u64> = x.iter().zip(orders).map(|(p, n)| (n - p) % n).collect();
                from_mixed_radix(&z, orders) as usize
            }
            Elements::None => panic!("group {} has no element model", self.name()),
        }
    }

    pub fn class_of(&self, g: usize) -> usize {
        match &self.elements {
            Elements::Table(t) => t.class_of[g] as usize,
            Elements::Abelian(_) => g,
            Elements::None => panic!("group {} has no element model", self.name()),
        }
    }

    /// Elements of the given class (element model required).
    pub fn class_elements(&self, c: usize) -> Vec<usize> {
        match &self.elements {
            Elements::Table(t) => (0..t.n).filter(|&g| t.class_of[g] as usize == c).collect(),
            Elements::Abelian(_) => vec![c],
            Elements::None => panic!("group {} has no element model", self.name()),
        }
    }

    pub fn element_pow(&self, g: usize, mut k: u64) -> usize {
        let mut r = self.identity().expect("element model");
        let mut x = g;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, x);
            }
            x = self.mul(x, x);
            k >>= 1;
        }
        r
    }

    /// Class of g^k for g in class `c`.
    pub fn power_class(&self, c: usize, k: u64) -> usize {
        if let Some(parts) = &self.partitions {
            let target = parts[c].power(k);
            return parts.iter().position(|p| *p == target).expect("cycle type present");
        }
        let rep = self.classes[c].rep.expect("representative");
        self.class_of(self.element_pow(rep, k))
    }

    /// Class of g⁻¹ for g in class `c`.
    pub fn inverse_class(&self, c: usize) -> usize {
        let ord = self.classes[c].element_order;
        self.power_class(c, ord - 1)
    }

    /// ε_k(χ) = (1/|G|)Σ_g χ(g^k).
    pub fn epsilon_k(&self, chi: usize, k: u64) -> C64 {
        let mut s = C64::zero();
        for (c, cl) in self.classes.iter().enumerate() {
            s += self.chi(chi, self.power_class(c, k)) * cl.size as f64;
        }
        s / self.order as f64
    }

    /// Frobenius–Schur indicator ε₂(χ), checked to lie in {−1,0,1}.
    pub fn fs_indicator(&self, chi: usize) -> Result<i32> {
        let e = self.epsilon_k(chi, 2);
        let r = e.re.round();
        if (e - C64::new(r, 0.0)).norm() > 1e-8 || r.abs() > 1.0 {
            return invariant(format!("ε₂({}) = {e} is not in {{-1,0,1}}", self.char_labels[chi]));
        }
        Ok(r as i32)
    }

    pub fn fs_classify(&self, chi: usize) -> Result<FsType> {
        Ok(match self.fs_indicator(chi)? {
            1 => FsType::Orthogonal,
            0 => FsType::Unitary,
            _ => FsType::Symplectic,
        })
    }

    pub fn is_real_char(&self, chi: usize) -> bool {
        (0..self.num_classes()).all(|c| self.chi(chi, c).im.abs() < 1e-9)
    }

    /// Index of the complex-conjugate character.
    pub fn conjugate_char(&self, chi: usize) -> usize {
        let row: Vec<C64> = self.char_row(chi).iter().map(|z| z.conj()).collect();
        (0..self.num_chars())
            .find(|&x| (0..self.num_classes()).all(|c| (self.chi(x, c) - row[c]).norm() < 1e-8))
            .expect("conjugate character present")
    }

    /// Checks both orthogonality relations and the counting identities.
    pub fn verify(&self) -> Result<()> {
        let g = self.order as f64;
        let total: u64 = self.classes.iter().map(|c| c.size).sum();
        if total != self.order {
            return invariant(format!("{}: class sizes sum to {total}", self.name()));
        }
        if let Some(c) = self.classes.iter().find(|c| self.order % c.size != 0) {
            return invariant(format!("{}: class {} size does not divide |G|", self.name(), c.label));
        }
        if self.num_chars() != self.num_classes() {
            return invariant(format!("{}: character table incomplete", self.name()));
        }
        let sq: u128 = self.degrees.iter().map(|&d| (d as u128) * (d as u128)).sum();
        if sq != self.order as u128 {
            return invariant(format!("{}: Σχ(1)² = {sq} != |G|", self.name()));
        }
        let r = self.num_classes();
        if r > 512 {
            return self.verify_sampled();
        }
        let table = self.character_table();
        let sizes: Vec<f64> = self.classes.iter().map(|c| c.size as f64).collect();
        for a in 0..r {
            for b in a..r {
                let s: C64 = (0..r).map(|c| table[a][c] * table[b][c].conj() * sizes[c]).sum::<C64>() / g;
                let want = if a == b { 1.0 } else { 0.0 };
                if (s - want).norm() > TABLE_TOL {
                    return invariant(format!("{}: row orthogonality fails at ({a},{b}): {s}", self.name()));
                }
            }
        }
        for c in 0..r {
            for d in c..r {
                let s: C64 = (0..r).map(|x| table[x][c] * table[x][d].conj()).sum();
                let want = if c == d { g / sizes[c] } else { 0.0 };
                if (s - want).norm() > TABLE_TOL * want.max(1.0) {
                    return invariant(format!("{}: column orthogonality fails at ({c},{d})", self.name()));
                }
            }
        }
        Ok(())
    }

    // Large abelian groups: sampled rows against the trivial row and each other.
    fn verify_sampled(&self) -> Result<()> {
        let r = self.num_classes();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let sizes: Vec<f64> = self.classes.iter().map(|c| c.size as f64).collect();
        for _ in 0..64 {
            let a = rng.random_range(0..r);
            let b = rng.random_range(0..r);
            let s: C64 = (0..r).map(|c| self.chi(a, c) * self.chi(b, c).conj() * sizes[c]).sum::<C64>()
                / self.order as f64;
            let want = if a == b { 1.0 } else { 0.0 };
            if (s - want).norm() > 1e-8 {
                return invariant(format!("{}: sampled orthogonality fails", self.name()));
            }
        }
        Ok(())
    }

    /// CSV export: one row per character with degree, ε₂ and `re+imi` values.
    pub fn table_csv(&self) -> String {
        let mut s = String::from("character,degree,fs");
        for c in &self.classes {
            let _ = write!(s, ",{}", c.label);
        }
        s.push('\n');
        for x in 0..self.num_chars() {
            let fs = self.fs_indicator(x).map(|v| v.to_string()).unwrap_or_else(|_| "?".into());
            let _ = write!(s, "{},{},{}", self.char_labels[x], self.degrees[x], fs);
            for c in 0..self.num_classes() {
                let _ = write!(s, ",{}", fmt_complex(self.chi(x, c)));
            }
            s.push('\n');
        }
        s
    }

    // ---- constructors ----

    pub fn abelian(orders: &[u64]) -> Result<Self> {
        if orders.is_empty() || orders.contains(&0) {
            return invalid("abelian group needs positive cyclic orders");
        }
        let order = orders.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n));
        let order = match order {
            Some(o) if o <= MAX_ABELIAN_ORDER => o,
            _ => return invalid(format!("abelian group too large (limit {MAX_ABELIAN_ORDER})")),
        };
        let orders = orders.to_vec();
        let label = |i: u64| {
            let d: Vec<String> = mixed_radix(i, &orders).iter().map(|x| x.to_string()).collect();
            d.join(":")
        };
        let mut classes = Vec::with_capacity(order as usize);
        for i in 0..order {
            let digits = mixed_radix(i, &orders);
            let el_order = digits
                .iter()
                .zip(&orders)
                .fold(1u64, |acc, (&x, &n)| acc.lcm(&(n / n.gcd(&x))));
            classes.push(ConjClass { label: label(i), size: 1, rep: Some(i as usize), element_order: el_order });
        }
        let char_labels = (0..order).map(|i| format!("chi[{}]", label(i))).collect();
        Ok(Self::assemble(
            GroupKind::Abelian(orders.clone()),
            order,
            classes,
            vec![1; order as usize],
            char_labels,
            CharStore::Abelian(orders.clone()),
            Elements::Abelian(orders),
            None,
        ))
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::abelian(&[n])
    }

    /// D_n of order 2n; element s^e r^i is stored at index e·n + i.
    pub fn dihedral(n: u64) -> Result<Self> {
        if n < 3 {
            return invalid(format!("dihedral(n) needs n >= 3, got {n}"));
        }
        if 2 * n > MAX_TABLE_ORDER as u64 {
            return invalid("dihedral group too large for an element table");
        }
        let nn = n as usize;
        let mut t = ElementTable::from_fn(2 * nn, |a, b| {
            let (e, i) = (a / nn, a % nn);
            let (f, j) = (b / nn, b % nn);
            if f == 0 {
                e * nn + (i + j) % nn
            } else {
                ((e + 1) % 2) * nn + (j + nn - i) % nn
            }
        })?;
        let half = nn / 2;
        let odd = nn % 2 == 1;
        let class_of = |g: usize| -> usize {
            let (e, i) = (g / nn, g % nn);
            if e == 0 {
                let m = i.min(nn - i);
                if odd || m < half {
                    m
                } else {
                    half
                }
            } else if odd {
                half + 1
            } else if i % 2 == 0 {
                half + 1
            } else {
                half + 2
            }
        };
        for g in 0..2 * nn {
            t.class_of[g] = class_of(g) as u32;
        }
        let num_classes = if odd { (nn + 3) / 2 } else { nn / 2 + 3 };
        let mut classes = Vec::with_capacity(num_classes);
        classes.push(ConjClass { label: "1".into(), size: 1, rep: Some(0), element_order: 1 });
        let rot_max = if odd { half } else { half - 1 };
        for m in 1..=rot_max {
            let ord = n / n.gcd(&(m as u64));
            classes.push(ConjClass { label: format!("r{m}"), size: 2, rep: Some(m), element_order: ord });
        }
        if !odd {
            classes.push(ConjClass { label: format!("r{half}"), size: 1, rep: Some(half), element_order: 2 });
            classes.push(ConjClass { label: "s".into(), size: n / 2, rep: Some(nn), element_order: 2 });
            classes.push(ConjClass { label: "sr".into(), size: n / 2, rep: Some(nn + 1), element_order: 2 });
        } else {
            classes.push(ConjClass { label: "s".into(), size: n, rep: Some(nn), element_order: 2 });
        }
        // Characters evaluated on representatives.
        let mut rows: Vec<Vec<C64>> = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        let reps: Vec<usize> = classes.iter().map(|c| c.rep.unwrap()).collect();
        let lin = |rot_sign: f64, refl: [f64; 2]| -> Vec<C64> {
            reps.iter()
                .map(|&g| {
                    let (e, i) = (g / nn, g % nn);
                    let v = if e == 0 { rot_sign.powi(i as i32) } else { refl[i % 2] * rot_sign.powi(i as i32) };
                    C64::new(v, 0.0)
                })
                .collect()
        };
        rows.push(lin(1.0, [1.0, 1.0]));
        labels.push("1".into());
        rows.push(lin(1.0, [-1.0, -1.0]));
        labels.push("sgn".into());
        if !odd {
            rows.push(lin(-1.0, [1.0, 1.0]));
            labels.push("lambda".into());
            rows.push(lin(-1.0, [-1.0, -1.0]));
            labels.push("lambda.sgn".into());
        }
        let deg2 = if odd { half } else { half - 1 };
        for h in 1..=deg2 {
            let row = reps
                .iter()
                .map(|&g| {
                    let (e, i) = (g / nn, g % nn);
                    if e == 0 {
                        C64::new(2.0 * (2.0 * PI * (h * i) as f64 / n as f64).cos(), 0.0)
                    } else {
                        C64::zero()
                    }
                })
                .collect();
            rows.push(row);
            labels.push(format!("chi{h}"));
        }
        let degrees = rows.iter().map(|r| r[0].re.round() as u64).collect();
        Ok(Self::assemble(
            GroupKind::Dihedral(n),
            2 * n,
            classes,
            degrees,
            labels,
            CharStore::Dense(rows),
            Elements::Table(t),
            None,
        ))
    }

    /// The affine group {x ↦ cx + d} over F_p, matrices (c d; 0 1).
    ///
    /// Element (c, d) is stored at index (c−1)·p + d. Classes: `id`, `U` (the
    /// nontrivial translations), `T<c>` for c ≠ 1. Characters: trivial, lifts
    /// `psi<j>` of Dirichlet characters mod p (index j w.r.t. the smallest
    /// primitive root), then `eta` of degree p−1.
    pub fn affine(p: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return invalid(format!("affine(p) needs an odd prime, got {p}"));
        }
        let order = p * (p - 1);
        if order > MAX_TABLE_ORDER as u64 {
            return invalid("affine group too large for an element table");
        }
        let pp = p as usize;
        let enc = |c: usize, d: usize| (c - 1) * pp + d;
        let mut t = ElementTable::from_fn(order as usize, |a, b| {
            let (c, d) = (a / pp + 1, a % pp);
            let (c2, d2) = (b / pp + 1, b % pp);
            enc(c * c2 % pp, (c * d2 + d) % pp)
        })?;
        for g in 0..order as usize {
            let (c, d) = (g / pp + 1, g % pp);
            t.class_of[g] = if c == 1 { (d != 0) as u32 } else { c as u32 };
        }
        let g0 = primitive_root(p);
        let mut ind = vec![0u64; pp];
        let mut x = 1u64;
        for k in 0..p - 1 {
            ind[x as usize] = k;
            x = x * g0 % p;
        }
        let mut classes = vec![
            ConjClass { label: "id".into(), size: 1, rep: Some(enc(1, 0)), element_order: 1 },
            ConjClass { label: "U".into(), size: p - 1, rep: Some(enc(1, 1)), element_order: p },
        ];
        for c in 2..pp {
            let ord = (p - 1) / (p - 1).gcd(&ind[c]);
            classes.push(ConjClass { label: format!("T{c}"), size: p, rep: Some(enc(c, 0)), element_order: ord });
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for j in 0..p - 1 {
            let mut row = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
            for c in 2..pp {
                row.push(unit_root((j * ind[c]) as i64, p - 1));
            }
            rows.push(row);
            labels.push(if j == 0 { "1".to_string() } else { format!("psi{j}") });
        }
        let mut eta = vec![C64::new((p - 1) as f64, 0.0), C64::new(-1.0, 0.0)];
        eta.extend(std::iter::repeat_n(C64::zero(), pp - 2));
        rows.push(eta);
        labels.push("eta".into());
        let mut degrees = vec![1; pp - 1];
        degrees.push(p - 1);
        Ok(Self::assemble(
            GroupKind::Affine(p),
            order,
            classes,
            degrees,
            labels,
            CharStore::Dense(rows),
            Elements::Table(t),
            None,
        ))
    }

    /// S_n with classes and characters indexed by partitions in lexicographic
    /// order; values by Murnaghan–Nakayama.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SYMMETRIC_N {
            return invalid(format!("symmetric(n) needs 1 <= n <= {MAX_SYMMETRIC_N}, got {n}"));
        }
        let parts = sn::partitions(n)?;
        let order = sn::factorial(n).to_u64().unwrap();
        let classes: Vec<ConjClass> = parts
            .iter()
            .map(|p| ConjClass {
                label: p.label(),
                size: p.class_size().to_u64().unwrap(),
                rep: None,
                element_order: p.element_order(),
            })
            .collect();
        let mut mn = sn::MnTable::new();
        let rows: Vec<Vec<C64>> = parts
            .iter()
            .map(|l| parts.iter().map(|m| C64::new(mn.value(l, m) as f64, 0.0)).collect())
            .collect();
        let degrees = parts.iter().map(|l| sn::hook_dimension(l).to_u64().unwrap()).collect();
        let labels: Vec<String> = parts.iter().map(|p| format!("[{}]", p.label())).collect();
        let mut g = Self::assemble(
            GroupKind::Symmetric(n),
            order,
            classes,
            degrees,
            labels,
            CharStore::Dense(rows),
            Elements::None,
            Some(parts),
        );
        // λ = (n) comes last lexicographically; character 0 must be trivial.
        g.move_trivial_first();
        Ok(g)
    }

    /// The quaternion group Q₈ from its multiplication table.
    pub fn quaternion() -> Result<Self> {
        // Elements ±1, ±i, ±j, ±k as (sign, unit) with unit 0..4 = 1,i,j,k.
        let unit_mul = |a: usize, b: usize| -> (bool, usize) {
            match (a, b) {
                (0, x) | (x, 0) => (false, x),
                (x, y) if x == y => (true, 0),
                (1, 2) => (false, 3),
                (2, 1) => (true, 3),
                (2, 3) => (false, 1),
                (3, 2) => (true, 1),
                (3, 1) => (false, 2),
                (1, 3) => (true, 2),
                _ => unreachable!(),
            }
        };
        let table: Vec<Vec<usize>> = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (sa, ua) = (a / 4, a % 4);
                        let (sb, ub) = (b / 4, b % 4);
                        let (neg, u) = unit_mul(ua, ub);
                        let s = (sa + sb + neg as usize) % 2;
                        s * 4 + u
                    })
                    .collect()
            })
            .collect();
        Self::from_table("Q8", &table)
    }

    /// A ⋊ ⟨τ⟩ with τ acting on the abelian group A by inversion and τ² = 1.
    ///
    /// Element (a, e) = a·τ^e is stored at index e·|A| + a, so the first |A|
    /// indices form the abelian subgroup in mixed-radix order.
    pub fn generalized_dihedral(orders: &[u64]) -> Result<Self> {
        if orders.is_empty() || orders.contains(&0) {
            return invalid("generalized dihedral group needs positive cyclic orders");
        }
        let a: u64 = orders.iter().product();
        if 2 * a > MAX_TABLE_ORDER as u64 {
            return invalid("generalized dihedral group too large");
        }
        let an = a as usize;
        let o = orders.to_vec();
        let add = |x: usize, y: usize, neg: bool| -> usize {
            let dx = mixed_radix(x as u64, &o);
            let dy = mixed_radix(y as u64, &o);
            let z: Vec<u64> = dx
                .iter()
                .zip(&dy)
                .zip(&o)
                .map(|((p, q), n)| if neg { (p + n - q) % n } else { (p + q) % n })
                .collect();
            from_mixed_radix(&z, &o) as usize
        };
        let table: Vec<Vec<usize>> = (0..2 * an)
            .map(|g| {
                (0..2 * an)
                    .map(|h| {
                        let (e, x) = (g / an, g % an);
                        let (f, y) = (h / an, h % an);
                        // (x τ^e)(y τ^f) = x·(τ^e y τ^{-e}) τ^{e+f}
                        ((e + f) % 2) * an + add(x, y, e == 1)
                    })
                    .collect()
            })
            .collect();
        let name = {
            let s: Vec<String> = orders.iter().map(|x| x.to_string()).collect();
            format!("gendihedral({})", s.join(","))
        };
        Self::from_table(&name, &table)
    }

    /// Group from an explicit multiplication table; the character table is
    /// computed by simultaneous diagonalization of the class multiplication
    /// coefficients (Burnside's method).
    pub fn from_table(name: &str, table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        if n == 0 || n > MAX_TABLE_ORDER {
            return invalid(format!("explicit table order must be in 1..={MAX_TABLE_ORDER}"));
        }
        if table.iter().any(|r| r.len() != n) {
            return invalid("multiplication table is not square");
        }
        let mut t = ElementTable::from_fn(n, |a, b| table[a][b])?;
        if n <= 256 {
            t.check_associative()?;
        }
        let orbits = t.orbit_classes();
        let mut cls: Vec<(u64, usize, Vec<usize>)> =
            orbits.into_iter().map(|o| (t.order_of(o[0]), o.len(), o)).collect();
        cls.sort_by(|a, b| (a.0, a.1, a.2[0]).cmp(&(b.0, b.1, b.2[0])));
        let mut classes = Vec::with_capacity(cls.len());
        let mut letter: HashMap<u64, u8> = HashMap::new();
        for (ci, (ord, size, elems)) in cls.iter().enumerate() {
            for &g in elems {
                t.class_of[g] = ci as u32;
            }
            let l = letter.entry(*ord).or_insert(0);
            let label = format!("{ord}{}", (b'a' + *l) as char);
            *l += 1;
            classes.push(ConjClass { label, size: *size as u64, rep: Some(elems[0]), element_order: *ord });
        }
        let rows = burnside_table(&t, &classes, n as u64)?;
        let degrees = rows.iter().map(|r| r[0].re.round() as u64).collect();
        let labels = (0..rows.len()).map(|i| format!("X{}", i + 1)).collect();
        let mut g = Self::assemble(
            GroupKind::Explicit(name.to_string()),
            n as u64,
            classes,
            degrees,
            labels,
            CharStore::Dense(rows),
            Elements::Table(t),
            None,
        );
        g.move_trivial_first();
        Ok(g)
    }

    /// The unit group (Z/q)^× as an explicit table; element i is the i-th
    /// residue coprime to q and classes are labeled by their residue.
    pub fn units(q: u64) -> Result<Self> {
        if q < 2 || q > MAX_TABLE_ORDER as u64 {
            return invalid(format!("units(q) needs 2 <= q <= {MAX_TABLE_ORDER}"));
        }
        let res: Vec<u64> = (1..q.max(2)).filter(|&a| a.gcd(&q) == 1).collect();
        let res = if q == 2 { vec![1] } else { res };
        let mut pos = vec![usize::MAX; q as usize];
        for (i, &a) in res.iter().enumerate() {
            pos[a as usize] = i;
        }
        let table: Vec<Vec<usize>> =
            res.iter().map(|&a| res.iter().map(|&b| pos[(a * b % q) as usize]).collect()).collect();
        let mut g = Self::from_table(&format!("units({q})"), &table)?;
        g.kind = GroupKind::Units(q);
        for c in g.classes.iter_mut() {
            c.label = res[c.rep.unwrap()].to_string();
        }
        g.class_index = g.classes.iter().enumerate().map(|(i, c)| (c.label.clone(), i)).collect();
        Ok(g)
    }

    /// Residues coprime to q in element order, for `units(q)`.
    pub fn unit_residues(&self) -> Option<Vec<u64>> {
        match self.kind {
            GroupKind::Units(q) => Some(if q == 2 { vec![1] } else { (1..q).filter(|&a| a.gcd(&q) == 1).collect() }),
            _ => None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: GroupKind,
        order: u64,
        classes: Vec<ConjClass>,
        degrees: Vec<u64>,
        char_labels: Vec<String>,
        chars: CharStore,
        elements: Elements,
        partitions: Option<Vec<Partition>>,
    ) -> Self {
        let class_index = if classes.len() <= 100_000 {
            classes.iter().enumerate().map(|(i, c)| (c.label.clone(), i)).collect()
        } else {
            HashMap::new()
        };
        FiniteGroup { kind, order, classes, degrees, char_labels, chars, elements, partitions, class_index }
    }

    fn move_trivial_first(&mut self) {
        let triv = (0..self.num_chars())
            .find(|&x| self.degrees[x] == 1 && (0..self.num_classes()).all(|c| (self.chi(x, c) - 1.0).norm() < 1e-9))
            .expect("trivial character");
        if triv == 0 {
            return;
        }
        if let CharStore::Dense(rows) = &mut self.chars {
            let r = rows.remove(triv);
            rows.insert(0, r);
        }
        let d = self.degrees.remove(triv);
        self.degrees.insert(0, d);
        let l = self.char_labels.remove(triv);
        self.char_labels.insert(0, l);
    }

    /// Conjugacy classes recomputed from the element model by orbits; used to
    /// cross-check the formula-based class assignment.
    pub fn orbit_class_partition(&self) -> Option<Vec<Vec<usize>>> {
        match &self.elements {
            Elements::Table(t) => Some(t.orbit_classes()),
            _ => None,
        }
    }

    pub fn element_count(&self) -> Option<usize> {
        match &self.elements {
            Elements::None => None,
            _ => Some(self.order as usize),
        }
    }
}

pub fn fmt_complex(z: C64) -> String {
    let re = if z.re.abs() < 5e-13 { 0.0 } else { z.re };
    let im = if z.im.abs() < 5e-13 { 0.0 } else { z.im };
    if im >= 0.0 {
        format!("{re:.12}+{im:.12}i")
    } else {
        format!("{re:.12}{im:.12}i")
    }
}

fn mixed_radix(mut x: u64, orders: &[u64]) -> Vec<u64> {
    let mut d = vec![0; orders.len()];
    for k in (0..orders.len()).rev() {
        d[k] = x % orders[k];
        x /= orders[k];
    }
    d
}

fn from_mixed_radix(d: &[u64], orders: &[u64]) -> u64 {
    d.iter().zip(orders).fold(0, |acc, (&x, &n)| acc * n + x)
}

fn burnside_table(t: &ElementTable, classes: &[ConjClass], order: u64) -> Result<Vec<Vec<C64>>> {
    let r = classes.len();
    let inv_class: Vec<usize> = classes
        .iter()
        .map(|c| t.class_of[t.inv[c.rep.unwrap()] as usize] as usize)
        .collect();
    let sizes: Vec<f64> = classes.iter().map(|c| c.size as f64).collect();
    for attempt in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xb0b5 + attempt);
        let mut w = vec![C64::zero(); r];
        for j in 0..r {
            let k = inv_class[j];
            if k == j {
                w[j] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            } else if j < k {
                w[j] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                w[k] = w[j].conj();
            }
        }
        let mut h = DMatrix::<C64>::zeros(r, r);
        for (k, ck) in classes.iter().enumerate() {
            let g = ck.rep.unwrap();
            for x in 0..t.n {
                let y = t.mul(t.inv[x] as usize, g);
                h[(k, t.class_of[y] as usize)] += w[t.class_of[x] as usize];
            }
        }
        for k in 0..r {
            for i in 0..r {
                h[(k, i)] *= (sizes[k] / sizes[i]).sqrt();
            }
        }
        let hh = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = hh.symmetric_eigen();
        let mut rows = Vec::with_capacity(r);
        let mut ok = true;
        for col in 0..r {
            let v = eig.eigenvectors.column(col);
            let u: Vec<C64> = (0..r).map(|i| v[i] / sizes[i].sqrt()).collect();
            if u[0].norm() < 1e-12 {
                ok = false;
                break;
            }
            let x: Vec<C64> = u.iter().map(|ui| (ui / u[0]).conj()).collect();
            let norm: f64 = x.iter().zip(&sizes).map(|(xi, s)| xi.norm_sqr() * s).sum();
            let deg = (order as f64 / norm).sqrt();
            let d = deg.round();
            if (deg - d).abs() > 1e-6 {
                ok = false;
                break;
            }
            rows.push(x.iter().map(|xi| xi * d).collect::<Vec<C64>>());
        }
        if !ok {
            continue;
        }
        let key = |row: &Vec<C64>| -> Vec<(i64, i64)> {
            row.iter().map(|z| ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64)).collect()
        };
        rows.sort_by(|a, b| {
            let da = a[0].re.round() as i64;
            let db = b[0].re.round() as i64;
            da.cmp(&db).then_with(|| key(b).cmp(&key(a)))
        });
        let orth = (0..r).all(|a| {
            (a..r).all(|b| {
                let s: C64 = (0..r).map(|c| rows[a][c] * rows[b][c].conj() * sizes[c]).sum::<C64>() / order as f64;
                (s - if a == b { 1.0 } else { 0.0 }).norm() < TABLE_TOL
            })
        });
        if orth {
            return Ok(rows);
        }
    }
    invariant("character table computation did not separate the characters")
}
