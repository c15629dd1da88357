//! Galois extensions with ramification data: Artin conductors, discriminants,
//! conductor bounds and least-prime / Chebotarev error bounds.
//!
//! Conductors are those of the characters of G⁺ = Gal(L/Q).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_integer::Integer;

use crate::classfn::{root_count, ClassFunction};
use crate::embed::SubgroupEmbedding;
use crate::error::{invalid, invariant, Error, Result};
use crate::group::{build_group, is_prime, pow_mod, Group, GroupSpec};

/// Tolerance for integrality of conductor exponents.
pub const EXPONENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Radical { a: u64, p: u64 },
    Multiquadratic(Vec<u64>),
    HilbertClassField { d: i64, structure: Vec<u64> },
    DihedralKluners { ell: u64, d: i64, p: u64, q: u64 },
    Cyclotomic(u64),
    Quadratic(i64),
    Custom(String),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Radical { .. } => "radical",
            Family::Multiquadratic(_) => "multiquadratic",
            Family::HilbertClassField { .. } => "hilbert",
            Family::DihedralKluners { .. } => "kluners",
            Family::Cyclotomic(_) => "cyclotomic",
            Family::Quadratic(_) => "quadratic",
            Family::Custom(_) => "custom",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, String)> {
        let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Family::Radical { a, p } => vec![("a", a.to_string()), ("p", p.to_string())],
            Family::Multiquadratic(ps) => vec![("primes", join(ps))],
            Family::HilbertClassField { d, structure } => vec![("d", d.to_string()), ("structure", join(structure))],
            Family::DihedralKluners { ell, d, p, q } => vec![
                ("ell", ell.to_string()),
                ("d", d.to_string()),
                ("p", p.to_string()),
                ("q", q.to_string()),
            ],
            Family::Cyclotomic(q) => vec![("q", q.to_string())],
            Family::Quadratic(d) => vec![("d", d.to_string())],
            Family::Custom(name) => vec![("name", name.clone())],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.params().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}({})", self.tag(), p.join(";"))
    }
}

/// How ramification at a prime is described.
#[derive(Clone, Debug, PartialEq)]
pub enum Ramification {
    /// G₀ ⊇ G₁ ⊇ … as element sets of G⁺.
    Filtration(Vec<Vec<usize>>),
    /// n(χ,p) per character of G⁺.
    Exponents { values: Vec<f64>, approximate: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamifiedPrime {
    pub prime: u64,
    pub ramification: Ramification,
}

impl RamifiedPrime {
    /// Validates that each set is a subgroup and the chain weakly decreases.
    pub fn filtration(group: &Group, prime: u64, sets: Vec<Vec<usize>>) -> Result<Self> {
        let Some(n) = group.element_count() else {
            return invalid("filtrations need an element model");
        };
        let id = group.identity().unwrap();
        let mut prev: Option<BTreeSet<usize>> = None;
        for (i, s) in sets.iter().enumerate() {
            let set: BTreeSet<usize> = s.iter().copied().collect();
            if set.iter().any(|&x| x >= n) {
                return invalid(format!("G_{i} at {prime}: element index out of range"));
            }
            if !set.contains(&id) {
                return invalid(format!("G_{i} at {prime} does not contain the identity"));
            }
            for &a in &set {
                for &b in &set {
                    if !set.contains(&group.mul(a, b)) {
                        return invalid(format!("G_{i} at {prime} is not closed under multiplication"));
                    }
                }
            }
            if let Some(p) = &prev {
                if !set.is_subset(p) {
                    return invalid(format!("filtration at {prime} is not decreasing at step {i}"));
                }
            }
            prev = Some(set);
        }
        Ok(RamifiedPrime { prime, ramification: Ramification::Filtration(sets) })
    }

    pub fn exponents(prime: u64, values: Vec<f64>, approximate: bool) -> Self {
        RamifiedPrime { prime, ramification: Ramification::Exponents { values, approximate } }
    }

    pub fn is_approximate(&self) -> bool {
        matches!(self.ramification, Ramification::Exponents { approximate: true, .. })
    }
}

/// Per-character conductor estimates used when ramification data is absent.
#[derive(Clone, Debug, PartialEq)]
pub struct ConductorTable {
    pub log_conductors: Vec<f64>,
    /// The values are upper estimates rather than exact conductors.
    pub upper_estimates: bool,
}

/// A Galois extension L/K with G = Gal(L/K) ≤ G⁺ = Gal(L/Q).
#[derive(Clone, Debug)]
pub struct ExtensionSpec {
    pub family: Family,
    embedding: SubgroupEmbedding,
    pub ramified: Vec<RamifiedPrime>,
    /// log d_L.
    pub log_disc: f64,
    pub log_disc_is_bound: bool,
    /// Exact v_p(d_L) where known.
    pub disc_valuations: BTreeMap<u64, u64>,
    /// [K:Q].
    pub degree_k: u64,
    pub log_disc_k: f64,
    pub conductor_table: Option<ConductorTable>,
    pub notes: Vec<String>,
}

/// One row of the conductor–discriminant check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CondDiscRow {
    pub prime: u64,
    /// Σ_χ χ(1)·n(χ,p).
    pub sum: f64,
    pub valuation: u64,
    pub ok: bool,
}

impl ExtensionSpec {
    /// An extension over Q with G = G⁺ and no ramification data yet.
    pub fn over_q(family: Family, group: Group, log_disc: f64) -> Self {
        ExtensionSpec {
            family,
            embedding: SubgroupEmbedding::identity(group),
            ramified: Vec::new(),
            log_disc,
            log_disc_is_bound: false,
            disc_valuations: BTreeMap::new(),
            degree_k: 1,
            log_disc_k: 0.0,
            conductor_table: None,
            notes: Vec::new(),
        }
    }

    pub fn group_plus(&self) -> &Group {
        self.embedding.sup()
    }

    /// G = Gal(L/K).
    pub fn group(&self) -> &Group {
        self.embedding.sub()
    }

    pub fn embedding(&self) -> &SubgroupEmbedding {
        &self.embedding
    }

    /// [L:Q].
    pub fn degree_l(&self) -> u64 {
        self.group_plus().order()
    }

    /// log rd_L = log d_L/[L:Q].
    pub fn log_rd(&self) -> f64 {
        self.log_disc / self.degree_l() as f64
    }

    pub fn ramified_primes(&self) -> Vec<u64> {
        self.ramified.iter().map(|r| r.prime).collect()
    }

    pub fn is_ramified(&self, p: u64) -> bool {
        self.ramified.iter().any(|r| r.prime == p)
    }

    fn ramified_at(&self, prime: u64) -> Result<&RamifiedPrime> {
        self.ramified
            .iter()
            .find(|r| r.prime == prime)
            .ok_or_else(|| Error::Precondition(format!("{prime} is not ramified in {}", self.family)))
    }

    /// n(χ,p) = (1/|G₀|)Σ_i Σ_{a∈G_i}(χ(1) − χ(a)).
    pub fn conductor_exponent(&self, prime: u64, chi: usize) -> Result<f64> {
        let g = self.group_plus();
        if chi >= g.num_chars() {
            return invalid(format!("character index {chi} out of range"));
        }
        match &self.ramified_at(prime)?.ramification {
            Ramification::Exponents { values, .. } => values
                .get(chi)
                .copied()
                .ok_or_else(|| Error::MissingData(format!("no exponent for character {chi} at {prime}"))),
            Ramification::Filtration(sets) => {
                let Some(g0) = sets.first() else { return Ok(0.0) };
                let deg = g.degree(chi) as f64;
                let mut s = num_complex::Complex64::new(0.0, 0.0);
                for gi in sets {
                    for &a in gi {
                        s += deg - g.chi(chi, g.class_of(a));
                    }
                }
                let n = s / g0.len() as f64;
                let r = n.re.round();
                if (n.re - r).abs() > EXPONENT_TOL || n.im.abs() > EXPONENT_TOL {
                    return invariant(format!("non-integral conductor exponent {n} at {prime}"));
                }
                Ok(r)
            }
        }
    }

    /// (|G⁺|/|G₀|)·Σ_i(|G_i| − 1), the exponent of the regular character.
    pub fn regular_exponent(&self, prime: u64) -> Result<f64> {
        match &self.ramified_at(prime)?.ramification {
            Ramification::Filtration(sets) => {
                let Some(g0) = sets.first() else { return Ok(0.0) };
                let ratio = self.degree_l() as f64 / g0.len() as f64;
                Ok(ratio * sets.iter().map(|s| s.len() as f64 - 1.0).sum::<f64>())
            }
            Ramification::Exponents { .. } => self.character_exponent_sum(prime),
        }
    }

    fn character_exponent_sum(&self, prime: u64) -> Result<f64> {
        let g = self.group_plus();
        let mut s = 0.0;
        for x in 0..g.num_chars() {
            s += g.degree(x) as f64 * self.conductor_exponent(prime, x)?;
        }
        Ok(s)
    }

    /// log A(χ) = χ(1)·log d_K + Σ_p n(χ,p)·log p, with d_K = 1 for
    /// characters of G⁺.
    pub fn log_conductor(&self, chi: usize) -> Result<f64> {
        if let Some(t) = &self.conductor_table {
            return t
                .log_conductors
                .get(chi)
                .copied()
                .ok_or_else(|| Error::MissingData(format!("no conductor for character {chi}")));
        }
        let mut s = 0.0;
        for r in &self.ramified {
            s += self.conductor_exponent(r.prime, chi)? * (r.prime as f64).ln();
        }
        Ok(s)
    }

    pub fn log_conductors(&self) -> Result<Vec<f64>> {
        (0..self.group_plus().num_chars()).map(|x| self.log_conductor(x)).collect()
    }

    /// Whether conductors are exact (no approximate exponents, no estimates).
    pub fn conductors_exact(&self) -> bool {
        self.conductor_table.is_none() && !self.ramified.iter().any(RamifiedPrime::is_approximate)
    }

    /// Σ_χ χ(1)n(χ,p) against v_p(d_L) for every stored prime with a known valuation.
    pub fn conductor_discriminant_check(&self) -> Result<Vec<CondDiscRow>> {
        let mut rows = Vec::new();
        for r in &self.ramified {
            let Some(&v) = self.disc_valuations.get(&r.prime) else { continue };
            let sum = self.character_exponent_sum(r.prime)?;
            rows.push(CondDiscRow { prime: r.prime, sum, valuation: v, ok: (sum - v as f64).abs() < EXPONENT_TOL });
        }
        Ok(rows)
    }

    /// Per-character conductor CSV: character, degree, n(χ,p) per prime, logA.
    pub fn conductor_table_csv(&self) -> Result<String> {
        let g = self.group_plus();
        let mut s = String::from("character,degree");
        for r in &self.ramified {
            let _ = write!(s, ",n_{}", r.prime);
        }
        s.push_str(",logA\n");
        for x in 0..g.num_chars() {
            let _ = write!(s, "{},{}", g.char_labels()[x], g.degree(x));
            for r in &self.ramified {
                let _ = write!(s, ",{}", fmt_exponent(self.conductor_exponent(r.prime, x)?));
            }
            let _ = writeln!(s, ",{:.12}", self.log_conductor(x)?);
        }
        Ok(s)
    }

    /// Key-value text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "family {}", self.family.tag());
        for (k, v) in self.family.params() {
            let _ = writeln!(s, "param {k} {v}");
        }
        if let Family::Custom(_) = self.family {
            let _ = writeln!(s, "group {}", group_header(self.group_plus()));
        }
        let _ = writeln!(s, "degree_k {}", self.degree_k);
        let _ = writeln!(s, "logdisc {:.15}", self.log_disc);
        if self.log_disc_is_bound {
            let _ = writeln!(s, "logdisc_bound true");
        }
        for (p, v) in &self.disc_valuations {
            let _ = writeln!(s, "valuation {p} {v}");
        }
        for r in &self.ramified {
            let _ = writeln!(s, "prime {}", r.prime);
            match &r.ramification {
                Ramification::Filtration(sets) => {
                    for (i, set) in sets.iter().enumerate() {
                        let e: Vec<String> = set.iter().map(|x| x.to_string()).collect();
                        let _ = writeln!(s, "filtration {i} {}", e.join(" "));
                    }
                }
                Ramification::Exponents { values, approximate } => {
                    if *approximate {
                        let _ = writeln!(s, "approximate true");
                    }
                    for (x, v) in values.iter().enumerate() {
                        let _ = writeln!(s, "exponent {x} {}", fmt_exponent(*v));
                    }
                }
            }
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output. Known families are rebuilt
    /// from their parameters; stored ramification blocks and `logdisc`
    /// override the rebuilt values.
    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut tag = None;
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        let mut group_line = None;
        let mut log_disc = None;
        let mut bound = false;
        let mut degree_k = None;
        let mut vals = BTreeMap::new();
        let mut blocks: Vec<(u64, Vec<Vec<usize>>, BTreeMap<usize, f64>, bool)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let num = |s: &str| s.parse::<u64>().map_err(|_| perr(ln, format!("bad integer '{s}'")));
            match key {
                "family" => tag = Some(rest.to_string()),
                "param" => {
                    let (k, v) = rest.split_once(char::is_whitespace).ok_or_else(|| perr(ln, "param needs a value".into()))?;
                    params.insert(k.to_string(), v.trim().to_string());
                }
                "group" => group_line = Some(rest.to_string()),
                "degree_k" => degree_k = Some(num(rest)?),
                "logdisc" => log_disc = Some(rest.parse::<f64>().map_err(|_| perr(ln, "bad logdisc".into()))?),
                "logdisc_bound" => bound = rest == "true",
                "valuation" => {
                    let mut w = rest.split_whitespace();
                    let p = num(w.next().unwrap_or(""))?;
                    let v = num(w.next().unwrap_or(""))?;
                    vals.insert(p, v);
                }
                "prime" => blocks.push((num(rest)?, Vec::new(), BTreeMap::new(), false)),
                "filtration" | "exponent" | "approximate" => {
                    let b = blocks.last_mut().ok_or_else(|| perr(ln, format!("{key} before any prime")))?;
                    match key {
                        "filtration" => {
                            let mut w = rest.split_whitespace();
                            let idx = num(w.next().unwrap_or(""))? as usize;
                            if idx != b.1.len() {
                                return Err(perr(ln, "filtration steps out of order".into()));
                            }
                            b.1.push(w.map(|x| num(x).map(|v| v as usize)).collect::<Result<_>>()?);
                        }
                        "exponent" => {
                            let mut w = rest.split_whitespace();
                            let x = num(w.next().unwrap_or(""))? as usize;
                            let v: f64 = w
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or_else(|| perr(ln, "bad exponent".into()))?;
                            b.2.insert(x, v);
                        }
                        _ => b.3 = rest == "true",
                    }
                }
                other => return Err(perr(ln, format!("unknown key '{other}'"))),
            }
        }
        let tag = tag.ok_or_else(|| perr(0, "missing `family` line".into()))?;
        let get = |k: &str| params.get(k).cloned().ok_or_else(|| perr(0, format!("missing param {k}")));
        let int = |k: &str| -> Result<i64> { get(k)?.parse().map_err(|_| perr(0, format!("bad param {k}"))) };
        let list = |k: &str| -> Result<Vec<u64>> {
            let v = get(k)?;
            v.split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse().map_err(|_| perr(0, format!("bad list {k}"))))
                .collect()
        };
        let mut spec = match tag.as_str() {
            "radical" => radical_extension(int("a")? as u64, int("p")? as u64)?,
            "multiquadratic" => multiquadratic_extension(&list("primes")?)?,
            "hilbert" => hilbert_class_field(int("d")?, Some(list("structure")?))?,
            "kluners" => dihedral_kluners(int("ell")? as u64, int("d")?, int("p")? as u64, int("q")? as u64)?.spec,
            "cyclotomic" => cyclotomic_extension(int("q")? as u64)?,
            "quadratic" => quadratic_extension(int("d")?)?,
            "custom" => {
                let gl = group_line.ok_or_else(|| perr(0, "custom family needs a `group` line".into()))?;
                let group = build_group(&GroupSpec::parse(&format!("kind {gl}"))?)?;
                ExtensionSpec::over_q(Family::Custom(get("name")?), group, 0.0)
            }
            other => return Err(perr(0, format!("unknown family '{other}'"))),
        };
        if let Some(d) = log_disc {
            spec.log_disc = d;
        }
        spec.log_disc_is_bound |= bound;
        if let Some(k) = degree_k {
            spec.degree_k = k;
        }
        if !vals.is_empty() {
            spec.disc_valuations = vals;
        }
        if !blocks.is_empty() {
            let nchars = spec.group_plus().num_chars();
            let mut ram = Vec::new();
            for (p, filt, exps, approx) in blocks {
                if !filt.is_empty() {
                    ram.push(RamifiedPrime::filtration(spec.group_plus(), p, filt)?);
                } else {
                    let mut v = vec![0.0; nchars];
                    for (x, e) in exps {
                        *v.get_mut(x).ok_or_else(|| perr(0, format!("exponent for unknown character {x}")))? = e;
                    }
                    ram.push(RamifiedPrime::exponents(p, v, approx));
                }
            }
            spec.ramified = ram;
        }
        Ok(spec)
    }
}

fn fmt_exponent(v: f64) -> String {
    if (v - v.round()).abs() < 1e-12 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v}")
    }
}

fn group_header(g: &Group) -> String {
    use crate::group::GroupKind::*;
    let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    match g.kind() {
        Abelian(o) => format!("abelian {}", join(o)),
        Dihedral(n) => format!("dihedral {n}"),
        Affine(p) => format!("affine {p}"),
        Symmetric(n) => format!("symmetric {n}"),
        Units(q) => format!("units {q}"),
        Explicit(name) if name == "Q8" => "quaternion".into(),
        Explicit(name) => format!("explicit {name}"),
    }
}

// ---- arithmetic helpers ----

/// Kronecker symbol (d|p) for a prime p.
pub fn kronecker(d: i64, p: u64) -> i32 {
    if p == 2 {
        if d % 2 == 0 {
            return 0;
        }
        return if matches!(d.rem_euclid(8), 1 | 7) { 1 } else { -1 };
    }
    let r = d.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Discriminant of Q(√d) for squarefree d ≠ 1.
pub fn field_discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

fn valuation(mut n: u64, p: u64) -> u64 {
    let mut v = 0;
    while n % p == 0 && n > 0 {
        n /= p;
        v += 1;
    }
    v
}

// ---- family constructors ----

/// Splitting field of X^p − a over Q, Galois group affine(p).
pub fn radical_extension(a: u64, p: u64) -> Result<ExtensionSpec> {
    if a == p || a % 2 == 0 || p % 2 == 0 || !is_prime(a) || !is_prime(p) {
        return invalid(format!("radical(a={a}, p={p}) needs distinct odd primes"));
    }
    let p2 = (p as u128) * (p as u128);
    let wieferich = {
        let mut r: u128 = 1;
        let mut b = a as u128 % p2;
        let mut e = p - 1;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p2;
            }
            b = b * b % p2;
            e >>= 1;
        }
        r == 1
    };
    if wieferich {
        return invalid(format!("Wieferich condition: {a}^{} ≡ 1 mod {p}²", p - 1));
    }
    let group = build_group(&GroupSpec::Affine(p))?;
    let n = group.element_count().unwrap();
    let unipotent: Vec<usize> = (0..p as usize).collect();
    let all: Vec<usize> = (0..n).collect();
    let log_disc = (p * p - 2) as f64 * (p as f64).ln() + ((p - 1) * (p - 1)) as f64 * (a as f64).ln();
    let mut spec = ExtensionSpec::over_q(Family::Radical { a, p }, group.clone(), log_disc);
    spec.ramified = vec![
        RamifiedPrime::filtration(&group, p, vec![all, unipotent.clone()])?,
        RamifiedPrime::filtration(&group, a, vec![unipotent])?,
    ];
    spec.disc_valuations = BTreeMap::from([(p, p * p - 2), (a, (p - 1) * (p - 1))]);
    Ok(spec)
}

/// Q(√p₁, …, √p_m), Galois group (Z/2)^m.
///
/// Element and character indices are mixed-radix over the m coordinates,
/// first coordinate most significant; digit 1 at position j means √p_j is
/// negated (for elements) or χ(e_j) = −1 (for characters).
pub fn multiquadratic_extension(primes: &[u64]) -> Result<ExtensionSpec> {
    let m = primes.len();
    if m == 0 || m > 20 {
        return invalid("multiquadratic needs 1..=20 primes");
    }
    let distinct: BTreeSet<u64> = primes.iter().copied().collect();
    if distinct.len() != m || primes.iter().any(|&p| p % 2 == 0 || !is_prime(p)) {
        return invalid("multiquadratic needs distinct odd primes");
    }
    let group = build_group(&GroupSpec::Abelian(vec![2; m]))?;
    let size = 1usize << m;
    let e = |j: usize| 1usize << (m - 1 - j);
    let mut ramified = Vec::new();
    let mut vals = BTreeMap::new();
    for (j, &p) in primes.iter().enumerate() {
        ramified.push(RamifiedPrime::filtration(&group, p, vec![vec![0, e(j)]])?);
        vals.insert(p, (size / 2) as u64);
    }
    if primes.iter().any(|&p| p % 4 == 3) {
        // χ ↔ Q(√D), D = ∏_{χ(e_j)=−1} p_j; n(χ,2) = 2 iff D ≡ 3 mod 4.
        let exps: Vec<f64> = (0..size)
            .map(|x| {
                let d = (0..m).filter(|&j| x & e(j) != 0).fold(1u64, |acc, j| acc * (primes[j] % 4) % 4);
                if d == 3 {
                    2.0
                } else {
                    0.0
                }
            })
            .collect();
        ramified.push(RamifiedPrime::exponents(2, exps, false));
        vals.insert(2, size as u64);
    }
    let log_disc = vals.iter().map(|(&p, &v)| v as f64 * (p as f64).ln()).sum();
    let mut spec = ExtensionSpec::over_q(Family::Multiquadratic(primes.to_vec()), group, log_disc);
    spec.ramified = ramified;
    spec.disc_valuations = vals;
    Ok(spec)
}

/// Q(ζ_q), Galois group (Z/q)^×; conductors from the Dirichlet characters.
pub fn cyclotomic_extension(q: u64) -> Result<ExtensionSpec> {
    let group = build_group(&GroupSpec::Units(q))?;
    let res = group.unit_residues().unwrap();
    let divisors: Vec<u64> = (1..=q).filter(|f| q % f == 0).collect();
    let conductors: Vec<u64> = (0..group.num_chars())
        .map(|x| {
            *divisors
                .iter()
                .find(|&&f| {
                    res.iter()
                        .enumerate()
                        .filter(|(_, &a)| a % f == 1 % f)
                        .all(|(i, _)| (group.chi(x, group.class_of(i)) - 1.0).norm() < 1e-8)
                })
                .unwrap()
        })
        .collect();
    let mut ramified = Vec::new();
    let mut vals = BTreeMap::new();
    let mut log_disc = 0.0;
    for (p, _) in factorize(q) {
        let exps: Vec<f64> = conductors.iter().map(|&f| valuation(f, p) as f64).collect();
        let v: f64 = exps.iter().sum();
        if v > 0.0 {
            vals.insert(p, v as u64);
            log_disc += v * (p as f64).ln();
            ramified.push(RamifiedPrime::exponents(p, exps, false));
        }
    }
    let mut spec = ExtensionSpec::over_q(Family::Cyclotomic(q), group, log_disc);
    spec.ramified = ramified;
    spec.disc_valuations = vals;
    Ok(spec)
}

/// Q(√d) for a fundamental discriminant d.
pub fn quadratic_extension(d: i64) -> Result<ExtensionSpec> {
    if !is_fundamental_discriminant(d) {
        return invalid(format!("{d} is not a fundamental discriminant"));
    }
    let group = build_group(&GroupSpec::Cyclic(2))?;
    let mut spec = ExtensionSpec::over_q(Family::Quadratic(d), group, (d.unsigned_abs() as f64).ln());
    for (p, e) in factorize(d.unsigned_abs()) {
        spec.ramified.push(RamifiedPrime::exponents(p, vec![0.0, e as f64], false));
        spec.disc_valuations.insert(p, e as u64);
    }
    Ok(spec)
}

/// Hilbert class field of Q(√d): G⁺ = A ⋊ ⟨τ₀⟩ with A the class group and
/// τ₀ acting by inversion; G = A is Gal(K_d/Q(√d)).
pub fn hilbert_class_field(d: i64, structure: Option<Vec<u64>>) -> Result<ExtensionSpec> {
    if d.unsigned_abs() <= 1 || !is_fundamental_discriminant(d) {
        return invalid(format!("{d} is not a fundamental discriminant"));
    }
    let structure = match structure {
        Some(s) => s,
        None if d < 0 => class_group_imaginary(d)?,
        None => return Err(Error::MissingData(format!("class group of Q(√{d}) must be supplied"))),
    };
    let mut structure: Vec<u64> = structure.into_iter().filter(|&x| x > 1).collect();
    structure.sort_unstable();
    let h: u64 = structure.iter().product();
    let embedding = if structure.is_empty() {
        let sub = build_group(&GroupSpec::Cyclic(1))?;
        let sup = build_group(&GroupSpec::Cyclic(2))?;
        SubgroupEmbedding::new(sub, sup, vec![0])?
    } else {
        SubgroupEmbedding::abelian_in_generalized_dihedral(&structure)?
    };
    let sup = embedding.sup().clone();
    let ad = d.unsigned_abs();
    let log_ad = (ad as f64).ln();
    // Degree-2 characters and the quadratic character of Q(√d) have
    // conductor |d|; other degree-1 characters (even h) cut out genus
    // subfields with conductor dividing |d|.
    let mut approx = false;
    let a_elems: Vec<usize> = (0..h as usize).collect();
    let shape: Vec<u8> = (0..sup.num_chars())
        .map(|x| {
            if x == 0 {
                0
            } else if sup.degree(x) == 2 {
                2
            } else if a_elems.iter().all(|&g| (sup.chi(x, sup.class_of(g)) - 1.0).norm() < 1e-8) {
                1
            } else {
                approx = true;
                3
            }
        })
        .collect();
    let mut spec = ExtensionSpec::over_q(
        Family::HilbertClassField { d, structure: structure.clone() },
        sup.clone(),
        (sup.order() / 2) as f64 * log_ad,
    );
    spec.embedding = embedding;
    spec.degree_k = 2;
    spec.log_disc_k = log_ad;
    for (p, e) in factorize(ad) {
        let exps = shape.iter().map(|&s| if s == 0 { 0.0 } else { e as f64 }).collect();
        spec.ramified.push(RamifiedPrime::exponents(p, exps, approx));
        spec.disc_valuations.insert(p, (sup.order() / 2) * e as u64);
    }
    if approx {
        spec.notes.push("genus characters given conductor |d| (upper estimate)".into());
    }
    Ok(spec)
}

/// Class group of Q(√d), d < 0, as invariant factors d₁ | d₂ | ….
pub fn class_group_imaginary(d: i64) -> Result<Vec<u64>> {
    if d >= 0 || d < -10_000_000 || !is_fundamental_discriminant(d) {
        return invalid(format!("class_group_imaginary needs a fundamental d in [-10^7, 0), got {d}"));
    }
    let forms = reduced_forms(d);
    let h = forms.len();
    let index: BTreeMap<(i64, i64, i64), usize> = forms.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let id = reduce((1, d.rem_euclid(2), (d.rem_euclid(2) - d) / 4));
    let mul = |a: usize, b: usize| index[&reduce(compose(forms[a], forms[b]))];
    let pow = |mut x: usize, mut k: u64| {
        let mut r = index[&id];
        while k > 0 {
            if k & 1 == 1 {
                r = mul(r, x);
            }
            x = mul(x, x);
            k >>= 1;
        }
        r
    };
    let idx = index[&id];
    // Elementary divisors from #{x : x^{p^k} = 1} per prime p | h.
    let mut elementary: Vec<Vec<u64>> = Vec::new();
    for (p, e) in factorize(h as u64) {
        let mut ranks = vec![0u32];
        let mut k = 1u32;
        loop {
            let pk = p.pow(k);
            let cnt = (0..h).filter(|&x| pow(x, pk) == idx).count() as u64;
            let lg = cnt.ilog(p);
            ranks.push(lg);
            if lg == e {
                break;
            }
            k += 1;
        }
        // number of cyclic factors of order ≥ p^k is ranks[k] − ranks[k−1].
        let mut parts = Vec::new();
        for k in 1..ranks.len() {
            let ge_k = ranks[k] - ranks[k - 1];
            let ge_next = if k + 1 < ranks.len() { ranks[k + 1] - ranks[k] } else { 0 };
            for _ in 0..(ge_k - ge_next) {
                parts.push(p.pow(k as u32));
            }
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        elementary.push(parts);
    }
    let len = elementary.iter().map(Vec::len).max().unwrap_or(0);
    let mut inv = vec![1u64; len];
    for parts in &elementary {
        for (i, &q) in parts.iter().enumerate() {
            inv[i] *= q;
        }
    }
    inv.sort_unstable();
    if inv.iter().product::<u64>() != h as u64 {
        return invariant("class group structure inconsistent with h");
    }
    Ok(inv)
}

fn reduced_forms(d: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    let amax = ((-d as f64 / 3.0).sqrt()) as i64 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push((a, b, c));
        }
    }
    out
}

fn reduce((mut a, mut b, mut c): (i64, i64, i64)) -> (i64, i64, i64) {
    loop {
        if b > a || b <= -a {
            // normalize b into (−a, a]
            let a2 = 2 * a;
            let k = (a - b).div_euclid(a2);
            let nb = b + k * a2;
            c = (nb * nb - (b * b - 4 * a * c)) / (4 * a);
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return (a, b, c);
    }
}

/// Gauss composition of primitive forms of the same discriminant.
fn compose((a1, b1, c1): (i64, i64, i64), (a2, b2, c2): (i64, i64, i64)) -> (i64, i64, i64) {
    let disc = (b1 as i128) * (b1 as i128) - 4 * (a1 as i128) * (c1 as i128);
    let (a1, a2, b2, c2) = (a1 as i128, a2 as i128, b2 as i128, c2 as i128);
    let s = (b1 as i128 + b2) / 2;
    // d = gcd(a1, a2, s) = u·a1 + v·a2 + w·s
    let g1 = a1.extended_gcd(&a2);
    let g2 = g1.gcd.extended_gcd(&s);
    let d = g2.gcd;
    let (v, w) = (g2.x * g1.y, g2.y);
    let a3 = a1 * a2 / (d * d);
    let b3 = (b2 + 2 * a2 / d * (v * (s - b2) - w * c2)).rem_euclid(2 * a3);
    let c3 = (b3 * b3 - disc) / (4 * a3);
    (a3 as i64, b3 as i64, c3 as i64)
}

/// Dihedral D_ℓ extension from Klüners' construction; only a discriminant
/// bound is known.
#[derive(Clone, Debug)]
pub struct KlunersReport {
    pub spec: ExtensionSpec,
    pub log_disc_bound: f64,
}

pub fn dihedral_kluners(ell: u64, d: i64, p: u64, q: u64) -> Result<KlunersReport> {
    if ell < 7 || !is_prime(ell) {
        return invalid(format!("ℓ = {ell} must be a prime ≥ 7"));
    }
    if d == 0 || d == 1 || !is_squarefree(d.unsigned_abs()) {
        return invalid(format!("d = {d} must be squarefree and ≠ 0, 1"));
    }
    let delta = field_discriminant(d);
    for r in [p, q] {
        if !is_prime(r) || r % ell != 1 {
            return invalid(format!("{r} must be a prime ≡ 1 mod {ell}"));
        }
        if kronecker(delta, r) != 1 {
            return invalid(format!("{r} does not split in Q(√{d})"));
        }
    }
    let log_delta = (delta.unsigned_abs() as f64).ln();
    let log_pq = (p as f64).ln() + (q as f64).ln();
    let bound = ell as f64 * log_delta + 2.0 * (ell - 1) as f64 * log_pq;
    let group = build_group(&GroupSpec::Dihedral(ell))?;
    let table = (0..group.num_chars())
        .map(|x| match group.degree(x) {
            1 if x == 0 => 0.0,
            1 => log_delta,
            _ => log_delta + 2.0 * log_pq,
        })
        .collect();
    let mut spec = ExtensionSpec::over_q(Family::DihedralKluners { ell, d, p, q }, group, bound);
    spec.log_disc_is_bound = true;
    spec.conductor_table = Some(ConductorTable { log_conductors: table, upper_estimates: true });
    spec.notes.push("discriminant is an upper bound; conductors are upper estimates".into());
    Ok(KlunersReport { spec, log_disc_bound: bound })
}

// ---- bounds ----

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConductorBounds {
    pub coarse: (f64, f64),
    pub refined: (f64, f64),
    /// max of the lower bounds, min of the upper bounds.
    pub lower: f64,
    pub upper: f64,
    pub m_chi: f64,
    /// The coarse lower bound over Q assumes Artin holomorphy.
    pub conditional: bool,
}

/// M_χ = max_{g ≠ 1}|χ(g)|/χ(1).
pub fn m_chi(group: &Group, chi: usize) -> f64 {
    let deg = group.degree(chi) as f64;
    (0..group.num_classes())
        .filter(|&c| group.classes()[c].element_order != 1)
        .map(|c| group.chi(chi, c).norm() / deg)
        .fold(0.0, f64::max)
}

/// Bounds on log A(χ) for a character of G⁺ (over Q, so [K:Q] = 1).
/// `None` for the trivial character, whose conductor is 1.
pub fn conductor_bounds(spec: &ExtensionSpec, chi: usize) -> Option<ConductorBounds> {
    if chi == 0 {
        return None;
    }
    let g = spec.group_plus();
    let deg = g.degree(chi) as f64;
    let lrd = spec.log_rd();
    let m = m_chi(g, chi);
    let coarse = (deg, 2.0 * deg * lrd);
    let refined = ((1.0 - m) * deg * lrd, (1.0 + m) * deg * lrd);
    Some(ConductorBounds {
        coarse,
        refined,
        lower: coarse.0.max(refined.0),
        upper: coarse.1.min(refined.1),
        m_chi: m,
        conditional: true,
    })
}

/// Squarefree integers in [2, n].
pub fn squarefree_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&l| is_squarefree(l)).collect()
}

/// The three least-prime bound shapes, absolute constants set to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MurtyBounds {
    /// (log d_L)²/|C|.
    pub first: f64,
    /// λ-based bound with the ℓ-sum up to ⌈log log d_L⌉.
    pub second: f64,
    /// (log d_L)²/|C⁺| + (log d_L)^{4/3}|G|^{2/3}/|C|^{4/3}.
    pub g_plus: f64,
    /// λ(1_C)/1̂_C(1).
    pub lambda_ratio: f64,
    pub shape_only: bool,
}

/// Bounds for the least unramified prime with Frobenius in the class `c` of G.
pub fn murty_least_prime_bound(spec: &ExtensionSpec, c: usize) -> Result<MurtyBounds> {
    let g = spec.group();
    if c >= g.num_classes() {
        return invalid("class index out of range");
    }
    let t = ClassFunction::indicator(g.clone(), c);
    let second = murty_second_bound(spec, &t)?;
    let ld = spec.log_disc;
    let size = g.class_size(c) as f64;
    let cplus = spec.embedding().induce_conjugacy_class(c)?;
    let size_plus = spec.group_plus().class_size(cplus) as f64;
    let t1 = t.fourier_at(0).re;
    Ok(MurtyBounds {
        first: ld * ld / size,
        second,
        g_plus: ld * ld / size_plus + ld.powf(4.0 / 3.0) * (g.order() as f64).powf(2.0 / 3.0) / size.powf(4.0 / 3.0),
        lambda_ratio: t.norms().littlewood / t1,
        shape_only: true,
    })
}

/// (λ(t)/t̂(1)·log rd·[K:Q])² + Σ_ℓ (λ(t(·^ℓ))/t̂(1)·log rd·[K:Q])^{2ℓ/(2ℓ−1)}.
pub fn murty_second_bound(spec: &ExtensionSpec, t: &ClassFunction) -> Result<f64> {
    let t1 = t.fourier_at(0).re;
    if !(t1 > 0.0) {
        return invalid("t̂(1) must be positive");
    }
    let k = spec.degree_k as f64;
    let lrd = spec.log_rd();
    let mut s = (t.norms().littlewood / t1 * lrd * k).powi(2);
    let lmax = spec.log_disc.max(1.0).ln().max(0.0).ceil() as u64;
    for l in squarefree_up_to(lmax) {
        let lam = t.compose_power(l).norms().littlewood;
        s += (lam / t1 * lrd * k).powf(2.0 * l as f64 / (2.0 * l as f64 - 1.0));
    }
    Ok(s)
}

/// Shape of the Chebotarev error bound at x, constants set to 1.
pub fn chebotarev_error_bound(spec: &ExtensionSpec, t: &ClassFunction, x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return invalid("chebotarev_error_bound needs x >= 2");
    }
    let tp = spec.embedding().induce(t);
    let lx = x.ln();
    let lrx = spec.log_rd() + lx;
    let mut s = tp.norms().littlewood * x.sqrt() * lrx * lx;
    for l in squarefree_up_to((2.0 * lx).floor() as u64) {
        let rl = root_count(spec.group(), l);
        let lam = t.compose_power(l).norms().littlewood;
        s += x.powf(1.0 / l as f64) * t.inner(&rl).norm()
            + x.powf(0.5 / l as f64) * spec.degree_k as f64 * lam * lrx * lx;
    }
    Ok(s)
}

/// λ(1_C(·^ℓ))/1̂_C(1); ℓ = 1 gives the Bellaïche-type ratio.
pub fn bellaiche_ratio(group: &Group, c: usize, ell: u64) -> f64 {
    let t = ClassFunction::indicator(group.clone(), c);
    let t1 = group.class_size(c) as f64 / group.order() as f64;
    t.compose_power(ell).norms().littlewood / t1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_symbols() {
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn fundamental_discriminants() {
        for d in [-3, -4, -7, -8, 5, 8, 12, -23, -47] {
            assert!(is_fundamental_discriminant(d), "{d}");
        }
        for d in [-1, 1, 0, 4, -12 * 4, 9, -9] {
            assert!(!is_fundamental_discriminant(d), "{d}");
        }
    }

    #[test]
    fn composition_reduces_to_identity() {
        let f = (2, 1, 3);
        let id = reduce(compose(f, (2, -1, 3)));
        assert_eq!(id, (1, 1, 6));
    }

    #[test]
    fn cyclotomic_twelve_conductors() {
        let s = cyclotomic_extension(12).unwrap();
        let mut l: Vec<f64> = s.log_conductors().unwrap();
        l.sort_by(f64::total_cmp);
        let want = [0.0, 3f64.ln(), 4f64.ln(), 12f64.ln()];
        for (a, b) in l.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.conductor_discriminant_check().unwrap().iter().all(|r| r.ok));
    }
}
