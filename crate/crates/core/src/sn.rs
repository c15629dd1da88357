//! Partitions and symmetric-group combinatorics.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Largest `n` for which [`partitions`] materializes the full list.
pub const MAX_LISTED_N: usize = 60;

/// A partition of `n`, parts stored weakly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition from arbitrary positive parts (sorted internally).
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return invalid("partition must have at least one part");
        }
        if parts.iter().any(|&p| p == 0) {
            return invalid("partition parts must be positive");
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    /// Parses `3.2.1`, `3,2,1`, `3 2 1` or exponent shorthand like `2^2.1^2`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for tok in s.split(|c: char| c == '.' || c == ',' || c.is_whitespace()) {
            let tok = tok.trim_matches(|c| c == '(' || c == ')');
            if tok.is_empty() {
                continue;
            }
            let (base, rep) = match tok.split_once('^') {
                Some((b, e)) => (b, e),
                None => (tok, "1"),
            };
            let base: usize = base
                .parse()
                .map_err(|_| crate::Error::InvalidParameter(format!("bad partition '{s}'")))?;
            let rep: usize = rep
                .parse()
                .map_err(|_| crate::Error::InvalidParameter(format!("bad partition '{s}'")))?;
            parts.extend(std::iter::repeat_n(base, rep));
        }
        Partition::new(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows r(λ) of the Ferrers diagram.
    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Number of columns c(λ), the largest part.
    pub fn cols(&self) -> usize {
        self.parts[0]
    }

    pub fn conjugate(&self) -> Partition {
        let parts = (1..=self.cols())
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count())
            .collect();
        Partition { parts }
    }

    /// Multiplicity of each part size, indexed by size.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.cols() + 1];
        for &p in &self.parts {
            m[p] += 1;
        }
        m
    }

    /// Number of points moved by a permutation of this cycle type.
    pub fn support(&self) -> usize {
        self.n() - self.parts.iter().filter(|&&p| p == 1).count()
    }

    /// Order of a permutation of this cycle type.
    pub fn element_order(&self) -> u64 {
        self.parts.iter().fold(1u64, |acc, &p| acc.lcm(&(p as u64)))
    }

    /// Cycle type of σ^k for σ of this cycle type.
    pub fn power(&self, k: u64) -> Partition {
        let mut parts = Vec::with_capacity(self.n());
        for &p in &self.parts {
            let g = (p as u64).gcd(&k) as usize;
            parts.extend(std::iter::repeat_n(p / g, g));
        }
        Partition::new(parts).expect("powers of a partition are partitions")
    }

    /// Centralizer order z_λ = ∏ i^{m_i} m_i!.
    pub fn centralizer(&self) -> BigUint {
        let mut z = BigUint::one();
        for (i, &m) in self.multiplicities().iter().enumerate().skip(1) {
            for j in 1..=m {
                z *= BigUint::from(i) * BigUint::from(j);
            }
        }
        z
    }

    /// Size n!/z_λ of the conjugacy class with this cycle type.
    pub fn class_size(&self) -> BigUint {
        factorial(self.n()) / self.centralizer()
    }

    /// Hook lengths, row by row.
    pub fn hooks(&self) -> Vec<usize> {
        let conj = self.conjugate();
        let mut h = Vec::with_capacity(self.n());
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                h.push(row - j + conj.parts[j] - i - 1);
            }
        }
        h
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join("."))
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// All partitions of `n` in increasing lexicographic order of their parts.
pub fn partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 || n > MAX_LISTED_N {
        return invalid(format!("partitions(n) needs 1 <= n <= {MAX_LISTED_N}, got {n}"));
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fill(n, n, &mut cur, &mut out);
    Ok(out)
}

fn fill(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rem == 0 {
        out.push(Partition { parts: cur.clone() });
        return;
    }
    for k in 1..=rem.min(max) {
        cur.push(k);
        fill(rem - k, k, cur, out);
        cur.pop();
    }
}

/// p(n) by Euler's pentagonal-number recurrence.
pub fn partition_count(n: usize) -> BigUint {
    partition_counts(n).pop().unwrap()
}

/// p(0), …, p(n) by the pentagonal recurrence.
pub fn partition_counts(n: usize) -> Vec<BigUint> {
    // Signed accumulation done as (positive, negative) pairs to stay unsigned.
    let mut p: Vec<BigUint> = vec![BigUint::one()];
    for m in 1..=n {
        let mut pos = BigUint::zero();
        let mut neg = BigUint::zero();
        let mut k = 1usize;
        loop {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let plus = k % 2 == 1;
            let mut add = p[m - g1].clone();
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= m {
                add += &p[m - g2];
            }
            if plus {
                pos += add;
            } else {
                neg += add;
            }
            k += 1;
        }
        p.push(pos - neg);
    }
    p
}

/// f^λ = n!/∏ hooks.
pub fn hook_dimension(lambda: &Partition) -> BigUint {
    let prod = lambda
        .hooks()
        .into_iter()
        .fold(BigUint::one(), |acc, h| acc * BigUint::from(h));
    factorial(lambda.n()) / prod
}

/// Number of σ ∈ S_n with σ² = id.
pub fn involution_count(n: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::one(), BigUint::one());
    for k in 2..=n {
        let next = &b + BigUint::from(k - 1) * &a;
        a = b;
        b = next;
    }
    b
}

/// Hardy–Ramanujan leading term e^{π√(2n/3)}/(4n√3).
pub fn hardy_ramanujan(n: usize) -> f64 {
    let n = n as f64;
    (std::f64::consts::PI * (2.0 * n / 3.0).sqrt()).exp() / (4.0 * n * 3f64.sqrt())
}

/// Character value χ_λ(C_μ) by the Murnaghan–Nakayama rule.
pub fn mn_character(lambda: &Partition, mu: &Partition) -> Result<i64> {
    if lambda.n() != mu.n() {
        return invalid(format!("mn_character: |{lambda}| != |{mu}|"));
    }
    let mut cache = HashMap::new();
    Ok(mn_beta(&beta_set(lambda), mu.parts(), &mut cache))
}

/// Memoizing evaluator for whole character tables.
#[derive(Default)]
pub struct MnTable {
    cache: HashMap<(Vec<usize>, Vec<usize>), i64>,
}

impl MnTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&mut self, lambda: &Partition, mu: &Partition) -> i64 {
        assert_eq!(lambda.n(), mu.n());
        mn_beta(&beta_set(lambda), mu.parts(), &mut self.cache)
    }
}

fn beta_set(lambda: &Partition) -> Vec<usize> {
    let k = lambda.rows();
    let mut b: Vec<usize> = lambda
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &p)| p + k - 1 - i)
        .collect();
    b.sort_unstable();
    b
}

// Removing a rim hook of length m moves one bead from β to β−m; the sign counts
// the beads jumped over.
fn mn_beta(
    beta: &[usize],
    mu: &[usize],
    cache: &mut HashMap<(Vec<usize>, Vec<usize>), i64>,
) -> i64 {
    if mu.is_empty() {
        return 1;
    }
    let key = (beta.to_vec(), mu.to_vec());
    if let Some(&v) = cache.get(&key) {
        return v;
    }
    let m = mu[0];
    let rest = &mu[1..];
    let mut total = 0i64;
    for (idx, &b) in beta.iter().enumerate() {
        if b < m {
            continue;
        }
        let target = b - m;
        if beta.binary_search(&target).is_ok() {
            continue;
        }
        let jumped = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut next: Vec<usize> = beta.to_vec();
        next[idx] = target;
        next.sort_unstable();
        let sign = if jumped % 2 == 0 { 1 } else { -1 };
        total += sign * mn_beta(&next, rest, cache);
    }
    cache.insert(key, total);
    total
}

/// Roichman's shape (max(q, r/n, c/n))^{b·supp}.
pub fn roichman_bound(lambda: &Partition, support: usize, q: f64, b: f64) -> Result<f64> {
    let n = lambda.n();
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("roichman q must lie in (0,1), got {q}"));
    }
    if b.is_nan() || b <= 0.0 {
        return invalid(format!("roichman b must be positive, got {b}"));
    }
    if support > n {
        return invalid(format!("support {support} exceeds n = {n}"));
    }
    let base = q
        .max(lambda.rows() as f64 / n as f64)
        .max(lambda.cols() as f64 / n as f64);
    Ok(base.powf(b * support as f64))
}

/// Calibrated constants for [`roichman_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoichmanConstants {
    pub q: f64,
    pub b: f64,
}

impl RoichmanConstants {
    pub const DEFAULT_Q: f64 = 0.5;
    pub const CALIBRATION_NS: [usize; 3] = [5, 6, 7];

    /// Largest admissible b for the given q over the exhaustive tables of S_n,
    /// shrunk by 1% to keep the inequality strict.
    pub fn calibrate(q: f64, ns: &[usize]) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return invalid(format!("roichman q must lie in (0,1), got {q}"));
        }
        let mut b_max = f64::INFINITY;
        for &n in ns {
            for row in ratio_table(n)? {
                let base = q.max(row.rows as f64 / n as f64).max(row.cols as f64 / n as f64);
                if base >= 1.0 || row.ratio == 0.0 || row.support == 0 {
                    continue;
                }
                let cap = row.ratio.ln() / (row.support as f64 * base.ln());
                b_max = b_max.min(cap);
            }
        }
        if !b_max.is_finite() {
            b_max = 1.0;
        }
        Ok(RoichmanConstants { q, b: 0.99 * b_max })
    }

    pub fn default_calibrated() -> Self {
        Self::calibrate(Self::DEFAULT_Q, &Self::CALIBRATION_NS).expect("default calibration")
    }

    /// All (λ, μ) pairs where the bound fails.
    pub fn violations(&self, ns: &[usize]) -> Result<Vec<(Partition, Partition, f64, f64)>> {
        let mut bad = Vec::new();
        for &n in ns {
            for row in ratio_table(n)? {
                let bound = roichman_bound(&row.lambda, row.support, self.q, self.b)?;
                if row.ratio > bound + 1e-12 {
                    bad.push((row.lambda, row.mu, row.ratio, bound));
                }
            }
        }
        Ok(bad)
    }
}

struct RatioRow {
    lambda: Partition,
    mu: Partition,
    rows: usize,
    cols: usize,
    support: usize,
    ratio: f64,
}

fn ratio_table(n: usize) -> Result<Vec<RatioRow>> {
    if n <= 4 {
        return invalid("roichman bound needs n > 4");
    }
    let parts = partitions(n)?;
    let mut mn = MnTable::new();
    let mut out = Vec::new();
    for lambda in &parts {
        let f = hook_dimension(lambda).to_f64().unwrap();
        for mu in &parts {
            let v = mn.value(lambda, mu);
            out.push(RatioRow {
                lambda: lambda.clone(),
                mu: mu.clone(),
                rows: lambda.rows(),
                cols: lambda.cols(),
                support: mu.support(),
                ratio: (v.abs() as f64) / f,
            });
        }
    }
    Ok(out)
}

/// Upper bound n·n!^{1−(r+c)/n}·e^{2n/e} for f^λ.
pub fn row_col_dimension_bound(lambda: &Partition) -> f64 {
    ln_row_col_dimension_bound(lambda).exp()
}

/// Natural log of [`row_col_dimension_bound`], usable beyond f64 range.
pub fn ln_row_col_dimension_bound(lambda: &Partition) -> f64 {
    let n = lambda.n() as f64;
    let ln_fact = ln_factorial(lambda.n());
    let e = std::f64::consts::E;
    n.ln() + (1.0 - (lambda.rows() + lambda.cols()) as f64 / n) * ln_fact + 2.0 * n / e
}

/// Intermediate bound n·n!/(r!·c!) from the first row and column hooks.
pub fn row_col_intermediate_bound(lambda: &Partition) -> BigUint {
    BigUint::from(lambda.n()) * factorial(lambda.n())
        / (factorial(lambda.rows()) * factorial(lambda.cols()))
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        Partition::parse(s).unwrap()
    }

    #[test]
    fn hooks_of_staircase() {
        let mut h = p("3.2.1").hooks();
        h.sort();
        assert_eq!(h, vec![1, 1, 1, 3, 3, 5]);
        assert_eq!(hook_dimension(&p("3.2.1")), BigUint::from(16u32));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(p("2^2.1^2"), p("2,2,1,1"));
        assert_eq!(p("(1 2 2 1)").parts(), &[2, 2, 1, 1]);
        assert!(Partition::parse("0").is_err());
        assert!(Partition::parse("").is_err());
    }

    #[test]
    fn power_of_cycle_type() {
        assert_eq!(p("6").power(2), p("3.3"));
        assert_eq!(p("6").power(3), p("2.2.2"));
        assert_eq!(p("4.2").power(2), p("2.2.1.1"));
        assert_eq!(p("5").power(5), p("1^5"));
    }

    #[test]
    fn class_sizes_s6() {
        let sizes: Vec<u64> = partitions(6)
            .unwrap()
            .iter()
            .map(|l| l.class_size().to_u64().unwrap())
            .collect();
        assert_eq!(sizes, vec![1, 15, 45, 15, 40, 120, 40, 90, 90, 144, 120]);
    }

    #[test]
    fn mn_trivial_and_sign() {
        for mu in partitions(5).unwrap() {
            assert_eq!(mn_character(&p("5"), &mu).unwrap(), 1);
            let sign = if (mu.n() - mu.rows()) % 2 == 0 { 1 } else { -1 };
            assert_eq!(mn_character(&p("1^5"), &mu).unwrap(), sign);
        }
        assert!(mn_character(&p("3"), &p("2.1.1")).is_err());
    }

    #[test]
    fn intermediate_bound_example() {
        assert_eq!(row_col_intermediate_bound(&p("3.2.1")), BigUint::from(120u32));
    }

    #[test]
    fn roichman_edge_cases() {
        assert_eq!(roichman_bound(&p("4.1"), 0, 0.5, 1.0).unwrap(), 1.0);
        let v = roichman_bound(&p("5.1"), 2, 0.5, 0.7).unwrap();
        assert!((v - (5.0f64 / 6.0).powf(1.4)).abs() < 1e-15);
        assert!(roichman_bound(&p("5.1"), 2, 1.5, 0.7).is_err());
        assert!(roichman_bound(&p("5.1"), 2, 0.5, 0.0).is_err());
        assert!(roichman_bound(&p("5.1"), 7, 0.5, 1.0).is_err());
    }
}
