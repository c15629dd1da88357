//! Empirical races: a segmented sieve, Frobenius classes for the supported
//! families, E(y), logarithmic densities, the explicit formula and least
//! primes.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::catalog::{field_discriminant, kronecker, ExtensionSpec, Family};
use crate::classfn::ClassFunction;
use crate::error::{invalid, Error, Result};
use crate::group::{is_prime, pow_mod, Group};
use crate::special::li2;
use crate::zeros::ZeroSet;

/// Largest supported sieve bound.
pub const X_MAX_LIMIT: u64 = 1_000_000_000;
/// Default checkpoint count and start for race series.
pub const DEFAULT_CHECKPOINTS: usize = 1000;
pub const DEFAULT_CHECKPOINT_START: f64 = 1e3;
/// Odd numbers per sieve block.
pub const BLOCK_ODDS: u64 = 1 << 22;

/// Odd primes up to `n` by the plain sieve of Eratosthenes.
fn small_odd_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 3;
    while i <= n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    out
}

/// Odd primes in block `b`, i.e. among the odd n in [2·b·BLOCK_ODDS + 1, …] up to `x`.
fn block_primes(b: u64, x: u64, base: &[u64]) -> Vec<u64> {
    let lo = 2 * b * BLOCK_ODDS + 1;
    if lo > x {
        return Vec::new();
    }
    let count = BLOCK_ODDS.min((x - lo) / 2 + 1) as usize;
    let mut bits = vec![u64::MAX; count.div_ceil(64)];
    for &q in base {
        if q * q > lo + 2 * (count as u64 - 1) {
            break;
        }
        let mut start = (q * q).max(lo.div_ceil(q) * q);
        if start % 2 == 0 {
            start += q;
        }
        let mut i = ((start - lo) / 2) as usize;
        while i < count {
            bits[i >> 6] &= !(1u64 << (i & 63));
            i += q as usize;
        }
    }
    if b == 0 {
        bits[0] &= !1; // 1 is not prime
    }
    let mut out = Vec::new();
    for (w, &word) in bits.iter().enumerate() {
        let mut v = word;
        while v != 0 {
            let i = w * 64 + v.trailing_zeros() as usize;
            if i >= count {
                break;
            }
            out.push(lo + 2 * i as u64);
            v &= v - 1;
        }
    }
    out
}

fn sieve_base(x: u64) -> Vec<u64> {
    small_odd_primes(((x as f64).sqrt() as u64 + 2).max(3))
}

/// All primes up to `x`.
pub fn primes_up_to(x: u64) -> Result<Vec<u64>> {
    if x > X_MAX_LIMIT {
        return invalid(format!("sieve bound {x} exceeds {X_MAX_LIMIT}"));
    }
    if x < 2 {
        return Ok(Vec::new());
    }
    let base = sieve_base(x);
    let blocks = (x - 1) / (2 * BLOCK_ODDS) + 1;
    let mut out = vec![2];
    let parts: Vec<Vec<u64>> = (0..blocks).into_par_iter().map(|b| block_primes(b, x, &base)).collect();
    for p in parts {
        out.extend(p);
    }
    Ok(out)
}

/// Frobenius classes of unramified primes for a supported family.
#[derive(Clone, Debug)]
pub struct Classifier {
    spec: ExtensionSpec,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Cyclotomic { q: u64, class_of_residue: Vec<Option<usize>> },
    Multiquadratic { discs: Vec<i64> },
    Radical { a: u64, p: u64, id: usize, u: usize, t: Vec<usize> },
    Quadratic { d: i64, nontrivial: usize },
}

impl Classifier {
    pub fn new(spec: &ExtensionSpec) -> Result<Self> {
        let g = spec.group();
        if !std::sync::Arc::ptr_eq(g, spec.group_plus()) {
            return invalid("empirical races need an extension over Q");
        }
        let kind = match &spec.family {
            Family::Cyclotomic(q) => {
                let mut table = vec![None; *q as usize];
                for (i, r) in g.unit_residues().unwrap_or_default().iter().enumerate() {
                    table[*r as usize] = Some(g.class_of(i));
                }
                Kind::Cyclotomic { q: *q, class_of_residue: table }
            }
            Family::Multiquadratic(ps) => {
                Kind::Multiquadratic { discs: ps.iter().map(|&p| field_discriminant(p as i64)).collect() }
            }
            Family::Radical { a, p } => {
                let idx = |l: &str| g.class_index(l).ok_or_else(|| Error::Invariant(format!("missing class {l}")));
                let mut t = vec![usize::MAX; *p as usize];
                for (c, slot) in t.iter_mut().enumerate().skip(2) {
                    *slot = idx(&format!("T{c}"))?;
                }
                Kind::Radical { a: *a, p: *p, id: idx("id")?, u: idx("U")?, t }
            }
            Family::Quadratic(d) => Kind::Quadratic { d: *d, nontrivial: (g.class_of(1)) },
            other => return invalid(format!("no Frobenius classification for family {}", other.tag())),
        };
        Ok(Classifier { spec: spec.clone(), kind })
    }

    pub fn spec(&self) -> &ExtensionSpec {
        &self.spec
    }

    pub fn group(&self) -> &Group {
        self.spec.group()
    }

    pub fn num_classes(&self) -> usize {
        self.spec.group().num_classes()
    }

    /// Class index of Frob_p, or `None` when p ramifies.
    pub fn classify(&self, p: u64) -> Option<usize> {
        if self.spec.is_ramified(p) {
            return None;
        }
        Some(match &self.kind {
            Kind::Cyclotomic { q, class_of_residue } => class_of_residue[(p % q) as usize]?,
            Kind::Multiquadratic { discs } => {
                let m = discs.len();
                discs
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| kronecker(d, p) == -1)
                    .map(|(j, _)| 1usize << (m - 1 - j))
                    .sum()
            }
            Kind::Radical { a, p: pp, id, u, t } => {
                let c = p % pp;
                if c != 1 {
                    t[c as usize]
                } else if pow_mod(a % p, (p - 1) / pp, p) == 1 {
                    *id
                } else {
                    *u
                }
            }
            Kind::Quadratic { d, nontrivial } => {
                if kronecker(*d, p) == 1 {
                    0
                } else {
                    *nontrivial
                }
            }
        })
    }
}

/// Per-class prime counts at checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassCounts {
    pub x_max: u64,
    pub checkpoints: Vec<f64>,
    /// counts[k][c] = #{p ≤ checkpoints[k] unramified : Frob_p ∈ C_c}.
    pub counts: Vec<Vec<u64>>,
    /// π(checkpoints[k]).
    pub pi: Vec<u64>,
    /// Ramified primes up to x_max.
    pub ramified: Vec<u64>,
    /// Least prime per class, if any below x_max.
    pub least: Vec<Option<u64>>,
}

struct BlockTally {
    /// Local counts at each checkpoint inside the block.
    snapshots: Vec<(usize, Vec<u64>, u64)>,
    totals: Vec<u64>,
    primes: u64,
    ramified: Vec<u64>,
    least: Vec<Option<u64>>,
}

/// Log-uniform checkpoints from `lo` to `hi` inclusive.
pub fn log_checkpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// Sieves to `x_max`, classifies every prime and tallies the classes at the
/// checkpoints. Blocks run in parallel and are merged in order.
pub fn sieve_classify(cl: &Classifier, x_max: u64, checkpoints: &[f64]) -> Result<ClassCounts> {
    if x_max > X_MAX_LIMIT {
        return invalid(format!("x_max {x_max} exceeds {X_MAX_LIMIT}"));
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return invalid("checkpoints must be sorted");
    }
    if checkpoints.last().is_some_and(|&c| c > x_max as f64) {
        return invalid("checkpoint beyond x_max");
    }
    let k = cl.num_classes();
    let cps: Vec<u64> = checkpoints.iter().map(|&c| c.max(0.0).floor() as u64).collect();
    let base = sieve_base(x_max.max(4));
    let blocks = if x_max < 3 { 0 } else { (x_max - 1) / (2 * BLOCK_ODDS) + 1 };
    let tally = |primes: &[u64], lo: u64, hi: u64| -> BlockTally {
        let mut t = BlockTally { snapshots: Vec::new(), totals: vec![0; k], primes: 0, ramified: Vec::new(), least: vec![None; k] };
        let mut ci = cps.partition_point(|&c| c < lo);
        for &p in primes {
            while ci < cps.len() && cps[ci] < p && cps[ci] <= hi {
                t.snapshots.push((ci, t.totals.clone(), t.primes));
                ci += 1;
            }
            t.primes += 1;
            match cl.classify(p) {
                Some(c) => {
                    t.totals[c] += 1;
                    t.least[c].get_or_insert(p);
                }
                None => t.ramified.push(p),
            }
        }
        while ci < cps.len() && cps[ci] <= hi {
            t.snapshots.push((ci, t.totals.clone(), t.primes));
            ci += 1;
        }
        t
    };
    // Block "−1" holds the prime 2 and everything below 3.
    let first = tally(if x_max >= 2 { &[2] } else { &[] }, 0, 2);
    let rest: Vec<BlockTally> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = 2 * b * BLOCK_ODDS + 1;
            let hi = (lo + 2 * BLOCK_ODDS - 1).min(x_max);
            tally(&block_primes(b, x_max, &base), lo.max(3), hi)
        })
        .collect();
    let mut counts = vec![Vec::new(); cps.len()];
    let mut pi = vec![0; cps.len()];
    let mut acc = vec![0u64; k];
    let mut acc_pi = 0;
    let mut ramified = Vec::new();
    let mut least = vec![None; k];
    for t in std::iter::once(first).chain(rest) {
        for (ci, local, lp) in t.snapshots {
            counts[ci] = acc.iter().zip(&local).map(|(a, b)| a + b).collect();
            pi[ci] = acc_pi + lp;
        }
        for (a, b) in acc.iter_mut().zip(&t.totals) {
            *a += b;
        }
        acc_pi += t.primes;
        ramified.extend(t.ramified);
        for (l, m) in least.iter_mut().zip(t.least) {
            if l.is_none() {
                *l = m;
            }
        }
    }
    for (ci, c) in counts.iter_mut().enumerate() {
        if c.is_empty() {
            *c = vec![0; k];
            pi[ci] = 0;
        }
    }
    Ok(ClassCounts { x_max, checkpoints: checkpoints.to_vec(), counts, pi, ramified, least })
}

/// E(y; L/K, t) along the checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct RaceSeries {
    pub family: String,
    pub checkpoints: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
    /// y = log x.
    pub y: Vec<f64>,
    pub e_values: Vec<f64>,
    pub beta: f64,
}

/// E(y) = y·e^{−βy}(π(e^y; t) − t̂(1)·Li(e^y)), ramified primes excluded.
pub fn race_series(counts: &ClassCounts, family: &str, t: &ClassFunction, beta: f64) -> Result<RaceSeries> {
    if counts.checkpoints.len() < 2 {
        return invalid("race_series needs at least 2 checkpoints");
    }
    if !t.is_real(1e-12) {
        return invalid("the race function t must be real-valued");
    }
    if counts.counts.first().is_some_and(|c| c.len() != t.group().num_classes()) {
        return invalid("class function lives on another group");
    }
    let tv = t.real_values();
    let t1 = t.fourier_at(0).re;
    let mut y = Vec::with_capacity(counts.checkpoints.len());
    let mut e = Vec::with_capacity(counts.checkpoints.len());
    for (x, c) in counts.checkpoints.iter().zip(&counts.counts) {
        let pi_t: f64 = c.iter().zip(&tv).map(|(&n, &v)| n as f64 * v).sum();
        let yy = x.ln();
        let main = if t1 == 0.0 { 0.0 } else { t1 * li2(*x) };
        y.push(yy);
        e.push(yy * (-beta * yy).exp() * (pi_t - main));
    }
    Ok(RaceSeries {
        family: family.to_string(),
        checkpoints: counts.checkpoints.clone(),
        counts: counts.counts.clone(),
        y,
        e_values: e,
        beta,
    })
}

/// Running logarithmic density of {E > 0} with its band over the last decade.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDensity {
    pub value: f64,
    pub band_min: f64,
    pub band_max: f64,
    /// Running density at every checkpoint (0 at the first).
    pub running: Vec<f64>,
}

/// meas{y ∈ [y₀, Y] : E(y) > 0}/(Y − y₀), E linearly interpolated between
/// checkpoints.
pub fn empirical_density(series: &RaceSeries) -> Result<EmpiricalDensity> {
    let n = series.y.len();
    if n < 100 {
        return Err(Error::Precondition(format!("empirical density needs >= 100 checkpoints, got {n}")));
    }
    let (y, e) = (&series.y, &series.e_values);
    let mut pos = 0.0;
    let mut running = vec![0.0; n];
    for i in 1..n {
        let h = y[i] - y[i - 1];
        let (a, b) = (e[i - 1], e[i]);
        pos += if a > 0.0 && b > 0.0 {
            h
        } else if a <= 0.0 && b <= 0.0 {
            0.0
        } else if a > 0.0 {
            h * a / (a - b)
        } else {
            h * b / (b - a)
        };
        let span = y[i] - y[0];
        running[i] = if span > 0.0 { pos / span } else { 0.0 };
    }
    let y_last = y[n - 1];
    let decade: Vec<f64> = (1..n).filter(|&i| y[i] >= y_last - std::f64::consts::LN_10).map(|i| running[i]).collect();
    Ok(EmpiricalDensity {
        value: running[n - 1],
        band_min: decade.iter().cloned().fold(f64::INFINITY, f64::min),
        band_max: decade.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        running,
    })
}

/// Residual of the truncated explicit formula on an x grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitFormulaReport {
    /// Truncation height X.
    pub height: f64,
    /// (x, ψ(x), formula, residual, shape).
    pub rows: Vec<(f64, f64, f64, f64, f64)>,
    pub max_residual: f64,
    /// max residual/shape with shape = log x + (x/X)·log²(xX).
    pub constant: f64,
}

/// Compares ψ(x; χ) = Σ_{p^k ≤ x, p unramified} χ(Frob_p^k)·log p against
/// δ_{χ=1}·x − Σ_{|γ| ≤ X} x^ρ/ρ, pairing ±γ into real terms. With no
/// classifier, χ is the trivial character of Q and ψ is Chebyshev's.
pub fn explicit_formula_check(
    cl: Option<&Classifier>,
    chi: usize,
    zeros: &ZeroSet,
    xs: &[f64],
) -> Result<ExplicitFormulaReport> {
    if zeros.height < 10.0 {
        return Err(Error::MissingData(format!("{}: zeros needed up to height >= 10", zeros.label)));
    }
    if !zeros.is_empty() && zeros.assumed_beta != 0.5 {
        return invalid("explicit formula check expects zeros on the critical line");
    }
    let x_max = xs.iter().cloned().fold(0.0, f64::max).max(2.0) as u64;
    let primes = primes_up_to(x_max)?;
    let value = |p: u64, k: u64| -> f64 {
        match cl {
            None => 1.0,
            Some(cl) => match cl.classify(p) {
                None => 0.0,
                Some(c) => {
                    let g = cl.group();
                    g.chi(chi, g.power_class(c, k)).re
                }
            },
        }
    };
    // Prime powers with their weights, sorted.
    let mut events: Vec<(u64, f64)> = Vec::with_capacity(primes.len() + 64);
    for &p in &primes {
        let lp = (p as f64).ln();
        let mut pk = p;
        let mut k = 1;
        loop {
            events.push((pk, value(p, k) * lp));
            match pk.checked_mul(p) {
                Some(n) if n <= x_max => pk = n,
                _ => break,
            }
            k += 1;
        }
    }
    events.sort_by_key(|e| e.0);
    let trivial = chi == 0;
    let height = zeros.height;
    let mut rows = Vec::with_capacity(xs.len());
    let mut idx = 0;
    let mut psi = 0.0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut by_x = vec![(0.0, 0.0, 0.0, 0.0, 0.0); xs.len()];
    for &i in &order {
        let x = xs[i];
        while idx < events.len() && (events[idx].0 as f64) <= x {
            psi += events[idx].1;
            idx += 1;
        }
        let lx = x.ln();
        let mut formula = if trivial { x } else { 0.0 };
        if x >= 2.0 {
            let sx = x.sqrt();
            for (g, m) in zeros.iter() {
                let (s, c) = (g * lx).sin_cos();
                formula -= m as f64 * 2.0 * sx * (0.5 * c + g * s) / (0.25 + g * g);
            }
            formula -= zeros.central_multiplicity as f64 * 2.0 * sx;
        } else {
            formula = 0.0;
        }
        let residual = (psi - formula).abs();
        let shape = lx.max(1.0) + x / height * (x * height).ln().powi(2);
        by_x[i] = (x, psi, formula, residual, shape);
    }
    rows.extend(by_x);
    let max_residual = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let constant = rows.iter().map(|r| r.3 / r.4).fold(0.0, f64::max);
    Ok(ExplicitFormulaReport { height, rows, max_residual, constant })
}

/// Smallest unramified prime with Frobenius in class `c`, searched block by
/// block up to `limit`.
pub fn least_prime_search(cl: &Classifier, c: usize, limit: u64) -> Result<u64> {
    if c >= cl.num_classes() {
        return invalid("class index out of range");
    }
    let limit = limit.min(X_MAX_LIMIT);
    if limit >= 2 && cl.classify(2) == Some(c) {
        return Ok(2);
    }
    let base = sieve_base(limit.max(4));
    let blocks = if limit < 3 { 0 } else { (limit - 1) / (2 * BLOCK_ODDS) + 1 };
    for b in 0..blocks {
        if let Some(p) = block_primes(b, limit, &base).into_iter().find(|&p| cl.classify(p) == Some(c)) {
            return Ok(p);
        }
    }
    Err(Error::MissingData(format!(
        "no unramified prime below {limit} with Frobenius in class {}",
        cl.group().classes()[c].label
    )))
}

/// Least primes for every class, in one pass.
pub fn least_primes(cl: &Classifier, limit: u64) -> Result<BTreeMap<usize, u64>> {
    let mut out = BTreeMap::new();
    let k = cl.num_classes();
    let limit = limit.min(X_MAX_LIMIT);
    if limit >= 2 {
        if let Some(c) = cl.classify(2) {
            out.insert(c, 2);
        }
    }
    let base = sieve_base(limit.max(4));
    let blocks = if limit < 3 { 0 } else { (limit - 1) / (2 * BLOCK_ODDS) + 1 };
    for b in 0..blocks {
        if out.len() == k {
            break;
        }
        for p in block_primes(b, limit, &base) {
            if let Some(c) = cl.classify(p) {
                out.entry(c).or_insert(p);
            }
        }
    }
    Ok(out)
}

/// Second p-th-power test for the radical family: a is a p-th power mod ℓ
/// iff gcd(X^p − a, X^ℓ − X) over F_ℓ has degree p.
pub fn pth_power_roots(a: u64, p: u64, l: u64) -> usize {
    debug_assert!(is_prime(l));
    let p = p as usize;
    let modu = |x: u128| (x % l as u128) as u64;
    // Multiply modulo X^p − a: X^p ≡ a.
    let mul = |u: &[u64], v: &[u64]| -> Vec<u64> {
        let mut w = vec![0u128; 2 * p];
        for (i, &x) in u.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in v.iter().enumerate() {
                w[i + j] = (w[i + j] + x as u128 * y as u128) % l as u128;
            }
        }
        let mut r = vec![0u64; p];
        for i in (0..2 * p).rev() {
            if i >= p {
                w[i - p] = (w[i - p] + w[i] * (a % l) as u128) % l as u128;
            } else {
                r[i] = modu(w[i]);
            }
        }
        r
    };
    // X^ℓ mod (X^p − a).
    let mut base = vec![0u64; p];
    if p == 1 {
        base[0] = a % l;
    } else {
        base[1] = 1;
    }
    let mut acc = vec![0u64; p];
    acc[0] = 1;
    let mut e = l;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    // h = X^ℓ − X mod (X^p − a), then gcd with f = X^p − a.
    if p > 1 {
        acc[1] = (acc[1] + l - 1) % l;
    } else {
        acc[0] = (acc[0] + l - a % l) % l;
    }
    let mut f: Vec<u64> = vec![0; p + 1];
    f[0] = (l - a % l) % l;
    f[p] = 1;
    let mut g = acc;
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut f);
    trim(&mut g);
    while !g.is_empty() {
        // f mod g
        let inv = pow_mod(*g.last().unwrap(), l - 2, l);
        while f.len() >= g.len() {
            let coef = modu(*f.last().unwrap() as u128 * inv as u128);
            let shift = f.len() - g.len();
            for (i, &gi) in g.iter().enumerate() {
                f[shift + i] = (f[shift + i] + l - modu(coef as u128 * gi as u128)) % l;
            }
            trim(&mut f);
            if f.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut f, &mut g);
    }
    f.len().saturating_sub(1)
}
