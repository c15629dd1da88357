//! Zero sets of L-functions: file format, validation, synthesis and zero sums.
//!
//! Ordinates are the positive imaginary parts γ of zeros β + iγ; the zeros
//! with negative ordinate are their mirror images, so every sum over "all
//! zeros" counts each stored ordinate twice.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Ordinates closer than this are one zero with multiplicity.
pub const MERGE_TOL: f64 = 1e-9;
/// Default slack constant for the zero-count validation.
pub const DEFAULT_SLACK: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub label: String,
    ordinates: Vec<f64>,
    multiplicities: Vec<u32>,
    /// Truncation height T: every zero with 0 < γ ≤ T is present.
    pub height: f64,
    pub central_multiplicity: u32,
    pub assumed_beta: f64,
    pub log_conductor: Option<f64>,
    pub degree: Option<u32>,
    pub synthetic: bool,
    /// Header keys not interpreted above, e.g. `source`.
    pub extra: BTreeMap<String, String>,
}

/// Sums 1/(β²+γ²) over the zeros, with a truncation-tail shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BSums {
    /// All zeros, central ones included.
    pub b: f64,
    /// Noncentral zeros only.
    pub b0: f64,
    /// Squared denominators, all zeros.
    pub b2: f64,
    /// log(A(T+4)^deg)/T, constant 1.
    pub tail_estimate: f64,
    /// Set when the set holds no zeros at all.
    pub empty: bool,
}

/// Outcome of the Riemann–von Mangoldt count check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountCheck {
    pub height: f64,
    /// 2·#{0 < γ ≤ T} + central multiplicity.
    pub count: f64,
    pub mainterm: f64,
    pub deviation: f64,
    pub allowed: f64,
    pub ok: bool,
}

/// Synthesis modes for [`synthesize_zeros`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthesisMode {
    UnfoldedUniform,
}

impl ZeroSet {
    /// Builds a validated set, merging ordinates within [`MERGE_TOL`].
    pub fn new(label: &str, zeros: &[(f64, u32)], height: f64, central_multiplicity: u32) -> Result<Self> {
        let mut ords: Vec<f64> = Vec::with_capacity(zeros.len());
        let mut mults: Vec<u32> = Vec::with_capacity(zeros.len());
        for (i, &(g, m)) in zeros.iter().enumerate() {
            if !(g > 0.0) || !g.is_finite() {
                return invalid(format!("ordinate #{} = {g} must be positive", i + 1));
            }
            if m == 0 {
                return invalid(format!("ordinate #{} has multiplicity 0", i + 1));
            }
            if let Some(&last) = ords.last() {
                if (g - last).abs() <= MERGE_TOL {
                    *mults.last_mut().unwrap() += m;
                    continue;
                }
                if g < last {
                    return invalid(format!("ordinates not increasing at #{}", i + 1));
                }
            }
            ords.push(g);
            mults.push(m);
        }
        let top = ords.last().copied().unwrap_or(0.0);
        if height < top - MERGE_TOL {
            return invalid(format!("ordinate {top} above truncation height {height}"));
        }
        Ok(ZeroSet {
            label: label.to_string(),
            ordinates: ords,
            multiplicities: mults,
            height,
            central_multiplicity,
            assumed_beta: 0.5,
            log_conductor: None,
            degree: None,
            synthetic: false,
            extra: BTreeMap::new(),
        })
    }

    pub fn with_conductor(mut self, log_a: f64, degree: u32) -> Self {
        self.log_conductor = Some(log_a);
        self.degree = Some(degree);
        self
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.ordinates.iter().copied().zip(self.multiplicities.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// The first `k` ordinates, height lowered to just below the next one.
    pub fn truncate_count(&self, k: usize) -> ZeroSet {
        let mut z = self.clone();
        if k < self.len() {
            let below = if k == 0 { 0.0 } else { self.ordinates[k - 1] };
            z.height = 0.5 * (below + self.ordinates[k]);
            z.ordinates.truncate(k);
            z.multiplicities.truncate(k);
        }
        z
    }

    /// Ordinates with γ ≤ t.
    pub fn truncate_height(&self, t: f64) -> ZeroSet {
        let mut z = self.clone();
        let k = self.ordinates.partition_point(|&g| g <= t);
        z.ordinates.truncate(k);
        z.multiplicities.truncate(k);
        z.height = t.min(self.height);
        z
    }

    /// Number of zeros with 0 < γ ≤ t, with multiplicity.
    pub fn count_up_to(&self, t: f64) -> u64 {
        self.iter().take_while(|&(g, _)| g <= t).map(|(_, m)| m as u64).sum()
    }

    pub fn b_sums(&self) -> BSums {
        let b2sq = self.assumed_beta * self.assumed_beta;
        let mut b0 = 0.0;
        let mut b2 = 0.0;
        for (g, m) in self.iter() {
            let d = b2sq + g * g;
            b0 += 2.0 * m as f64 / d;
            b2 += 2.0 * m as f64 / (d * d);
        }
        let c = self.central_multiplicity as f64;
        let log_a = self.log_conductor.unwrap_or(0.0);
        let deg = self.degree.unwrap_or(1) as f64;
        let t = self.height.max(1.0);
        BSums {
            b: b0 + c / b2sq,
            b0,
            b2: b2 + c / (b2sq * b2sq),
            tail_estimate: (log_a + deg * (t + 4.0).ln()) / t,
            empty: self.is_empty() && self.central_multiplicity == 0,
        }
    }

    /// Riemann–von Mangoldt check at the file height.
    pub fn validate_count(&self, slack: f64) -> Result<CountCheck> {
        let (Some(log_a), Some(deg)) = (self.log_conductor, self.degree) else {
            return Err(Error::MissingData(format!("{}: logA/degree needed for count validation", self.label)));
        };
        Ok(count_check(self, log_a, deg, self.height, slack))
    }

    /// Text form: `# key: value` header, then `<gamma> <multiplicity>` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# label: {}", self.label);
        if let Some(a) = self.log_conductor {
            let _ = writeln!(s, "# logA: {a:.15}");
        }
        if let Some(d) = self.degree {
            let _ = writeln!(s, "# degree: {d}");
        }
        let _ = writeln!(s, "# height: {:.9}", self.height);
        let _ = writeln!(s, "# central_multiplicity: {}", self.central_multiplicity);
        if self.assumed_beta != 0.5 {
            let _ = writeln!(s, "# beta: {}", self.assumed_beta);
        }
        if self.synthetic {
            let _ = writeln!(s, "# synthetic: true");
        }
        for (k, v) in &self.extra {
            let _ = writeln!(s, "# {k}: {v}");
        }
        for (g, m) in self.iter() {
            let _ = writeln!(s, "{g:.9} {m}");
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_text().as_bytes())
    }
}

pub fn parse_zeros(text: &str, default_label: &str) -> Result<ZeroSet> {
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut zeros = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some((k, v)) = h.split_once(':') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let g: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse { line: lineno, msg: format!("bad ordinate in '{line}'") })?;
        let m: u32 = match it.next() {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad multiplicity in '{line}'") })?,
            None => 1,
        };
        if it.next().is_some() {
            return Err(Error::Parse { line: lineno, msg: "trailing fields".into() });
        }
        if !(g > 0.0) {
            return Err(Error::Parse { line: lineno, msg: format!("ordinate {g} must be positive") });
        }
        if let Some(&(last, _)) = zeros.last() {
            if g < last - MERGE_TOL {
                return Err(Error::Parse { line: lineno, msg: format!("ordinate {g} below previous {last}") });
            }
        }
        zeros.push((g, m));
    }
    let num = |k: &str| -> Result<Option<f64>> {
        header
            .get(k)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Parse { line: 0, msg: format!("header {k}: '{v}'") }))
            .transpose()
    };
    let label = header.get("label").cloned().unwrap_or_else(|| default_label.to_string());
    let top = zeros.last().map(|z| z.0).unwrap_or(0.0);
    let height = num("height")?.unwrap_or(top);
    let central = num("central_multiplicity")?.unwrap_or(0.0) as u32;
    let mut z = ZeroSet::new(&label, &zeros, height, central)?;
    z.log_conductor = num("logA")?;
    z.degree = num("degree")?.map(|d| d as u32);
    if let Some(b) = num("beta")? {
        z.assumed_beta = b;
    }
    z.synthetic = header.get("synthetic").is_some_and(|v| v == "true");
    for (k, v) in header {
        if !matches!(
            k.as_str(),
            "label" | "logA" | "degree" | "height" | "central_multiplicity" | "beta" | "synthetic"
        ) {
            z.extra.insert(k, v);
        }
    }
    Ok(z)
}

pub fn load_zeros(path: &Path) -> Result<ZeroSet> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::MissingData(format!("{}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("zeros");
    parse_zeros(&text, stem)
}

/// Main term (T/π)·log(A·(T/2πe)^deg) of the count of zeros with |γ| ≤ T.
pub fn zero_count_mainterm(log_a: f64, degree: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t / PI * (log_a + degree as f64 * (t / (2.0 * PI * E)).ln())
}

fn count_check(z: &ZeroSet, log_a: f64, degree: u32, t: f64, slack: f64) -> CountCheck {
    let count = 2.0 * z.count_up_to(t) as f64 + z.central_multiplicity as f64;
    let mainterm = zero_count_mainterm(log_a, degree, t);
    let deviation = (count - mainterm).abs();
    let allowed = slack * (log_a + degree as f64 * (t + 4.0).ln());
    CountCheck { height: t, count, mainterm, deviation, allowed, ok: deviation <= allowed }
}

/// Deterministic synthetic zeros following the smooth zero density.
pub fn synthesize_zeros(log_a: f64, degree: u32, t: f64, seed: u64, mode: SynthesisMode) -> Result<ZeroSet> {
    if !(t >= 1.0) || degree == 0 {
        return invalid("synthesis needs T >= 1 and degree >= 1");
    }
    let SynthesisMode::UnfoldedUniform = mode;
    let d = degree as f64;
    // Half the main term counts positive ordinates; it increases past t_min.
    let half = |x: f64| 0.5 * zero_count_mainterm(log_a, degree, x);
    let t_min = (2.0 * PI * (-log_a / d).exp()).max(1e-9);
    let floor = half(t_min).max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeros = Vec::new();
    let mut k = floor.floor() as u64 + 1;
    loop {
        let target = k as f64 - 0.5 + rng.random_range(-0.5..0.5);
        if target <= floor {
            k += 1;
            continue;
        }
        if half(t) < target {
            break;
        }
        let (mut lo, mut hi) = (t_min, t);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if half(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * hi {
                break;
            }
        }
        let g = 0.5 * (lo + hi);
        if g > 0.0 {
            zeros.push((g, 1));
        }
        k += 1;
    }
    let mut z = ZeroSet::new(&format!("synthetic(logA={log_a:.6},deg={degree},seed={seed})"), &zeros, t, 0)?;
    z.log_conductor = Some(log_a);
    z.degree = Some(degree);
    z.synthetic = true;
    Ok(z)
}

/// `<cache_dir>/<label>/<height>.zeros`.
pub fn cache_path(cache_dir: &Path, label: &str, height: f64) -> PathBuf {
    cache_dir.join(label).join(format!("{height:.3}.zeros"))
}

pub fn store_in_cache(cache_dir: &Path, z: &ZeroSet) -> Result<PathBuf> {
    let path = cache_path(cache_dir, &z.label, z.height);
    z.save(&path)?;
    Ok(path)
}

pub fn load_from_cache(cache_dir: &Path, label: &str, height: f64) -> Result<ZeroSet> {
    load_zeros(&cache_path(cache_dir, label, height))
}

/// Writes to a temporary sibling and renames into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Labels of the bundled zero files.
pub const BUNDLED: [&str; 4] = ["zeta", "dirichlet_3", "dirichlet_4", "dirichlet_5"];

/// Bundled zero data: ζ and the real primitive Dirichlet L-functions mod 3, 4, 5.
pub fn bundled(label: &str) -> Option<ZeroSet> {
    let text = match label {
        "zeta" => include_str!("../data/zeros/zeta.zeros"),
        "dirichlet_3" => include_str!("../data/zeros/dirichlet_3.zeros"),
        "dirichlet_4" => include_str!("../data/zeros/dirichlet_4.zeros"),
        "dirichlet_5" => include_str!("../data/zeros/dirichlet_5.zeros"),
        _ => return None,
    };
    parse_zeros(text, label).ok()
}

/// Provenance note shipped with the bundled data.
pub fn bundled_provenance() -> &'static str {
    include_str!("../data/zeros/PROVENANCE.md")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_duplicates() {
        let z = parse_zeros("21.0 1\n21.0 1\n", "x").unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.multiplicities(), &[2]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_zeros("# label: a\n14.1 1\nabc 1\n", "x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_zeros("14.1 1\n13.0 1\n", "x"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_zeros("-1.0 1\n", "x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_zeros("0 1\n", "x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn central_only_sums() {
        let z = ZeroSet::new("c", &[], 10.0, 2).unwrap();
        let b = z.b_sums();
        assert!((b.b - 8.0).abs() < 1e-15);
        assert_eq!(b.b0, 0.0);
    }

    #[test]
    fn mainterm_vanishes_at_zero_height() {
        assert_eq!(zero_count_mainterm(0.0, 1, 0.0), 0.0);
        assert!(zero_count_mainterm(0.0, 1, 1e-9).abs() < 1e-6);
    }
}
