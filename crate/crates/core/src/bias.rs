//! The limiting random variable X(L/K;t): assembly, moments, characteristic
//! function, the density δ = P[X > 0] by inversion, Monte Carlo and the
//! Gaussian approximation, and the probabilistic bounds.
//!
//! X = mean + Σ_i a_i·cos θ_i with independent uniform phases, one term per
//! positive ordinate γ of each L(s, χ), χ ∈ supp(t̂⁺), and amplitude
//! a = 2|o|/|ρ| where o = conj(t̂⁺(χ))·m is the order carried by the zero.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::OnceLock;

use num_traits::Zero;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::{m_chi, ExtensionSpec, Family};
use crate::classfn::{square_root_count, ClassFunction};
use crate::embed::SubgroupEmbedding;
use crate::error::{invalid, invariant, Error, Result};
use crate::group::{build_group, GroupSpec, C64};
use crate::special::{integrate, j0, j0_envelope, normal_cdf, Quadrature};
use crate::zeros::{bundled, synthesize_zeros, zero_count_mainterm, SynthesisMode, ZeroSet, MERGE_TOL};

/// Coefficients below this are treated as outside the support of t̂⁺.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Hypotheses the model is built under.
#[derive(Clone, Debug, PartialEq)]
pub struct Assumptions {
    pub ac: bool,
    pub grh: bool,
    pub li: bool,
    pub bm: bool,
    /// Bound on multiplicities assumed under BM.
    pub m0: Option<u32>,
    /// Flips the sign of the central-order term of the mean.
    pub flip_ord_sign: bool,
}

impl Default for Assumptions {
    fn default() -> Self {
        Assumptions { ac: true, grh: true, li: true, bm: false, m0: None, flip_ord_sign: false }
    }
}

impl Assumptions {
    /// No hypotheses at all; every flag is switched on by name.
    pub fn none() -> Self {
        Assumptions { ac: false, grh: false, li: false, bm: false, m0: None, flip_ord_sign: false }
    }

    /// Parses a comma list such as `AC,GRH,LI,BM=2,flip`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut a = Assumptions::none();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, val) = match item.split_once('=') {
                Some((k, v)) => (k.trim(), Some(v.trim())),
                None => (item, None),
            };
            match key.to_ascii_uppercase().as_str() {
                "AC" => a.ac = true,
                "GRH" => a.grh = true,
                "LI" => a.li = true,
                "BM" => {
                    a.bm = true;
                    if let Some(v) = val {
                        a.m0 = Some(v.parse().map_err(|_| Error::InvalidParameter(format!("bad BM bound {v}")))?);
                    }
                }
                "FLIP" => a.flip_ord_sign = true,
                _ => return invalid(format!("unknown assumption {item}")),
            }
        }
        Ok(a)
    }

    pub fn label(&self) -> String {
        let mut v = Vec::new();
        for (on, name) in [(self.ac, "AC"), (self.grh, "GRH"), (self.li, "LI")] {
            if on {
                v.push(name.to_string());
            }
        }
        if self.bm {
            v.push(match self.m0 {
                Some(m) => format!("BM={m}"),
                None => "BM".into(),
            });
        }
        if self.flip_ord_sign {
            v.push("flip".into());
        }
        v.join("+")
    }
}

/// One character of supp(t̂⁺) together with its zeros.
#[derive(Clone, Debug)]
pub struct Component {
    pub chi: usize,
    pub label: String,
    /// t̂⁺(χ).
    pub coeff: C64,
    pub zeros: ZeroSet,
    pub log_conductor: Option<f64>,
    pub symplectic: bool,
}

/// Everything needed to assemble a model, independent of any extension.
#[derive(Clone, Debug)]
pub struct ModelInput {
    pub id: String,
    /// ⟨t, r⟩_G.
    pub inner_tr: f64,
    /// ‖t⁺‖₁ and ‖t⁺‖₂.
    pub norm1_plus: f64,
    pub norm2_plus: f64,
    pub components: Vec<Component>,
}

/// A cosine term of X: amplitude, ordinate and the (merged) order.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub amplitude: f64,
    pub gamma: f64,
    pub order: C64,
    pub chars: Vec<usize>,
}

/// mean/√variance with the degenerate cases kept apart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BiasFactor {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
    /// Variance and mean both vanish.
    Undefined,
}

impl BiasFactor {
    pub fn new(mean: f64, variance: f64) -> Self {
        if variance > 0.0 {
            BiasFactor::Finite(mean / variance.sqrt())
        } else if mean > 0.0 {
            BiasFactor::PlusInfinity
        } else if mean < 0.0 {
            BiasFactor::MinusInfinity
        } else {
            BiasFactor::Undefined
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            BiasFactor::Finite(b) => b,
            BiasFactor::PlusInfinity => f64::INFINITY,
            BiasFactor::MinusInfinity => f64::NEG_INFINITY,
            BiasFactor::Undefined => f64::NAN,
        }
    }
}

impl fmt::Display for BiasFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasFactor::Finite(b) => write!(f, "{b:.12e}"),
            BiasFactor::PlusInfinity => write!(f, "+inf"),
            BiasFactor::MinusInfinity => write!(f, "-inf"),
            BiasFactor::Undefined => write!(f, "undefined"),
        }
    }
}

/// Truncation of the zero data behind a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    /// Smallest file height among the zero sets used.
    pub height: f64,
    /// Σ|t̂⁺(χ)|²·(tail shape of B₀(χ) beyond T), reported as ± on the variance.
    pub tail_variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSummary {
    pub chi: usize,
    pub label: String,
    pub coeff: C64,
    pub log_conductor: Option<f64>,
    pub zeros: usize,
    pub central_multiplicity: u32,
    pub zero_label: String,
    pub synthetic: bool,
}

#[derive(Clone, Debug)]
pub struct BiasModel {
    pub id: String,
    pub mean: f64,
    /// The central-order part of the mean.
    pub mean_central: f64,
    pub inner_tr: f64,
    pub terms: Vec<Term>,
    /// Starred sum Σ a²/2 over merged terms.
    pub variance: f64,
    /// Per-character sum, without merging shared ordinates.
    pub variance_naive: f64,
    /// Σ|t̂⁺(χ)|²·B₀(χ); only under LI.
    pub variance_closed: Option<f64>,
    pub bias: BiasFactor,
    pub w4: Option<f64>,
    pub f: Option<f64>,
    pub assumptions: Assumptions,
    pub truncation: Truncation,
    pub components: Vec<ComponentSummary>,
    pub norm1_plus: f64,
    pub norm2_plus: f64,
    /// Largest total multiplicity at a noncentral ordinate among the data.
    pub max_multiplicity: u32,
    /// Number of ordinates shared by several characters.
    pub merged_ordinates: usize,
}

/// Builds the model input for a class function t on G, given zero sets for
/// the characters of G⁺ keyed by character index.
pub fn model_input(
    id: &str,
    embedding: &SubgroupEmbedding,
    t: &ClassFunction,
    zeros: &BTreeMap<usize, ZeroSet>,
    log_conductor: &dyn Fn(usize) -> Option<f64>,
) -> Result<ModelInput> {
    if !t.is_real(1e-12) {
        return invalid("the race function t must be real-valued");
    }
    let gp = embedding.sup();
    let coeffs = embedding.induced_fourier_all(t);
    let tp = embedding.induce(t);
    let norms = tp.norms();
    let inner_tr = t.inner(&square_root_count(embedding.sub())).re;
    let mut components = Vec::new();
    for (chi, &c) in coeffs.iter().enumerate() {
        if c.norm() <= SUPPORT_TOL {
            continue;
        }
        let label = gp.char_labels()[chi].clone();
        let Some(z) = zeros.get(&chi) else {
            return Err(Error::MissingData(format!("no zero data for character {label} (index {chi})")));
        };
        components.push(Component {
            chi,
            label,
            coeff: c,
            zeros: z.clone(),
            log_conductor: log_conductor(chi).or(z.log_conductor),
            symplectic: gp.fs_indicator(chi)? == -1,
        });
    }
    Ok(ModelInput { id: id.to_string(), inner_tr, norm1_plus: norms.norm1, norm2_plus: norms.norm2, components })
}

/// Characters of G⁺ in supp(t̂⁺).
pub fn required_characters(spec: &ExtensionSpec, t: &ClassFunction) -> Vec<usize> {
    spec.embedding()
        .induced_fourier_all(t)
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > SUPPORT_TOL)
        .map(|(x, _)| x)
        .collect()
}

/// The model of X(L/K;t) for an extension from the catalog.
pub fn build_model(
    spec: &ExtensionSpec,
    t: &ClassFunction,
    zeros: &BTreeMap<usize, ZeroSet>,
    assumptions: &Assumptions,
) -> Result<BiasModel> {
    let id = spec.family.to_string();
    let input = model_input(&id, spec.embedding(), t, zeros, &|x| spec.log_conductor(x).ok())?;
    assemble(&input, assumptions)
}

struct Entry {
    gamma: f64,
    beta: f64,
    order: C64,
    mult: u32,
    chi: usize,
}

/// Assembles mean, terms and moments, enforcing the assumption flags.
pub fn assemble(input: &ModelInput, assumptions: &Assumptions) -> Result<BiasModel> {
    let sign = if assumptions.flip_ord_sign { -1.0 } else { 1.0 };
    let mut mean_central = 0.0;
    let mut entries = Vec::new();
    let mut height = f64::INFINITY;
    let mut tail_variance = 0.0;
    let mut variance_closed = 0.0;
    let mut summaries = Vec::new();
    for c in &input.components {
        let z = &c.zeros;
        if assumptions.grh && (z.assumed_beta - 0.5).abs() > 1e-15 {
            return Err(Error::Precondition(format!("GRH assumed but zeros of {} sit at β = {}", c.label, z.assumed_beta)));
        }
        if assumptions.li {
            if !z.is_simple() {
                return Err(Error::Precondition(format!("LI assumed but zeros of {} are not simple", c.label)));
            }
            if z.central_multiplicity > 0 && !c.symplectic {
                return Err(Error::Precondition(format!(
                    "LI assumed but {} vanishes at the centre without being symplectic",
                    c.label
                )));
            }
        }
        if assumptions.bm {
            if let (Some(m0), Some(&m)) = (assumptions.m0, z.multiplicities().iter().max()) {
                if m > m0 {
                    return Err(Error::Precondition(format!("BM bound {m0} exceeded by {} (multiplicity {m})", c.label)));
                }
            }
        }
        let beta = z.assumed_beta;
        mean_central += sign * c.coeff.re * z.central_multiplicity as f64 / beta;
        let o = c.coeff.conj();
        for (g, m) in z.iter() {
            entries.push(Entry { gamma: g, beta, order: o * m as f64, mult: m, chi: c.chi });
        }
        height = height.min(z.height);
        let bs = z.b_sums();
        tail_variance += c.coeff.norm_sqr() * bs.tail_estimate;
        variance_closed += c.coeff.norm_sqr() * bs.b0;
        summaries.push(ComponentSummary {
            chi: c.chi,
            label: c.label.clone(),
            coeff: c.coeff,
            log_conductor: c.log_conductor,
            zeros: z.len(),
            central_multiplicity: z.central_multiplicity,
            zero_label: z.label.clone(),
            synthetic: z.synthetic,
        });
    }
    entries.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.chi.cmp(&b.chi)));

    let amp = |o: C64, beta: f64, g: f64| 2.0 * o.norm() / (beta * beta + g * g).sqrt();
    let variance_naive: f64 = entries.iter().fold(0.0, |s, e| s + 0.5 * amp(e.order, e.beta, e.gamma).powi(2));
    let mut terms = Vec::with_capacity(entries.len());
    let mut merged_ordinates = 0;
    let mut max_multiplicity = 0;
    let mut i = 0;
    while i < entries.len() {
        let mut j = i + 1;
        while j < entries.len() && entries[j].gamma - entries[j - 1].gamma <= MERGE_TOL {
            j += 1;
        }
        let group = &entries[i..j];
        max_multiplicity = max_multiplicity.max(group.iter().map(|e| e.mult).sum());
        if group.len() > 1 {
            if assumptions.li {
                return invalid(format!(
                    "LI assumed but ordinate {:.9} is shared by characters {} and {}",
                    group[0].gamma, group[0].chi, group[1].chi
                ));
            }
            merged_ordinates += 1;
        }
        let order: C64 = group.iter().map(|e| e.order).sum();
        let a = amp(order, group[0].beta, group[0].gamma);
        if a > 0.0 {
            terms.push(Term { amplitude: a, gamma: group[0].gamma, order, chars: group.iter().map(|e| e.chi).collect() });
        }
        i = j;
    }
    let variance: f64 = terms.iter().fold(0.0, |s, t| s + 0.5 * t.amplitude * t.amplitude);
    let variance_closed = if assumptions.li {
        if (variance_closed - variance).abs() > 1e-10 * variance.max(1.0) {
            return invariant(format!("closed-form variance {variance_closed} differs from term sum {variance}"));
        }
        Some(variance_closed)
    } else {
        None
    };
    let mean = -input.inner_tr + mean_central;

    let (mut num, mut den) = (0.0, 0.0);
    let mut cmax: f64 = 0.0;
    for c in &input.components {
        let a2 = c.coeff.norm_sqr();
        cmax = cmax.max(c.coeff.norm());
        if let Some(la) = c.log_conductor {
            num += a2 * a2 * la;
            den += a2 * la;
        }
    }
    let w4 = (den > 0.0).then(|| num / (den * den));
    let f = (cmax > 0.0).then(|| variance.sqrt() / cmax);

    Ok(BiasModel {
        id: input.id.clone(),
        mean,
        mean_central,
        inner_tr: input.inner_tr,
        terms,
        variance,
        variance_naive,
        variance_closed,
        bias: BiasFactor::new(mean, variance),
        w4,
        f,
        assumptions: assumptions.clone(),
        truncation: Truncation { height: if height.is_finite() { height } else { 0.0 }, tail_variance },
        components: summaries,
        norm1_plus: input.norm1_plus,
        norm2_plus: input.norm2_plus,
        max_multiplicity,
        merged_ordinates,
    })
}

impl BiasModel {
    /// A bare model X = mean + Σ a_i cos θ_i, for experiments and tests.
    pub fn from_amplitudes(id: &str, mean: f64, amplitudes: &[f64]) -> Self {
        let terms: Vec<Term> = amplitudes
            .iter()
            .filter(|a| **a > 0.0)
            .map(|&a| Term { amplitude: a, gamma: 0.0, order: C64::zero(), chars: Vec::new() })
            .collect();
        let variance = terms.iter().fold(0.0, |s, t| s + 0.5 * t.amplitude * t.amplitude);
        BiasModel {
            id: id.to_string(),
            mean,
            mean_central: 0.0,
            inner_tr: -mean,
            terms,
            variance,
            variance_naive: variance,
            variance_closed: None,
            bias: BiasFactor::new(mean, variance),
            w4: None,
            f: None,
            assumptions: Assumptions::none(),
            truncation: Truncation { height: 0.0, tail_variance: 0.0 },
            components: Vec::new(),
            norm1_plus: 0.0,
            norm2_plus: 0.0,
            max_multiplicity: 0,
            merged_ordinates: 0,
        }
    }

    pub fn is_dirac(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.amplitude).collect()
    }

    /// The same model with the mean shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut m = self.clone();
        m.mean += delta;
        m.bias = BiasFactor::new(m.mean, m.variance);
        m
    }
}

pub fn variance(model: &BiasModel) -> f64 {
    model.variance
}

pub fn bias_factor(model: &BiasModel) -> BiasFactor {
    model.bias
}

/// (W₄, F); fails when the support is empty or carries no conductor data.
pub fn moments(model: &BiasModel) -> Result<(f64, f64)> {
    match (model.w4, model.f) {
        (Some(w), Some(f)) => Ok((w, f)),
        _ => Err(Error::Precondition("W4 and F need a nonempty support with conductors".into())),
    }
}

/// E[e^{iξX}] = e^{iξ·mean}·∏ J₀(a_i ξ).
pub fn char_function(model: &BiasModel, xi: f64) -> C64 {
    let p: f64 = model.terms.iter().map(|t| j0(t.amplitude * xi)).product();
    C64::from_polar(p, model.mean * xi)
}

// ---- density by inversion ----

/// δ by inversion, with the quadrature and tail error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion {
    pub delta: f64,
    pub error: f64,
    pub cutoff: f64,
    pub tail_bound: f64,
    pub panels: usize,
    pub evaluations: usize,
    /// The raw value left [0, 1] and was clamped.
    pub clamped: bool,
}

/// log of the product envelope and the number of decaying factors at ξ.
fn envelope(amps: &[f64], xi: f64) -> (f64, usize) {
    let mut log = 0.0;
    let mut k = 0;
    for &a in amps {
        let e = j0_envelope(a * xi);
        if e < 1.0 {
            log += e.ln();
            k += 1;
        }
    }
    (log, k)
}

/// δ = 1/2 + (1/π)∫₀^∞ sin(mean·ξ)∏J₀(a_iξ)/ξ dξ on Gauss–Legendre panels.
/// The integral is cut where the Bessel envelope bounds the tail below
/// `precision`/4; that bound is part of the reported error.
pub fn density_inversion(model: &BiasModel, precision: f64) -> Result<Inversion> {
    if !(model.variance > 0.0) {
        return Err(Error::Precondition("inversion needs positive variance".into()));
    }
    if model.terms.len() < 2 {
        return Err(Error::Precondition(
            "fewer than 2 Bessel factors: the integral may not converge, use Monte Carlo".into(),
        ));
    }
    let precision = precision.max(1e-13);
    let amps = model.amplitudes();
    let mu = model.mean;
    let amax = amps.iter().cloned().fold(0.0, f64::max);
    let sigma = model.variance.sqrt();
    let width = (PI / amax.max(mu.abs())).min(2.0 / sigma);
    let max_panels = 400_000;
    let mut panels = 0;
    let mut tail_bound = f64::INFINITY;
    while panels < max_panels {
        panels += 1;
        let (log, k) = envelope(&amps, panels as f64 * width);
        if k > 0 {
            tail_bound = log.exp() * 2.0 / (k as f64 * PI);
            if tail_bound <= 0.25 * precision {
                break;
            }
        }
    }
    let cutoff = panels as f64 * width;
    if mu == 0.0 {
        return Ok(Inversion { delta: 0.5, error: 0.0, cutoff, tail_bound: 0.0, panels, evaluations: 0, clamped: false });
    }
    let integrand = |xi: f64| -> f64 {
        if xi == 0.0 {
            return mu;
        }
        let p: f64 = amps.iter().map(|&a| j0(a * xi)).product();
        (mu * xi).sin() * p / xi
    };
    let tol = 0.25 * precision * PI / panels as f64;
    let parts: Vec<Quadrature> = (0..panels)
        .into_par_iter()
        .map(|k| integrate(&integrand, k as f64 * width, (k + 1) as f64 * width, tol, 0.0))
        .collect();
    let (mut integral, mut qerr, mut evaluations) = (0.0, 0.0, 0);
    for q in parts {
        integral += q.value;
        qerr += q.error;
        evaluations += q.evaluations;
    }
    let raw = 0.5 + integral / PI;
    let rounding = 1e-15 * panels as f64 + 1e-14;
    let delta = raw.clamp(0.0, 1.0);
    Ok(Inversion {
        delta,
        error: qerr / PI + tail_bound + rounding,
        cutoff,
        tail_bound,
        panels,
        evaluations,
        clamped: delta != raw,
    })
}

// ---- Monte Carlo ----

/// Samples per shard; shard s uses ChaCha8 seeded by `seed` on stream s.
pub const SHARD: u64 = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    /// Thread count; 0 uses the ambient rayon pool.
    pub workers: usize,
    /// Tail probabilities P[X − mean ≥ V] are counted for these V.
    pub thresholds: Vec<f64>,
}

impl McOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        McOptions { samples, seed, workers: 0, thresholds: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarlo {
    pub delta: f64,
    pub se: f64,
    pub samples: u64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// (V, P̂[X − mean ≥ V]).
    pub tails: Vec<(f64, f64)>,
}

/// Bits per phase; each term takes one of 4096 equally spaced phases.
const PHASE_BITS: u32 = 12;
const PHASES_PER_WORD: usize = 5;

fn cos_table() -> &'static [f64; 1 << PHASE_BITS] {
    static T: OnceLock<Box<[f64; 1 << PHASE_BITS]>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = Box::new([0.0; 1 << PHASE_BITS]);
        for (i, v) in t.iter_mut().enumerate() {
            *v = (2.0 * PI * i as f64 / (1u64 << PHASE_BITS) as f64).cos();
        }
        t
    })
}

struct ShardResult {
    positive: u64,
    sum: f64,
    sumsq: f64,
    tails: Vec<u64>,
}

fn run_shard(amps: &[f64], mean: f64, seed: u64, shard: u64, n: u64, thresholds: &[f64]) -> ShardResult {
    let table = cos_table();
    let mask = (1u64 << PHASE_BITS) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut res = ShardResult { positive: 0, sum: 0.0, sumsq: 0.0, tails: vec![0; thresholds.len()] };
    let full = amps.chunks_exact(PHASES_PER_WORD);
    let rest = full.remainder();
    let idx = |r: u64, k: u32| ((r >> (k * PHASE_BITS)) & mask) as usize;
    for _ in 0..n {
        let mut acc = [0.0; PHASES_PER_WORD];
        for c in full.clone() {
            let r = rng.next_u64();
            acc[0] += c[0] * table[idx(r, 0)];
            acc[1] += c[1] * table[idx(r, 1)];
            acc[2] += c[2] * table[idx(r, 2)];
            acc[3] += c[3] * table[idx(r, 3)];
            acc[4] += c[4] * table[idx(r, 4)];
        }
        if !rest.is_empty() {
            let r = rng.next_u64();
            for (k, &a) in rest.iter().enumerate() {
                acc[k] += a * table[idx(r, k as u32)];
            }
        }
        let w = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + acc[4];
        if mean + w > 0.0 {
            res.positive += 1;
        }
        res.sum += w;
        res.sumsq += w * w;
        for (c, &v) in res.tails.iter_mut().zip(thresholds) {
            if w >= v {
                *c += 1;
            }
        }
    }
    res
}

/// δ̂ = fraction of positive samples, with standard error √(δ̂(1−δ̂)/N).
pub fn density_monte_carlo(model: &BiasModel, samples: u64, seed: u64) -> Result<MonteCarlo> {
    density_monte_carlo_with(model, &McOptions::new(samples, seed))
}

/// Sharded Monte Carlo. Results are folded in shard order, so the output
/// does not depend on the number of workers.
pub fn density_monte_carlo_with(model: &BiasModel, opts: &McOptions) -> Result<MonteCarlo> {
    if opts.samples < 10_000 {
        return Err(Error::Precondition("Monte Carlo needs at least 10^4 samples".into()));
    }
    let amps = model.amplitudes();
    let shards = opts.samples.div_ceil(SHARD);
    let job = || -> Vec<ShardResult> {
        (0..shards)
            .into_par_iter()
            .map(|s| {
                let n = SHARD.min(opts.samples - s * SHARD);
                run_shard(&amps, model.mean, opts.seed, s, n, &opts.thresholds)
            })
            .collect()
    };
    let results = if opts.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(job)
    } else {
        job()
    };
    let mut positive = 0;
    let (mut sum, mut sumsq) = (0.0, 0.0);
    let mut tails = vec![0u64; opts.thresholds.len()];
    for r in results {
        positive += r.positive;
        sum += r.sum;
        sumsq += r.sumsq;
        for (t, c) in tails.iter_mut().zip(r.tails) {
            *t += c;
        }
    }
    let n = opts.samples as f64;
    let delta = positive as f64 / n;
    Ok(MonteCarlo {
        delta,
        se: (delta * (1.0 - delta) / n).sqrt(),
        samples: opts.samples,
        sample_mean: model.mean + sum / n,
        sample_variance: ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0),
        tails: opts.thresholds.iter().zip(tails).map(|(&v, c)| (v, c as f64 / n)).collect(),
    })
}

// ---- Gaussian route and bounds ----

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianEstimate {
    pub b: f64,
    /// Φ(B).
    pub phi_b: f64,
    /// 1/2 + B/√(2π).
    pub linear: f64,
    /// |B|³ + (‖t⁺‖₁²/variance)² + W₄, constants 1.
    pub error_shape: f64,
    pub certified: bool,
}

pub fn density_gaussian(model: &BiasModel) -> GaussianEstimate {
    let (b, phi_b, linear, error_shape) = match model.bias {
        BiasFactor::Finite(b) => {
            let r = model.norm1_plus * model.norm1_plus / model.variance;
            let e = b.abs().powi(3) + r * r + model.w4.unwrap_or(0.0);
            (b, normal_cdf(b), 0.5 + b / (2.0 * PI).sqrt(), e)
        }
        BiasFactor::PlusInfinity => (f64::INFINITY, 1.0, 1.0, 0.0),
        BiasFactor::MinusInfinity => (f64::NEG_INFINITY, 0.0, 0.0, 0.0),
        BiasFactor::Undefined => (f64::NAN, 0.5, 0.5, f64::INFINITY),
    };
    GaussianEstimate { b, phi_b, linear, error_shape, certified: false }
}

/// 1 − 2/B², under B > 0 and mean ≥ 4.
pub fn density_chebyshev_bound(model: &BiasModel) -> Result<f64> {
    match model.bias {
        BiasFactor::PlusInfinity if model.mean >= 4.0 => Ok(1.0),
        BiasFactor::Finite(b) if b > 0.0 && model.mean >= 4.0 => Ok(1.0 - 2.0 / (b * b)),
        _ => Err(Error::Precondition(format!(
            "Chebyshev bound needs B > 0 and mean >= 4 (B = {}, mean = {})",
            model.bias, model.mean
        ))),
    }
}

/// Montgomery–Odlyzko bounds on P[X − mean ≥ V] with r_n the amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargeDeviation {
    pub v: f64,
    pub alpha: f64,
    /// Σ_{|r|≥α}|r|.
    pub big_sum: f64,
    /// Σ_{|r|<α} r².
    pub small_sq: f64,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    /// The lower bound uses placeholder constants (a₁, a₂).
    pub lower_certified: bool,
}

pub fn large_deviation_bounds(model: &BiasModel, v: f64, alpha: f64, a1a2: (f64, f64)) -> Result<LargeDeviation> {
    if !(v >= 0.0) || !(alpha > 0.0) {
        return invalid("large deviations need V >= 0 and alpha > 0");
    }
    let (mut big_sum, mut small_sq) = (0.0, 0.0);
    for t in &model.terms {
        if t.amplitude >= alpha {
            big_sum += t.amplitude;
        } else {
            small_sq += t.amplitude * t.amplitude;
        }
    }
    let expo = |c: f64| {
        let x = c * v * v;
        if x == 0.0 {
            1.0
        } else if small_sq == 0.0 {
            0.0
        } else {
            (-x / small_sq).exp()
        }
    };
    let upper = (big_sum <= 0.5 * v).then(|| expo(1.0 / 16.0));
    let lower = (big_sum >= 2.0 * v).then(|| a1a2.0 * expo(a1a2.1));
    Ok(LargeDeviation { v, alpha, big_sum, small_sq, upper, lower, lower_certified: false })
}

/// Normalized log characteristic function against −ξ²/2 on |ξ| ≤ 0.6F.
#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    pub xi_max: f64,
    pub upper_holds: bool,
    /// Smallest c with log φ ≥ −ξ²/2 − c·W₄ξ⁴ on the sampled points.
    pub needed_c: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn clt_sandwich(model: &BiasModel, samples: usize) -> Result<CltReport> {
    let (w4, f) = moments(model)?;
    if !(model.variance > 0.0) {
        return Err(Error::Precondition("CLT check needs positive variance".into()));
    }
    let sigma = model.variance.sqrt();
    let xi_max = 0.6 * f;
    let mut upper_holds = true;
    let mut needed_c: f64 = 0.0;
    let mut points = Vec::with_capacity(samples);
    for k in 1..=samples {
        let xi = xi_max * k as f64 / samples as f64;
        let mut log = 0.0;
        for t in &model.terms {
            let j = j0(t.amplitude * xi / sigma);
            log += if j > 0.0 { j.ln() } else { f64::NEG_INFINITY };
        }
        let gauss = -0.5 * xi * xi;
        if log > gauss + 1e-12 * (1.0 + gauss.abs()) {
            upper_holds = false;
        }
        needed_c = needed_c.max((gauss - log) / (w4 * xi.powi(4)));
        points.push((xi, log));
    }
    Ok(CltReport { xi_max, upper_holds, needed_c, points })
}

// ---- diagnostic bounds ----

/// A labeled inequality lhs ≤ rhs with its measured slack.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Holds unconditionally with the stated constant.
    pub certified: bool,
}

impl Inequality {
    pub fn new(label: &str, lhs: f64, rhs: f64, certified: bool) -> Self {
        let holds = lhs <= rhs + 1e-9 * rhs.abs().max(1.0);
        Inequality { label: label.to_string(), lhs, rhs, holds, certified }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticReport {
    /// Σ_χ χ(1)|t̂⁺(χ)|².
    pub char_sum: f64,
    pub eta: f64,
    /// m_L from the zero data, or M₀ when only assumed.
    pub m_l: f64,
    pub m_l_assumed: bool,
    /// log rd_L·Σ_χ χ(1).
    pub t_l: f64,
    pub entries: Vec<Inequality>,
}

/// Σ_χ χ(1)|t̂⁺(χ)|² over Irr(G⁺).
pub fn character_weighted_sum(embedding: &SubgroupEmbedding, t: &ClassFunction) -> f64 {
    let gp = embedding.sup();
    embedding
        .induced_fourier_all(t)
        .iter()
        .enumerate()
        .map(|(x, c)| gp.degree(x) as f64 * c.norm_sqr())
        .sum()
}

pub fn diagnostic_bounds(model: &BiasModel, spec: &ExtensionSpec, t: &ClassFunction) -> Result<DiagnosticReport> {
    let emb = spec.embedding();
    let (g, gp) = (emb.sub(), emb.sup());
    let coeffs = emb.induced_fourier_all(t);
    let tp = emb.induce(t);
    let np = tp.norms();
    let nt = t.norms();
    let supp: Vec<usize> = (0..coeffs.len()).filter(|&x| coeffs[x].norm() > SUPPORT_TOL).collect();
    let s = character_weighted_sum(emb, t);
    let mut entries = Vec::new();
    if !supp.is_empty() {
        let ns = supp.len() as f64;
        entries.push(Inequality::new(
            "char_sum >= |t+|_2^3/(2^1.5 |t+|_1 sqrt(#supp))",
            np.norm2.powi(3) / (2.0 * SQRT_2 * np.norm1 * ns.sqrt()),
            s,
            true,
        ));
    }
    entries.push(Inequality::new(
        "char_sum <= |G+|^0.5 |t+|_2^2",
        s,
        (gp.order() as f64).sqrt() * np.norm2 * np.norm2,
        true,
    ));
    let real_g = (0..g.num_chars()).filter(|&x| g.is_real_char(x)).count();
    let real_gp = (0..gp.num_chars()).filter(|&x| gp.is_real_char(x)).count();
    let same = std::sync::Arc::ptr_eq(g, gp);
    let n_real = if same { real_g } else { real_g + real_gp } as f64;
    let central_max = model.components.iter().map(|c| c.central_multiplicity).max().unwrap_or(0) as f64;
    let c_mean = (2.0 * central_max).max(1.0);
    entries.push(Inequality::new(
        "|mean| <= (|t|_2 + c|t+|_2) sqrt(#real chars), c = max(1, 2 max central)",
        model.mean.abs(),
        (nt.norm2 + c_mean * np.norm2) * n_real.sqrt(),
        model.assumptions.li,
    ));

    let m_thresh = if supp.is_empty() {
        f64::INFINITY
    } else {
        np.norm2 / np.norm1 / (4.0 * supp.len() as f64).sqrt()
    };
    let eta = 1.0
        - supp
            .iter()
            .filter(|&&x| gp.degree(x) as f64 >= m_thresh)
            .map(|&x| m_chi(gp, x))
            .fold(0.0, f64::max);
    let lrd = spec.log_rd();
    let k = spec.degree_k as f64;
    entries.push(Inequality::new(
        "eta [K:Q] log rd char_sum / 8 <= variance (constant 1)",
        eta * k * lrd * s / 8.0,
        model.variance,
        false,
    ));
    let (m_l, m_l_assumed) = match (model.assumptions.bm, model.assumptions.m0) {
        (true, Some(m0)) if model.max_multiplicity == 0 => (m0 as f64, true),
        _ => (model.max_multiplicity.max(1) as f64, false),
    };
    entries.push(Inequality::new(
        "variance <= m_L^2 log rd char_sum (constant 1)",
        model.variance,
        m_l * m_l * lrd * s,
        false,
    ));
    if let Some(w4) = model.w4 {
        let den: f64 = model
            .components
            .iter()
            .filter_map(|c| c.log_conductor.map(|la| c.coeff.norm_sqr() * la))
            .sum();
        entries.push(Inequality::new(
            "W4 <= |t+|_1^(2/3) (sum |c|^2 logA)^(-1/3) (constant 1)",
            w4,
            np.norm1.powf(2.0 / 3.0) * den.powf(-1.0 / 3.0),
            false,
        ));
    }
    if let Some(f) = model.f {
        entries.push(Inequality::new(
            "variance^(1/6) / |t+|_1^(1/3) <= F (constant 1)",
            model.variance.powf(1.0 / 6.0) / np.norm1.powf(1.0 / 3.0),
            f,
            false,
        ));
    }
    let t_l = lrd * gp.degrees().iter().map(|&d| d as f64).sum::<f64>();
    Ok(DiagnosticReport { char_sum: s, eta, m_l, m_l_assumed, t_l, entries })
}

// ---- zero data selection and random models ----

/// The bundled file holding the zeros of χ, if any: ζ for the trivial
/// character and the real primitive characters of conductor 3, 4, 5.
pub fn bundled_zeros_for(spec: &ExtensionSpec, chi: usize) -> Option<ZeroSet> {
    if chi == 0 {
        let mut z = bundled("zeta")?;
        z.log_conductor = Some(0.0);
        z.degree = Some(1);
        return Some(z);
    }
    let gp = spec.group_plus();
    if gp.degree(chi) != 1 || !gp.is_real_char(chi) || spec.degree_k != 1 {
        return None;
    }
    let f = spec.log_conductor(chi).ok()?.exp().round() as u64;
    let label = match (&spec.family, f) {
        (Family::Cyclotomic(_) | Family::Quadratic(_), 3 | 4 | 5) => format!("dirichlet_{f}"),
        _ => return None,
    };
    let mut z = bundled(&label)?;
    z.log_conductor.get_or_insert((f as f64).ln());
    z.degree.get_or_insert(1);
    Some(z)
}

/// Bundled zeros where available, otherwise synthetic zeros up to `height`
/// from the conductor of χ (or its upper bound when only bounds exist).
pub fn default_zero_sets(
    spec: &ExtensionSpec,
    chars: &[usize],
    height: f64,
    seed: u64,
) -> Result<BTreeMap<usize, ZeroSet>> {
    let mut out = BTreeMap::new();
    let gp = spec.group_plus();
    for &chi in chars {
        if let Some(z) = bundled_zeros_for(spec, chi) {
            out.insert(chi, z);
            continue;
        }
        let log_a = match spec.log_conductor(chi) {
            Ok(v) => v,
            Err(_) => match crate::catalog::conductor_bounds(spec, chi) {
                Some(b) => b.upper,
                None => 0.0,
            },
        };
        let deg = (gp.degree(chi) * spec.degree_k) as u32;
        let mut z = synthesize_zeros(log_a, deg, height, seed ^ (chi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), SynthesisMode::UnfoldedUniform)?;
        z.label = format!("{}:{}", spec.family, gp.char_labels()[chi]);
        out.insert(chi, z);
    }
    Ok(out)
}

/// Shape of the randomized regression models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModelConfig {
    pub min_chars: usize,
    pub max_chars: usize,
    pub min_zeros: usize,
    pub max_zeros: usize,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig { min_chars: 2, max_chars: 5, min_zeros: 50, max_zeros: 500 }
    }
}

/// Height T with about `n` positive ordinates below it.
fn height_for_count(log_a: f64, degree: u32, n: usize) -> f64 {
    let (mut lo, mut hi) = (1.0, 10.0);
    while 0.5 * zero_count_mainterm(log_a, degree, hi) < n as f64 + 0.5 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if 0.5 * zero_count_mainterm(log_a, degree, mid) < n as f64 + 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// A random real class function on a cyclic group, supported on a few
/// characters closed under conjugation, with synthetic zeros under LI.
pub fn random_model(seed: u64, cfg: &RandomModelConfig) -> Result<(BiasModel, ClassFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(6..=16u64);
    let group = build_group(&GroupSpec::Cyclic(n))?;
    let target = rng.random_range(cfg.min_chars..=cfg.max_chars);
    let mut chosen: Vec<usize> = Vec::new();
    if n % 2 == 0 && rng.random_bool(0.7) {
        if let Some(x) = (1..group.num_chars()).find(|&x| group.is_real_char(x)) {
            chosen.push(x);
        }
    }
    let mut attempts = 0;
    while chosen.len() < target && attempts < 200 {
        attempts += 1;
        let x = rng.random_range(1..group.num_chars());
        let xc = group.conjugate_char(x);
        if chosen.contains(&x) {
            continue;
        }
        let need = if xc == x { 1 } else { 2 };
        if chosen.len() + need > cfg.max_chars {
            continue;
        }
        chosen.push(x);
        if xc != x {
            chosen.push(xc);
        }
    }
    if chosen.len() < cfg.min_chars {
        return invariant("random model could not reach the requested support size");
    }
    chosen.sort_unstable();
    let mut coeffs = vec![C64::zero(); group.num_chars()];
    for &x in &chosen {
        let xc = group.conjugate_char(x);
        if xc == x {
            let mag = rng.random_range(0.5..2.0);
            coeffs[x] = C64::new(if rng.random_bool(0.5) { mag } else { -mag }, 0.0);
        } else if x < xc {
            let c = C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI));
            coeffs[x] = c;
            coeffs[xc] = c.conj();
        }
    }
    let t = ClassFunction::inverse_fourier(group.clone(), &coeffs)?;
    let t = ClassFunction::from_real(group.clone(), &t.real_values())?;
    let log_a = (n as f64).ln();
    let mut zeros = BTreeMap::new();
    for &x in &chosen {
        let count = rng.random_range(cfg.min_zeros..=cfg.max_zeros);
        let h = height_for_count(log_a, 1, count);
        let z = synthesize_zeros(log_a, 1, h, rng.next_u64(), SynthesisMode::UnfoldedUniform)?;
        zeros.insert(x, z);
    }
    let emb = SubgroupEmbedding::identity(group);
    let input = model_input(&format!("random-{seed}"), &emb, &t, &zeros, &|_| Some(log_a))?;
    Ok((assemble(&input, &Assumptions::default())?, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(gamma: f64, coeff: f64) -> ModelInput {
        let z = ZeroSet::new("one", &[(gamma, 1)], gamma + 1.0, 0).unwrap();
        ModelInput {
            id: "single".into(),
            inner_tr: 0.0,
            norm1_plus: 1.0,
            norm2_plus: 1.0,
            components: vec![Component {
                chi: 1,
                label: "x".into(),
                coeff: C64::new(coeff, 0.0),
                zeros: z,
                log_conductor: Some(1.0),
                symplectic: false,
            }],
        }
    }

    #[test]
    fn single_pair_variance() {
        let m = assemble(&single(14.134725, 1.0), &Assumptions::default()).unwrap();
        let want = 2.0 / (0.25 + 14.134725f64.powi(2));
        assert!((m.variance - want).abs() < 1e-15);
        assert!((m.variance - 0.009_998_0).abs() < 1e-7);
        assert_eq!(m.bias, BiasFactor::Finite(0.0));
    }

    #[test]
    fn bias_factor_sentinels() {
        assert_eq!(BiasFactor::new(1.0, 0.0), BiasFactor::PlusInfinity);
        assert_eq!(BiasFactor::new(-1.0, 0.0), BiasFactor::MinusInfinity);
        assert_eq!(BiasFactor::new(0.0, 0.0), BiasFactor::Undefined);
    }

    #[test]
    fn chebyshev_arithmetic() {
        let m = BiasModel::from_amplitudes("b10", 10.0, &[SQRT_2]);
        assert!((density_chebyshev_bound(&m).unwrap() - 0.98).abs() < 1e-12);
        let m = BiasModel::from_amplitudes("b1", 1.0, &[SQRT_2]);
        assert!(density_chebyshev_bound(&m).is_err());
    }

    #[test]
    fn assumption_parsing() {
        let a = Assumptions::parse("AC, GRH,LI,BM=2,flip").unwrap();
        assert!(a.ac && a.grh && a.li && a.bm && a.flip_ord_sign);
        assert_eq!(a.m0, Some(2));
        assert_eq!(a.label(), "AC+GRH+LI+BM=2+flip");
        assert!(Assumptions::parse("RH").is_err());
    }
}
