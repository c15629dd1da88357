//! The subcommands. Each returns its stdout text and artifacts; nothing here
//! depends on timing or thread count.

use frobrace::bias::{
    build_model, density_chebyshev_bound, density_gaussian, density_inversion, density_monte_carlo_with,
    diagnostic_bounds, required_characters, Assumptions, BiasModel, McOptions,
};
use frobrace::catalog::{chebotarev_error_bound, conductor_bounds, murty_least_prime_bound, ExtensionSpec};
use frobrace::race::{
    empirical_density, least_primes, log_checkpoints, race_series, sieve_classify, Classifier, DEFAULT_CHECKPOINTS,
    DEFAULT_CHECKPOINT_START,
};
use frobrace::{root_count, ClassFunction, Group};

use crate::config::Config;
use crate::output::{num, opt, phi_table, race_plot_table, Artifact, Header, Table};
use crate::pipeline::{family_spec, group_from_config, race_t, zero_sets, ZeroSource};
use crate::validate::validate;
use crate::CliError;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PRECISION: f64 = 1e-6;
pub const DEFAULT_RACE_XMAX: u64 = 10_000_000;
pub const DEFAULT_LEAST_PRIME_LIMIT: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Table,
    Bias,
    Density,
    Race,
    Validate,
    Bounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Table => "table",
            Command::Bias => "bias",
            Command::Density => "density",
            Command::Race => "race",
            Command::Validate => "validate",
            Command::Bounds => "bounds",
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub header: Header,
    pub artifacts: Vec<Artifact>,
    /// Failed validation checks; a nonempty list means a nonzero exit.
    pub failures: Vec<String>,
}

impl Outcome {
    fn new(command: Command, cfg: &Config) -> Self {
        let mut header = Header::default();
        header.push("tool", format!("frobrace {}", env!("CARGO_PKG_VERSION")));
        header.push("command", command.name());
        header.push("config_hash", cfg.hash(command.name()));
        Outcome { header, ..Default::default() }
    }

    pub(crate) fn line(&mut self, s: impl AsRef<str>) {
        self.stdout.push_str(s.as_ref());
        self.stdout.push('\n');
    }

    pub(crate) fn add(&mut self, file: &str, table: &Table) -> Result<(), CliError> {
        self.artifacts.push(Artifact::table(file, table)?);
        Ok(())
    }
}

pub fn run(command: Command, cfg: &Config) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(command, cfg);
    match command {
        Command::Table => table(cfg, &mut out)?,
        Command::Bias => bias(cfg, &mut out)?,
        Command::Density => density(cfg, &mut out)?,
        Command::Race => race(cfg, &mut out)?,
        Command::Validate => validate(cfg, &mut out)?,
        Command::Bounds => bounds(cfg, &mut out)?,
    }
    Ok(out)
}

fn class_table(g: &Group) -> Table {
    let r = root_count(g, 2);
    let mut t = Table::new(&["class", "size", "element_order", "r", "one_minus_r"]);
    for (c, cl) in g.classes().iter().enumerate() {
        let rv = r.value(c).re.round();
        t.push(vec![cl.label.clone(), cl.size.to_string(), cl.element_order.to_string(), num(rv), num(1.0 - rv)]);
    }
    t
}

fn table(cfg: &Config, out: &mut Outcome) -> Result<(), CliError> {
    out.header.push("assumptions", "none");
    out.header.push("truncation_heights", "none");
    if let Some(g) = group_from_config(cfg)? {
        out.header.push("noncertified", "none");
        out.line(format!("group {} order {} classes {}", g.name(), g.order(), g.num_classes()));
        out.add("classes.csv", &class_table(&g))?;
        out.artifacts.push(Artifact::raw("characters.csv", g.table_csv()));
        return Ok(());
    }
    if !cfg.has("family.name") {
        return Err(CliError::Config("table needs --family or --group".into()));
    }
    let spec = family_spec(cfg)?;
    let gp = spec.group_plus();
    out.header.push(
        "noncertified",
        if spec.conductors_exact() { "none".to_string() } else { "conductors are estimates or bounds".to_string() },
    );
    out.line(format!("family {}", spec.family));
    out.line(format!("G+ = {} (order {}), G = {}", gp.name(), gp.order(), spec.group().name()));
    out.line(format!("log d_L = {}{}", num(spec.log_disc), if spec.log_disc_is_bound { " (bound)" } else { "" }));
    out.line(format!("ramified primes: {:?}", spec.ramified_primes()));
    out.add("classes.csv", &class_table(gp))?;
    out.artifacts.push(Artifact::raw("characters.csv", gp.table_csv()));
    out.artifacts.push(Artifact::raw("conductors.csv", spec.conductor_table_csv()?));
    let mut cd = Table::new(&["prime", "exponent_sum", "valuation", "ok"]);
    for row in spec.conductor_discriminant_check()? {
        out.line(format!("conductor-discriminant at {}: {} vs v_p(d) = {} {}", row.prime, num(row.sum), row.valuation, if row.ok { "ok" } else { "MISMATCH" }));
        if !row.ok {
            out.failures.push(format!("conductor-discriminant mismatch at {}", row.prime));
        }
        cd.push(vec![row.prime.to_string(), num(row.sum), row.valuation.to_string(), row.ok.to_string()]);
    }
    out.add("conductor_discriminant.csv", &cd)?;
    Ok(())
}

/// Extension, race function and model from the configuration.
pub fn model_from_config(cfg: &Config) -> Result<(ExtensionSpec, ClassFunction, BiasModel), CliError> {
    let spec = family_spec(cfg)?;
    let t = race_t(cfg, spec.group())?;
    let assumptions = Assumptions::parse(cfg.get("model.assume").unwrap_or("AC,GRH,LI"))?;
    let src = ZeroSource::from_config(cfg)?;
    let seed = cfg.parsed_or("model.seed", DEFAULT_SEED)?;
    let chars = required_characters(&spec, &t);
    let zeros = zero_sets(&spec, &chars, &src, seed, cfg.cache_dir().as_deref())?;
    let model = build_model(&spec, &t, &zeros, &assumptions)?;
    Ok((spec, t, model))
}

fn model_header(out: &mut Outcome, model: &BiasModel) {
    out.header.push("assumptions", model.assumptions.label());
    let labels: Vec<&str> = model.components.iter().map(|c| c.zero_label.as_str()).collect();
    out.header.push(
        "truncation_heights",
        format!("min {} over [{}], tail variance {}", num(model.truncation.height), labels.join(" "), num(model.truncation.tail_variance)),
    );
    let mut flags = vec!["gaussian error shape (constants 1)", "diagnostic bounds marked certified=false"];
    if model.components.iter().any(|c| c.synthetic) {
        flags.push("synthetic zeros");
    }
    out.header.push("noncertified", flags.join("; "));
}

fn bias(cfg: &Config, out: &mut Outcome) -> Result<(), CliError> {
    let (spec, t, model) = model_from_config(cfg)?;
    model_header(out, &model);
    let mut kv = Table::new(&["quantity", "value"]);
    let rows: Vec<(&str, String)> = vec![
        ("id", model.id.clone()),
        ("mean", num(model.mean)),
        ("mean_central", num(model.mean_central)),
        ("inner_t_r", num(model.inner_tr)),
        ("variance", num(model.variance)),
        ("variance_naive", num(model.variance_naive)),
        ("variance_closed", opt(model.variance_closed)),
        ("bias_factor", model.bias.to_string()),
        ("w4", opt(model.w4)),
        ("f", opt(model.f)),
        ("terms", model.terms.len().to_string()),
        ("truncation_height", num(model.truncation.height)),
        ("tail_variance", num(model.truncation.tail_variance)),
        ("norm1_plus", num(model.norm1_plus)),
        ("norm2_plus", num(model.norm2_plus)),
        ("max_multiplicity", model.max_multiplicity.to_string()),
        ("merged_ordinates", model.merged_ordinates.to_string()),
    ];
    for (k, v) in rows {
        out.line(format!("{k} = {v}"));
        kv.push(vec![k.to_string(), v]);
    }
    out.add("bias.csv", &kv)?;
    let mut comp = Table::new(&["character", "coeff_re", "coeff_im", "log_conductor", "zeros", "central", "zero_label", "synthetic"]);
    for c in &model.components {
        comp.push(vec![
            c.label.clone(),
            num(c.coeff.re),
            num(c.coeff.im),
            opt(c.log_conductor),
            c.zeros.to_string(),
            c.central_multiplicity.to_string(),
            c.zero_label.clone(),
            c.synthetic.to_string(),
        ]);
    }
    out.add("components.csv", &comp)?;
    let diag = diagnostic_bounds(&model, &spec, &t)?;
    let mut d = Table::new(&["bound", "lhs", "rhs", "holds", "certified"]);
    for e in &diag.entries {
        d.push(vec![e.label.clone(), num(e.lhs), num(e.rhs), e.holds.to_string(), e.certified.to_string()]);
        if e.certified && !e.holds {
            out.failures.push(format!("certified bound fails: {}", e.label));
        }
    }
    out.add("diagnostics.csv", &d)?;
    Ok(())
}

fn density(cfg: &Config, out: &mut Outcome) -> Result<(), CliError> {
    let (_, _, model) = model_from_config(cfg)?;
    model_header(out, &model);
    let mut t = Table::new(&["route", "delta", "error", "certified", "note"]);
    out.line(format!("model {}: mean {} variance {} B {}", model.id, num(model.mean), num(model.variance), model.bias));
    if model.is_dirac() {
        let d = if model.mean > 0.0 { 1.0 } else if model.mean < 0.0 { 0.0 } else { 0.5 };
        t.push(vec!["dirac".into(), num(d), "0".into(), "true".into(), "zero variance".into()]);
        out.line(format!("dirac model: delta = {}", num(d)));
        out.add("density.csv", &t)?;
        return Ok(());
    }
    let precision = cfg.parsed_or("model.precision", DEFAULT_PRECISION)?;
    let inv = density_inversion(&model, precision)?;
    t.push(vec![
        "inversion".into(),
        num(inv.delta),
        num(inv.error),
        "true".into(),
        format!("cutoff {} panels {}{}", num(inv.cutoff), inv.panels, if inv.clamped { " clamped" } else { "" }),
    ]);
    out.line(format!("inversion: {} +- {}", num(inv.delta), num(inv.error)));
    let samples = cfg.parsed_or("model.samples", DEFAULT_SAMPLES)?;
    let seed = cfg.parsed_or("model.seed", DEFAULT_SEED)?;
    let mc = density_monte_carlo_with(&model, &McOptions::new(samples, seed))?;
    t.push(vec!["monte_carlo".into(), num(mc.delta), num(mc.se), "false".into(), format!("samples {samples} seed {seed}")]);
    out.line(format!("monte carlo: {} +- {} ({samples} samples)", num(mc.delta), num(mc.se)));
    let g = density_gaussian(&model);
    t.push(vec!["gaussian".into(), num(g.phi_b), num(g.error_shape), g.certified.to_string(), format!("B {} linear {}", num(g.b), num(g.linear))]);
    out.line(format!("gaussian: {} (error shape {})", num(g.phi_b), num(g.error_shape)));
    match density_chebyshev_bound(&model) {
        Ok(b) => {
            t.push(vec!["chebyshev_lower".into(), num(b), "".into(), "true".into(), "1 - 2/B^2".into()]);
            out.line(format!("chebyshev lower bound: {}", num(b)));
        }
        Err(e) => t.push(vec!["chebyshev_lower".into(), "".into(), "".into(), "true".into(), e.to_string()]),
    }
    let bar = 3.0 * inv.error.hypot(mc.se);
    let gap = (inv.delta - mc.delta).abs();
    let agree = gap <= bar.max(5e-3);
    out.line(format!("inversion vs monte carlo: |diff| = {} (allowed {}) {}", num(gap), num(bar.max(5e-3)), if agree { "agree" } else { "DISAGREE" }));
    out.add("density.csv", &t)?;
    out.add("phi.csv", &phi_table(&model, inv.cutoff, 512))?;
    Ok(())
}

fn race(cfg: &Config, out: &mut Outcome) -> Result<(), CliError> {
    let spec = family_spec(cfg)?;
    let cl = Classifier::new(&spec)?;
    let g = spec.group().clone();
    let t = race_t(cfg, &g)?;
    let xmax: u64 = cfg.parsed_or("race.xmax", DEFAULT_RACE_XMAX)?;
    let n: usize = cfg.parsed_or("race.checkpoints", DEFAULT_CHECKPOINTS)?;
    let x0: f64 = cfg.parsed_or("race.x0", DEFAULT_CHECKPOINT_START)?;
    let beta: f64 = cfg.parsed_or("race.beta", 0.5)?;
    if !(x0 >= 2.0) || (xmax as f64) <= x0 {
        return Err(CliError::Config(format!("race needs 2 <= x0 < xmax (x0 = {x0}, xmax = {xmax})")));
    }
    out.header.push("assumptions", format!("none (empirical; beta = {})", num(beta)));
    out.header.push("truncation_heights", format!("xmax {xmax}"));
    out.header.push("noncertified", "ramified primes excluded from counts");
    let cps = log_checkpoints(x0, xmax as f64, n);
    let counts = sieve_classify(&cl, xmax, &cps)?;
    let series = race_series(&counts, &spec.family.to_string(), &t, beta)?;
    let mut cols: Vec<String> = vec!["x".into()];
    cols.extend(g.classes().iter().map(|c| format!("count_{}", c.label)));
    cols.extend(["pi".to_string(), "E".to_string()]);
    let mut rt = Table { columns: cols, rows: Vec::new() };
    for k in 0..cps.len() {
        let mut row = vec![num(cps[k])];
        row.extend(counts.counts[k].iter().map(|c| c.to_string()));
        row.push(counts.pi[k].to_string());
        row.push(num(series.e_values[k]));
        rt.push(row);
    }
    out.add("race.csv", &rt)?;
    out.line(format!("family {} xmax {xmax} checkpoints {}", spec.family, cps.len()));
    out.line(format!("pi(xmax) = {} ramified excluded: {:?}", counts.pi.last().copied().unwrap_or(0), counts.ramified));
    let mut summary = Table::new(&["quantity", "value"]);
    summary.push(vec!["pi_xmax".into(), counts.pi.last().copied().unwrap_or(0).to_string()]);
    for (c, cl) in g.classes().iter().enumerate() {
        summary.push(vec![format!("count_{}", cl.label), counts.counts.last().map_or(0, |v| v[c]).to_string()]);
    }
    match empirical_density(&series) {
        Ok(d) => {
            out.line(format!("empirical density {} band [{}, {}]", num(d.value), num(d.band_min), num(d.band_max)));
            summary.push(vec!["density".into(), num(d.value)]);
            summary.push(vec!["band_min".into(), num(d.band_min)]);
            summary.push(vec!["band_max".into(), num(d.band_max)]);
            out.add("race_plot.csv", &race_plot_table(Some(&series), Some(&d)))?;
        }
        Err(e) => {
            out.line(format!("empirical density unavailable: {e}"));
            out.add("race_plot.csv", &race_plot_table(Some(&series), None))?;
        }
    }
    out.add("race_summary.csv", &summary)?;
    Ok(())
}

fn bounds(cfg: &Config, out: &mut Outcome) -> Result<(), CliError> {
    let spec = family_spec(cfg)?;
    let g = spec.group().clone();
    let limit: u64 = cfg.parsed_or("race.xmax", DEFAULT_LEAST_PRIME_LIMIT)?;
    out.header.push("assumptions", "shapes with absolute constants set to 1");
    out.header.push("truncation_heights", format!("least-prime search limit {limit}"));
    out.header.push("noncertified", "Murty and Chebotarev bounds are shapes (constant 1)");
    let found = match Classifier::new(&spec) {
        Ok(cl) => Some(least_primes(&cl, limit)?),
        Err(_) => None,
    };
    let mut t = Table::new(&["class", "size", "least_prime", "murty_first", "murty_second", "murty_g_plus", "ratio_first", "within_1", "within_16"]);
    for (c, cl) in g.classes().iter().enumerate() {
        let m = murty_least_prime_bound(&spec, c)?;
        let p = found.as_ref().and_then(|f| f.get(&c).copied());
        let ratio = p.map(|p| p as f64 / m.first);
        if found.is_some() && p.is_none() {
            out.failures.push(format!("no prime below {limit} in class {}", cl.label));
        }
        if ratio.is_some_and(|r| r > 16.0) {
            out.failures.push(format!("least prime in class {} exceeds 16x the first bound", cl.label));
        }
        out.line(format!(
            "class {}: least prime {} first bound {} ratio {}",
            cl.label,
            p.map_or("-".into(), |p| p.to_string()),
            num(m.first),
            opt(ratio)
        ));
        t.push(vec![
            cl.label.clone(),
            cl.size.to_string(),
            p.map_or(String::new(), |p| p.to_string()),
            num(m.first),
            num(m.second),
            num(m.g_plus),
            opt(ratio),
            ratio.map_or(String::new(), |r| (r <= 1.0).to_string()),
            ratio.map_or(String::new(), |r| (r <= 16.0).to_string()),
        ]);
    }
    out.add("least_primes.csv", &t)?;
    let gp = spec.group_plus();
    let mut cb = Table::new(&["character", "log_conductor", "lower", "upper", "m_chi"]);
    for x in 1..gp.num_chars() {
        if let Some(b) = conductor_bounds(&spec, x) {
            cb.push(vec![gp.char_labels()[x].clone(), opt(spec.log_conductor(x).ok()), num(b.lower), num(b.upper), num(b.m_chi)]);
        }
    }
    out.add("conductor_bounds.csv", &cb)?;
    let x = 1e6;
    let mut eb = Table::new(&["class", "x", "chebotarev_error_shape"]);
    for (c, cl) in g.classes().iter().enumerate() {
        let ind = ClassFunction::indicator(g.clone(), c);
        eb.push(vec![cl.label.clone(), num(x), num(chebotarev_error_bound(&spec, &ind, x)?)]);
    }
    out.add("chebotarev_error.csv", &eb)?;
    let v = out.failures.len();
    out.line(format!("violations: {v}"));
    Ok(())
}
