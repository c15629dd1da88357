use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frobrace_cli::{run, CliError, Command, Config, EXIT_INVARIANT};

#[derive(Parser, Debug)]
#[command(name = "frobrace", version, about = "Chebyshev-bias densities for Frobenius races")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Character, class and conductor tables.
    Table,
    /// The limiting random variable: mean, variance, bias factor, diagnostics.
    Bias,
    /// δ by inversion, Monte Carlo and the Gaussian approximation.
    Density,
    /// Sieve-based race series and empirical logarithmic density.
    Race,
    /// Built-in invariant suite.
    Validate,
    /// Least primes against Murty-type bounds; conductor and error bounds.
    Bounds,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Config file of `key = value` lines under [section] headers.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// cyclotomic | quadratic | radical | multiquadratic | hilbert | kluners
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    a: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    d: Option<String>,
    /// Comma-separated primes for multiquadratic fields.
    #[arg(long, global = true)]
    primes: Option<String>,
    #[arg(long, global = true)]
    ell: Option<String>,
    #[arg(long, global = true)]
    structure: Option<String>,
    /// Group description for `table`, e.g. "symmetric 6".
    #[arg(long, global = true)]
    group: Option<String>,
    /// race:C1,C2 | race:C1 | one-minus-r | values:v1,v2,...
    #[arg(long, global = true)]
    t: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true)]
    xmax: Option<String>,
    #[arg(long, global = true)]
    checkpoints: Option<String>,
    #[arg(long, global = true)]
    x0: Option<String>,
    /// bundled | synthetic, plus label=path overrides, comma-separated.
    #[arg(long, global = true)]
    zeros: Option<String>,
    /// Height for synthetic zeros.
    #[arg(long, global = true)]
    height: Option<String>,
    /// e.g. AC,GRH,LI or GRH,BM=2
    #[arg(long, global = true)]
    assume: Option<String>,
    #[arg(long, global = true)]
    precision: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    cache_dir: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("family.name", &self.family),
            ("family.q", &self.q),
            ("family.a", &self.a),
            ("family.p", &self.p),
            ("family.d", &self.d),
            ("family.primes", &self.primes),
            ("family.ell", &self.ell),
            ("family.structure", &self.structure),
            ("group.spec", &self.group),
            ("race.t", &self.t),
            ("race.beta", &self.beta),
            ("race.xmax", &self.xmax),
            ("race.checkpoints", &self.checkpoints),
            ("race.x0", &self.x0),
            ("zeros.source", &self.zeros),
            ("zeros.height", &self.height),
            ("model.assume", &self.assume),
            ("model.precision", &self.precision),
            ("model.samples", &self.samples),
            ("model.seed", &self.seed),
            ("run.out", &self.out),
            ("run.cache_dir", &self.cache_dir),
            ("run.workers", &self.workers),
        ]
    }
}

fn config(opts: &Opts) -> Result<Config, CliError> {
    let mut cfg = match &opts.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for (key, val) in opts.pairs() {
        if let Some(v) = val {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn execute(cmd: Command, opts: &Opts) -> Result<bool, CliError> {
    let cfg = config(opts)?;
    let workers: usize = cfg.parsed_or("run.workers", 0)?;
    let outcome = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| run(cmd, &cfg))?
    } else {
        run(cmd, &cfg)?
    };
    let dir = PathBuf::from(cfg.get("run.out").unwrap_or("frobrace-out"));
    for a in &outcome.artifacts {
        a.write(&dir, &outcome.header)?;
    }
    print!("{}", outcome.stdout);
    for f in &outcome.failures {
        eprintln!("FAILED: {f}");
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Table => Command::Table,
        Cmd::Bias => Command::Bias,
        Cmd::Density => Command::Density,
        Cmd::Race => Command::Race,
        Cmd::Validate => Command::Validate,
        Cmd::Bounds => Command::Bounds,
    };
    match execute(cmd, &cli.opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INVARIANT as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
