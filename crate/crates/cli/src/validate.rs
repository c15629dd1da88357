//! The built-in validation suite behind `frobrace validate`.

use num_bigint::BigUint;

use frobrace::bias::{build_model, density_inversion, density_monte_carlo_with, required_characters, Assumptions, McOptions};
use frobrace::catalog::{cyclotomic_extension, radical_extension};
use frobrace::race::primes_up_to;
use frobrace::sn::{factorial, hook_dimension, involution_count, partition_counts, partitions, RoichmanConstants};
use frobrace::zeros::{bundled, BUNDLED, DEFAULT_SLACK};
use frobrace::{build_group, race_function, GroupSpec, RaceSpec};

use crate::commands::Outcome;
use crate::config::Config;
use crate::output::{num, Table};
use crate::pipeline::{zero_sets, ZeroSource};
use crate::CliError;

/// Samples for the cross-route check unless `model.samples` says otherwise.
pub const VALIDATE_SAMPLES: u64 = 200_000;

type Check = (String, Result<String, String>);

fn check(name: &str, f: impl FnOnce() -> Result<Result<String, String>, CliError>) -> Check {
    let r = match f() {
        Ok(r) => r,
        Err(e) => Err(format!("error: {e}")),
    };
    (name.to_string(), r)
}

fn groups() -> Result<Result<String, String>, CliError> {
    let specs = [
        GroupSpec::Symmetric(3),
        GroupSpec::Symmetric(4),
        GroupSpec::Symmetric(5),
        GroupSpec::Symmetric(6),
        GroupSpec::Symmetric(7),
        GroupSpec::Dihedral(5),
        GroupSpec::Dihedral(7),
        GroupSpec::Affine(5),
        GroupSpec::Affine(7),
        GroupSpec::Abelian(vec![2, 2, 2, 2]),
        GroupSpec::Quaternion,
        GroupSpec::Units(15),
    ];
    for s in &specs {
        build_group(s)?;
    }
    Ok(Ok(format!("{} character tables verified", specs.len())))
}

fn symmetric_dimensions() -> Result<Result<String, String>, CliError> {
    for n in 1..=12 {
        let parts = partitions(n)?;
        let dims: Vec<BigUint> = parts.iter().map(hook_dimension).collect();
        let sq: BigUint = dims.iter().map(|d| d * d).sum();
        let sum: BigUint = dims.iter().sum();
        if sq != factorial(n) || sum != involution_count(n) {
            return Ok(Err(format!("dimension identities fail at n = {n}")));
        }
    }
    let counts = partition_counts(40);
    for (n, c) in counts.iter().enumerate().skip(1) {
        if BigUint::from(partitions(n)?.len()) != *c {
            return Ok(Err(format!("p({n}) recurrence disagrees with enumeration")));
        }
    }
    Ok(Ok("n <= 12 dimensions, p(n) for n <= 40".into()))
}

fn radical_conductors() -> Result<Result<String, String>, CliError> {
    for (a, p) in [(3, 5), (3, 7), (5, 7), (7, 11)] {
        let spec = radical_extension(a, p)?;
        for row in spec.conductor_discriminant_check()? {
            if !row.ok {
                return Ok(Err(format!("radical({a},{p}) at {}: {} vs {}", row.prime, num(row.sum), row.valuation)));
            }
        }
    }
    Ok(Ok("(3,5) (3,7) (5,7) (7,11)".into()))
}

fn zero_counts() -> Result<Result<String, String>, CliError> {
    let mut notes = Vec::new();
    for label in BUNDLED {
        let z = bundled(label).ok_or_else(|| CliError::Core(frobrace::Error::MissingData(format!("bundled {label}"))))?;
        let c = z.validate_count(DEFAULT_SLACK)?;
        if !c.ok || z.is_empty() {
            return Ok(Err(format!("{label}: count {} vs {} (allowed {})", num(c.count), num(c.mainterm), num(c.allowed))));
        }
        notes.push(format!("{label}:{}", z.len()));
    }
    Ok(Ok(notes.join(" ")))
}

fn mod4_routes(samples: u64, seed: u64) -> Result<Result<String, String>, CliError> {
    let spec = cyclotomic_extension(4)?;
    let g = spec.group();
    let c3 = g.class_index("3").expect("class 3");
    let c1 = g.class_index("1").expect("class 1");
    let t = race_function(g, &RaceSpec::Classes(c3, Some(c1)))?;
    let src = ZeroSource { use_bundled: true, files: Default::default(), height: 200.0, slack: DEFAULT_SLACK };
    let zeros = zero_sets(&spec, &required_characters(&spec, &t), &src, seed, None)?;
    let model = build_model(&spec, &t, &zeros, &Assumptions::default())?;
    let inv = density_inversion(&model, 1e-8)?;
    let mc = density_monte_carlo_with(&model, &McOptions::new(samples, seed))?;
    let gap = (inv.delta - mc.delta).abs();
    let allowed = (3.0 * inv.error.hypot(mc.se)).max(5e-3);
    let msg = format!("inversion {} monte carlo {} diff {} allowed {}", num(inv.delta), num(mc.delta), num(gap), num(allowed));
    Ok(if gap <= allowed { Ok(msg) } else { Err(msg) })
}

fn sieve() -> Result<Result<String, String>, CliError> {
    let n = primes_up_to(1_000_000)?.len();
    Ok(if n == 78_498 { Ok("pi(10^6) = 78498".into()) } else { Err(format!("pi(10^6) = {n}")) })
}

fn roichman() -> Result<Result<String, String>, CliError> {
    let c = RoichmanConstants::default_calibrated();
    let bad = c.violations(&RoichmanConstants::CALIBRATION_NS)?;
    Ok(if bad.is_empty() {
        Ok(format!("q = {} b = {}", num(c.q), num(c.b)))
    } else {
        Err(format!("{} violations", bad.len()))
    })
}

pub fn validate(cfg: &Config, out: &mut Outcome) -> Result<(), CliError> {
    let samples = cfg.parsed_or("model.samples", VALIDATE_SAMPLES)?;
    let seed = cfg.parsed_or("model.seed", crate::commands::DEFAULT_SEED)?;
    out.header.push("assumptions", "AC+GRH+LI for the cross-route check");
    out.header.push("truncation_heights", "bundled zero files");
    out.header.push("noncertified", "monte carlo agreement is statistical");
    let checks = vec![
        check("character_tables", groups),
        check("symmetric_dimensions", symmetric_dimensions),
        check("radical_conductors", radical_conductors),
        check("zero_counts", zero_counts),
        check("mod4_routes", || mod4_routes(samples, seed)),
        check("sieve", sieve),
        check("roichman", roichman),
    ];
    let mut t = Table::new(&["check", "status", "detail"]);
    for (name, r) in checks {
        let (status, detail) = match r {
            Ok(d) => ("pass", d),
            Err(d) => {
                out.failures.push(format!("{name}: {d}"));
                ("FAIL", d)
            }
        };
        out.line(format!("{status} {name}: {detail}"));
        t.push(vec![name, status.to_string(), detail]);
    }
    out.add("validate.csv", &t)
}
