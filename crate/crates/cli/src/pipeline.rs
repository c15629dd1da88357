//! Resolving a configuration into catalog extensions, race functions and zero data.

use std::collections::BTreeMap;
use std::path::Path;

use frobrace::bias::{bundled_zeros_for, default_zero_sets};
use frobrace::catalog::{
    cyclotomic_extension, dihedral_kluners, hilbert_class_field, multiquadratic_extension, quadratic_extension,
    radical_extension, ExtensionSpec,
};
use frobrace::zeros::{load_zeros, ZeroSet, DEFAULT_SLACK};
use frobrace::{build_group, Error, race_function, ClassFunction, Group, GroupSpec, RaceSpec};

use crate::config::Config;
use crate::CliError;

/// Default height for synthetic zeros.
pub const DEFAULT_HEIGHT: f64 = 200.0;

fn need<T: std::str::FromStr>(cfg: &Config, key: &str) -> Result<T, CliError> {
    cfg.parsed(key)?.ok_or_else(|| CliError::Config(format!("{key} is required for this family")))
}

fn list_u64(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Config(format!("bad integer '{s}'"))))
        .collect()
}

/// The extension named by `family.*`.
pub fn family_spec(cfg: &Config) -> Result<ExtensionSpec, CliError> {
    let name = cfg.get("family.name").ok_or_else(|| CliError::Config("family.name is required".into()))?;
    let spec = match name {
        "cyclotomic" => cyclotomic_extension(need(cfg, "family.q")?)?,
        "quadratic" => quadratic_extension(need(cfg, "family.d")?)?,
        "radical" => radical_extension(need(cfg, "family.a")?, need(cfg, "family.p")?)?,
        "multiquadratic" => {
            let primes = list_u64(cfg.get("family.primes").unwrap_or(""))?;
            multiquadratic_extension(&primes)?
        }
        "hilbert" => {
            let structure = cfg.get("family.structure").map(list_u64).transpose()?;
            hilbert_class_field(need(cfg, "family.d")?, structure)?
        }
        "kluners" => {
            dihedral_kluners(need(cfg, "family.ell")?, need(cfg, "family.d")?, need(cfg, "family.p")?, need(cfg, "family.q")?)?
                .spec
        }
        other => return Err(CliError::Config(format!("unknown family '{other}'"))),
    };
    Ok(spec)
}

/// A group from `group.spec`, e.g. `symmetric 6` or `abelian 2,2,2,2`.
pub fn group_from_config(cfg: &Config) -> Result<Option<Group>, CliError> {
    let Some(text) = cfg.get("group.spec") else { return Ok(None) };
    let spec = GroupSpec::parse(&format!("kind {text}"))?;
    Ok(Some(build_group(&spec)?))
}

fn class_by_label(g: &Group, label: &str) -> Result<usize, CliError> {
    g.class_index(label.trim()).ok_or_else(|| {
        let known: Vec<&str> = g.classes().iter().map(|c| c.label.as_str()).collect();
        CliError::Config(format!("unknown class '{label}' (classes: {})", known.join(" ")))
    })
}

/// Parses a race function: `race:C1,C2`, `race:C1` (C₂ = 0), `one-minus-r`,
/// or `values:v1,v2,…` in class order.
pub fn parse_t(g: &Group, text: &str) -> Result<ClassFunction, CliError> {
    let text = text.trim();
    if text == "one-minus-r" {
        return Ok(race_function(g, &RaceSpec::OneMinusR)?);
    }
    if let Some(rest) = text.strip_prefix("race:") {
        let parts: Vec<&str> = rest.split(',').collect();
        let spec = match parts.as_slice() {
            [a] => RaceSpec::Classes(class_by_label(g, a)?, None),
            [a, b] => RaceSpec::Classes(class_by_label(g, a)?, Some(class_by_label(g, b)?)),
            _ => return Err(CliError::Config(format!("bad race '{text}'"))),
        };
        return Ok(race_function(g, &spec)?);
    }
    if let Some(rest) = text.strip_prefix("values:") {
        let v: Result<Vec<f64>, _> = rest.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let v = v.map_err(|_| CliError::Config(format!("bad values in '{text}'")))?;
        return Ok(ClassFunction::from_real(g.clone(), &v)?);
    }
    Err(CliError::Config(format!("unrecognized t '{text}' (race:C1,C2 | race:C1 | one-minus-r | values:…)")))
}

pub fn race_t(cfg: &Config, g: &Group) -> Result<ClassFunction, CliError> {
    let text = cfg.get("race.t").ok_or_else(|| CliError::Config("race.t is required".into()))?;
    parse_t(g, text)
}

/// Where zeros come from: `bundled` (default; synthetic where nothing is
/// bundled), `synthetic`, plus `label=path` overrides by character label.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSource {
    pub use_bundled: bool,
    pub files: BTreeMap<String, String>,
    pub height: f64,
    /// Slack c in the zero-count check applied to loaded files.
    pub slack: f64,
}

impl ZeroSource {
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        let mut src = ZeroSource {
            use_bundled: true,
            files: BTreeMap::new(),
            height: cfg.parsed_or("zeros.height", DEFAULT_HEIGHT)?,
            slack: cfg.parsed_or("zeros.slack", DEFAULT_SLACK)?,
        };
        for item in cfg.get("zeros.source").unwrap_or("bundled").split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((label, path)) => {
                    src.files.insert(label.trim().to_string(), path.trim().to_string());
                }
                None if item == "bundled" => src.use_bundled = true,
                None if item == "synthetic" => src.use_bundled = false,
                None => return Err(CliError::Config(format!("bad zero source '{item}'"))),
            }
        }
        if !(src.height >= 1.0) {
            return Err(CliError::Config("zeros.height must be >= 1".into()));
        }
        if !(src.slack > 0.0) {
            return Err(CliError::Config("zeros.slack must be positive".into()));
        }
        Ok(src)
    }
}

fn cache_key(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

/// Zero sets for the characters of G⁺ in `chars`. Synthetic sets pass
/// through the cache (when configured) so that cached and fresh runs read
/// identical text.
pub fn zero_sets(
    spec: &ExtensionSpec,
    chars: &[usize],
    src: &ZeroSource,
    seed: u64,
    cache: Option<&Path>,
) -> Result<BTreeMap<usize, ZeroSet>, CliError> {
    let gp = spec.group_plus();
    if let Some(unknown) = src.files.keys().find(|k| !gp.char_labels().contains(k)) {
        return Err(CliError::Config(format!(
            "zero file for unknown character '{unknown}' (characters: {})",
            gp.char_labels().join(" ")
        )));
    }
    let mut out = BTreeMap::new();
    for &chi in chars {
        let label = &gp.char_labels()[chi];
        if let Some(path) = src.files.get(label) {
            let mut z = load_zeros(Path::new(path))?;
            if z.log_conductor.is_none() {
                z.log_conductor = spec.log_conductor(chi).ok();
            }
            z.degree.get_or_insert((gp.degree(chi) * spec.degree_k) as u32);
            if z.log_conductor.is_some() {
                let check = z.validate_count(src.slack)?;
                if !check.ok {
                    return Err(CliError::Core(Error::Invariant(format!(
                        "{path}: zero count {} deviates from {:.3} by {:.3} (allowed {:.3})",
                        check.count, check.mainterm, check.deviation, check.allowed
                    ))));
                }
            }
            out.insert(chi, z);
            continue;
        }
        if src.use_bundled {
            if let Some(z) = bundled_zeros_for(spec, chi) {
                out.insert(chi, z);
                continue;
            }
        }
        let mut synth = default_zero_sets(spec, &[chi], src.height, seed)?;
        let z = synth.remove(&chi).expect("requested character");
        let z = match cache {
            Some(dir) => {
                let path = dir.join(cache_key(&z.label)).join(format!("{:.3}-{seed}.zeros", src.height));
                if !path.exists() {
                    z.save(&path)?;
                }
                let mut c = load_zeros(&path)?;
                c.label = z.label.clone();
                c
            }
            None => z,
        };
        out.insert(chi, z);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn race_labels_on_units_mod_4() {
        let mut c = Config::default();
        c.set("family.name", "cyclotomic").unwrap();
        c.set("family.q", "4").unwrap();
        let spec = family_spec(&c).unwrap();
        let t = parse_t(spec.group(), "race:3,1").unwrap();
        assert!((t.fourier_at(1).re + 2.0).abs() < 1e-12);
        assert!(parse_t(spec.group(), "race:2,1").is_err());
        assert!(parse_t(spec.group(), "values:1,2").is_ok());
    }

    #[test]
    fn zero_source_parsing() {
        let mut c = Config::default();
        c.set("zeros.source", "synthetic,chi[1]=/tmp/z.zeros").unwrap();
        let s = ZeroSource::from_config(&c).unwrap();
        assert!(!s.use_bundled);
        assert_eq!(s.files.get("chi[1]").map(String::as_str), Some("/tmp/z.zeros"));
    }
}
