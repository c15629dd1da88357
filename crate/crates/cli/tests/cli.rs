use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use frobrace::bias::BiasModel;
use frobrace_cli::output::{phi_table, race_plot_table, Header};
use frobrace_cli::{EXIT_INVALID, EXIT_INVARIANT, EXIT_MISSING};

fn frobrace(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobrace"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FROBRACE_CACHE_DIR")
        .output()
        .unwrap()
}

fn body_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect()
}

#[test]
fn validate_on_empty_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = frobrace(&["validate"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = body_rows(&dir.path().join("validate.csv"));
    assert!(rows.len() >= 7);
    assert!(rows.iter().all(|r| r.contains(",pass,")), "{rows:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| frobrace(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["bias", "--family", "radical", "--a", "2", "--p", "3", "--t", "race:U,id"]), EXIT_INVALID);
    assert_eq!(code(&["density", "--family", "cyclotomic", "--q", "4"]), EXIT_INVALID);
    assert_eq!(code(&["density", "--family", "nonsense"]), EXIT_INVALID);
    assert_eq!(code(&["density", "--family", "cyclotomic", "--q", "4", "--t", "race:3,7"]), EXIT_INVALID);
    assert_eq!(
        code(&["density", "--family", "cyclotomic", "--q", "4", "--t", "race:3,1", "--zeros", "X2=/nonexistent/z.zeros"]),
        EXIT_MISSING
    );
    let bad = dir.path().join("bad.zeros");
    fs::write(&bad, "# height: 500\n6.02 1\n").unwrap();
    let arg = format!("X2={}", bad.display());
    assert_eq!(code(&["density", "--family", "cyclotomic", "--q", "4", "--t", "race:3,1", "--zeros", &arg]), EXIT_INVARIANT);
}

#[test]
fn radical_conductor_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = frobrace(&["table", "--family", "radical", "--a", "3", "--p", "5"], dir.path());
    assert!(o.status.success());
    let rows = body_rows(&dir.path().join("conductors.csv"));
    assert_eq!(rows.len(), 5);
    let eta = rows.iter().find(|r| r.starts_with("eta,")).unwrap();
    let f: Vec<&str> = eta.split(',').collect();
    assert_eq!(&f[1..4], &["4", "5", "4"]);
    let want = 4.0 * 3f64.ln() + 5.0 * 5f64.ln();
    assert!((f[4].parse::<f64>().unwrap() - want).abs() < 1e-9);
}

#[test]
fn every_csv_has_the_header_block() {
    let dir = tempfile::tempdir().unwrap();
    let o = frobrace(&["density", "--family", "cyclotomic", "--q", "4", "--t", "race:3,1", "--samples", "20000"], dir.path());
    assert!(o.status.success());
    for file in ["density.csv", "phi.csv"] {
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        for key in ["# config_hash: ", "# assumptions: ", "# truncation_heights: ", "# noncertified: "] {
            assert!(text.contains(key), "{file} lacks {key}");
        }
    }
    let phi = body_rows(&dir.path().join("phi.csv"));
    assert_eq!(phi[0], "0,1");
    let density = body_rows(&dir.path().join("density.csv"));
    assert!(density[0].starts_with("inversion,0.996"));
}

#[test]
fn race_rows_follow_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["race", "--family", "cyclotomic", "--q", "4", "--t", "race:3,1", "--xmax", "1e6", "--checkpoints", "150"];
    let o = frobrace(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(body_rows(&dir.path().join("race.csv")).len(), 150);
    assert_eq!(body_rows(&dir.path().join("race_plot.csv")).len(), 150);
    let last = body_rows(&dir.path().join("race.csv")).pop().unwrap();
    assert!(last.starts_with("1000000,"));
    assert!(last.contains(",78498,"));
}

#[test]
fn plot_tables() {
    let empty = race_plot_table(None, None);
    assert!(empty.rows.is_empty());
    let csv = empty.to_csv().unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert_eq!(csv.trim_end(), "y,E,running_density");
    let mut h = Header::default();
    h.push("command", "race");
    let dir = tempfile::tempdir().unwrap();
    let path = frobrace_cli::output::Artifact::table("race_plot.csv", &empty).unwrap().write(dir.path(), &h).unwrap();
    assert_eq!(body_rows(&path).len(), 0);

    let m = BiasModel::from_amplitudes("toy", 1.0, &[0.5, 0.25, 0.125]);
    let phi = phi_table(&m, 10.0, 64);
    assert_eq!(phi.rows.len(), 64);
    assert_eq!(phi.rows[0], vec!["0".to_string(), "1".to_string()]);
}

#[test]
fn config_file_and_cache_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    let cache_cfg = dir.path().join("cache-from-config");
    let cache_env = dir.path().join("cache-from-env");
    fs::write(
        &cfg,
        format!(
            "[family]\nname = radical\na = 3\np = 5\n\n[race]\nt = race:U,id\n\n[zeros]\nsource = synthetic\nheight = 60\n\n[model]\nsamples = 20000\n\n[run]\ncache_dir = {}\n",
            cache_cfg.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = |env: Option<&Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_frobrace"));
        c.args(["bias", "--config"]).arg(&cfg).arg("--out").arg(&out).env_remove("FROBRACE_CACHE_DIR");
        if let Some(e) = env {
            c.env("FROBRACE_CACHE_DIR", e);
        }
        c.output().unwrap()
    };
    let first = run(None);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(fs::read_dir(&cache_cfg).unwrap().count() > 0);
    let bias_first = fs::read_to_string(out.join("bias.csv")).unwrap();
    let again = run(Some(&cache_env));
    assert!(again.status.success());
    assert!(fs::read_dir(&cache_env).unwrap().count() > 0);
    assert_eq!(fs::read_to_string(out.join("bias.csv")).unwrap(), bias_first);
    assert_eq!(first.stdout, again.stdout);

    let typo = dir.path().join("typo.ini");
    fs::write(&typo, "[family]\nnmae = radical\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frobrace")).args(["bias", "--config"]).arg(&typo).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
}
