//! End-to-end runs of the `beltrami` binary on temporary configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beltrami_core::jets::{Jet3, MetricJet};
use beltrami_core::Rational;
use serde_json::Value;
use tempfile::TempDir;

fn beltrami(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beltrami"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_config(sub: &str, path: &Path) -> Output {
    beltrami(&[sub, path.to_str().unwrap()])
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn contracts(r: &Value) -> &Vec<Value> {
    r["contracts"].as_array().unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.records().map(|r| r.unwrap()).collect()
}

/// `g_αβ = (1 + xⁿ/2)δ_αβ + x¹xⁿ/4 (dx¹ ⊗ dx² + dx² ⊗ dx¹)` to order 6.
fn conformal_metric_json() -> String {
    let order = 6;
    let q = Rational::new;
    let diag = Jet3::from_terms(order, [([0, 0, 0], q(1, 1)), ([0, 0, 1], q(1, 2))]);
    let off = Jet3::from_terms(order, [([1, 0, 1], q(1, 4))]);
    MetricJet::from_tangential(diag.clone(), off, diag)
        .unwrap()
        .to_json()
}

#[test]
fn roundtrip_on_the_bundled_jet_is_exact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "rt.toml", "command = \"roundtrip\"\n");
    let out = run_config("roundtrip", &cfg);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("out");
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        dir.join("report.json").display().to_string()
    );
    let r = report(&dir);
    assert_eq!(r["mode"], "exact");
    assert_eq!(r["passed"], true);
    for c in contracts(&r) {
        let name = c["name"].as_str().unwrap();
        if name.starts_with("stage_rank") {
            assert_eq!(c["measured"], c["bound"]);
        } else {
            assert_eq!(c["measured"].as_f64(), Some(0.0), "{name}");
        }
    }
    let rows = csv_rows(&dir.join("roundtrip.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|row| row[2].parse::<f64>().unwrap() == 0.0));
    assert!(dir.join("stages.csv").exists() && dir.join("explicit.csv").exists());
}

#[test]
fn exact_reports_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let body = "command = \"roundtrip\"\nseed = 7\n[roundtrip]\norder = 4\nkmax = 2\nrandom = 2\nlambda = \"3/2\"\n";
    let cfg = write_config(tmp.path(), "rt.toml", body);
    let mut reports = Vec::new();
    for _ in 0..2 {
        let out = run_config("run", &cfg);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let dir = tmp.path().join("out");
        reports.push((
            fs::read(dir.join("report.json")).unwrap(),
            fs::read(dir.join("roundtrip.csv")).unwrap(),
            fs::read(dir.join("stages.csv")).unwrap(),
        ));
    }
    assert!(reports[0] == reports[1]);
}

#[test]
fn report_keys_are_sorted_and_echo_only_the_active_section() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "rt.toml",
        "command = \"roundtrip\"\n[roundtrip]\norder = 3\nkmax = 1\n",
    );
    assert_eq!(run_config("run", &cfg).status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("out/report.json")).unwrap();
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    let r: Value = serde_json::from_str(&text).unwrap();
    let config = r["config"].as_object().unwrap();
    assert!(config.contains_key("roundtrip"));
    assert!(!config.contains_key("slab") && !config.contains_key("bfield"));
    assert!(r["versions"]["beltrami-core"].is_string());
}

#[test]
fn missing_input_file_exits_2_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sym.toml",
        "command = \"symbols\"\n[inputs]\nmetrics = [\"absent.json\"]\n",
    );
    let out = run_config("symbols", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn malformed_configurations_exit_2() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            "unknown.toml",
            "command = \"slab\"\n[slab]\nthicknes = 2.0\n",
        ),
        ("exact.toml", "command = \"bfield\"\nmode = \"exact\"\n"),
        (
            "lambda.toml",
            "command = \"symbols\"\n[symbols]\nlambda = \"one\"\n",
        ),
        (
            "bottom.toml",
            "command = \"symbols\"\n[symbols]\nbottom = 1\n",
        ),
        ("recover.toml", "command = \"recover\"\n"),
        ("nonsense.toml", "command = [\n"),
        (
            "negative.toml",
            "command = \"slab\"\n[tolerances]\ncurl = -1.0\n",
        ),
    ];
    for (name, body) in cases {
        let cfg = write_config(tmp.path(), name, body);
        let out = run_config("run", &cfg);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn subcommand_must_match_the_configuration() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "rt.toml", "command = \"roundtrip\"\n");
    let out = run_config("slab", &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
    assert_eq!(beltrami(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn euclidean_slab_decays_like_the_principal_symbol() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "slab.toml",
        "command = \"slab\"\n[slab]\nlambda = 1.0\n",
    );
    let out = run_config("slab", &cfg);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("out");
    let r = report(&dir);
    assert_eq!(r["mode"], "float");
    let slope = r["results"]["fits"]["0"]["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() <= 0.1, "slope {slope}");
    let slope1 = r["results"]["fits"]["1"]["slope"].as_f64().unwrap();
    assert!((slope1 + 2.0).abs() <= 0.2, "slope {slope1}");

    let rows = csv_rows(&dir.join("decay.csv"));
    let principal: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| &row[0] == "0")
        .map(|row| (row[1].parse().unwrap(), row[2].parse().unwrap()))
        .collect();
    assert_eq!(principal.len(), 9);
    // Independent two-point slope from the CSV.
    let (a, b) = (principal[0], principal[8]);
    let csv_slope = (b.1 / a.1).ln() / (b.0 / a.0).ln();
    assert!((csv_slope + 1.0).abs() <= 0.1, "slope {csv_slope}");
    assert_eq!(csv_rows(&dir.join("modes.csv")).len(), 9);
    assert_eq!(csv_rows(&dir.join("fields.csv")).len(), 2);
}

#[test]
fn curved_slab_profiles_are_accepted() {
    let tmp = TempDir::new().unwrap();
    let body = "command = \"slab\"\n[slab]\nlambda = 0.5\ndirection = [1.0, 1.0]\n[slab.profile]\nname = \"conformal\"\na = 0.3\n";
    let cfg = write_config(tmp.path(), "slab.toml", body);
    let out = run_config("slab", &cfg);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn failed_contract_exits_1_and_still_writes_the_report() {
    let tmp = TempDir::new().unwrap();
    let body = "command = \"slab\"\n[tolerances]\nprincipal_slope = 1e-9\n";
    let cfg = write_config(tmp.path(), "slab.toml", body);
    let out = run_config("slab", &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("decay_slope[M=0]"));
    let r = report(&tmp.path().join("out"));
    assert_eq!(r["passed"], false);
    let failed: Vec<&str> = contracts(&r)
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["decay_slope[M=0]"]);
}

#[test]
fn singular_slab_frequency_exits_3_without_outputs() {
    let tmp = TempDir::new().unwrap();
    // λ² = |ξ|² + (π/L)² for ξ = 2π·(1, 0) and L = 1.
    let lambda = std::f64::consts::PI * 5f64.sqrt();
    let body = format!(
        "command = \"slab\"\n[slab]\nlambda = {lambda:?}\nmultiples = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]\n"
    );
    let cfg = write_config(tmp.path(), "slab.toml", &body);
    let out = run_config("slab", &cfg);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn symbols_feed_recovery() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("conf.json"), conformal_metric_json()).unwrap();
    let sym = write_config(
        tmp.path(),
        "sym.toml",
        "command = \"symbols\"\noutput_dir = \"sym\"\n[inputs]\nmetrics = [\"conf.json\"]\n[symbols]\nlambda = \"2/3\"\n",
    );
    let out = run_config("symbols", &sym);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let sdir = tmp.path().join("sym");
    assert!(sdir.join("dn_conf.json").exists());
    let r = report(&sdir);
    assert!(contracts(&r)
        .iter()
        .all(|c| c["measured"].as_f64() == Some(0.0)));
    assert_eq!(r["results"]["metrics"]["conf"]["sigma_mode"], "beltrami");

    let rec = write_config(
        tmp.path(),
        "rec.toml",
        "command = \"recover\"\noutput_dir = \"rec\"\n[inputs]\nsymbol = \"sym/nt_conf.json\"\nmetrics = [\"conf.json\"]\n",
    );
    let out = run_config("recover", &rec);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rdir = tmp.path().join("rec");
    let r = report(&rdir);
    assert_eq!(r["results"]["lambda"], "2/3");
    let compared: Vec<&Value> = contracts(&r)
        .iter()
        .filter(|c| {
            c["name"]
                .as_str()
                .unwrap()
                .starts_with("recovered_vs_reference")
        })
        .collect();
    assert_eq!(compared.len(), 4);
    assert!(compared.iter().all(|c| c["measured"].as_f64() == Some(0.0)));

    let recovered = fs::read_to_string(rdir.join("recovered_metric_nt_conf.json")).unwrap();
    let m = MetricJet::<Rational>::from_json(&recovered).unwrap();
    let original = MetricJet::<Rational>::from_json(&conformal_metric_json()).unwrap();
    assert_eq!(
        m.g_inv(0, 0).coeff([0, 0, 1]),
        original.g_inv(0, 0).coeff([0, 0, 1])
    );
}

#[test]
fn float_roundtrip_on_random_jets_passes() {
    let tmp = TempDir::new().unwrap();
    let body = "command = \"roundtrip\"\nmode = \"float\"\nseed = 3\n[roundtrip]\nrandom = 3\n";
    let cfg = write_config(tmp.path(), "rt.toml", body);
    let out = run_config("roundtrip", &cfg);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&tmp.path().join("out"));
    assert_eq!(r["mode"], "float");
    assert_eq!(r["results"]["jets"].as_array().unwrap().len(), 3);
}

#[test]
fn bfield_and_embedding_defaults_pass() {
    let tmp = TempDir::new().unwrap();
    for (name, body) in [
        ("bf.toml", "command = \"bfield\"\noutput_dir = \"bf\"\n"),
        ("em.toml", "command = \"embed\"\noutput_dir = \"em\"\n"),
    ] {
        let cfg = write_config(tmp.path(), name, body);
        let out = run_config("run", &cfg);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let rows = csv_rows(&tmp.path().join("bf/approach.csv"));
    assert_eq!(rows.len(), 24);
    let r = report(&tmp.path().join("em"));
    assert_eq!(r["passed"], true);
    assert!(contracts(&r)
        .iter()
        .any(|c| c["name"] == "min_rank" && c["measured"].as_f64() == Some(5.0)));
}

#[test]
fn shipped_configurations_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        seen += 1;
        let config =
            beltrami_cli::RunConfig::from_toml(&fs::read_to_string(&path).unwrap()).unwrap();
        if config.command != beltrami_cli::Command::Recover {
            beltrami_cli::RunConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }
    assert_eq!(seen, 7);
}
