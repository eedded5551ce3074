//! Config file in, artifacts out.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ehf::gaussian::{self, spectral_decompose};
use ehf::lattice::{self, Boundary, LatticeSpec, Occupation, Region};
use ehf::{hyperfine, io};
use serde_json::Value;

const CHAIN: &str = r#"
experiment = "chain"
orders = [1.0, 2.0]
cumulants = [2, 4, 6]

[chain]
length = 40
boundary = "open"
filling = 0.5

[region]
x0 = 10
width = 12
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ehf-pipeline-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn chain_run_writes_one_csv_per_field() {
    let dir = scratch("chain");
    let out = io::run(&write_config(&dir, &format!("output_dir = \"out\"\n{CHAIN}")));
    assert_eq!(out.code, 0, "{}", out.message);
    let mut csvs: Vec<String> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csvs.sort();
    assert_eq!(
        csvs,
        [
            "field_cumulant_k2.csv",
            "field_cumulant_k4.csv",
            "field_cumulant_k6.csv",
            "field_renyi_n2.csv",
            "field_vonNeumann_n1.csv"
        ]
    );
}

#[test]
fn summary_agrees_with_the_csv_files() {
    let dir = scratch("consistency");
    let out = io::run(&write_config(&dir, &format!("output_dir = \"out\"\n{CHAIN}")));
    assert_eq!(out.code, 0);
    let s = summary(&dir.join("out"));
    for (file, key) in [("field_vonNeumann_n1.csv", "S_1"), ("field_renyi_n2.csv", "S_2")] {
        let rows = io::parse_field_csv(&fs::read_to_string(dir.join("out").join(file)).unwrap()).unwrap();
        let total: f64 = rows.iter().map(|r| r.value).sum();
        let s_n = s["entropies"][key].as_f64().unwrap();
        assert!((total - s_n).abs() < 1e-12, "{key}: {total} vs {s_n}");
    }
    for k in [2, 4, 6] {
        let rows =
            io::parse_field_csv(&fs::read_to_string(dir.join("out").join(format!("field_cumulant_k{k}.csv"))).unwrap())
                .unwrap();
        let total: f64 = rows.iter().map(|r| r.value).sum();
        let chi = s["cumulant_totals"][format!("C_{k}")][1].as_f64().unwrap();
        assert!((total - chi).abs() < 1e-10);
        let logged = s["residuals"][format!("cumulant_total_k{k}")]["value"]
            .as_f64()
            .unwrap();
        assert!(((total - chi).abs() - logged).abs() < 1e-12);
    }

    // Independent recomputation from the library.
    let m =
        lattice::build_chain_correlation(&LatticeSpec::chain(40, Boundary::Open, Occupation::Filling(0.5))).unwrap();
    let sd = spectral_decompose(&m.restrict(&Region::interval(10, 12)).unwrap()).unwrap();
    let s1 = gaussian::entropy(&sd, 1.0, false).unwrap().value;
    assert!((s1 - s["entropies"]["S_1"].as_f64().unwrap()).abs() < 1e-13);
    let c2: f64 = hyperfine::cumulant_density_field(&sd, 2).unwrap().values.iter().sum();
    assert!((c2 - s["cumulant_totals"]["C_2"][0].as_f64().unwrap()).abs() < 1e-13);
}

#[test]
fn unknown_key_exits_2_with_its_line() {
    let dir = scratch("unknown");
    let body = CHAIN.replace("filling = 0.5", "filling = 0.5\nfillng = 0.5");
    let out = io::run(&write_config(&dir, &body));
    assert_eq!(out.code, 2);
    assert!(out.message.contains("line 10"), "{}", out.message);
    assert!(out.message.contains("fillng"), "{}", out.message);
    assert!(out.summary.is_none());
}

#[test]
fn degenerate_fermi_level_exits_1_and_records_the_error() {
    let dir = scratch("degenerate");
    let body = format!("output_dir = \"out\"\n{}", CHAIN.replace("\"open\"", "\"periodic\""));
    let out = io::run(&write_config(&dir, &body));
    assert_eq!(out.code, 1, "{}", out.message);
    let s = summary(&dir.join("out"));
    assert_eq!(s["status"], "error");
    assert!(s["error"].as_str().unwrap().to_lowercase().contains("degenera"));
}

#[test]
fn recon_config_reconstructs_the_block_spectrum() {
    let dir = scratch("recon");
    let body = r#"
experiment = "recon"
output_dir = "out"

[chain]
length = 20
boundary = "open"
chemical_potential = 0.2

[region]
x0 = 5
width = 3
"#;
    let out = io::run(&write_config(&dir, body));
    assert_eq!(out.code, 0, "{}", out.message);
    let s = out.summary.unwrap();
    assert!(s.residuals["spectrum_vs_product"].value < 1e-10);
}

#[test]
fn oversized_recon_region_is_a_config_error() {
    let dir = scratch("recon-wide");
    let body = "experiment = \"recon\"\n[chain]\nlength = 20\nboundary = \"open\"\nfilling = 0.5\n[region]\nx0 = 2\nwidth = 9\n";
    let out = io::run(&write_config(&dir, body));
    assert_eq!(out.code, 2);
    assert!(out.message.contains("line 8"), "{}", out.message);
}

#[test]
fn binary_honours_output_override_and_plots_cross_sections() {
    let dir = scratch("binary");
    let target = dir.join("elsewhere");
    let cfg = write_config(
        &dir,
        r#"
experiment = "chern-torus"
orders = [2.0]
cumulants = [2]

[chern]
m = 1.0
mu = 0.0
lx = 12
ly = 12
chern_grid = 24

[region]
x0 = 2
width = 8
y0 = 2
height = 8
"#,
    );
    let status = Command::new(env!("CARGO_BIN_EXE_ehf"))
        .arg("run")
        .arg(&cfg)
        .env(io::OUTPUT_ENV, &target)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(target.join("summary.json").exists());
    assert!(!dir.join("out").exists());

    let csv = target.join("field_hyperfine_n2_k2.csv");
    let plot = Command::new(env!("CARGO_BIN_EXE_ehf"))
        .args(["plotdata", csv.to_str().unwrap(), "--cross-section", "6"])
        .output()
        .unwrap();
    assert!(plot.status.success());
    let text = String::from_utf8(plot.stdout).unwrap();
    assert!(text.starts_with("# "), "{text}");
    let data: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert_eq!(data.len(), 8);

    let bad = Command::new(env!("CARGO_BIN_EXE_ehf"))
        .args(["run", "/nonexistent/run.toml"])
        .status()
        .unwrap();
    assert_eq!(bad.code(), Some(2));
}
