use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use noma_oqc_harness::output::RunOutput;
use noma_oqc_harness::presets;
use noma_oqc_harness::scenario::{Overrides, Scenario};
use noma_oqc_harness::{execute, Command};

const BIN: &str = env!("CARGO_BIN_EXE_noma-oqc");

fn command(name: &str) -> Command {
    match name {
        "rate" => Command::Rate,
        "allocate" => Command::Allocate,
        "sweep" => Command::Sweep,
        "region" => Command::Region,
        "limits" => Command::Limits,
        "qam" => Command::Qam { order: None },
        _ => panic!("{name}"),
    }
}

fn run_preset(name: &str, threads: usize) -> RunOutput {
    let scenario = Scenario::load(Some(name), None, &Overrides::default()).unwrap();
    execute(&command(presets::command_for(name).unwrap()), &scenario, threads).unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("noma-oqc-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn golden_dir(preset: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(preset)
}

/// Set NOMA_OQC_BLESS=1 to rewrite the stored tables after an intended change.
#[test]
fn presets_match_golden_tables() {
    let bless = std::env::var_os("NOMA_OQC_BLESS").is_some();
    for name in presets::NAMES {
        let out = run_preset(name, 2);
        let dir = golden_dir(name);
        if bless {
            fs::create_dir_all(&dir).unwrap();
        }
        for t in &out.tables {
            let got = String::from_utf8(t.to_csv().unwrap()).unwrap();
            let path = dir.join(&t.name);
            if bless {
                fs::write(&path, &got).unwrap();
                continue;
            }
            let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(got == want, "{name}/{} differs from the stored table", t.name);
        }
    }
}

#[test]
fn thread_count_does_not_change_tables() {
    for name in ["fig2", "fig7", "fig9"] {
        let one = run_preset(name, 1);
        let many = run_preset(name, 5);
        for (a, b) in one.tables.iter().zip(&many.tables) {
            assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap(), "{name}/{}", a.name);
        }
        assert_eq!(one.warnings, many.warnings);
    }
}

#[test]
fn binary_writes_tables_and_manifest() {
    let out = scratch("limits");
    let status = Process::new(BIN)
        .args(["limits", "--preset", "fig8", "--threads", "2"])
        .env("NOMA_OQC_OUT", &out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "limits");
    assert_eq!(manifest["preset"], "fig8");
    assert_eq!(manifest["threads"], 2);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    assert_eq!(outputs[0]["file"], "limits.csv");
    let body = fs::read(out.join("limits.csv")).unwrap();
    assert_eq!(outputs[0]["sha256"], noma_oqc_harness::output::sha256_hex(&body));
    assert!(String::from_utf8(body)
        .unwrap()
        .starts_with("mean_photons,holevo_bits,"));
    let scenario = fs::read_to_string(out.join("scenario.toml")).unwrap();
    assert_eq!(
        manifest["scenario_sha256"],
        noma_oqc_harness::output::sha256_hex(scenario.as_bytes())
    );
    fs::remove_dir_all(out).unwrap();
}

#[test]
fn flags_override_file_values() {
    let out = scratch("override");
    let file = out.with_extension("toml");
    fs::write(
        &file,
        "seed = 5\n[system]\nusers = 2\nmax_bs_power = 8.0\n[channel]\nsigma_x = 0.3\ndistance = 60.0\nrealizations = 4\n",
    )
    .unwrap();
    let status = Process::new(BIN)
        .args([
            "allocate",
            "--algorithm",
            "enp",
            "--seed",
            "11",
            "--realizations",
            "3",
            "--out",
        ])
        .arg(&out)
        .arg("--scenario")
        .arg(&file)
        .env_remove("NOMA_OQC_OUT")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["realizations"], 3);
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("path loss")));
    let resolved = Scenario::from_toml(&fs::read_to_string(out.join("scenario.toml")).unwrap()).unwrap();
    assert_eq!(resolved.solver.algorithm, "enp");
    assert_eq!(resolved.system.max_bs_power, 8.0);
    let alloc = fs::read_to_string(out.join("allocation.csv")).unwrap();
    assert_eq!(alloc.lines().count(), 1 + 3 * 2);
    for line in alloc.lines().skip(1) {
        // equal photon numbers under the amplitude-sum cap: P / K^2
        assert_eq!(line.split(',').nth(4), Some("2"), "{line}");
    }
    fs::remove_dir_all(out).unwrap();
    fs::remove_file(file).unwrap();
}

#[test]
fn missing_scenario_is_a_usage_error() {
    let status = Process::new(BIN)
        .arg("rate")
        .env_remove("NOMA_OQC_OUT")
        .output()
        .unwrap();
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("--preset"));
    let status = Process::new(BIN).args(["region", "--preset", "fig2"]).output().unwrap();
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("two users"));
}

#[test]
fn rate_reports_bounds_and_band() {
    let mut s = Scenario::load(Some("fig6"), None, &Overrides::default()).unwrap();
    s.system.amplitudes = Some(vec![2.0, 1.0]);
    let out = execute(&Command::Rate, &s, 1).unwrap();
    let t = out.table("rate.csv").unwrap();
    assert_eq!(t.rows.len(), 1);
    let col = |h: &str| t.rows[0][t.header.iter().position(|x| *x == h).unwrap()].clone();
    let exact: f64 = col("exact").parse().unwrap();
    assert!((exact - 0.752_690_872_086_625_4).abs() < 1e-11);
    let lo: f64 = col("lower_ga").parse().unwrap();
    let hi: f64 = col("upper_ga").parse().unwrap();
    assert!(lo < hi);
}

#[test]
fn region_corners_and_symmetry() {
    let mut s = Scenario::load(Some("fig6"), None, &Overrides::default()).unwrap();
    s.channel.gains = Some(vec![1.0, 1.0]);
    let out = execute(&Command::Region, &s, 1).unwrap();
    let poly = out.table("region.csv").unwrap();
    let point = |label: &str| {
        let r = poly.rows.iter().find(|r| r[0] == "noma" && r[1] == label).unwrap();
        (r[2].parse::<f64>().unwrap(), r[3].parse::<f64>().unwrap())
    };
    let (a, b) = (point("A"), point("B"));
    assert!((a.0 - b.1).abs() < 1e-12 && (a.1 - b.0).abs() < 1e-12);
    let summary = out.table("region_summary.csv").unwrap();
    assert_eq!(summary.rows[0].last().unwrap(), "true");
}

#[test]
fn qam_single_order_flag() {
    let s = Scenario::load(Some("fig9"), None, &Overrides::default()).unwrap();
    let out = execute(&Command::Qam { order: Some(16) }, &s, 2).unwrap();
    let t = out.table("qam.csv").unwrap();
    assert!(t.rows.iter().all(|r| r[0] == "16"));
    assert_eq!(t.rows[0][5], "0");
}
