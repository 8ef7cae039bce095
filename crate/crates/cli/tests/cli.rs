use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scdd_cli::config::PipelineConfig;
use scdd_cli::manifest::Manifest;

const DESK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/desk");
const DESK_INPUTS: [&str; 7] = [
    "sbs.csv",
    "iot.csv",
    "trade.csv",
    "concordance.csv",
    "violations_child_forced_labor.csv",
    "violations_lawsuits.csv",
    "scdd.toml",
];
const REPORTS: [&str; 9] = [
    "firms.csv",
    "network.scdn",
    "validation.json",
    "risk_child_forced_labor.csv",
    "risk_lawsuits.csv",
    "exposure_child_forced_labor.csv",
    "exposure_lawsuits.csv",
    "monitoring.json",
    "resolved_config.toml",
];

/// Copy of the desk fixture in a scratch directory.
fn desk() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in DESK_INPUTS {
        fs::copy(Path::new(DESK).join(f), dir.path().join(f)).unwrap();
    }
    dir
}

fn scdd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scdd"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    fs::read(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

fn run_desk(dir: &Path, out: &str) -> PathBuf {
    ok(scdd(dir, &["--config", "scdd.toml", "--out", out, "run"]));
    dir.join(out)
}

#[test]
fn desk_run_writes_every_report_and_matches_golden() {
    let d = desk();
    let out = run_desk(d.path(), "out");
    for f in REPORTS {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    for f in [
        "risk_child_forced_labor.csv",
        "risk_lawsuits.csv",
        "exposure_child_forced_labor.csv",
        "exposure_lawsuits.csv",
    ] {
        assert_eq!(
            String::from_utf8(read(out.join(f))).unwrap(),
            String::from_utf8(read(Path::new(DESK).join("golden").join(f))).unwrap(),
            "{f}"
        );
    }
    let partials: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".partial"))
        .collect();
    assert!(partials.is_empty());
}

#[test]
fn manifest_records_checksums_and_drops() {
    let d = desk();
    let out = run_desk(d.path(), "out");
    let m = Manifest::read(&out.join("manifest_run.json")).unwrap();
    assert_eq!(m.command, "run");
    assert_eq!(m.seed, 7);
    assert_eq!(m.inputs.len(), 6);
    assert_eq!(m.outputs.len(), REPORTS.len());
    for o in &m.outputs {
        let (sha, bytes) = scdd_cli::manifest::sha256_file(&out.join(&o.path)).unwrap();
        assert_eq!((sha.as_str(), bytes), (o.sha256.as_str(), o.bytes), "{}", o.path);
    }
    // the EU-origin trade row is dropped and counted
    let dropped = &m.details["ingest"]["files"]["trade"]["dropped"];
    assert!(dropped.as_u64().unwrap() > 0, "{dropped}");
    let stages: Vec<&str> = m.stages.iter().map(|s| s.stage.as_str()).collect();
    assert!(stages.starts_with(&["ingest", "sample", "build", "validate"]));
}

#[test]
fn missing_input_is_exit_2_and_names_the_file() {
    let d = desk();
    fs::remove_file(d.path().join("iot.csv")).unwrap();
    let out = scdd(d.path(), &["--config", "scdd.toml", "run"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("iot.csv"), "{err}");
    assert!(!d.path().join("out").join("manifest_run.json").exists());
}

#[test]
fn missing_config_is_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let out = scdd(d.path(), &["--config", "nope.toml", "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn corrupted_network_is_exit_3() {
    let d = desk();
    let out = run_desk(d.path(), "out");
    let net = out.join("network.scdn");

    // a bad magic number fails even without a manifest to compare against
    let mut bytes = read(&net);
    bytes[0] = b'X';
    let elsewhere = d.path().join("loose");
    fs::create_dir(&elsewhere).unwrap();
    fs::write(elsewhere.join("network.scdn"), &bytes).unwrap();
    fs::copy(out.join("firms.csv"), elsewhere.join("firms.csv")).unwrap();
    let r = scdd(d.path(), &["--config", "scdd.toml", "--out", "r1", "risk", "--network", "loose/network.scdn"]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));

    // a well-formed file that no longer matches its manifest
    let mut bytes = read(&net);
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&net, &bytes).unwrap();
    let r = scdd(d.path(), &["--config", "scdd.toml", "--out", "r2", "risk", "--network", "out/network.scdn"]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("network.scdn"));
}

#[test]
fn node_table_from_another_run_is_exit_3() {
    let d = desk();
    let a = run_desk(d.path(), "a");
    ok(scdd(d.path(), &["--config", "scdd.toml", "--out", "b", "--seed", "8", "run"]));
    fs::copy(d.path().join("b/firms.csv"), a.join("firms.csv")).unwrap();
    let r = scdd(d.path(), &["--config", "scdd.toml", "--out", "r", "exposure", "--network", "a/network.scdn"]);
    // seed 8 draws other sizes, so the table differs from the recorded one
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn risk_on_existing_network_reproduces_run() {
    let d = desk();
    let out = run_desk(d.path(), "out");
    ok(scdd(d.path(), &["--config", "scdd.toml", "--out", "again", "risk", "--network", "out/network.scdn"]));
    ok(scdd(d.path(), &["--config", "scdd.toml", "--out", "again", "exposure", "--network", "out/network.scdn"]));
    ok(scdd(d.path(), &["--config", "scdd.toml", "--out", "again", "validate", "--network", "out/network.scdn"]));
    for f in [
        "risk_child_forced_labor.csv",
        "exposure_lawsuits.csv",
        "monitoring.json",
        "validation.json",
    ] {
        assert_eq!(read(out.join(f)), read(d.path().join("again").join(f)), "{f}");
    }
    let m = Manifest::read(&d.path().join("again/manifest_risk.json")).unwrap();
    let src = m.source_network.unwrap();
    assert_eq!(src.sha256, scdd_cli::manifest::sha256_file(&out.join("network.scdn")).unwrap().0);
}

#[test]
fn empty_violation_list_gives_zero_risk() {
    let d = desk();
    fs::write(d.path().join("violations_lawsuits.csv"), "country,sector\n").unwrap();
    let out = run_desk(d.path(), "out");
    let text = String::from_utf8(read(out.join("risk_lawsuits.csv"))).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "0", "{line}");
        rows += 1;
    }
    assert_eq!(rows, 6 * 4 * 2);
    let exposure = String::from_utf8(read(out.join("exposure_lawsuits.csv"))).unwrap();
    assert_eq!(exposure.lines().count(), 1);
}

#[test]
fn swapping_violations_changes_only_indicator_outputs() {
    let d = desk();
    let a = run_desk(d.path(), "a");
    fs::write(d.path().join("violations_child_forced_labor.csv"), "country,sector\nTR,C20\n").unwrap();
    let b = run_desk(d.path(), "b");
    for f in ["firms.csv", "network.scdn", "validation.json", "monitoring.json", "risk_lawsuits.csv"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    for f in ["risk_child_forced_labor.csv", "exposure_child_forced_labor.csv"] {
        assert_ne!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    // with the lists equal, the two reports coincide
    assert_eq!(read(b.join("risk_child_forced_labor.csv")), read(b.join("risk_lawsuits.csv")));
}

#[test]
fn scale_flag_halves_population() {
    let d = desk();
    let mut sbs = String::from("country,sector,band,n_firms,avg_employees,turnover_per_employee\n");
    for c in ["AT", "DE"] {
        for s in ["C10", "C13", "C20"] {
            sbs += &format!("{c},{s},0-9,400,3.5,90000\n{c},{s},10-19,100,14,120000\n");
        }
    }
    fs::write(d.path().join("sbs.csv"), sbs).unwrap();
    let count = |out: &str, scale: &str| {
        ok(scdd(d.path(), &["--config", "scdd.toml", "--out", out, "--scale", scale, "sample"]));
        let m = Manifest::read(&d.path().join(out).join("manifest_sample.json")).unwrap();
        m.details["sample"]["eu_firms"].as_u64().unwrap()
    };
    assert_eq!(count("full", "1"), 3000);
    assert_eq!(count("half", "0.5"), 1500);
    let r = scdd(d.path(), &["--config", "scdd.toml", "--scale", "1.5", "sample"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn resolved_config_round_trips() {
    let d = desk();
    let out = run_desk(d.path(), "out");
    let text = String::from_utf8(read(out.join("resolved_config.toml"))).unwrap();
    let cfg = PipelineConfig::from_toml(&text).unwrap();
    assert_eq!(PipelineConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    let m = Manifest::read(&out.join("manifest_run.json")).unwrap();
    assert_eq!(m.config, cfg);
    assert_eq!(m.config_hash, cfg.hash().unwrap());

    // rerunning from the resolved file reproduces the outputs
    ok(scdd(d.path(), &["--config", "out/resolved_config.toml", "--out", "again", "run"]));
    for f in ["network.scdn", "risk_lawsuits.csv", "exposure_child_forced_labor.csv"] {
        assert_eq!(read(out.join(f)), read(d.path().join("again").join(f)), "{f}");
    }
}

#[test]
fn stage_commands_write_their_tables() {
    let d = desk();
    ok(scdd(d.path(), &["--config", "scdd.toml", "--out", "i", "ingest"]));
    for f in ["sbs.csv", "iot.csv", "imports.csv", "concordance.csv", "violations_lawsuits.csv"] {
        assert!(d.path().join("i").join(f).is_file(), "{f}");
    }
    ok(scdd(d.path(), &["--config", "scdd.toml", "--out", "b", "build"]));
    let run = run_desk(d.path(), "r");
    assert_eq!(read(d.path().join("b/network.scdn")), read(run.join("network.scdn")));
    assert_eq!(read(d.path().join("b/firms.csv")), read(run.join("firms.csv")));
}

#[test]
fn version_names_network_format() {
    let out = ok(scdd(Path::new("."), &["--version"]));
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(s.contains(env!("CARGO_PKG_VERSION")) && s.contains("network format 1"), "{s}");
}
