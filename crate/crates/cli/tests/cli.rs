use std::fs;
use std::process::{Command, Output};

use pdcsim_core::dispersion::DEFAULT_DATABASE;

fn pdcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcsim"))
        .args(args)
        .env_remove("PDCSIM_CRYSTAL_DB")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn rainbow_csv_has_header_and_rows() {
    let o = pdcsim(&["rainbow", "--pump", "300e", "--range", "400:900:11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("wavelength_nm,signal_angle_deg,"));
    assert_eq!(lines.count(), 11);
    assert!(!text.contains('\r'));
}

#[test]
fn ordinary_pump_rows_are_gaps() {
    let o = pdcsim(&["rainbow", "--pump", "450o", "--grid", "700,900"]);
    assert!(o.status.success());
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1], "");
        assert_eq!(f[4], "1");
        assert_eq!(f[6], "no-solution");
    }
}

#[test]
fn unknown_crystal_names_the_database() {
    let o = pdcsim(&["rainbow", "--crystal", "XYZ"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("XYZ"));
    assert!(stderr(&o).contains("built-in database"));
}

#[test]
fn out_of_range_partner_is_a_config_error() {
    let o = pdcsim(&["puc", "--pump", "600o", "--partner", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
}

#[test]
fn grid_below_the_pump_is_rejected() {
    let o = pdcsim(&["rainbow", "--pump", "300e", "--grid", "250"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_trials_is_a_config_error() {
    let o = pdcsim(&["simulate", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn principal_cut_changes_the_angles() {
    let a = stdout(&pdcsim(&["rainbow", "--grid", "900"]));
    let b = stdout(&pdcsim(&["rainbow", "--grid", "900", "--cut-angle-deg", "principal"]));
    assert!(a.contains(",16.704,"));
    assert!(b.contains(",16.916,"));
}

#[test]
fn crystals_lists_json() {
    let o = pdcsim(&["crystals", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = doc["crystals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["KDP", "BBO"]);
}

#[test]
fn corrupted_database_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("bad.txt");
    // push the KDP ordinary index far above 3
    fs::write(&db, DEFAULT_DATABASE.replace("2.259276", "40.0")).unwrap();
    let o = pdcsim(&["crystals", "--db", db.to_str().unwrap(), "--validate"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("KDP"));
    assert!(stderr(&o).contains("ordinary"));

    let o = pdcsim(&["rainbow", "--db", db.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unparseable_database_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("junk.txt");
    fs::write(&db, "this is not a database\n").unwrap();
    let o = pdcsim(&["crystals", "--db", db.to_str().unwrap(), "--validate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn database_env_var_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("only-bbo.txt");
    let bbo = &DEFAULT_DATABASE[DEFAULT_DATABASE.find("crystal = BBO").unwrap()..];
    fs::write(&db, format!("format-version = 1\n{bbo}")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pdcsim"))
        .args(["rainbow", "--crystal", "KDP"])
        .env("PDCSIM_CRYSTAL_DB", &db)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("only-bbo.txt"));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "pump = \"300e\"\ngrid = [450, 600]\nformat = \"json\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&stdout(&pdcsim(&["rainbow", "--config", c]))).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    let o = pdcsim(&["rainbow", "--config", c, "--format", "csv", "--grid", "900"]);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    fs::write(&cfg, "trials = 200\nseed = 11\nscenario = \"puc\"\n").unwrap();
    let out = dir.path().join("sim.json");
    let o = pdcsim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    // the manifest must not depend on the config file still existing
    fs::remove_file(&cfg).unwrap();
    let manifest = dir.path().join("sim.json.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["tool"], "pdcsim");
    assert_eq!(m["config"]["trials"], 200);
    let again = dir.path().join("again.json");
    let o = pdcsim(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
    assert!(!dir.path().join("sim.json.partial").exists());
}

#[test]
fn divergent_integration_is_exit_3() {
    let o = pdcsim(&[
        "simulate", "--amplitude", "1000", "--kappa", "100", "--step", "0.5", "--depth", "50",
        "--trials", "5",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
