use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dressing"));
    c.env_remove("DRESSING_OUT");
    c
}

fn acceptance_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/su2-acceptance.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn acceptance_config_passes_with_eight_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let o = run(&["run", "--config", acceptance_config().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(csvs(&out).len(), 8);
    assert!(out.join("summary.json").is_file());
    let header = std::fs::read_to_string(out.join("casimir-limit.csv")).unwrap();
    assert!(header.starts_with("claim,input,s,value,slope,pass\n"));
    let svg = std::fs::read_to_string(out.join("casimir-limit.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = run(&["run", "--config", acceptance_config().to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in csvs(&a) {
        let name = f.file_name().unwrap();
        assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name:?}");
    }
    assert_eq!(std::fs::read(a.join("summary.json")).unwrap(), std::fs::read(b.join("summary.json")).unwrap());
}

#[test]
fn csv_values_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["run", "--claim", "volume", "--xi", "2", "--s-grid", "-1:-4", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let body = std::fs::read_to_string(tmp.path().join("volume.csv")).unwrap();
    let row = body.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols.len(), 6);
    assert_eq!(cols[2], "-1.0000000000000000e0");
    let mantissa = cols[3].split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn concentration_one_shot_prints_fraction() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["run", "--claim", "concentration", "--xi", "1", "--eps", "0.1", "--s", "-10", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // (1/40)(20 + ln(0.05 e^20 + 0.95 e^-20)) = 0.92510669...
    let expected = (20.0 + (0.05 * 20f64.exp() + 0.95 * (-20f64).exp()).ln()) / 40.0;
    assert!(stdout(&o).contains(&format!("{expected:.6}")), "{}", stdout(&o));
}

#[test]
fn delta_beyond_leaf_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"claims": ["casimir-limit"], "xi": [1.0], "delta": 1.5, "cone_samples": 4}"#);
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty region"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_claims_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"claims": ["volume"], "xii": [1.0]}"#);
    assert_eq!(run(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["run", "--claim", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["run"]).status.code(), Some(2));
    let missing = tmp.path().join("absent.json");
    assert_eq!(run(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"claims": ["dh"], "s_grid": [-0.5, -5], "samples": 20000, "tolerances": {"ks": 1e-6}}"#);
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("dh: FAIL"));
}

#[test]
fn range_failure_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["run", "--claim", "dh", "--s-grid=-400", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn report_aggregates_and_mirrors_worst_status() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let o = run(&["report", root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no results"));

    let good = root.join("good");
    assert_eq!(run(&["run", "--claim", "volume,envelope", "--out", good.to_str().unwrap()]).status.code(), Some(0));
    let o = run(&["report", root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    assert!(table.contains("volume") && table.contains("envelope"));
    assert!(!table.contains("FAIL"));

    let cfg = write_config(root, r#"{"claims": ["dh"], "s_grid": [-0.5, -5], "samples": 20000, "tolerances": {"ks": 1e-6}}"#);
    let bad = root.join("bad");
    assert_eq!(run(&["run", "--config", cfg.to_str().unwrap(), "--out", bad.to_str().unwrap()]).status.code(), Some(1));
    let o = run(&["report", root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    std::fs::remove_file(good.join("volume.csv")).unwrap();
    let o = run(&["report", root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing file"));
}

#[test]
fn out_dir_defaults_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["run", "--claim", "volume"]).env("DRESSING_OUT", tmp.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("volume.csv").is_file());
}

#[test]
fn list_claims_names_every_claim() {
    let o = run(&["list-claims"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["volume", "concentration", "dh", "eta", "envelope", "casimir-limit", "subleading", "jacobian", "unitary-limit", "coherence", "graph"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn su3_points_from_the_cone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"rank": "su3", "claims": ["casimir-limit", "subleading"], "xi": [2, 0, -2], "delta": 0.5, "cone_samples": 3, "s_grid": [-1,-2,-3,-4,-5,-6,-7,-8,-9,-10,-11,-12,-13,-14,-15,-16,-17,-18,-19,-20,-21,-22,-23,-24,-25,-26,-27,-28,-29,-30], "fit_window": 10}"#,
    );
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let body = std::fs::read_to_string(tmp.path().join("o/casimir-limit.csv")).unwrap();
    assert!(body.contains(",p2/"));
}
