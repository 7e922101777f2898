use std::path::Path;
use std::process::Command;

use deltabox::channels::open_channel_count_closed_form;
use deltabox::ProblemConfig;
use serde_json::Value;

fn deltabox(command: &str, config: &str, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let path = out.join(format!("{command}.toml"));
    std::fs::create_dir_all(out).unwrap();
    std::fs::write(&path, config).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_deltabox"))
        .arg(command)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    (
        output.status.code().unwrap(),
        String::from_utf8(output.stdout).unwrap(),
        String::from_utf8(output.stderr).unwrap(),
    )
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_zero_coupling_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = deltabox("solve", "g = 0.0\nlk0 = 3.0\n", dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("open channels: 1"));
    let rows = csv_rows(&dir.path().join("solve.csv"));
    assert_eq!(rows.len(), 1);
    // Lk0,n,k_n,E_n,p_plus,p_minus,...
    assert_eq!(rows[0][1], "1");
    assert!((rows[0][4].parse::<f64>().unwrap() - 1.0).abs() <= 4.0 * f64::EPSILON);
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn solve_reports_six_open_channels() {
    let dir = tempfile::tempdir().unwrap();
    let config = "g = 80.0\nlk0 = 20.0\nn0 = 1\ntruncation = 50\nnodes = 100\n";
    let (code, stdout, _) = deltabox("solve", config, dir.path(), &[]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("open channels: 6"));
    assert!(stdout.contains("unitarity defect:"));
    assert_eq!(csv_rows(&dir.path().join("solve.csv")).len(), 6);
}

#[test]
fn malformed_config_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = deltabox("solve", "g = 1.0\nlk0 = 3.0\nnode = 10\n", dir.path(), &[]);
    assert_eq!(code, 1);
    assert!(stderr.contains("`node`"), "{stderr}");
    let (code, _, _) = deltabox("solve", "g = 1.0\nlk0 = [3.0\n", dir.path(), &[]);
    assert_eq!(code, 1);
    let (code, _, _) = deltabox("solve", "g = 1.0\n", dir.path(), &[]);
    assert_eq!(code, 1);
}

#[test]
fn threshold_and_truncation_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let lk0 = std::f64::consts::PI * 3f64.sqrt();
    let (code, _, stderr) = deltabox("solve", &format!("g = 1.0\nlk0 = {lk0:?}\n"), dir.path(), &[]);
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("threshold"));
    let (code, _, _) = deltabox("solve", "g = 1.0\nlk0 = 20.0\ntruncation = 5\n", dir.path(), &[]);
    assert_eq!(code, 1);
}

#[test]
fn empty_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = deltabox("sweep", "g = 1.0\nlk0_grid = []\n", dir.path(), &[]);
    assert_eq!(code, 1);
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn converge_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = deltabox("converge", "g = 0.0\nlk0 = 20.0\n", dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("degenerate fit"), "{stderr}");
    let (code, _, _) = deltabox("converge", "g = 80.0\nlk0 = 20.0\nt_list = [10, 20]\n", dir.path(), &[]);
    assert_eq!(code, 1);
}

#[test]
fn converge_default_study() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = deltabox("converge", "g = 80.0\nlk0 = 20.0\nn0 = 1\n", dir.path(), &[]);
    assert_eq!(code, 0);
    let slope: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("slope: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((-2.4..=-1.7).contains(&slope), "{slope}");
    let rows = csv_rows(&dir.path().join("converge.csv"));
    let ts: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ts, ["20", "30", "40", "50", "60", "70", "80", "90", "100"]);
}

#[test]
fn full_sweep_panels_and_channel_count() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = deltabox("sweep", "g = 1e4\nn0 = 1\n", dir.path(), &[]);
    assert_eq!(code, 0);
    for panel in ["p_total", "p_minus", "p_plus"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("sweep_{panel}.svg"))).unwrap();
        assert!(svg.contains("<polyline"));
    }
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    let mut ns: Vec<u32> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    ns.sort_unstable();
    ns.dedup();
    let max_open = open_channel_count_closed_form(&ProblemConfig::dimensionless(1e4, 30.0, 1).unwrap()).unwrap();
    assert_eq!(max_open, 9);
    assert_eq!(ns, (1..=9).collect::<Vec<_>>());
    let lk0s: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(lk0s.len(), 500);
    assert!(rows.iter().all(|r| r[7] == "ok"));
}

#[test]
fn no_svg_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = deltabox("sweep", "g = 1.0\nlk0_points = 5\n", dir.path(), &["--no-svg"]);
    assert_eq!(code, 0);
    assert!(dir.path().join("sweep.csv").exists());
    assert!(!dir.path().join("sweep_p_total.svg").exists());
}

#[test]
fn sign_flipped_sweep_matches() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "lk0_min = 1.0\nlk0_max = 30.0\nlk0_points = 60\n";
    let (a, _, _) = deltabox("sweep", &format!("g = 1e4\n{grid}"), &dir.path().join("plus"), &["--no-svg"]);
    let (b, _, _) = deltabox("sweep", &format!("g = -1e4\n{grid}"), &dir.path().join("minus"), &["--no-svg"]);
    assert_eq!((a, b), (0, 0));
    let plus = csv_rows(&dir.path().join("plus/sweep.csv"));
    let minus = csv_rows(&dir.path().join("minus/sweep.csv"));
    assert_eq!(plus.len(), minus.len());
    for (x, y) in plus.iter().zip(&minus) {
        assert_eq!((&x[0], &x[1]), (&y[0], &y[1]));
        // p_total; the split into p^+ and p^- is less symmetric where
        // |g| / Lk0 drops to a few hundred
        let d = (x[4].parse::<f64>().unwrap() - y[4].parse::<f64>().unwrap()).abs();
        assert!(d <= 1e-3, "Lk0 {} n {}: {d}", x[0], x[1]);
    }
}

#[test]
fn json_and_csv_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = deltabox("sweep", "g = 3.0\nn0 = 2\nlk0_points = 25\n", dir.path(), &["--no-svg"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["provenance"]["artifact"], "deltabox");
    assert_eq!(json["provenance"]["config"]["n0"], 2);
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    let keys = ["Lk0", "n", "p_plus", "p_minus", "p_total", "defect", "cond_estimate"];
    for (row, rec) in rows.iter().zip(records) {
        for (i, key) in keys.iter().enumerate() {
            let from_csv: f64 = row[i].parse().unwrap();
            let from_json = rec[key].as_f64().unwrap();
            assert_eq!(from_csv.to_bits(), from_json.to_bits(), "{key}");
        }
        assert_eq!(rec["status"], row[7].as_str());
    }
}

#[test]
fn seed_and_overrides_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = deltabox(
        "sweep",
        "g = 1.0\nlk0_points = 4\n",
        dir.path(),
        &["--seed", "7", "--workers", "2", "--mem-budget", "0.5", "--svg"],
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("workers: 2"));
    assert!(dir.path().join("sweep_p_plus.svg").exists());
}
