use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SPACE: &str = r#"{
  "length": 7,
  "alphabet_sizes": [3, 3, 3, 3, 3, 3, 4],
  "identity_symbol": [0, 0, 0, 0, 0, 0, null],
  "segments": [[0, 3], [3, 6]]
}"#;

fn lsnas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsnas")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lsnas(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Setup {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Setup {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        std::fs::write(root.join("space.json"), SPACE).unwrap();
        ok(&[
            "gen-synthetic",
            "--space",
            path(&root.join("space.json")),
            "--seed",
            "5",
            "--ruggedness",
            "0.3",
            "--out",
            path(&root.join("table.csv")),
        ]);
        Setup { _dir: dir, root }
    }

    fn config(&self, name: &str, algorithm: &str, mode: &str, out: &str) -> PathBuf {
        let p = self.root.join(name);
        let text = format!(
            r#"{{"space": "space.json", "table": "table.csv", "algorithm": "{algorithm}", "mode": "{mode}",
               "budget": 150, "repetitions": 4, "base_seed": 3, "snapshots": [10, 50, 150],
               "output_dir": "{out}"}}"#
        );
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, name: &str, algorithm: &str, mode: &str, out: &str) -> String {
        let config = self.config(name, algorithm, mode, out);
        ok(&["run", "--config", path(&config)])
    }
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

#[test]
fn run_writes_logs_and_is_byte_identical_on_rerun() {
    let s = Setup::new();
    let stdout = s.run("a.json", "mogomea", "multi", "runs");
    assert_eq!(stdout.lines().count(), 4);
    assert!(stdout.contains("mogomea_multi_3 evaluations=150"));
    let first = read_dir(&s.root.join("runs"));
    for id in ["mogomea_multi_3", "mogomea_multi_6"] {
        for f in [format!("trace_{id}.csv"), format!("archive_{id}_50.csv"), format!("run_{id}.json")] {
            assert!(first.contains_key(&f), "{f}");
        }
    }
    let trace = String::from_utf8(first["trace_mogomea_multi_3.csv"].clone()).unwrap();
    assert!(trace.starts_with("eval_index,canonical_key,f1,f2,acc_test,complexity\n1,"));
    assert_eq!(trace.lines().count(), 151);

    std::fs::remove_dir_all(s.root.join("runs")).unwrap();
    s.run("a.json", "mogomea", "multi", "runs");
    assert_eq!(first, read_dir(&s.root.join("runs")));
}

#[test]
fn front_matches_table_maxima() {
    let s = Setup::new();
    let front = s.root.join("front.csv");
    ok(&["front", "--table", path(&s.root.join("table.csv")), "--space", path(&s.root.join("space.json")), "--out", path(&front)]);
    let text = std::fs::read_to_string(&front).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("canonical_key,f1,f2,acc_test,complexity"));
    let points: Vec<(f64, f64)> = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[1].parse().unwrap(), c[2].parse().unwrap())
        })
        .collect();
    assert!(!points.is_empty());
    for w in points.windows(2) {
        assert!(w[0].0 < w[1].0 && w[0].1 > w[1].1);
    }
}

#[test]
fn stats_compares_every_pair() {
    let s = Setup::new();
    for alg in ["rs", "ls", "nsga2"] {
        s.run(&format!("{alg}.json"), alg, "multi", "runs");
    }
    let out = s.root.join("stats.csv");
    ok(&["stats", "--logs", path(&s.root.join("runs")), "--metric", "hv_val", "--at", "150", "--out", path(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "a,b,metric,snapshot,u,p,p_adjusted,significant");
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let c: Vec<&str> = row.split(',').collect();
        assert_eq!(c[2], "hv_val");
        assert_eq!(c[3], "150");
        let (p, adj): (f64, f64) = (c[5].parse().unwrap(), c[6].parse().unwrap());
        assert!(adj >= p && adj <= 1.0);
        assert!((adj - (3.0 * p).min(1.0)).abs() < 1e-12);
    }

    let missing = lsnas(&["stats", "--logs", path(&s.root.join("runs")), "--metric", "igd", "--at", "150", "--out", path(&out)]);
    assert!(!missing.status.success());
}

#[test]
fn success_curve_is_nondecreasing_and_saturates() {
    let s = Setup::new();
    s.run("ls.json", "ls", "single", "so");
    let out = s.root.join("success.csv");
    ok(&[
        "success",
        "--logs",
        path(&s.root.join("so")),
        "--eps",
        "1.0",
        "--table",
        path(&s.root.join("table.csv")),
        "--space",
        path(&s.root.join("space.json")),
        "--out",
        path(&out),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let counts: Vec<usize> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 150);
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    // eps = 1 puts the threshold at the mean random accuracy
    assert_eq!(*counts.last().unwrap(), 4);
}

#[test]
fn exports_feed_the_plots() {
    let s = Setup::new();
    s.run("ls.json", "ls", "multi", "runs");
    s.run("rs.json", "rs", "multi", "runs");
    let logs = s.root.join("runs");
    let out = s.root.join("export");
    for what in ["convergence", "fronts", "trace"] {
        ok(&["export", "--logs", path(&logs), "--what", what, "--out", path(&out), "--window", "5"]);
    }

    let summary = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let long = std::fs::read_to_string(out.join("convergence_runs.csv")).unwrap();
    let mut values: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for l in long.lines().skip(1) {
        let c: Vec<&str> = l.split(',').collect();
        values
            .entry((c[0].into(), c[4].into(), c[5].into()))
            .or_default()
            .push(c[6].parse().unwrap());
    }
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    for row in rows {
        let c: Vec<&str> = row.split(',').collect();
        let mut v = values[&(c[0].to_string(), c[2].to_string(), c[3].to_string())].clone();
        v.sort_by(f64::total_cmp);
        assert_eq!(c[4], "4");
        let (median, p25, p75): (f64, f64, f64) = (c[5].parse().unwrap(), c[6].parse().unwrap(), c[7].parse().unwrap());
        // four values: linear interpolation at ranks 0.75, 1.5 and 2.25
        assert!((median - (v[1] + v[2]) / 2.0).abs() < 1e-12);
        assert!((p25 - (v[0] + 0.75 * (v[1] - v[0]))).abs() < 1e-12);
        assert!((p75 - (v[2] + 0.25 * (v[3] - v[2]))).abs() < 1e-12);
    }

    let fronts = std::fs::read_to_string(out.join("fronts.csv")).unwrap();
    assert!(fronts.lines().any(|l| l.contains(",final,")));
    let traces = std::fs::read_to_string(out.join("traces.csv")).unwrap();
    assert_eq!(traces.lines().count(), 1 + 8 * 150);
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let s = Setup::new();
    let cases: Vec<Vec<String>> = vec![
        vec!["run".into(), "--config".into(), path(&s.root.join("missing.json")).into()],
        vec!["run".into(), "--config".into(), path(&s.config("bad.json", "nsga2", "single", "x")).into()],
        vec!["stats".into(), "--logs".into(), path(&s.root.join("nothing")).into(), "--at".into(), "10".into(), "--out".into(), "o.csv".into()],
        vec!["front".into(), "--table".into(), path(&s.root.join("table.csv")).into(), "--out".into(), path(&s.root.join("f.csv")).into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = lsnas(&args);
        assert!(!out.status.success(), "{args:?}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(stderr.lines().count(), 1, "{args:?}: {stderr}");
        assert!(stderr.starts_with("error: "));
    }
}
