use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spinflip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinflip")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const GLASS: &str = r#"{"family":{"kind":"uniform_spin_glass"},"n_values":[4,8],"methods":["SA","SAM","SAQ","BF"],
    "realizations":3,"repetitions":{"4":200,"8":50},"ratios":[1.0,0.25],"master_seed":11}"#;

fn generate(config: &str, out: &str) {
    let o = spinflip(&["generate", "--config", config, "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn run(config: &str, out: &str, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["run", "--config", config, "--out", out];
    args.extend_from_slice(extra);
    let o = spinflip(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(Path::new(out).join("results.jsonl")).unwrap()
}

#[test]
fn generate_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GLASS);
    let out = dir.path().join("exp");
    let out = out.to_str().unwrap();
    generate(&config, out);
    let problems = Path::new(out).join("problems");
    let snapshot = |p: &Path| {
        let mut files: Vec<_> = fs::read_dir(p)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let first = snapshot(&problems);
    assert_eq!(first.len(), 2 * 3 * 2);
    generate(&config, out);
    assert_eq!(snapshot(&problems), first);
}

#[test]
fn run_is_deterministic_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GLASS);
    let out = dir.path().to_str().unwrap();
    generate(&config, out);
    let one = run(&config, out, &["--workers", "1"]);
    let again = run(&config, out, &["--workers", "1"]);
    let four = run(&config, out, &["--workers", "4"]);
    assert_eq!(one, again);
    assert_eq!(one, four);
    let lines = one.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count();
    assert_eq!(lines, 2 * 4 * 3 * 2);
}

#[test]
fn resume_completes_an_interrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GLASS);
    let out = dir.path().to_str().unwrap();
    generate(&config, out);
    let full = run(&config, out, &[]);

    // Keep five complete lines and half of the sixth.
    let text = String::from_utf8(full.clone()).unwrap();
    let cut: usize = text.split_inclusive('\n').take(5).map(str::len).sum();
    let partial = cut + text[cut..].find('\n').unwrap() / 2;
    fs::write(dir.path().join("results.jsonl"), &full[..partial]).unwrap();

    assert_eq!(run(&config, out, &["--resume"]), full);
    assert_eq!(run(&config, out, &["--resume"]), full);
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GLASS);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    generate(&config, a);
    let o = spinflip(&["generate", "--config", &config, "--out", b, "--seed", "12"]);
    assert!(o.status.success());
    assert_ne!(
        fs::read(Path::new(a).join("problems/uniform_spin_glass_n8_r000.json")).unwrap(),
        fs::read(Path::new(b).join("problems/uniform_spin_glass_n8_r000.json")).unwrap()
    );
}

#[test]
fn timing_adds_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"family":{"kind":"zero_coupling"},"n_values":[4],"methods":["SA"],"repetitions":{"4":10}}"#,
    );
    let out = dir.path().to_str().unwrap();
    generate(&config, out);
    let plain = String::from_utf8(run(&config, out, &[])).unwrap();
    assert!(!plain.contains("wall_clock_seconds"));
    let timed = String::from_utf8(run(&config, out, &["--timing"])).unwrap();
    assert!(timed.contains("wall_clock_seconds"));
}

#[test]
fn reports_and_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"family":{"kind":"gaussian_spin_glass"},"n_values":[8],"methods":["SA","SAM","SAQ","BF"],
            "realizations":2,"repetitions":{"8":40},"ratios":[1.0,0.5,0.25,0.1,0.05],"master_seed":3}"#,
    );
    let out = dir.path().to_str().unwrap();
    generate(&config, out);
    run(&config, out, &[]);

    let o = spinflip(&["report", "--out", out, "--mode", "success_vs_n"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("success_vs_n.csv")).unwrap();
    assert!(csv.starts_with("family,n,method,K,realizations,R,successes,p_s,ci_low,ci_high,tts"));
    assert_eq!(csv.lines().count(), 1 + 4 * 5);

    let o = spinflip(&["report", "--out", out, "--mode", "tts_scatter"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("tts_scatter.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in ["x", "y", "x_lo", "x_hi", "y_lo", "y_hi", "n", "below_diagonal"] {
        assert!(header.split(',').any(|c| c == col), "{header}");
    }
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 5);

    let o = spinflip(&["report", "--out", out, "--mode", "success_vs_ratio"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("success_vs_ratio.csv")).unwrap();
    let bf_full = csv.lines().find(|l| l.contains(",256,BF,")).expect("BF row at K = N");
    let cols: Vec<&str> = bf_full.split(',').collect();
    assert_eq!(cols[6], "1.0");
    assert_eq!(cols[10], "1.0");

    let o = spinflip(&["crossover", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("gaussian_spin_glass n=8"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("crossover.json")).unwrap()).unwrap();
    assert_eq!(summary[0]["points"].as_array().unwrap().len(), 5);
}

#[test]
fn oracle_prints_ground_states() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"family":{"kind":"false_minimum","epsilon":0.1},"n_values":[8],"repetitions":{"8":1}}"#,
    );
    let out = dir.path().to_str().unwrap();
    generate(&config, out);
    let problem = dir.path().join("problems/false_minimum_n8_r000.json");
    let o = spinflip(&["oracle", "--problem", problem.to_str().unwrap(), "--histogram"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let minima: serde_json::Value = serde_json::from_str(stdout.lines().next().unwrap()).unwrap();
    assert_eq!(minima["minima"], serde_json::json!([0]));
    let total: u64 = stdout.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 256);
}

#[test]
fn exit_codes() {
    assert_eq!(spinflip(&[]).status.code(), Some(1));
    assert_eq!(spinflip(&["run"]).status.code(), Some(1));
    assert_eq!(spinflip(&["report", "--out", "x", "--mode", "pie_chart"]).status.code(), Some(1));
    assert_eq!(spinflip(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), GLASS);
    let out = dir.path().to_str().unwrap();
    let o = spinflip(&["run", "--config", &config, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("generate"));

    let bad = write_config(dir.path(), r#"{"family":{"kind":"false_minimum","epsilon":0.1},"n_values":[6]}"#);
    assert_eq!(spinflip(&["generate", "--config", &bad, "--out", out]).status.code(), Some(2));
    assert_eq!(spinflip(&["report", "--out", out, "--mode", "tts_scatter"]).status.code(), Some(2));
}
