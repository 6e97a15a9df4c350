use std::path::Path;
use std::process::{Command, Output};

use tucker_hooi::io::{read_model_factors, read_tensor_file, write_tensor_file, MAGIC};
use tucker_hooi::DenseTensor;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tucker-hooi"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn tucker-hooi")
}

fn ok(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn error_message(out: &Output) -> String {
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["status"], "error");
    v["error"].as_str().unwrap().to_string()
}

fn gen(dir: &Path, name: &str, shape: &str, ranks: &str, noise: &str) {
    let out = run(&["gen", "--shape", shape, "--ranks", ranks, "--noise", noise, "--seed", "3", "--out", name], dir);
    ok(&out);
}

#[test]
fn solve_writes_reproducible_traces_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "x.dnt", "9,8,7", "2,2,3", "0.1");
    let solve = |tag: &str| {
        let trace = format!("{tag}.json");
        let csv = format!("{tag}.csv");
        let model = format!("{tag}_model");
        let out = run(
            &["solve", "x.dnt", "--ranks", "2,2,3", "--algorithm", "greedy", "--trace", &trace, "--trace-csv", &csv, "--model", &model],
            d,
        );
        let v = ok(&out);
        (v, std::fs::read(d.join(trace)).unwrap(), std::fs::read(d.join(csv)).unwrap())
    };
    let (v, json_a, csv_a) = solve("a");
    let (_, json_b, csv_b) = solve("b");
    assert_eq!(json_a, json_b);
    assert_eq!(csv_a, csv_b);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["algorithm"], "greedy");

    let trace: serde_json::Value = serde_json::from_slice(&json_a).unwrap();
    assert_eq!(trace["input"]["shape"], serde_json::json!([9, 8, 7]));
    assert!(!trace["records"].as_array().unwrap().is_empty());
    assert!(String::from_utf8(csv_a).unwrap().starts_with("sweep,objective,rel_change"));

    let factors = read_model_factors(&d.join("a_model"), 3).unwrap();
    let ranks: Vec<usize> = factors.iter().map(|f| f.cols()).collect();
    assert_eq!(ranks, vec![2, 2, 3]);
    for f in &factors {
        assert!(f.orthonormality_defect() < 1e-10);
    }
    assert_eq!(read_tensor_file(d.join("a_model.core.dnt")).unwrap().shape(), &[2, 2, 3]);
}

#[test]
fn matrix_case_recovers_truncated_svd() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "m.dnt", "12,9", "3,3", "0");
    for alg in ["hooi", "greedy", "tuckals3"] {
        let v = ok(&run(&["solve", "m.dnt", "--ranks", "3,3", "--algorithm", alg], dir.path()));
        assert!(v["model"]["relative_residual"].as_f64().unwrap() < 1e-10, "{alg}: {v}");
    }
}

#[test]
fn hosvd_writes_model_files() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "x.dnt", "6,5,4", "2,2,2", "0");
    let v = ok(&run(&["hosvd", "x.dnt", "--ranks", "2,2,2", "--model", "h"], dir.path()));
    assert_eq!(v["files"].as_array().unwrap().len(), 4);
    assert!(v["model"]["relative_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn compare_emits_one_row_per_sweep() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "x.dnt", "10,10,10", "3,3,3", "0.1");
    let out = run(&["compare", "x.dnt", "--ranks", "3,3,3", "--sweeps", "6", "--out", "c.csv"], dir.path());
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    let dist = header.iter().position(|h| h == "proj_dist_hooi_greedy").unwrap();
    let records: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 6);
    for r in &records {
        assert!(r[dist].parse::<f64>().unwrap() <= 1e-8);
    }
}

#[test]
fn verify_reports_every_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--trials", "50", "--seed", "9"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["von_neumann", "von_neumann_equality", "key_inequality", "fixed_point", "sweep_equivalence"] {
        assert!(text.lines().any(|l| l.starts_with(name) && l.contains("PASS")), "{text}");
    }
}

#[test]
fn bad_inputs_fail_with_json_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.dnt"), b"NOPE\0\0\0\0").unwrap();
    let msg = error_message(&run(&["solve", "bad.dnt", "--ranks", "1,1"], d));
    assert!(msg.contains("bad magic"), "{msg}");

    let t = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    write_tensor_file(&t, d.join("ok.dnt")).unwrap();
    let mut bytes = std::fs::read(d.join("ok.dnt")).unwrap();
    assert_eq!(&bytes[..4], MAGIC);
    bytes.truncate(bytes.len() - 3);
    std::fs::write(d.join("short.dnt"), bytes).unwrap();
    let msg = error_message(&run(&["solve", "short.dnt", "--ranks", "1,1"], d));
    assert!(msg.contains("truncated payload"), "{msg}");

    let msg = error_message(&run(&["solve", "ok.dnt", "--ranks", "3,1"], d));
    assert!(msg.contains('3'), "{msg}");
}
