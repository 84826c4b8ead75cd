use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn frostlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frostlab"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("FROSTLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gen_then_verify() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("gen");
    let o = frostlab(&out, &["gen", "kind=random_delta", "s=1", "scale_exp=6", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(&out), ["points.txt", "spec.txt"]);
    let pts = out.join("points.txt");
    let v = tmp.path().join("v");
    let o = frostlab(&v, &["verify-set", pts.to_str().unwrap(), "--s", "1"]);
    assert_eq!(code(&o), 0);
    let report = fs::read_to_string(v.join("regularity.txt")).unwrap();
    assert!(report.contains("best_c="));
    // a declared constant below the measured one is a contract violation
    let o = frostlab(&v, &["verify-set", pts.to_str().unwrap(), "--s", "1", "--c", "0.01"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_config_exits_2_without_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "bad.cfg", "[experiment]\nsuite = duality\n[params]\nbogus = 3\n");
    let out = tmp.path().join("out");
    let o = frostlab(&out, &["run", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(files(&out).is_empty());
    let o = frostlab(&out, &["run", "--suite", "no-such-suite"]);
    assert_eq!(code(&o), 2);
    let o = frostlab(&out, &["run", "--suite", "duality", "--ladder", "6..8"]);
    assert_eq!(code(&o), 2);
    assert!(files(&out).is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(code(&frostlab(&out, &["verify-set"])), 2);
    assert_eq!(code(&frostlab(&out, &["no-such-command"])), 2);
    assert_eq!(code(&frostlab(&out, &["verify-set", "/nonexistent/file", "--s", "1"])), 2);
    let garbage = write(&tmp, "g.txt", "# scale_exp=4\n0.1 zero\n");
    assert_eq!(code(&frostlab(&out, &["verify-set", &garbage, "--s", "1"])), 2);
    assert!(files(&out).is_empty());
}

#[test]
fn run_is_reproducible_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("r{i}"));
        let o = frostlab(
            &out,
            &["--threads", threads, "run", "--suite", "stable-scale", "--param", "profiles=40", "--seed", "9"],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let names = files(&out);
        assert_eq!(names, ["config.txt", "stable_scale.csv", "summary.txt"]);
        outputs.push(names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary = String::from_utf8(outputs[0][2].clone()).unwrap();
    assert!(summary.starts_with("# tool=frostlab version="));
    assert!(summary.contains("config_sha256="));
    assert!(summary.contains("passed=true"));
}

#[test]
fn threads_from_environment() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_frostlab"))
        .args(["--out", out.to_str().unwrap(), "run", "--suite", "duality", "--param", "pairs=500"])
        .env("FROSTLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_frostlab"))
        .args(["--out", out.to_str().unwrap(), "run", "--suite", "duality"])
        .env("FROSTLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn dualize_round_trip() {
    let tmp = TempDir::new().unwrap();
    let pts = write(&tmp, "p.txt", "# scale_exp=6\n0.25 0.5\n0.75 -0.5\n");
    let out = tmp.path().join("d");
    assert_eq!(code(&frostlab(&out, &["dualize", &pts])), 0);
    let tubes = out.join("dual_tubes.txt");
    let back = tmp.path().join("b");
    assert_eq!(code(&frostlab(&back, &["dualize", "--tubes", tubes.to_str().unwrap()])), 0);
    let text = fs::read_to_string(back.join("dual_points.txt")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    // D*(D(a, b)) = (-a, b)
    assert_eq!(rows.len(), 2);
    assert!((rows[0][0] + 0.25).abs() < 1e-12 && (rows[0][1] - 0.5).abs() < 1e-12);
    assert!((rows[1][0] + 0.75).abs() < 1e-12 && (rows[1][1] + 0.5).abs() < 1e-12);
}

#[test]
fn radial_scan_enforces_separation() {
    let tmp = TempDir::new().unwrap();
    let k = write(&tmp, "k.txt", "# scale_exp=8\n0 0\n0.5 0\n0.25 0.25\n");
    let near = write(&tmp, "e.txt", "-1 0\n0.3 0.25\n");
    let out = tmp.path().join("r");
    let o = frostlab(&out, &["radial-scan", &k, &near, "--sigma", "0.5", "--d", "0.25", "--ladder", "4..8"]);
    assert_eq!(code(&o), 2);
    assert!(files(&out).is_empty());
    let far = write(&tmp, "f.txt", "-1 0\n-1 1\n2 2\n");
    let o = frostlab(&out, &["radial-scan", &k, &far, "--sigma", "0.5", "--d", "0.25", "--ladder", "4..8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("radial_scan.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap() == "scale_exp,viewpoint_id,covering_count,exceptional_flag");
    // too short a ladder is a module error
    let o = frostlab(&out, &["radial-scan", &k, &far, "--sigma", "0.5", "--d", "0.25", "--ladder", "6..7"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn incidence_and_buckets() {
    let tmp = TempDir::new().unwrap();
    let pts = write(&tmp, "p.txt", "# scale_exp=4\n0 0\n0.5 0\n0.5 0.5\n");
    let tubes = write(&tmp, "t.txt", "# scale_exp=4\n0 0 0.0625\n1.5707963267948966 -0.5 0.0625\n");
    let out = tmp.path().join("i");
    let o = frostlab(&out, &["incidence", &pts, &tubes, "--s", "1", "--t", "1", "--eps", "0.1", "--brute"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = fs::read_to_string(out.join("incidence.txt")).unwrap();
    assert!(rep.contains("count=4\n"), "{rep}");
    let anchors = write(&tmp, "a.txt", "-1 0\n");
    let o = frostlab(&out, &["buckets", &pts, &anchors, "--eps", "0.1", "--tau", "0.2"]);
    assert_eq!(code(&o), 0);
    assert!(out.join("buckets.txt").exists());
}

#[test]
fn uniformize_and_stable_scale() {
    let tmp = TempDir::new().unwrap();
    let mu = write(&tmp, "mu.txt", "# dim=1 T=4 m=2\n0 0 1.0\n");
    let out = tmp.path().join("u");
    let o = frostlab(&out, &["uniformize", &mu, "--eta", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let prof = out.join("profile.txt");
    let o = frostlab(&out, &["stable-scale", prof.to_str().unwrap(), "--eps", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("stable_scale.txt")).unwrap();
    assert!(text.contains("steps=0\n"), "{text}");
    // block below T0 is a module precondition failure
    let small = write(&tmp, "small.txt", "# dim=1 T=2 m=2\n0 0 1.0\n");
    assert_eq!(code(&frostlab(&tmp.path().join("x"), &["uniformize", &small, "--eta", "1"])), 1);
    // eta too large for the given eps
    assert_eq!(code(&frostlab(&tmp.path().join("x"), &["uniformize", &mu, "--eta", "1", "--eps", "0.5"])), 2);
}

#[test]
fn furstenberg_decompose_and_dim() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("f");
    let o = frostlab(&out, &["furstenberg", "--s", "0.5", "--t", "0.5", "--scale-exp", "6", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pts = out.join("furstenberg_points.txt");
    let o = frostlab(&out, &["dim", pts.to_str().unwrap(), "--ladder", "3..6"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(out.join("dim.txt")).unwrap().contains("slope="));
    let g = tmp.path().join("g");
    assert_eq!(code(&frostlab(&g, &["gen", "kind=random_delta", "s=1", "scale_exp=6"])), 0);
    let p = g.join("points.txt");
    let o = frostlab(&g, &["decompose", p.to_str().unwrap(), "--t", "1", "--c", "32", "--eps", "0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(g.join("decomposition.csv")).unwrap();
    assert!(csv.lines().nth(1) == Some("part_id,point_index"));
}
