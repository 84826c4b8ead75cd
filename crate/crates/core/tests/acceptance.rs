//! The acceptance criteria, each run through its canned suite at full
//! size. Prints one line per criterion and fails if any line fails.

use std::time::{Duration, Instant};

use frostlab_core::experiments::{run_experiment, ExperimentConfig, ExperimentOutput, Suite};

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run_timed(suite: Suite) -> (ExperimentOutput, Duration) {
    let t = Instant::now();
    let out = run_experiment(&ExperimentConfig::canned(suite))
        .unwrap_or_else(|e| panic!("suite {suite} failed to run: {e}"));
    (out, t.elapsed())
}

fn summary_value<'a>(out: &'a ExperimentOutput, key: &str) -> &'a str {
    out.summary
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or("?")
}

fn criterion(id: u32, name: &'static str, suite: Suite, limit_s: u64, keys: &[&str]) -> (Line, ExperimentOutput) {
    let (out, took) = run_timed(suite);
    let in_time = took <= Duration::from_secs(limit_s);
    let shown: Vec<String> = keys.iter().map(|k| format!("{k}={}", summary_value(&out, k))).collect();
    let line = Line {
        id,
        name,
        pass: out.passed && in_time,
        detail: format!("{} time={:.1}s/{limit_s}s", shown.join(" "), took.as_secs_f64()),
    };
    (line, out)
}

fn main() {
    let mut lines = Vec::new();
    let mut repro = Vec::new();
    let plan: [(u32, &str, Suite, u64, &[&str]); 10] = [
        (1, "duality exactness", Suite::Duality, 5, &["pairs", "mismatches"]),
        (2, "incidence oracle equivalence", Suite::IncidenceOracle, 30, &["instances", "equal"]),
        (3, "Katz-Tao decomposition contract", Suite::KatzTao, 60, &["runs", "passed_runs"]),
        (4, "uniformization contract", Suite::Uniformization, 30, &["measures", "passed_measures"]),
        (5, "stable-scale search", Suite::StableScale, 5, &["runs", "passed_runs"]),
        (6, "Fu-Ren empirical law", Suite::FuRenSweep, 300, &["runs", "premise_verified", "violations"]),
        (7, "sharpness on a line", Suite::SharpnessLine, 120, &["exceptional_slope", "target", "tol"]),
        (8, "projection consistency", Suite::ProjectionConsistency, 600, &["t_emp", "exceptional_slope", "bound"]),
        (9, "Furstenberg lower bound", Suite::Furstenberg, 180, &["slope.0.0.5:0.5", "slope.0.0.5:1"]),
        (10, "multiplicity buckets", Suite::Buckets, 30, &["seeds", "audit_failures"]),
    ];
    for (id, name, suite, limit, keys) in plan {
        let (line, out) = criterion(id, name, suite, limit, keys);
        println!(
            "criterion {id:>2} {}: {name}: {}",
            if line.pass { "PASS" } else { "FAIL" },
            line.detail
        );
        if (6..=9).contains(&id) {
            repro.push(out);
        }
        lines.push(line);
    }

    // 11: rerun 6-9, the second time on a four-thread pool
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let t = Instant::now();
    let mut same = true;
    let mut diffs = Vec::new();
    for first in &repro {
        let again = pool.install(|| run_experiment(&ExperimentConfig::canned(first.suite)).unwrap());
        if again.files != first.files {
            same = false;
            diffs.push(first.suite.to_string());
        }
    }
    let line = Line {
        id: 11,
        name: "reproducibility",
        pass: same,
        detail: format!(
            "suites=6..9 rerun_threads=4 differing=[{}] time={:.1}s",
            diffs.join(","),
            t.elapsed().as_secs_f64()
        ),
    };
    println!(
        "criterion 11 {}: {}: {}",
        if line.pass { "PASS" } else { "FAIL" },
        line.name,
        line.detail
    );
    lines.push(line);

    let failed: Vec<String> = lines
        .iter()
        .filter(|l| !l.pass)
        .map(|l| format!("{} ({})", l.id, l.name))
        .collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", lines.len());
}
