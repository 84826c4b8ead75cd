//! `frostlab`: command-line front end.
//!
//! Exit codes: 0 success, 1 contract violation or module error, 2 usage,
//! config or parse error. Outputs are assembled in memory and written only
//! once the command has succeeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use frostlab_core::delta_sets::{katz_tao_decompose, verify_delta_set, verify_delta_set_lines, verify_katz_tao, verify_katz_tao_lines};
use frostlab_core::duality::{dual_points, dual_tubes};
use frostlab_core::experiments::{parse_ladder, run_experiment, ExperimentConfig, Suite, TOOL, VERSION};
use frostlab_core::generators::{furstenberg_config, GeneratorOutput, GeneratorSpec};
use frostlab_core::incidences::{check_fu_ren, count_incidences, multiplicity_buckets, AnchoredTubes, Method};
use frostlab_core::io::{
    format_measure, format_points, format_profile, format_tubes, parse_measure, parse_points, parse_profile,
    parse_raw_points, parse_tubes, write_atomic,
};
use frostlab_core::radial::{estimate_dimension, exceptional_scan};
use frostlab_core::uniformization::{check_uniform, stable_scale_search, uniformize};
use frostlab_core::{covering_number, Error, PointSet, Scale};

#[derive(Parser)]
#[command(name = "frostlab", version, about = "Discretized fractal geometry experiments")]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "FROSTLAB_THREADS", default_value_t = 0)]
    threads: usize,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config or a canned suite.
    Run(RunArgs),
    /// Measure the regularity constant of a point or tube file.
    VerifySet(VerifyArgs),
    /// Split a point set into Katz-Tao (δ,t,1) parts.
    Decompose(DecomposeArgs),
    /// Uniformize a dyadic measure.
    Uniformize(UniformizeArgs),
    /// Search a uniformity profile for a stable scale.
    StableScale(StableArgs),
    /// Count point-tube incidences and check the Fu-Ren bound.
    Incidence(IncidenceArgs),
    /// Multiplicity buckets of tubes through anchor points.
    Buckets(BucketArgs),
    /// Dualize a point file to tubes, or a tube file to points.
    Dualize(DualizeArgs),
    /// Exceptional-set scan of radial projections.
    RadialScan(RadialArgs),
    /// Generate a Furstenberg configuration.
    Furstenberg(FurstenbergArgs),
    /// Run a generator spec given as key=value pairs.
    Gen(GenArgs),
    /// Box-counting dimension of a point file over a ladder.
    Dim(DimArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file.
    #[arg(long, conflicts_with = "suite")]
    config: Option<PathBuf>,
    /// Canned suite name.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale ladder `m1..m2`.
    #[arg(long)]
    ladder: Option<String>,
    /// Overrides a `[params]` key; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// List the canned suites and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegKind {
    /// `|P ∩ B(x,r)| ≤ C r^s |P|`.
    Delta,
    /// `|P ∩ B(x,r)| ≤ C (r/δ)^s`.
    KatzTao,
}

#[derive(Args)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, value_enum, default_value = "delta")]
    kind: RegKind,
    /// Treat the input as a tube file and use the line metric.
    #[arg(long)]
    lines: bool,
    /// Scale exponent when the file has no header.
    #[arg(long)]
    scale_exp: Option<u32>,
    /// Declared constant; exceeding it exits 1.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct DecomposeArgs {
    input: PathBuf,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    scale_exp: Option<u32>,
}

#[derive(Args)]
struct UniformizeArgs {
    input: PathBuf,
    #[arg(long)]
    eta: f64,
    /// When given, `η < ¼ ε^(3/ε+1)` is required.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct StableArgs {
    input: PathBuf,
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
struct IncidenceArgs {
    points: PathBuf,
    tubes: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    brute: bool,
}

#[derive(Args)]
struct BucketArgs {
    /// The set F.
    points: PathBuf,
    /// Anchor points.
    anchors: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    tau: f64,
    /// Also verify each bucket as a (δ,σ)-set of lines.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct DualizeArgs {
    input: PathBuf,
    /// Input is a tube file; write dual points.
    #[arg(long)]
    tubes: bool,
    /// Tube width in units of δ.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long)]
    scale_exp: Option<u32>,
}

#[derive(Args)]
struct RadialArgs {
    k: PathBuf,
    viewpoints: PathBuf,
    #[arg(long)]
    sigma: f64,
    /// Separation floor: every viewpoint must be at least this far from K.
    #[arg(long)]
    d: f64,
    #[arg(long)]
    ladder: String,
}

#[derive(Args)]
struct FurstenbergArgs {
    #[arg(long)]
    s: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    scale_exp: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    /// `kind=...` and the kind's keys.
    #[arg(value_name = "KEY=VALUE", required = true)]
    spec: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DimArgs {
    input: PathBuf,
    #[arg(long)]
    ladder: String,
}

/// A failure and the exit code it maps to.
enum Fail {
    Usage(String),
    Contract(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Fail::Usage(e.to_string())
        } else {
            Fail::Contract(e.to_string())
        }
    }
}

/// Files to write and whether the command's contract held.
struct Outcome {
    files: Vec<(String, String)>,
    ok: bool,
    message: String,
}

impl Outcome {
    fn ok(message: impl Into<String>) -> Self {
        Outcome {
            files: Vec::new(),
            ok: true,
            message: message.into(),
        }
    }

    fn file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_points(path: &Path, scale_exp: Option<u32>) -> Result<PointSet, Fail> {
    Ok(parse_points(&read(path)?, scale_exp.map(Scale::new))?)
}

fn ladder(s: &str) -> Result<Vec<Scale>, Fail> {
    let (a, b) = parse_ladder(s)?;
    Ok((a..=b).map(Scale::new).collect())
}

fn stamp() -> String {
    format!("# tool={TOOL} version={VERSION}\n")
}

fn run(args: RunArgs) -> Result<Outcome, Fail> {
    if args.list {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        return Ok(Outcome::ok(names.join("\n")));
    }
    let mut cfg = match (&args.config, &args.suite) {
        (Some(path), _) => ExperimentConfig::parse(&read(path)?)?,
        (None, Some(name)) => ExperimentConfig::canned(name.parse()?),
        (None, None) => return Err(Fail::Usage("run needs --config or --suite".into())),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(l) = &args.ladder {
        cfg = cfg.with_ladder(parse_ladder(l)?)?;
    }
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Fail::Usage(format!("--param expects KEY=VALUE, got '{kv}'")))?;
        cfg = cfg.with_param(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let out = run_experiment(&cfg)?;
    Ok(Outcome {
        files: out.files.into_iter().map(|f| (f.name, f.contents)).collect(),
        ok: out.passed,
        message: out.summary,
    })
}

fn verify(a: VerifyArgs) -> Result<Outcome, Fail> {
    let report = if a.lines {
        let (tubes, sc) = parse_tubes(&read(&a.input)?)?;
        let scale = sc
            .or(a.scale_exp.map(Scale::new))
            .ok_or_else(|| Fail::Usage("tube file has no scale header; pass --scale-exp".into()))?;
        match a.kind {
            RegKind::Delta => verify_delta_set_lines(&tubes.lines(), scale, a.s)?,
            RegKind::KatzTao => verify_katz_tao_lines(&tubes.lines(), scale, a.s)?,
        }
    } else {
        let p = read_points(&a.input, a.scale_exp)?;
        match a.kind {
            RegKind::Delta => verify_delta_set(&p, a.s)?,
            RegKind::KatzTao => verify_katz_tao(&p, a.s)?,
        }
    };
    let text = report.to_text();
    let ok = a.c.is_none_or(|c| report.best_c <= c);
    Ok(Outcome {
        ok,
        message: text.clone(),
        files: Vec::new(),
    }
    .file("regularity.txt", format!("{}{text}", stamp())))
}

fn decompose(a: DecomposeArgs) -> Result<Outcome, Fail> {
    let p = read_points(&a.input, a.scale_exp)?;
    let r = katz_tao_decompose(&p, a.t, a.c, a.eps)?;
    let worst = r.part_best_c.iter().copied().fold(0.0, f64::max);
    let summary = format!(
        "points={}\nparts={}\nbound={:?}\nbound_satisfied={}\nmax_part_best_c={worst:?}\nh={:?}\npremise_best_c={:?}\npremise_warning={}\n",
        p.len(),
        r.n,
        r.bound,
        r.bound_satisfied(),
        r.h,
        r.premise_best_c,
        r.premise_warning
    );
    Ok(Outcome {
        ok: worst <= 1.0,
        message: summary.clone(),
        files: Vec::new(),
    }
    .file("decomposition.csv", format!("{}{}", stamp(), r.to_csv()))
    .file("decomposition.txt", format!("{}{summary}", stamp())))
}

fn uniformize_cmd(a: UniformizeArgs) -> Result<Outcome, Fail> {
    if let Some(eps) = a.eps {
        let limit = 0.25 * eps.powf(3.0 / eps + 1.0);
        if !(eps > 0.0 && a.eta < limit) {
            return Err(Fail::Usage(format!("eta = {} must be below eps^(3/eps+1)/4 = {limit:e}", a.eta)));
        }
    }
    let mu = parse_measure(&read(&a.input)?)?;
    let u = uniformize(&mu, a.eta)?;
    let uniform = check_uniform(&u.measure, &u.profile)?.is_none();
    let mut log = format!(
        "input_mass={:?}\nkept_mass={:?}\nmass_floor={:?}\nfloor_met={}\nuniform={uniform}\n",
        mu.total_mass(),
        u.measure.total_mass(),
        u.mass_floor,
        u.mass_floor_met()
    );
    for l in &u.log {
        log.push_str(&format!(
            "level.{}: light={:?} heavy={:?} phi={} kept={:?}\n",
            l.level, l.light_mass, l.heavy_mass, l.phi, l.kept_mass
        ));
    }
    Ok(Outcome {
        ok: uniform && u.mass_floor_met(),
        message: log.clone(),
        files: Vec::new(),
    }
    .file("uniform_measure.txt", format_measure(&u.measure))
    .file("profile.txt", format_profile(&u.profile))
    .file("uniformize.txt", format!("{}{log}", stamp())))
}

fn stable(a: StableArgs) -> Result<Outcome, Fail> {
    let prof = parse_profile(&read(&a.input)?)?;
    let r = stable_scale_search(&prof, a.eps)?;
    let trail: Vec<String> = r.trail.iter().map(u32::to_string).collect();
    let text = format!(
        "level={}\ndelta_exp={}\nsigma={}\nsteps={}\nstep_bound={}\ntrail={}\n",
        r.level,
        r.delta_exp,
        r.sigma,
        r.steps,
        (3.0 / a.eps - 1e-12).ceil(),
        trail.join(",")
    );
    Ok(Outcome::ok(text.clone()).file("stable_scale.txt", format!("{}{text}", stamp())))
}

fn incidence(a: IncidenceArgs) -> Result<Outcome, Fail> {
    let (tubes, sc) = parse_tubes(&read(&a.tubes)?)?;
    let p = read_points(&a.points, sc.map(|s| s.exp()))?;
    let mut r = check_fu_ren(&p, &tubes, a.s, a.t, a.eps)?;
    if a.brute {
        let b = count_incidences(p.points(), &tubes, Method::Brute);
        if b != r.count {
            return Err(Fail::Contract(format!("grid count {} differs from brute force {b}", r.count)));
        }
        r.method = Method::Brute;
    }
    let text = r.to_text();
    Ok(Outcome {
        ok: !(r.premise_verified && !r.satisfied),
        message: text.clone(),
        files: Vec::new(),
    }
    .file("incidence.txt", format!("{}{text}", stamp()))
    .file(
        "incidence.csv",
        format!("{}{}\n{}\n", stamp(), frostlab_core::incidences::IncidenceReport::CSV_HEADER, r.to_csv_row()),
    ))
}

fn buckets(a: BucketArgs) -> Result<Outcome, Fail> {
    let f = read_points(&a.points, None)?;
    let anchors = parse_raw_points(&read(&a.anchors)?)?;
    let anchored = AnchoredTubes::through_anchors(&anchors, f.scale())?;
    let r = multiplicity_buckets(&anchored, &f, a.eps, a.tau, a.sigma)?;
    let text = r.to_text();
    Ok(Outcome::ok(text.clone()).file("buckets.txt", format!("{}{text}", stamp())))
}

fn dualize(a: DualizeArgs) -> Result<Outcome, Fail> {
    if a.tubes {
        let (t, sc) = parse_tubes(&read(&a.input)?)?;
        let scale = sc
            .or(a.scale_exp.map(Scale::new))
            .ok_or_else(|| Fail::Usage("tube file has no scale header; pass --scale-exp".into()))?;
        let p = dual_points(&t, scale)?;
        Ok(Outcome::ok(format!("points={}", p.len())).file("dual_points.txt", format_points(&p)))
    } else {
        let p = read_points(&a.input, a.scale_exp)?;
        let t = dual_tubes(&p, a.width)?;
        Ok(Outcome::ok(format!("tubes={}", t.len())).file("dual_tubes.txt", format_tubes(&t, Some(p.scale()))))
    }
}

fn radial(a: RadialArgs) -> Result<Outcome, Fail> {
    let k = read_points(&a.k, None)?;
    let e = parse_raw_points(&read(&a.viewpoints)?)?;
    if !(a.d > 0.0) {
        return Err(Fail::Usage("--d must be positive".into()));
    }
    let dists = k.dists_to(&e);
    if let Some((i, d)) = dists.iter().enumerate().find(|(_, &d)| d < a.d) {
        return Err(Fail::Usage(format!("viewpoint {i} is {d:e} from K, below the floor {}", a.d)));
    }
    let r = exceptional_scan(&k, &e, a.sigma, &ladder(&a.ladder)?)?;
    let (pe, pk) = r.plot_data();
    let text = r.to_text();
    Ok(Outcome::ok(text.clone())
        .file("radial_scan.csv", format!("{}{}", stamp(), r.to_csv()))
        .file("radial_summary.txt", format!("{}{text}", stamp()))
        .file("plot_exceptional.txt", pe)
        .file("plot_k.txt", pk))
}

fn furstenberg(a: FurstenbergArgs) -> Result<Outcome, Fail> {
    let scale = Scale::new(a.scale_exp);
    let f = furstenberg_config(a.s, a.t, scale, a.seed)?;
    let union = f.union();
    let text = format!(
        "s={}\nt={}\nscale_exp={}\nseed={}\ntubes={}\npoints={}\ncovering_count={}\ngamma={}\n",
        a.s,
        a.t,
        a.scale_exp,
        a.seed,
        f.tubes.len(),
        union.len(),
        covering_number(&union, scale)?,
        f.gamma()
    );
    let mut pts = format!("# scale_exp={}\n", a.scale_exp);
    for p in &union {
        pts.push_str(&format!("{:?} {:?}\n", p.x, p.y));
    }
    Ok(Outcome::ok(text.clone())
        .file("furstenberg_tubes.txt", format_tubes(&f.tubes, Some(scale)))
        .file("furstenberg_points.txt", pts)
        .file("furstenberg.txt", format!("{}{text}", stamp())))
}

fn gen(a: GenArgs) -> Result<Outcome, Fail> {
    let mut pairs = Vec::new();
    for kv in &a.spec {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Fail::Usage(format!("expected KEY=VALUE, got '{kv}'")))?;
        pairs.push((k.trim(), v.trim()));
    }
    let seed = a.seed.map(|s| s.to_string());
    if let Some(s) = &seed {
        pairs.retain(|(k, _)| *k != "seed");
        pairs.push(("seed", s));
    }
    let spec = GeneratorSpec::from_pairs(pairs)?;
    let spec_text = format!("{}{spec}", stamp());
    match spec.generate()? {
        GeneratorOutput::Points(p) => Ok(Outcome::ok(format!("points={}", p.len()))
            .file("points.txt", format_points(&p))
            .file("spec.txt", spec_text)),
        GeneratorOutput::Furstenberg(f) => {
            let scale = f.per_tube[0].scale();
            let union = PointSet::separated_subset(&f.union(), scale)?;
            Ok(Outcome::ok(format!("tubes={} points={}", f.tubes.len(), union.len()))
                .file("points.txt", format_points(&union))
                .file("tubes.txt", format_tubes(&f.tubes, Some(scale)))
                .file("spec.txt", spec_text))
        }
    }
}

fn dim(a: DimArgs) -> Result<Outcome, Fail> {
    let pts = parse_raw_points(&read(&a.input)?)?;
    let counts = ladder(&a.ladder)?
        .into_iter()
        .map(|s| Ok((s, covering_number(&pts, s)? as u64)))
        .collect::<Result<Vec<_>, Error>>()?;
    let fit = estimate_dimension(&counts)?;
    let mut text = format!(
        "surrogate=box-counting (covering-number regression), not Hausdorff dimension\nslope={:?}\nintercept={:?}\nresidual={:?}\n",
        fit.slope, fit.intercept, fit.residual
    );
    for (s, n) in &counts {
        text.push_str(&format!("count.{}={n}\n", s.exp()));
    }
    let plot: String = counts
        .iter()
        .map(|(s, n)| format!("{} {:?}\n", s.exp(), (*n as f64).log2()))
        .collect();
    Ok(Outcome::ok(text.clone())
        .file("dim.txt", format!("{}{text}", stamp()))
        .file("plot_dim.txt", plot))
}

fn execute(cli: Cli) -> Result<Outcome, Fail> {
    match cli.command {
        Command::Run(a) => run(a),
        Command::VerifySet(a) => verify(a),
        Command::Decompose(a) => decompose(a),
        Command::Uniformize(a) => uniformize_cmd(a),
        Command::StableScale(a) => stable(a),
        Command::Incidence(a) => incidence(a),
        Command::Buckets(a) => buckets(a),
        Command::Dualize(a) => dualize(a),
        Command::RadialScan(a) => radial(a),
        Command::Furstenberg(a) => furstenberg(a),
        Command::Gen(a) => gen(a),
        Command::Dim(a) => dim(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out_dir = cli.out.clone();
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Fail::Contract(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    if !outcome.files.is_empty() {
        if let Err(e) = fs::create_dir_all(&out_dir) {
            eprintln!("error: cannot create {}: {e}", out_dir.display());
            return ExitCode::from(1);
        }
    }
    for (name, contents) in &outcome.files {
        if let Err(e) = write_atomic(&out_dir.join(name), contents) {
            eprintln!("error: writing {name}: {e}");
            return ExitCode::from(1);
        }
    }
    println!("{}", outcome.message.trim_end());
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("contract violated");
        ExitCode::from(1)
    }
}
