//! Experiment configs and the canned suites behind `frostlab run`.
//!
//! A config is flat `key = value` text under `[section]` headers:
//!
//! ```text
//! [experiment]
//! suite = fu-ren-sweep
//! seed = 0
//! seeds = 20
//! ladder = 6..10
//!
//! [params]
//! eps = 0.1
//! ```
//!
//! `[K]` holds a generator spec for the set under study and `[E]` the
//! viewpoint layout; both only apply to the radial suites. Every key a
//! suite does not know is rejected. Defaults are filled in before hashing,
//! so the hash names the effective configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::delta_sets::{katz_tao_decompose, verify_katz_tao};
use crate::duality::{check_duality_incidence, dual_tubes, SlopeInterceptLine};
use crate::error::{Error, Result};
use crate::generators::{
    furstenberg_config, random_delta_set, random_delta_set_in, random_measure, GeneratorOutput,
    GeneratorSpec,
};
use crate::geometry::{covering_number, tube_contains, Line, Point2, PointSet, Scale, Tube, TubeSet, Window};
use crate::incidences::{
    bucket_of, check_fu_ren, count_incidences, multiplicity_buckets, AnchoredTubes, IncidenceReport, Method,
};
use crate::radial::{estimate_dimension, exceptional_scan};
use crate::uniformization::{check_uniform, stable_scale_search, t0, uniformize, UniformityProfile};

pub const TOOL: &str = "frostlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Duality,
    IncidenceOracle,
    KatzTao,
    Uniformization,
    StableScale,
    FuRenSweep,
    SharpnessLine,
    ProjectionConsistency,
    Furstenberg,
    Buckets,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Duality,
        Suite::IncidenceOracle,
        Suite::KatzTao,
        Suite::Uniformization,
        Suite::StableScale,
        Suite::FuRenSweep,
        Suite::SharpnessLine,
        Suite::ProjectionConsistency,
        Suite::Furstenberg,
        Suite::Buckets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::IncidenceOracle => "incidence-oracle",
            Suite::KatzTao => "katz-tao",
            Suite::Uniformization => "uniformization",
            Suite::StableScale => "stable-scale",
            Suite::FuRenSweep => "fu-ren-sweep",
            Suite::SharpnessLine => "sharpness-line",
            Suite::ProjectionConsistency => "projection-consistency",
            Suite::Furstenberg => "furstenberg",
            Suite::Buckets => "buckets",
        }
    }

    /// Parameter keys with their defaults, in canonical order.
    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Suite::Duality => &[("pairs", "100000")],
            Suite::IncidenceOracle => &[("instances", "100"), ("max_points", "500"), ("max_tubes", "500")],
            Suite::KatzTao => &[("s", "1"), ("c", "4"), ("t", "1"), ("eps", "0.1")],
            Suite::Uniformization => &[
                ("dim", "2"),
                ("eta", "0.25"),
                ("block", "0"),
                ("blocks", "6"),
                ("max_active", "64"),
                ("eps", "none"),
            ],
            Suite::StableScale => &[
                ("profiles", "1000"),
                ("eps", "0.2,0.5,1.0"),
                ("eta", "0.1"),
                ("length", "64"),
                ("max_class", "30"),
            ],
            Suite::FuRenSweep => &[("pairs", "1:1,0.5:1,1:1.5"), ("eps", "0.1"), ("width", "1")],
            Suite::SharpnessLine => &[("sigma", "0.4"), ("d", "0.125"), ("target", "1"), ("tol", "0.15")],
            Suite::ProjectionConsistency => &[
                ("sigma", "0.5"),
                ("d", "0.5"),
                ("t_min", "1.4"),
                ("t_max", "1.6"),
                ("tol", "0.2"),
            ],
            Suite::Furstenberg => &[("pairs", "0.5:0.5,0.5:1"), ("tol", "0.15")],
            Suite::Buckets => &[("scale_exp", "6"), ("eps", "0.1"), ("tau", "0.2"), ("anchors", "4")],
        }
    }

    fn default_seeds(self) -> u32 {
        match self {
            Suite::Uniformization | Suite::FuRenSweep => 20,
            Suite::Buckets => 3,
            _ => 1,
        }
    }

    fn default_ladder(self) -> Option<(u32, u32)> {
        match self {
            Suite::KatzTao => Some((8, 10)),
            Suite::FuRenSweep => Some((6, 10)),
            Suite::SharpnessLine | Suite::ProjectionConsistency => Some((6, 12)),
            Suite::Furstenberg => Some((6, 11)),
            _ => None,
        }
    }

    fn is_radial(self) -> bool {
        matches!(self, Suite::SharpnessLine | Suite::ProjectionConsistency)
    }

    fn default_k(self) -> Option<&'static [(&'static str, &'static str)]> {
        match self {
            Suite::SharpnessLine => Some(&[
                ("kind", "on_line"),
                ("s", "0.8"),
                ("scale_exp", "12"),
                ("theta", "0"),
                ("offset", "0"),
            ]),
            Suite::ProjectionConsistency => Some(&[
                ("kind", "cantor_product"),
                ("base", "4"),
                ("pattern", "0,1,3"),
                ("depth", "6"),
            ]),
            _ => None,
        }
    }

    fn default_e(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Suite::SharpnessLine => &[
                ("line", "yes"),
                ("line_theta", "0"),
                ("line_offset", "0"),
                ("line_from", "-2"),
                ("line_to", "2"),
                ("line_step_exp", "12"),
                ("grid_n", "8"),
                ("grid_box", "-2,-2,2,2"),
            ],
            Suite::ProjectionConsistency => &[
                ("line", "no"),
                ("line_theta", "0"),
                ("line_offset", "0"),
                ("line_from", "0"),
                ("line_to", "0"),
                ("line_step_exp", "0"),
                ("grid_n", "128"),
                ("grid_box", "-2,-0.25,-0.5,1.25"),
            ],
            _ => &[],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

/// `m1..m2`, inclusive, `m1 ≤ m2`.
pub fn parse_ladder(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Config(format!("ladder '{s}' is not of the form m1..m2"));
    let (a, b) = s.trim().split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(Error::Config(format!("ladder {a}..{b} is empty")));
    }
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Number of consecutive seeds, starting at `seed`.
    pub seeds: u32,
    pub ladder: Option<(u32, u32)>,
    pub params: BTreeMap<String, String>,
    pub k: Option<BTreeMap<String, String>>,
    pub e: Option<BTreeMap<String, String>>,
}

fn to_map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

impl ExperimentConfig {
    /// The suite with every default filled in.
    pub fn canned(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            seed: 0,
            seeds: suite.default_seeds(),
            ladder: suite.default_ladder(),
            params: to_map(suite.defaults()),
            k: suite.default_k().map(to_map),
            e: suite.is_radial().then(|| to_map(suite.default_e())),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: n + 1, msg };
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unclosed section header '{line}'")))?
                    .trim();
                if !["experiment", "params", "K", "E"].contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                if sections.contains_key(name) {
                    return Err(err(format!("section [{name}] repeated")));
                }
                sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err("empty key".into()));
            }
            let sec = current
                .as_ref()
                .ok_or_else(|| err(format!("key '{k}' outside any section")))?;
            let map = sections.get_mut(sec).expect("section exists");
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(err(format!("key '{k}' repeated in [{sec}]")));
            }
        }
        let mut head = sections
            .remove("experiment")
            .ok_or_else(|| Error::Config("missing [experiment] section".into()))?;
        let suite: Suite = head
            .remove("suite")
            .ok_or_else(|| Error::Config("[experiment] needs suite =".into()))?
            .parse()?;
        let mut cfg = ExperimentConfig::canned(suite);
        if let Some(v) = head.remove("seed") {
            cfg.seed = v
                .parse()
                .map_err(|_| Error::Config(format!("seed '{v}' is not an unsigned integer")))?;
        }
        if let Some(v) = head.remove("seeds") {
            cfg.seeds = v
                .parse()
                .ok()
                .filter(|&n: &u32| n >= 1)
                .ok_or_else(|| Error::Config(format!("seeds '{v}' must be a positive integer")))?;
        }
        if let Some(v) = head.remove("ladder") {
            cfg = cfg.with_ladder(parse_ladder(&v)?)?;
        }
        if let Some(k) = head.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}' in [experiment]")));
        }
        for (k, v) in sections.remove("params").unwrap_or_default() {
            if !cfg.params.contains_key(&k) {
                return Err(Error::Config(format!("unknown key '{k}' for suite {suite}")));
            }
            cfg.params.insert(k, v);
        }
        if let Some(k) = sections.remove("K") {
            if !suite.is_radial() {
                return Err(Error::Config(format!("suite {suite} takes no [K] section")));
            }
            cfg.k = Some(k);
        }
        if let Some(e) = sections.remove("E") {
            let known = cfg.e.as_mut().ok_or_else(|| Error::Config(format!("suite {suite} takes no [E] section")))?;
            for (k, v) in e {
                if !known.contains_key(&k) {
                    return Err(Error::Config(format!("unknown key '{k}' in [E]")));
                }
                known.insert(k, v);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ladder(mut self, ladder: (u32, u32)) -> Result<Self> {
        if self.suite.default_ladder().is_none() {
            return Err(Error::Config(format!("suite {} takes no ladder", self.suite)));
        }
        self.ladder = Some(ladder);
        Ok(self)
    }

    /// Sets a `[params]` key the suite knows.
    pub fn with_param(mut self, key: &str, value: &str) -> Result<Self> {
        if !self.params.contains_key(key) {
            return Err(Error::Config(format!("unknown key '{key}' for suite {}", self.suite)));
        }
        self.params.insert(key.to_string(), value.to_string());
        Ok(self)
    }

    /// Type-checks every parameter and the generator spec.
    pub fn validate(&self) -> Result<()> {
        Params::new(self).check()?;
        if let Some(k) = &self.k {
            self.k_spec(k)?;
        }
        if let Some(e) = &self.e {
            ViewpointSpec::from_map(e)?;
        }
        if let Some((a, b)) = self.ladder {
            if a > b {
                return Err(Error::Config(format!("ladder {a}..{b} is empty")));
            }
        }
        Ok(())
    }

    fn k_spec(&self, k: &BTreeMap<String, String>) -> Result<GeneratorSpec> {
        let mut pairs: Vec<(&str, &str)> = k.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let seed = self.seed.to_string();
        if !k.contains_key("seed") {
            pairs.push(("seed", &seed));
        }
        GeneratorSpec::from_pairs(pairs)
    }

    /// Canonical text: fixed section order, sorted keys, defaults included.
    pub fn canonical(&self) -> String {
        let mut out = format!("[experiment]\nsuite={}\nseed={}\nseeds={}\n", self.suite, self.seed, self.seeds);
        if let Some((a, b)) = self.ladder {
            out.push_str(&format!("ladder={a}..{b}\n"));
        }
        let mut section = |name: &str, map: &BTreeMap<String, String>| {
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in map {
                out.push_str(&format!("{k}={v}\n"));
            }
        };
        section("params", &self.params);
        if let Some(k) = &self.k {
            section("K", k);
        }
        if let Some(e) = &self.e {
            section("E", e);
        }
        out
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn scales(&self) -> Vec<Scale> {
        let (a, b) = self.ladder.expect("suite has a ladder");
        (a..=b).map(Scale::new).collect()
    }

    fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

/// Typed access to `[params]`.
struct Params<'a> {
    cfg: &'a ExperimentConfig,
}

impl<'a> Params<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Params { cfg }
    }

    fn raw(&self, key: &str) -> &str {
        self.cfg.params.get(key).map(String::as_str).expect("default exists")
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| Error::Config(format!("bad value '{v}' for {key}")))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let x: f64 = self.parse(key)?;
        if !x.is_finite() {
            return Err(Error::Config(format!("{key} must be finite")));
        }
        Ok(x)
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.raw(key) == "none" {
            return Ok(None);
        }
        self.f64(key).map(Some)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.raw(key);
        let out: Vec<f64> = v
            .split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Config(format!("bad list '{v}' for {key}")))?;
        if out.is_empty() {
            return Err(Error::Config(format!("{key} is empty")));
        }
        Ok(out)
    }

    /// `s:t` pairs separated by commas.
    fn pairs(&self, key: &str) -> Result<Vec<(f64, f64)>> {
        let v = self.raw(key);
        v.split(',')
            .map(|p| {
                let (a, b) = p.split_once(':')?;
                let a: f64 = a.trim().parse().ok()?;
                let b: f64 = b.trim().parse().ok()?;
                (a.is_finite() && b.is_finite()).then_some((a, b))
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Config(format!("bad pair list '{v}' for {key}; expected s:t,s:t")))
    }

    fn check(&self) -> Result<()> {
        for (key, _) in self.cfg.suite.defaults() {
            match *key {
                "pairs" if self.cfg.suite != Suite::Duality => {
                    self.pairs(key)?;
                }
                "eps" if self.cfg.suite == Suite::StableScale => {
                    self.list(key)?;
                }
                "eps" if self.cfg.suite == Suite::Uniformization => {
                    self.opt_f64(key)?;
                }
                "pairs" | "instances" | "max_points" | "max_tubes" | "profiles" | "length" | "max_class"
                | "max_active" | "anchors" => {
                    self.parse::<usize>(key)?;
                }
                "dim" | "block" | "blocks" | "scale_exp" => {
                    self.parse::<u32>(key)?;
                }
                _ => {
                    self.f64(key)?;
                }
            }
        }
        Ok(())
    }
}

/// Viewpoints on a line segment at a dyadic spacing plus a grid of cell
/// centres over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewpointSpec {
    pub line: Option<(Line, f64, f64, u32)>,
    pub grid_n: usize,
    pub grid_box: [f64; 4],
}

impl ViewpointSpec {
    fn from_map(m: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| m.get(k).map(String::as_str).unwrap_or("");
        let num = |k: &str| -> Result<f64> {
            get(k)
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Config(format!("bad value '{}' for {k}", get(k))))
        };
        let line = match get("line") {
            "yes" => {
                let step: u32 = get("line_step_exp")
                    .parse()
                    .map_err(|_| Error::Config("bad line_step_exp".into()))?;
                Scale::new(step).check_supported()?;
                Some((
                    Line::new(num("line_theta")?, num("line_offset")?),
                    num("line_from")?,
                    num("line_to")?,
                    step,
                ))
            }
            "no" => None,
            v => return Err(Error::Config(format!("line must be yes or no, got '{v}'"))),
        };
        let grid_n: usize = get("grid_n")
            .parse()
            .map_err(|_| Error::Config(format!("bad value '{}' for grid_n", get("grid_n"))))?;
        let b: Vec<f64> = get("grid_box")
            .split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .filter(|v: &Vec<f64>| v.len() == 4)
            .ok_or_else(|| Error::Config("grid_box needs x0,y0,x1,y1".into()))?;
        Ok(ViewpointSpec {
            line,
            grid_n,
            grid_box: [b[0], b[1], b[2], b[3]],
        })
    }

    pub fn generate(&self) -> Vec<Point2> {
        let mut out = Vec::new();
        if let Some((l, from, to, step)) = &self.line {
            let h = Scale::new(*step).value();
            let (o, d) = (l.foot(), l.direction());
            let mut i = (from / h).ceil() as i64;
            while i as f64 * h <= *to {
                out.push(o + d * (i as f64 * h));
                i += 1;
            }
        }
        let [x0, y0, x1, y1] = self.grid_box;
        let n = self.grid_n as f64;
        for i in 0..self.grid_n {
            for j in 0..self.grid_n {
                out.push(Point2::new(
                    x0 + (i as f64 + 0.5) * (x1 - x0) / n,
                    y0 + (j as f64 + 0.5) * (y1 - y0) / n,
                ));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportFile {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub suite: Suite,
    pub config_sha256: String,
    pub passed: bool,
    /// `key=value` lines, also written to `summary.txt`.
    pub summary: String,
    pub files: Vec<ReportFile>,
}

impl ExperimentOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }
}

/// What a suite runner hands back before stamping.
struct SuiteResult {
    passed: bool,
    summary: Vec<(String, String)>,
    files: Vec<(String, String)>,
}

impl SuiteResult {
    fn new(passed: bool) -> Self {
        SuiteResult {
            passed,
            summary: Vec::new(),
            files: Vec::new(),
        }
    }

    fn kv(mut self, k: &str, v: impl fmt::Display) -> Self {
        self.summary.push((k.to_string(), v.to_string()));
        self
    }

    fn file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

fn context(suite: Suite, what: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let what = what.into();
    move |e| Error::InSuite {
        suite: suite.name(),
        context: what,
        source: Box::new(e),
    }
}

/// Runs a validated config. Outputs depend only on the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let p = Params::new(cfg);
    let r = match cfg.suite {
        Suite::Duality => run_duality(cfg, &p)?,
        Suite::IncidenceOracle => run_incidence_oracle(cfg, &p)?,
        Suite::KatzTao => run_katz_tao(cfg, &p)?,
        Suite::Uniformization => run_uniformization(cfg, &p)?,
        Suite::StableScale => run_stable_scale(cfg, &p)?,
        Suite::FuRenSweep => run_fu_ren(cfg, &p)?,
        Suite::SharpnessLine | Suite::ProjectionConsistency => run_radial(cfg, &p)?,
        Suite::Furstenberg => run_furstenberg(cfg, &p)?,
        Suite::Buckets => run_buckets(cfg, &p)?,
    };
    let hash = cfg.sha256();
    let stamp = format!("# tool={TOOL} version={VERSION} config_sha256={hash}\n");
    let mut summary = format!("suite={}\n", cfg.suite);
    for (k, v) in &r.summary {
        summary.push_str(&format!("{k}={v}\n"));
    }
    summary.push_str(&format!("passed={}\n", r.passed));
    let mut files = vec![
        ReportFile {
            name: "config.txt".into(),
            contents: format!("{stamp}{}", cfg.canonical()),
        },
        ReportFile {
            name: "summary.txt".into(),
            contents: format!("{stamp}{summary}"),
        },
    ];
    files.extend(r.files.into_iter().map(|(name, c)| ReportFile {
        name,
        contents: format!("{stamp}{c}"),
    }));
    Ok(ExperimentOutput {
        suite: cfg.suite,
        config_sha256: hash,
        passed: r.passed,
        summary,
        files,
    })
}

fn run_duality(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let pairs: usize = p.parse("pairs")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mismatches = Vec::new();
    let mut incident = 0usize;
    for i in 0..pairs {
        let l = SlopeInterceptLine::new(rng.gen(), rng.gen())?;
        let x: f64 = rng.gen();
        // a third on the line, a third within a few tolerances, a third anywhere
        let y = match i % 3 {
            0 => l.slope * x + l.intercept,
            1 => l.slope * x + l.intercept + rng.gen_range(-2e-9..2e-9),
            _ => rng.gen(),
        };
        let pt = Point2::new(x, y);
        let (a, b) = check_duality_incidence(pt, &l)?;
        incident += a as usize;
        if a != b {
            mismatches.push(format!("{i},{:?},{:?},{:?},{:?},{a},{b}\n", pt.x, pt.y, l.slope, l.intercept));
        }
    }
    let mut csv = String::from("pair,x,y,slope,intercept,point_on_line,dual_on_dual\n");
    csv.extend(mismatches.iter().cloned());
    Ok(SuiteResult::new(mismatches.is_empty())
        .kv("pairs", pairs)
        .kv("incident", incident)
        .kv("mismatches", mismatches.len())
        .file("duality_mismatches.csv", csv))
}

/// Random tubes and points, a share of the points placed on tube edges.
fn incidence_instance(rng: &mut ChaCha8Rng, max_points: usize, max_tubes: usize) -> Result<(Vec<Point2>, TubeSet)> {
    let np = rng.gen_range(1..=max_points.max(1));
    let nt = rng.gen_range(1..=max_tubes.max(1));
    let delta = Scale::new(rng.gen_range(3..=8)).value();
    let tubes: Vec<Tube> = (0..nt)
        .map(|_| {
            let line = Line::new(rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(-1.0..1.0));
            Tube::new(line, delta * rng.gen_range(1..=4) as f64)
        })
        .collect::<Result<_>>()?;
    let points = (0..np)
        .map(|_| {
            if rng.gen_bool(0.3) {
                let t = &tubes[rng.gen_range(0..nt)];
                let along = t.line.foot() + t.line.direction() * rng.gen_range(-1.0..1.0);
                along + t.line.normal() * (t.width() / 2.0 * if rng.gen() { 1.0 } else { -1.0 })
            } else {
                Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect();
    Ok((points, TubeSet::new(tubes)))
}

fn run_incidence_oracle(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let n: usize = p.parse("instances")?;
    let (mp, mt): (usize, usize) = (p.parse("max_points")?, p.parse("max_tubes")?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from("instance,points,tubes,brute,grid,equal\n");
    let mut equal = 0;
    for i in 0..n {
        let (pts, tubes) = incidence_instance(&mut rng, mp, mt)?;
        let b = count_incidences(&pts, &tubes, Method::Brute);
        let g = count_incidences(&pts, &tubes, Method::Grid);
        equal += (b == g) as usize;
        csv.push_str(&format!("{i},{},{},{b},{g},{}\n", pts.len(), tubes.len(), b == g));
    }
    Ok(SuiteResult::new(equal == n)
        .kv("instances", n)
        .kv("equal", equal)
        .file("incidence_oracle.csv", csv))
}

fn run_katz_tao(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let (s, c, t, eps) = (p.f64("s")?, p.f64("c")?, p.f64("t")?, p.f64("eps")?);
    let cells: Vec<(Scale, u64)> = cfg
        .scales()
        .into_iter()
        .flat_map(|sc| cfg.seed_list().into_iter().map(move |seed| (sc, seed)))
        .collect();
    let rows: Vec<(bool, String)> = cells
        .par_iter()
        .map(|&(sc, seed)| {
            let ctx = || format!("scale_exp={} seed={seed}", sc.exp());
            let set = random_delta_set_in(s, sc, seed, &Window::UNIT, c).map_err(context(cfg.suite, ctx()))?;
            let rep = katz_tao_decompose(&set, t, c, eps).map_err(context(cfg.suite, ctx()))?;
            let mut worst: f64 = 0.0;
            for part in &rep.parts {
                worst = worst.max(verify_katz_tao(part, t).map_err(context(cfg.suite, ctx()))?.best_c);
            }
            let ok = worst <= 1.0 && rep.bound_satisfied();
            Ok((
                ok,
                format!(
                    "{},{seed},{},{:?},{},{:?},{:?},{ok}\n",
                    sc.exp(),
                    set.len(),
                    rep.premise_best_c,
                    rep.n,
                    rep.bound,
                    worst
                ),
            ))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("scale_exp,seed,points,premise_best_c,parts,bound,max_part_best_c,passed\n");
    csv.extend(rows.iter().map(|r| r.1.as_str()));
    let ok = rows.iter().filter(|r| r.0).count();
    Ok(SuiteResult::new(ok == rows.len())
        .kv("runs", rows.len())
        .kv("passed_runs", ok)
        .file("katz_tao.csv", csv))
}

fn run_uniformization(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let dim: u32 = p.parse("dim")?;
    let eta = p.f64("eta")?;
    let blocks: u32 = p.parse("blocks")?;
    let max_active: usize = p.parse("max_active")?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Config(format!("eta must lie in (0, 1], got {eta}")));
    }
    let block = match p.parse::<u32>("block")? {
        0 => t0(dim, eta),
        b => b,
    };
    if let Some(eps) = p.opt_f64("eps")? {
        let limit = 0.25 * eps.powf(3.0 / eps + 1.0);
        if !(eps > 0.0 && eta < limit) {
            return Err(Error::Config(format!(
                "eta = {eta} must be below eps^(3/eps+1)/4 = {limit:e} for eps = {eps}"
            )));
        }
    }
    let rows: Vec<(bool, String)> = cfg
        .seed_list()
        .par_iter()
        .map(|&seed| {
            let ctx = || format!("seed={seed}");
            let mu = random_measure(dim, block, blocks, seed, max_active).map_err(context(cfg.suite, ctx()))?;
            let u = uniformize(&mu, eta).map_err(context(cfg.suite, ctx()))?;
            let uniform = check_uniform(&u.measure, &u.profile)
                .map_err(context(cfg.suite, ctx()))?
                .is_none();
            let floor = u.mass_floor_met();
            let max_light = u.log.iter().map(|l| l.light_mass).fold(0.0, f64::max);
            let light_ok = u.log.iter().all(|l| l.light_mass <= u.mass_floor);
            let ok = uniform && floor && light_ok;
            Ok((
                ok,
                format!(
                    "{seed},{:?},{:?},{:?},{uniform},{floor},{:?},{light_ok}\n",
                    mu.total_mass(),
                    u.measure.total_mass(),
                    u.mass_floor,
                    max_light
                ),
            ))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("seed,input_mass,kept_mass,mass_floor,uniform,floor_met,max_light_mass,light_ok\n");
    csv.extend(rows.iter().map(|r| r.1.as_str()));
    let ok = rows.iter().filter(|r| r.0).count();
    Ok(SuiteResult::new(ok == rows.len())
        .kv("block", block)
        .kv("measures", rows.len())
        .kv("passed_measures", ok)
        .file("uniformization.csv", csv))
}

/// Random profiles: half independent classes, half increasing walks that
/// force long descents.
fn random_profile(rng: &mut ChaCha8Rng, i: usize, eta: f64, length: usize, max_class: u32) -> Result<UniformityProfile> {
    let classes: Vec<u32> = if i % 2 == 0 {
        (0..length).map(|_| rng.gen_range(0..=max_class)).collect()
    } else {
        let mut c = 0u32;
        (0..length)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    c = (c + rng.gen_range(1..=4)).min(max_class);
                }
                c
            })
            .collect()
    };
    UniformityProfile::from_classes(1, eta, 0, classes)
}

fn run_stable_scale(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let n: usize = p.parse("profiles")?;
    let epss = p.list("eps")?;
    let eta = p.f64("eta")?;
    let length: usize = p.parse("length")?;
    let max_class: u32 = p.parse("max_class")?;
    if length == 0 {
        return Err(Error::Config("length must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from("profile,eps,steps,step_bound,level,sigma,window_ok\n");
    let (mut runs, mut ok) = (0usize, 0usize);
    for i in 0..n {
        let prof = random_profile(&mut rng, i, eta, length, max_class)?;
        for &eps in &epss {
            let r = stable_scale_search(&prof, eps).map_err(context(cfg.suite, format!("profile={i} eps={eps}")))?;
            let bound = (3.0 / eps - 1e-12).ceil() as usize;
            let lo = (eps * r.level as f64 - 1e-12).ceil().max(0.0) as u32;
            let window_ok = (lo..=r.level).all(|j| prof.phi(j).expect("level covered") >= r.sigma - eps - 1e-12);
            let pass = r.steps <= bound && window_ok;
            runs += 1;
            ok += pass as usize;
            csv.push_str(&format!("{i},{eps},{},{bound},{},{:?},{window_ok}\n", r.steps, r.level, r.sigma));
        }
    }
    Ok(SuiteResult::new(ok == runs)
        .kv("runs", runs)
        .kv("passed_runs", ok)
        .file("stable_scale.csv", csv))
}

fn run_fu_ren(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let pairs = p.pairs("pairs")?;
    let eps = p.f64("eps")?;
    let width = p.f64("width")?;
    let mut cells = Vec::new();
    for &(s, t) in &pairs {
        for sc in cfg.scales() {
            for seed in cfg.seed_list() {
                cells.push((s, t, sc, seed));
            }
        }
    }
    let reports: Vec<IncidenceReport> = cells
        .par_iter()
        .map(|&(s, t, sc, seed)| {
            let ctx = || format!("s={s} t={t} scale_exp={} seed={seed}", sc.exp());
            let pts = random_delta_set_in(s, sc, seed, &Window::AMBIENT, f64::INFINITY)
                .map_err(context(cfg.suite, ctx()))?;
            let chart = random_delta_set_in(t, sc, seed ^ 0x7475_6265, &Window::AMBIENT, f64::INFINITY)
                .map_err(context(cfg.suite, ctx()))?;
            let tubes = dual_tubes(&chart, width).map_err(context(cfg.suite, ctx()))?;
            check_fu_ren(&pts, &tubes, s, t, eps).map_err(context(cfg.suite, ctx()))
        })
        .collect::<Result<_>>()?;
    let mut csv = format!("seed,{}\n", IncidenceReport::CSV_HEADER);
    for ((.., seed), r) in cells.iter().zip(&reports) {
        csv.push_str(&format!("{seed},{}\n", r.to_csv_row()));
    }
    let verified: Vec<&IncidenceReport> = reports.iter().filter(|r| r.premise_verified).collect();
    let violations = verified.iter().filter(|r| !r.satisfied).count();
    let mut res = SuiteResult::new(!verified.is_empty() && violations == 0)
        .kv("runs", reports.len())
        .kv("premise_verified", verified.len())
        .kv("violations", violations);
    for &(s, t) in &pairs {
        let v = verified.iter().filter(|r| r.s == s && r.t == t).count();
        res = res.kv(&format!("premise_verified.{s}:{t}"), v);
    }
    Ok(res.file("fu_ren.csv", csv))
}

fn run_radial(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let sigma = p.f64("sigma")?;
    let d = p.f64("d")?;
    if !(d > 0.0) {
        return Err(Error::Config(format!("separation floor d must be positive, got {d}")));
    }
    let spec = cfg.k_spec(cfg.k.as_ref().expect("radial suites carry K"))?;
    let k = match spec.generate().map_err(context(cfg.suite, "generating K"))? {
        GeneratorOutput::Points(k) => k,
        GeneratorOutput::Furstenberg(f) => PointSet::new(f.union(), f.per_tube[0].scale())?,
    };
    let e = ViewpointSpec::from_map(cfg.e.as_ref().expect("radial suites carry E"))?.generate();
    let dists = k.dists_to(&e);
    let viewpoints: Vec<Point2> = e.iter().zip(&dists).filter(|(_, &x)| x >= d).map(|(v, _)| *v).collect();
    let dropped = e.len() - viewpoints.len();
    let report = exceptional_scan(&k, &viewpoints, sigma, &cfg.scales()).map_err(context(cfg.suite, "scan"))?;
    let slope = report.exceptional_fit.slope;
    let mut res = match cfg.suite {
        Suite::SharpnessLine => {
            let (target, tol) = (p.f64("target")?, p.f64("tol")?);
            SuiteResult::new((slope - target).abs() <= tol)
                .kv("target", target)
                .kv("tol", tol)
        }
        _ => {
            let (lo, hi, tol) = (p.f64("t_min")?, p.f64("t_max")?, p.f64("tol")?);
            let t_ok = (lo..=hi).contains(&report.t_emp());
            SuiteResult::new(t_ok && slope <= report.bound + tol)
                .kv("t_emp_in_range", t_ok)
                .kv("tol", tol)
        }
    };
    let (pe, pk) = report.plot_data();
    res = res
        .kv("k_points", k.len())
        .kv("viewpoints", viewpoints.len())
        .kv("viewpoints_dropped", dropped)
        .kv("t_emp", format!("{:?}", report.t_emp()))
        .kv("exceptional_slope", format!("{slope:?}"))
        .kv("bound", format!("{:?}", report.bound));
    Ok(res
        .file("radial_scan.csv", report.to_csv())
        .file("radial_summary.txt", report.to_text())
        .file("plot_exceptional.txt", pe)
        .file("plot_k.txt", pk))
}

fn run_furstenberg(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let pairs = p.pairs("pairs")?;
    let tol = p.f64("tol")?;
    let scales = cfg.scales();
    let mut csv = String::from("seed,s,t,scale_exp,tubes,points,covering_count\n");
    let mut res = SuiteResult::new(true);
    let mut plots = Vec::new();
    let mut all_ok = true;
    for seed in cfg.seed_list() {
        for &(s, t) in &pairs {
            let counts: Vec<(Scale, u64, usize, usize)> = scales
                .par_iter()
                .map(|&sc| {
                    let f = furstenberg_config(s, t, sc, seed)
                        .map_err(context(cfg.suite, format!("s={s} t={t} scale_exp={}", sc.exp())))?;
                    let u = f.union();
                    Ok((sc, covering_number(&u, sc)? as u64, f.tubes.len(), u.len()))
                })
                .collect::<Result<_>>()?;
            for (sc, n, tubes, pts) in &counts {
                csv.push_str(&format!("{seed},{s},{t},{},{tubes},{pts},{n}\n", sc.exp()));
            }
            let fit = estimate_dimension(&counts.iter().map(|c| (c.0, c.1)).collect::<Vec<_>>())
                .map_err(context(cfg.suite, "regression"))?;
            let gamma = s + s.min(t);
            let ok = fit.slope >= gamma - tol;
            all_ok &= ok;
            res = res
                .kv(&format!("slope.{seed}.{s}:{t}"), format!("{:?}", fit.slope))
                .kv(&format!("gamma.{seed}.{s}:{t}"), gamma)
                .kv(&format!("ok.{seed}.{s}:{t}"), ok);
            let plot: String = counts
                .iter()
                .map(|(sc, n, ..)| format!("{} {:?}\n", sc.exp(), (*n as f64).log2()))
                .collect();
            plots.push((format!("plot_union_{seed}_{s}_{t}.txt"), plot));
        }
    }
    res.passed = all_ok;
    res = res.file("furstenberg.csv", csv);
    for (name, plot) in plots {
        res = res.file(&name, plot);
    }
    Ok(res)
}

/// Recomputes a bucket report by brute force: ranges, disjointness and
/// `F_bad`. Returns a description of the first failure.
fn audit_buckets(anchored: &AnchoredTubes, f: &PointSet, eps: f64, report: &crate::incidences::MultiplicityBuckets) -> Option<String> {
    let scale = f.scale();
    let counts: Vec<usize> = anchored
        .tubes
        .iter()
        .map(|t| f.points().iter().filter(|p| tube_contains(t, **p)).count())
        .collect();
    if counts != report.tube_counts {
        return Some("tube counts differ from brute force".into());
    }
    let levels = report.levels;
    let n = f.len();
    for (a, ((_, ids), ab)) in anchored.anchors.iter().zip(&report.per_anchor).enumerate() {
        let mut seen = BTreeSet::new();
        for (j, b) in ab.buckets.iter().enumerate() {
            let j = j as u32 + 1;
            for &id in b {
                let c = counts[id];
                let lo = 1usize << (j - 1);
                let in_range = lo <= c && (c < lo << 1 || (j == levels && c == lo << 1));
                if !in_range {
                    return Some(format!("anchor {a}: tube {id} with {c} points in bucket {j}"));
                }
                if !seen.insert(id) {
                    return Some(format!("anchor {a}: tube {id} in two buckets"));
                }
            }
        }
        for &id in ids {
            match bucket_of(counts[id], levels) {
                Some(j) if !ab.discarded[(j - 1) as usize] && !seen.contains(&id) => {
                    return Some(format!("anchor {a}: tube {id} missing from bucket {j}"));
                }
                _ => {}
            }
        }
        let floor = 2.0 * scale.pow(eps) * n as f64;
        for (j, b) in ab.buckets.iter().enumerate() {
            let members: BTreeSet<usize> = ids
                .iter()
                .copied()
                .filter(|&id| bucket_of(counts[id], levels) == Some(j as u32 + 1))
                .collect();
            let reach = (0..n)
                .filter(|&i| members.iter().any(|&id| tube_contains(&anchored.tubes.tubes[id], f.points()[i])))
                .count();
            if ab.discarded[j] != (!members.is_empty() && (reach as f64) < floor) {
                return Some(format!("anchor {a}: discard flag of bucket {} wrong", j + 1));
            }
            if !ab.discarded[j] && b.len() != members.len() {
                return Some(format!("anchor {a}: bucket {} incomplete", j + 1));
            }
        }
        let bad: Vec<usize> = (0..n)
            .filter(|&i| {
                !ab.buckets
                    .iter()
                    .flatten()
                    .any(|&id| tube_contains(&anchored.tubes.tubes[id], f.points()[i]))
            })
            .collect();
        if bad != ab.f_bad || ab.f_bad_fraction != (bad.len(), n) {
            return Some(format!("anchor {a}: F_bad differs from brute force"));
        }
    }
    None
}

fn run_buckets(cfg: &ExperimentConfig, p: &Params<'_>) -> Result<SuiteResult> {
    let sc = Scale::new(p.parse("scale_exp")?);
    sc.check_supported()?;
    let (eps, tau) = (p.f64("eps")?, p.f64("tau")?);
    let n_anchors: usize = p.parse("anchors")?;
    let mut csv = String::from("seed,anchor,bucket,tubes,discarded,coverage_ok\n");
    let mut text = String::new();
    let mut failures = Vec::new();
    for seed in cfg.seed_list() {
        let ctx = || format!("seed={seed}");
        let f = random_delta_set(1.0, sc, seed).map_err(context(cfg.suite, ctx()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6275_636b);
        let anchors: Vec<Point2> = (0..n_anchors)
            .map(|_| Point2::new(rng.gen_range(-2.0..-1.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let anchored = AnchoredTubes::through_anchors(&anchors, sc).map_err(context(cfg.suite, ctx()))?;
        let rep = multiplicity_buckets(&anchored, &f, eps, tau, None).map_err(context(cfg.suite, ctx()))?;
        if let Some(why) = audit_buckets(&anchored, &f, eps, &rep) {
            failures.push(format!("seed {seed}: {why}"));
        }
        for (a, ab) in rep.per_anchor.iter().enumerate() {
            for (j, b) in ab.buckets.iter().enumerate() {
                if !b.is_empty() || ab.discarded[j] {
                    csv.push_str(&format!("{seed},{a},{},{},{},{}\n", j + 1, b.len(), ab.discarded[j], ab.coverage_ok[j]));
                }
            }
        }
        text.push_str(&format!("[seed {seed}]\n{}", rep.to_text()));
    }
    let mut res = SuiteResult::new(failures.is_empty())
        .kv("seeds", cfg.seeds)
        .kv("audit_failures", failures.len());
    if let Some(first) = failures.first() {
        res = res.kv("first_failure", first);
    }
    Ok(res.file("buckets.csv", csv).file("buckets.txt", text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_parsing() {
        assert_eq!(parse_ladder("6..12").unwrap(), (6, 12));
        assert_eq!(parse_ladder(" 7 .. 7 ").unwrap(), (7, 7));
        assert!(parse_ladder("12..6").is_err());
        assert!(parse_ladder("6-12").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        for s in Suite::ALL {
            let c = ExperimentConfig::canned(s);
            let back = ExperimentConfig::parse(&c.canonical()).unwrap();
            assert_eq!(back, c, "{s}");
            assert_eq!(back.sha256(), c.sha256());
        }
    }

    #[test]
    fn parse_applies_overrides_and_defaults() {
        let c = ExperimentConfig::parse(
            "# sweep\n[experiment]\nsuite = fu-ren-sweep\nseed = 5\nseeds = 2\nladder = 6..7\n\n[params]\neps = 0.2\n",
        )
        .unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.seeds, 2);
        assert_eq!(c.ladder, Some((6, 7)));
        assert_eq!(c.params["eps"], "0.2");
        assert_eq!(c.params["pairs"], "1:1,0.5:1,1:1.5");
        assert_ne!(c.sha256(), ExperimentConfig::canned(Suite::FuRenSweep).sha256());
    }

    #[test]
    fn malformed_configs_are_rejected() {
        let bad = [
            "suite = duality\n",
            "[experiment]\n",
            "[experiment]\nsuite = nope\n",
            "[experiment]\nsuite = duality\n[params]\nbogus = 1\n",
            "[experiment]\nsuite = duality\nladder = 6..8\n",
            "[experiment]\nsuite = duality\n[params]\npairs = many\n",
            "[experiment]\nsuite = duality\n[K]\nkind = grid\n",
            "[experiment]\nsuite = duality\n[other]\n",
            "[experiment]\nsuite = duality\nsuite = duality\n",
            "[experiment]\nsuite = duality\nno equals sign\n",
            "[experiment]\nsuite = fu-ren-sweep\n[params]\npairs = 1;1\n",
            "[experiment]\nsuite = sharpness-line\n[K]\nkind = on_line\ncolour = red\n",
            "[experiment]\nsuite = sharpness-line\n[E]\ngrid_box = 1,2,3\n",
        ];
        for text in bad {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert!(e.is_usage(), "{text:?} gave {e}");
        }
    }

    #[test]
    fn small_runs_are_deterministic_and_stamped() {
        let cfg = ExperimentConfig::canned(Suite::Duality)
            .with_param("pairs", "3000")
            .unwrap()
            .with_seed(3);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert!(a.passed);
        assert_eq!(a.files, b.files);
        let stamp = format!("# tool=frostlab version={VERSION} config_sha256={}", cfg.sha256());
        assert!(a.files.iter().all(|f| f.contents.starts_with(&stamp)));
        assert!(a.file("summary.txt").unwrap().contains("mismatches=0\n"));
    }

    #[test]
    fn eta_must_respect_eps_when_given() {
        let cfg = ExperimentConfig::canned(Suite::Uniformization)
            .with_param("eps", "0.5")
            .unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn viewpoints_on_line_and_grid() {
        let mut e = to_map(Suite::SharpnessLine.default_e());
        e.insert("line_step_exp".into(), "2".into());
        e.insert("grid_n".into(), "2".into());
        let v = ViewpointSpec::from_map(&e).unwrap().generate();
        // 17 line points at spacing 1/4 on [-2, 2], then 4 cell centres
        assert_eq!(v.len(), 17 + 4);
        assert_eq!(v[0], Point2::new(-2.0, 0.0));
        assert_eq!(v[17], Point2::new(-1.0, -1.0));
    }

    #[test]
    fn small_suites_pass() {
        let stable = ExperimentConfig::canned(Suite::StableScale)
            .with_param("profiles", "50")
            .unwrap();
        assert!(run_experiment(&stable).unwrap().passed);
        let oracle = ExperimentConfig::canned(Suite::IncidenceOracle)
            .with_param("instances", "5")
            .unwrap();
        assert!(run_experiment(&oracle).unwrap().passed);
        let buckets = ExperimentConfig::parse("[experiment]\nsuite = buckets\nseeds = 1\n").unwrap();
        let out = run_experiment(&buckets).unwrap();
        assert!(out.passed, "{}", out.summary);
    }
}
