//! Seeded and deterministic test configurations: product Cantor sets,
//! Cantor sets on a line, branching random (δ,s)-sets, Furstenberg
//! configurations, grids and random dyadic measures.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delta_sets::verify_delta_set;
use crate::duality::dualize_point;
use crate::error::{Error, Result};
use crate::geometry::{Line, Point2, PointSet, Scale, Tube, TubeSet, Window};
use crate::uniformization::{DyadicMeasure, Piece};

/// Acceptance cap for `random_delta_set`.
pub const RANDOM_SET_MAX_C: f64 = 32.0;
pub const RANDOM_SET_TRIES: u32 = 5;

/// Cap for `set_on_line`.
pub const LINE_SET_MAX_C: f64 = 8.0;

#[derive(Clone, Debug)]
pub struct Generated {
    pub points: PointSet,
    pub nominal_dimension: f64,
}

/// `C × C`, `C` the base-`base` Cantor set keeping `pattern` digits to
/// `depth`. Points sit at the lower-left corners of the surviving cells of
/// `[0, 1]²`; the scale is the largest power of two below `base^-depth`.
pub fn cantor_product(base: u32, pattern: &[u32], depth: u32) -> Result<Generated> {
    if base < 2 {
        return Err(Error::param("base must be at least 2"));
    }
    if pattern.is_empty() {
        return Err(Error::param("empty digit pattern"));
    }
    let mut digits = pattern.to_vec();
    digits.sort_unstable();
    digits.dedup();
    if digits.len() != pattern.len() || digits.iter().any(|&d| d >= base) {
        return Err(Error::param(format!("pattern must be distinct digits below {base}")));
    }
    if depth == 0 {
        return Err(Error::param("depth must be at least 1"));
    }
    let exp = (depth as f64 * (base as f64).log2()).ceil() as u32;
    let scale = Scale::new(exp);
    scale.check_supported()?;
    let mut line = vec![0.0f64];
    let mut step = 1.0;
    for _ in 0..depth {
        step /= base as f64;
        line = line
            .iter()
            .flat_map(|&x| digits.iter().map(move |&d| x + d as f64 * step))
            .collect();
    }
    let points = line
        .iter()
        .flat_map(|&x| line.iter().map(move |&y| Point2::new(x, y)))
        .collect();
    Ok(Generated {
        points: PointSet::new(points, scale)?,
        nominal_dimension: 2.0 * (digits.len() as f64).ln() / (base as f64).ln(),
    })
}

/// Binary levels at which a Cantor set of dimension `s` branches: level
/// `i` (1-based) splits when `⌊is⌋ > ⌊(i-1)s⌋`.
fn branching_levels(s: f64, m: u32) -> Vec<bool> {
    (1..=m)
        .map(|i| (i as f64 * s + 1e-9).floor() > ((i - 1) as f64 * s + 1e-9).floor())
        .collect()
}

/// Offsets in `[0, 1)` of a dimension-`s` Cantor set at scale `2^-m`.
/// Non-branching levels keep the child picked by `pick`.
fn cantor_offsets(s: f64, m: u32, mut pick: impl FnMut() -> bool) -> Vec<f64> {
    let mut xs = vec![0.0f64];
    for (i, split) in branching_levels(s, m).into_iter().enumerate() {
        let h = (-(i as f64 + 1.0)).exp2();
        xs = if split {
            xs.iter().flat_map(|&x| [x, x + h]).collect()
        } else {
            xs.iter().map(|&x| if pick() { x + h } else { x }).collect()
        };
    }
    xs
}

/// A dimension-`s` Cantor set on the unit segment of `ℓ` starting at its
/// foot point.
pub fn set_on_line(s: f64, scale: Scale, line: &Line) -> Result<PointSet> {
    if s > 1.0 {
        return Err(Error::LineDimension(s));
    }
    if !(s >= 0.0) {
        return Err(Error::param(format!("s must lie in [0, 1], got {s}")));
    }
    scale.check_supported()?;
    let (o, d) = (line.foot(), line.direction());
    let pts = cantor_offsets(s, scale.exp(), || false)
        .into_iter()
        .map(|u| o + d * u)
        .collect();
    PointSet::new(pts, scale)
}

/// Children kept per square at each level so that the running product
/// tracks `2^(is)`.
fn branching_schedule(s: f64, levels: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(levels as usize);
    let mut have = 1.0f64;
    for i in 1..=levels {
        let want = (i as f64 * s).exp2();
        let k = (want / have).round().clamp(1.0, 4.0) as usize;
        have *= k as f64;
        out.push(k);
    }
    out
}

fn branching_set(s: f64, scale: Scale, window: &Window, rng: &mut ChaCha8Rng) -> Result<Vec<Point2>> {
    let depth = window
        .depth_for(scale)
        .ok_or_else(|| Error::param("scale coarser than the window"))?;
    let mut cells = vec![(0u64, 0u64)];
    for k in branching_schedule(s, depth) {
        let mut next = Vec::with_capacity(cells.len() * k);
        for (x, y) in cells {
            for c in sample(rng, 4, k).into_iter() {
                next.push((2 * x + (c & 1) as u64, 2 * y + (c >> 1) as u64));
            }
        }
        cells = next;
    }
    let side = window.cell_side(depth);
    let mut pts: Vec<Point2> = cells
        .into_iter()
        .map(|(x, y)| Point2::new(window.origin.x + x as f64 * side, window.origin.y + y as f64 * side))
        .collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Ok(pts)
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 2.0 {
        Ok(())
    } else {
        Err(Error::param(format!("s must lie in (0, 2], got {s}")))
    }
}

fn try_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Branching random set in `[0, 1]²` keeping about `2^s` of the four
/// children per level, retried on new seeds until the measured constant is
/// at most `RANDOM_SET_MAX_C`.
pub fn random_delta_set(s: f64, scale: Scale, seed: u64) -> Result<PointSet> {
    random_delta_set_in(s, scale, seed, &Window::UNIT, RANDOM_SET_MAX_C)
}

/// As `random_delta_set` over an arbitrary dyadic window, with a caller
/// chosen acceptance cap. An infinite cap skips the verification.
pub fn random_delta_set_in(s: f64, scale: Scale, seed: u64, window: &Window, max_c: f64) -> Result<PointSet> {
    check_s(s)?;
    scale.check_supported()?;
    let mut last = String::new();
    for attempt in 0..RANDOM_SET_TRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(try_seed(seed, attempt));
        let p = PointSet::new(branching_set(s, scale, window, &mut rng)?, scale)?;
        if max_c == f64::INFINITY {
            return Ok(p);
        }
        let r = verify_delta_set(&p, s)?;
        if r.best_c <= max_c {
            return Ok(p);
        }
        last = format!("seed {} gave best_c {:.3} > {max_c}", try_seed(seed, attempt), r.best_c);
    }
    Err(Error::GeneratorVerification {
        tries: RANDOM_SET_TRIES,
        detail: last,
    })
}

/// `n × n` grid with spacing `1/n` in `[0, 1)²`.
pub fn grid(n: u32, scale: Scale) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::param("grid needs n >= 1"));
    }
    let h = 1.0 / n as f64;
    let pts = (0..n)
        .flat_map(|i| (0..n).map(move |j| Point2::new(i as f64 * h, j as f64 * h)))
        .collect();
    PointSet::new(pts, scale)
}

#[derive(Clone, Debug)]
pub struct FurstenbergConfig {
    pub tubes: TubeSet,
    /// Points along each tube's axis, one set per tube.
    pub per_tube: Vec<PointSet>,
    pub s: f64,
    pub t: f64,
}

impl FurstenbergConfig {
    pub fn union(&self) -> Vec<Point2> {
        self.per_tube.iter().flat_map(|p| p.points().iter().copied()).collect()
    }

    /// `s + min{s, t}`.
    pub fn gamma(&self) -> f64 {
        self.s + self.s.min(self.t)
    }
}

/// Tubes dual to a random `(δ,t)`-set of the slope-intercept chart, each
/// carrying a seeded `(δ,s)` Cantor set along its axis over `x ∈ [0, 1)`.
/// `t = 0` gives the single tube `{y = 0}`.
pub fn furstenberg_config(s: f64, t: f64, scale: Scale, seed: u64) -> Result<FurstenbergConfig> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::param(format!("s must lie in (0, 1], got {s}")));
    }
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::param(format!("t must lie in [0, 2], got {t}")));
    }
    let chart = if t == 0.0 {
        vec![Point2::new(0.0, 0.0)]
    } else {
        random_delta_set(t, scale, seed)?.into_points()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6675_7273);
    let mut tubes = Vec::with_capacity(chart.len());
    let mut per_tube = Vec::with_capacity(chart.len());
    for q in chart {
        let l = dualize_point(q);
        let xs = cantor_offsets(s, scale.exp(), || rng.gen_bool(0.5));
        let pts = xs
            .into_iter()
            .map(|u| Point2::new(u, l.slope.mul_add(u, l.intercept)))
            .collect();
        tubes.push(Tube::new(l.to_line(), scale.value())?);
        per_tube.push(PointSet::new(pts, scale)?);
    }
    Ok(FurstenbergConfig {
        tubes: TubeSet::new(tubes),
        per_tube,
        s,
        t,
    })
}

/// Random cascade on `[0,1)^dim`: each cell either stops (becoming a
/// Lebesgue-spread piece) or passes its mass to a random nonempty subset
/// of children with random weights. Active cells per level are capped at
/// `max_active`.
pub fn random_measure(dim: u32, block: u32, blocks: u32, seed: u64, max_active: usize) -> Result<DyadicMeasure> {
    if !(1..=2).contains(&dim) {
        return Err(Error::param("dimension must be 1 or 2"));
    }
    let depth = block
        .checked_mul(blocks)
        .ok_or_else(|| Error::param("depth overflows"))? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let children = 1u8 << dim;
    let mut pieces = Vec::new();
    let mut active = vec![(Vec::<u8>::new(), 1.0f64)];
    for level in 0..depth {
        let mut next = Vec::new();
        for (path, mass) in active {
            if level > 0 && (next.len() >= max_active || rng.gen_bool(0.15)) {
                pieces.push(Piece { path, mass });
                continue;
            }
            let mut keep: Vec<u8> = (0..children).filter(|_| rng.gen_bool(0.5)).collect();
            if keep.is_empty() {
                keep.push(rng.gen_range(0..children));
            }
            let w: Vec<f64> = keep.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            for (c, wi) in keep.into_iter().zip(w) {
                let mut p = path.clone();
                p.push(c);
                next.push((p, mass * wi / total));
            }
        }
        active = next;
    }
    pieces.extend(active.into_iter().map(|(path, mass)| Piece { path, mass }));
    DyadicMeasure::new(dim, block, blocks, pieces)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    CantorProduct,
    OnLine,
    RandomDelta,
    Furstenberg,
    Grid,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::CantorProduct => "cantor_product",
            GeneratorKind::OnLine => "on_line",
            GeneratorKind::RandomDelta => "random_delta",
            GeneratorKind::Furstenberg => "furstenberg",
            GeneratorKind::Grid => "grid",
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cantor_product" => GeneratorKind::CantorProduct,
            "on_line" => GeneratorKind::OnLine,
            "random_delta" => GeneratorKind::RandomDelta,
            "furstenberg" => GeneratorKind::Furstenberg,
            "grid" => GeneratorKind::Grid,
            other => return Err(Error::Config(format!("unknown generator kind '{other}'"))),
        })
    }
}

/// A generator call as `key=value` pairs. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
}

/// The output of a spec: a point set, or tubes with their point sets.
#[derive(Clone, Debug)]
pub enum GeneratorOutput {
    Points(PointSet),
    Furstenberg(FurstenbergConfig),
}

impl GeneratorOutput {
    /// All points; for Furstenberg configurations, the union.
    pub fn points(&self) -> Vec<Point2> {
        match self {
            GeneratorOutput::Points(p) => p.points().to_vec(),
            GeneratorOutput::Furstenberg(f) => f.union(),
        }
    }
}

fn allowed_keys(kind: GeneratorKind) -> &'static [&'static str] {
    match kind {
        GeneratorKind::CantorProduct => &["base", "pattern", "depth"],
        GeneratorKind::OnLine => &["s", "scale_exp", "theta", "offset"],
        GeneratorKind::RandomDelta => &["s", "scale_exp", "window"],
        GeneratorKind::Furstenberg => &["s", "t", "scale_exp"],
        GeneratorKind::Grid => &["n", "scale_exp"],
    }
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            seed,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// From `kind=..`, `seed=..` and per-kind keys.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut kind = None;
        let mut seed = 0u64;
        let mut params = BTreeMap::new();
        for (k, v) in pairs {
            match k {
                "kind" => kind = Some(v.parse::<GeneratorKind>()?),
                "seed" => {
                    seed = v
                        .parse()
                        .map_err(|_| Error::Config(format!("seed '{v}' is not an unsigned integer")))?
                }
                _ => {
                    params.insert(k.to_string(), v.to_string());
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::Config("generator needs kind=".into()))?;
        let spec = GeneratorSpec { kind, seed, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let allowed = allowed_keys(self.kind);
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "key '{k}' not valid for generator {}",
                self.kind.name()
            )));
        }
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.params
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("bad value '{v}' for {key}")))
            })
            .transpose()
    }

    fn need<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("generator {} needs {key}=", self.kind.name())))
    }

    fn scale(&self) -> Result<Scale> {
        let s = Scale::new(self.need("scale_exp")?);
        s.check_supported()?;
        Ok(s)
    }

    /// Nominal dimension annotation, where the kind defines one.
    pub fn nominal_dimension(&self) -> Result<Option<f64>> {
        Ok(match self.kind {
            GeneratorKind::CantorProduct => {
                let base: f64 = self.need("base")?;
                let n = self.pattern()?.len() as f64;
                Some(2.0 * n.ln() / base.ln())
            }
            GeneratorKind::OnLine | GeneratorKind::RandomDelta => Some(self.need("s")?),
            GeneratorKind::Furstenberg => {
                let s: f64 = self.need("s")?;
                let t: f64 = self.need("t")?;
                Some(s + s.min(t))
            }
            GeneratorKind::Grid => Some(2.0),
        })
    }

    fn pattern(&self) -> Result<Vec<u32>> {
        let raw: String = self.need("pattern")?;
        raw.split(|c| c == ',' || c == ' ')
            .filter(|x| !x.is_empty())
            .map(|x| {
                x.parse()
                    .map_err(|_| Error::Config(format!("bad digit '{x}' in pattern")))
            })
            .collect()
    }

    pub fn generate(&self) -> Result<GeneratorOutput> {
        self.validate()?;
        Ok(match self.kind {
            GeneratorKind::CantorProduct => GeneratorOutput::Points(
                cantor_product(self.need("base")?, &self.pattern()?, self.need("depth")?)?.points,
            ),
            GeneratorKind::OnLine => {
                let line = Line::new(
                    self.get("theta")?.unwrap_or(0.0),
                    self.get("offset")?.unwrap_or(0.0),
                );
                GeneratorOutput::Points(set_on_line(self.need("s")?, self.scale()?, &line)?)
            }
            GeneratorKind::RandomDelta => {
                let window = match self.get::<String>("window")?.as_deref() {
                    None | Some("unit") => Window::UNIT,
                    Some("ambient") => Window::AMBIENT,
                    Some(w) => return Err(Error::Config(format!("unknown window '{w}'"))),
                };
                GeneratorOutput::Points(random_delta_set_in(
                    self.need("s")?,
                    self.scale()?,
                    self.seed,
                    &window,
                    RANDOM_SET_MAX_C,
                )?)
            }
            GeneratorKind::Furstenberg => GeneratorOutput::Furstenberg(furstenberg_config(
                self.need("s")?,
                self.need("t")?,
                self.scale()?,
                self.seed,
            )?),
            GeneratorKind::Grid => GeneratorOutput::Points(grid(self.need("n")?, self.scale()?)?),
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind={}", self.kind.name())?;
        writeln!(f, "seed={}", self.seed)?;
        for (k, v) in &self.params {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta_sets::verify_delta_set;
    use crate::geometry::covering_number;
    use crate::radial::estimate_dimension;

    fn slope(pts: &[Point2], ladder: std::ops::RangeInclusive<u32>) -> f64 {
        let counts: Vec<(Scale, u64)> = ladder
            .map(|m| (Scale::new(m), covering_number(pts, Scale::new(m)).unwrap() as u64))
            .collect();
        estimate_dimension(&counts).unwrap().slope
    }

    #[test]
    fn cantor_examples() {
        let g = cantor_product(4, &[0, 2], 5).unwrap();
        assert_eq!(g.points.len(), 4usize.pow(5));
        assert!((g.nominal_dimension - 1.0).abs() < 1e-12);
        assert_eq!(g.points.scale(), Scale::new(10));
        let d = slope(g.points.points(), 2..=10);
        assert!((d - 1.0).abs() <= 0.05, "{d}");

        let full = cantor_product(3, &[0, 1, 2], 2).unwrap();
        assert_eq!(full.points.len(), 81);
        assert!((full.nominal_dimension - 2.0).abs() < 1e-12);
        // 3^-2 rounds down to 2^-4
        assert_eq!(full.points.scale(), Scale::new(4));

        let one = cantor_product(5, &[0], 3).unwrap();
        assert_eq!(one.points.len(), 1);
        assert_eq!(one.nominal_dimension, 0.0);
        assert!(cantor_product(4, &[], 3).is_err());
        assert!(cantor_product(4, &[4], 3).is_err());
    }

    #[test]
    fn line_examples() {
        let x_axis = Line::new(0.0, 0.0);
        let s = Scale::new(8);
        let full = set_on_line(1.0, s, &x_axis).unwrap();
        assert_eq!(full.len(), 256);
        assert!(full.points().iter().all(|p| p.y == 0.0));
        assert_eq!(set_on_line(0.0, s, &x_axis).unwrap().len(), 1);
        assert!(matches!(set_on_line(1.2, s, &x_axis), Err(Error::LineDimension(_))));

        let s10 = Scale::new(10);
        let half = set_on_line(0.5, s10, &x_axis).unwrap();
        assert_eq!(half.len(), 32);
        assert!(verify_delta_set(&half, 0.5).unwrap().best_c <= LINE_SET_MAX_C);

        let tilted = Line::new(0.7, 0.2);
        let p = set_on_line(0.8, s10, &tilted).unwrap();
        assert!(p.points().iter().all(|q| tilted.distance_to(*q) < 1e-12));
        assert!(verify_delta_set(&p, 0.8).unwrap().best_c <= LINE_SET_MAX_C);
    }

    #[test]
    fn random_set_examples() {
        let s8 = Scale::new(8);
        assert_eq!(random_delta_set(2.0, Scale::new(5), 1).unwrap().len(), 1024);
        let a = random_delta_set(1.5, s8, 42).unwrap();
        let b = random_delta_set(1.5, s8, 42).unwrap();
        assert_eq!(a, b);
        assert!((1 << 10..=1 << 14).contains(&a.len()), "{}", a.len());
        assert!(verify_delta_set(&a, 1.5).unwrap().best_c <= RANDOM_SET_MAX_C);
        assert!(random_delta_set(0.0, s8, 1).is_err());
    }

    #[test]
    fn generator_matrix_passes_verification() {
        for seed in 0..4 {
            for (s, m) in [(0.5, 8), (1.0, 8), (1.0, 10), (1.5, 7)] {
                let p = random_delta_set(s, Scale::new(m), seed).unwrap();
                assert!(verify_delta_set(&p, s).unwrap().best_c <= RANDOM_SET_MAX_C);
            }
        }
    }

    #[test]
    fn furstenberg_examples() {
        let s = Scale::new(8);
        let one = furstenberg_config(1.0, 0.0, s, 3).unwrap();
        assert_eq!(one.tubes.len(), 1);
        assert_eq!(one.union().len(), 256);
        assert_eq!(one.gamma(), 1.0);
        let a = furstenberg_config(0.5, 0.5, s, 9).unwrap();
        let b = furstenberg_config(0.5, 0.5, s, 9).unwrap();
        assert_eq!(a.union(), b.union());
        for (t, p) in a.tubes.iter().zip(&a.per_tube) {
            assert!(p.points().iter().all(|q| t.contains(*q)));
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec = GeneratorSpec::new(GeneratorKind::CantorProduct, 5)
            .with("base", 4)
            .with("pattern", "0,2")
            .with("depth", 3);
        let text = spec.to_string();
        let pairs: Vec<(&str, &str)> = text.lines().filter_map(|l| l.split_once('=')).collect();
        assert_eq!(GeneratorSpec::from_pairs(pairs).unwrap(), spec);
        assert_eq!(spec.generate().unwrap().points().len(), 64);
        assert!(GeneratorSpec::from_pairs([("kind", "grid"), ("bogus", "1")]).is_err());
    }

    #[test]
    fn measures_are_deterministic() {
        let a = random_measure(2, 4, 3, 17, 64).unwrap();
        let b = random_measure(2, 4, 3, 17, 64).unwrap();
        assert_eq!(a.pieces(), b.pieces());
        assert!((a.total_mass() - 1.0).abs() < 1e-9);
    }
}
