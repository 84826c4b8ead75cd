//! Dyadic measures with block structure, their `(Φ,T,η)`-uniform
//! sub-measures, and the stable-scale search over a uniformity profile.
//!
//! A measure lives on `[0,1)^d`, `d ∈ {1, 2}`, at depth `mT`. It is stored
//! as disjoint dyadic *pieces*, each carrying mass spread proportionally to
//! Lebesgue measure inside it; a piece at full depth is a single finest
//! cell. Pieces are never split: below a piece every cell has the same mass,
//! so a whole piece is classified at once. All mass comparisons happen on
//! `log2` values with the shared tolerance [`LOG_TOL`].

use std::fmt;

use crate::error::{Error, Result};

/// Absolute slack, per unit of depth, on `log2` mass comparisons.
pub const LOG_TOL: f64 = 1e-9;

/// A root-to-cell path; each digit packs one bit per axis, x in bit 0.
pub type CellPath = Vec<u8>;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub path: CellPath,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicMeasure {
    dim: u32,
    block: u32,
    blocks: u32,
    pieces: Vec<Piece>,
}

impl DyadicMeasure {
    /// Validates and sorts the pieces: digits below `2^dim`, depth at most
    /// `blocks·block`, positive finite masses, no piece inside another, and
    /// total mass in `(0, 1]`.
    pub fn new(dim: u32, block: u32, blocks: u32, mut pieces: Vec<Piece>) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::param(format!("cell dimension must be 1 or 2, got {dim}")));
        }
        if block == 0 {
            return Err(Error::param("block size T must be at least 1"));
        }
        let depth = block as usize * blocks as usize;
        if pieces.is_empty() {
            return Err(Error::Empty("measure"));
        }
        for p in &pieces {
            if p.path.len() > depth {
                return Err(Error::DepthMismatch(format!(
                    "piece at depth {} below the finest depth {depth}",
                    p.path.len()
                )));
            }
            if p.path.iter().any(|&g| g as u32 >= 1 << dim) {
                return Err(Error::param("path digit out of range"));
            }
            if !(p.mass > 0.0 && p.mass.is_finite()) {
                return Err(Error::param(format!("piece mass must be positive, got {}", p.mass)));
            }
        }
        pieces.sort_by(|a, b| a.path.cmp(&b.path));
        for w in pieces.windows(2) {
            if w[1].path.starts_with(&w[0].path) {
                return Err(Error::param("pieces overlap"));
            }
        }
        let mu = DyadicMeasure {
            dim,
            block,
            blocks,
            pieces,
        };
        let total = mu.total_mass();
        if !(total > 0.0 && total <= 1.0 + 1e-12) {
            return Err(Error::param(format!("total mass {total} outside (0, 1]")));
        }
        Ok(mu)
    }

    /// Lebesgue measure of the unit cell.
    pub fn lebesgue(dim: u32, block: u32, blocks: u32) -> Result<Self> {
        Self::new(dim, block, blocks, vec![Piece { path: vec![], mass: 1.0 }])
    }

    pub fn dirac(dim: u32, block: u32, blocks: u32, path: CellPath, mass: f64) -> Result<Self> {
        let depth = (block * blocks) as usize;
        if path.len() != depth {
            return Err(Error::DepthMismatch(format!(
                "a point mass sits on a finest cell (depth {depth}), got depth {}",
                path.len()
            )));
        }
        Self::new(dim, block, blocks, vec![Piece { path, mass }])
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `T`.
    pub fn block(&self) -> u32 {
        self.block
    }

    /// `m`.
    pub fn blocks(&self) -> u32 {
        self.blocks
    }

    pub fn depth(&self) -> u32 {
        self.block * self.blocks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.mass).sum()
    }

    /// Mass of the cell at `path`.
    pub fn cell_mass(&self, path: &[u8]) -> f64 {
        let start = self.pieces.partition_point(|p| p.path.as_slice() < path);
        if start > 0 {
            let prev = &self.pieces[start - 1];
            if path.starts_with(&prev.path) {
                let extra = (path.len() - prev.path.len()) as f64 * self.dim as f64;
                return prev.mass * (-extra).exp2();
            }
        }
        self.pieces[start..]
            .iter()
            .take_while(|p| p.path.starts_with(path))
            .map(|p| p.mass)
            .sum()
    }

    /// The occupied cells at `depth`, grouped: a piece at or above `depth`
    /// yields one group of `2^(d·(depth - |path|))` equal cells, finer
    /// pieces are summed per ancestor.
    fn groups(&self, depth: usize, alive: &[bool]) -> Vec<Group> {
        let mut out: Vec<Group> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            if p.path.len() <= depth {
                let extra = (depth - p.path.len()) as u32 * self.dim;
                out.push(Group {
                    first: i,
                    last: i,
                    cell_log2_mass: p.mass.log2() - extra as f64,
                    log2_cells: extra,
                    mass: p.mass,
                });
                continue;
            }
            let key = &p.path[..depth];
            match out.last_mut() {
                Some(g) if g.log2_cells == 0 && {
                    let q = &self.pieces[g.first].path;
                    q.len() > depth && &q[..depth] == key
                } =>
                {
                    g.last = i;
                    g.mass += p.mass;
                    g.cell_log2_mass = g.mass.log2();
                }
                _ => out.push(Group {
                    first: i,
                    last: i,
                    cell_log2_mass: p.mass.log2(),
                    log2_cells: 0,
                    mass: p.mass,
                }),
            }
        }
        out
    }

    fn path_of_group(&self, g: &Group, depth: usize) -> CellPath {
        let mut path = self.pieces[g.first].path.clone();
        path.resize(depth.max(path.len()), 0);
        path.truncate(depth);
        path
    }

    fn restrict(&self, alive: &[bool]) -> DyadicMeasure {
        DyadicMeasure {
            dim: self.dim,
            block: self.block,
            blocks: self.blocks,
            pieces: self
                .pieces
                .iter()
                .zip(alive)
                .filter(|(_, &a)| a)
                .map(|(p, _)| p.clone())
                .collect(),
        }
    }
}

/// Cells of one depth sharing a mass: either all cells below one coarse
/// piece, or the single ancestor of pieces `first..=last`.
#[derive(Clone, Debug)]
struct Group {
    first: usize,
    last: usize,
    cell_log2_mass: f64,
    log2_cells: u32,
    mass: f64,
}

/// `φ(k)` for `k ∈ {start, …, m}`, each an integer multiple of `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformityProfile {
    pub block: u32,
    pub eta: f64,
    pub start: u32,
    classes: Vec<u32>,
}

impl UniformityProfile {
    /// Builds a profile from class indices: `φ(start + i) = classes[i]·η`.
    pub fn from_classes(block: u32, eta: f64, start: u32, classes: Vec<u32>) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::param(format!("eta must lie in (0, 1], got {eta}")));
        }
        if classes.is_empty() {
            return Err(Error::Empty("profile"));
        }
        Ok(UniformityProfile {
            block,
            eta,
            start,
            classes,
        })
    }

    /// Last covered level `m`.
    pub fn end(&self) -> u32 {
        self.start + self.classes.len() as u32 - 1
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.start..=self.end()
    }

    pub fn class(&self, k: u32) -> Option<u32> {
        k.checked_sub(self.start)
            .and_then(|i| self.classes.get(i as usize).copied())
    }

    pub fn phi(&self, k: u32) -> Option<f64> {
        self.class(k).map(|j| j as f64 * self.eta)
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }
}

/// `T₀(d, η) = ⌈η⁻¹ log2(10d/η)⌉`.
pub fn t0(dim: u32, eta: f64) -> u32 {
    ((10.0 * dim as f64 / eta).log2() / eta).ceil() as u32
}

/// `⌈ηm⌉`, the first level the uniformity condition constrains.
pub fn first_level(eta: f64, blocks: u32) -> u32 {
    (eta * blocks as f64 - 1e-12).ceil().max(0.0) as u32
}

/// One side of the two-sided bound failed on the cell at `path`.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub level: u32,
    pub path: CellPath,
    pub log2_mass: f64,
    pub phi: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {} cell depth {} log2 mass {} outside the band for phi = {}",
            self.level,
            self.path.len(),
            self.log2_mass,
            self.phi
        )
    }
}

/// `ℓ^(φ+η) ≤ μ(Q) ≤ ℓ^φ` in log form: `x = -log2 μ(Q)`, `ℓ = 2^-depth`.
fn in_band(x: f64, depth: f64, phi: f64, eta: f64) -> bool {
    let tol = LOG_TOL * depth.max(1.0);
    depth * phi <= x + tol && x <= depth * (phi + eta) + tol
}

/// First cell, scanning levels upward, whose mass leaves its band.
pub fn check_uniform(mu: &DyadicMeasure, profile: &UniformityProfile) -> Result<Option<Violation>> {
    if profile.block != mu.block {
        return Err(Error::DepthMismatch(format!(
            "profile block {} vs measure block {}",
            profile.block, mu.block
        )));
    }
    let lo = first_level(profile.eta, mu.blocks);
    if profile.start > lo || profile.end() < mu.blocks {
        return Err(Error::DepthMismatch(format!(
            "profile covers levels {}..={}, need {lo}..={}",
            profile.start,
            profile.end(),
            mu.blocks
        )));
    }
    let alive = vec![true; mu.pieces.len()];
    for k in lo..=mu.blocks {
        let depth = (k * mu.block) as usize;
        let phi = profile.phi(k).expect("level covered");
        for g in mu.groups(depth, &alive) {
            if !in_band(-g.cell_log2_mass, depth as f64, phi, profile.eta) {
                return Ok(Some(Violation {
                    level: k,
                    path: mu.path_of_group(&g, depth),
                    log2_mass: g.cell_log2_mass,
                    phi,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelLog {
    pub level: u32,
    /// Mass removed as light cubes, `μ(Q) < ℓ(Q)^(d+2)`.
    pub light_mass: f64,
    pub heavy_mass: f64,
    /// Heavy mass per exponent class.
    pub class_mass: Vec<f64>,
    pub phi: f64,
    pub kept_mass: f64,
}

#[derive(Clone, Debug)]
pub struct Uniformized {
    pub measure: DyadicMeasure,
    pub profile: UniformityProfile,
    /// Surviving pieces; each stands for all the finest cells below it.
    pub surviving: Vec<CellPath>,
    pub log: Vec<LevelLog>,
    /// `δ^(2η)`.
    pub mass_floor: f64,
}

impl Uniformized {
    pub fn mass_floor_met(&self) -> bool {
        self.measure.total_mass() >= self.mass_floor
    }
}

/// Restricts `mu` level by level, finest first: light cubes are dropped,
/// heavy cubes are sorted into exponent classes `φ ∈ ηℕ ∩ [0, d+2]`, and
/// the class with the most mass survives (ties to the smaller exponent).
pub fn uniformize(mu: &DyadicMeasure, eta: f64) -> Result<Uniformized> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param(format!("eta must lie in (0, 1], got {eta}")));
    }
    let d = mu.dim;
    let need = t0(d, eta);
    if mu.block < need {
        return Err(Error::BlockSizeBelowT0 {
            block: mu.block,
            t0: need,
        });
    }
    let full = mu.depth() as f64;
    let log2_total = mu.total_mass().log2();
    let log2_floor = -eta * full;
    if log2_total < log2_floor - LOG_TOL * full.max(1.0) {
        return Err(Error::MassBelowFloor {
            log2_mass: log2_total,
            log2_floor,
        });
    }
    let top_class = ((d + 2) as f64 / eta + 1e-9).floor() as u32;
    let lo = first_level(eta, mu.blocks);
    let mut alive = vec![true; mu.pieces.len()];
    let mut classes = vec![0u32; (mu.blocks - lo + 1) as usize];
    let mut log = Vec::new();
    for k in (lo..=mu.blocks).rev() {
        let depth = (k * mu.block) as usize;
        let df = depth as f64;
        let tol = LOG_TOL * df.max(1.0);
        let groups = mu.groups(depth, &alive);
        let mut light_mass = 0.0;
        let mut class_mass = vec![0.0; top_class as usize + 1];
        let mut class_of: Vec<Option<u32>> = Vec::with_capacity(groups.len());
        for g in &groups {
            let x = -g.cell_log2_mass;
            if x > df * (d + 2) as f64 + tol / 2.0 {
                light_mass += g.mass;
                class_of.push(None);
                continue;
            }
            let j = if depth == 0 {
                0
            } else {
                (((x + tol / 2.0) / (eta * df)).floor().max(0.0) as u32).min(top_class)
            };
            class_mass[j as usize] += g.mass;
            class_of.push(Some(j));
        }
        let heavy_mass: f64 = class_mass.iter().sum();
        let mut chosen = 0u32;
        for (j, &m) in class_mass.iter().enumerate() {
            if m > class_mass[chosen as usize] {
                chosen = j as u32;
            }
        }
        for (g, c) in groups.iter().zip(&class_of) {
            if *c != Some(chosen) {
                for a in &mut alive[g.first..=g.last] {
                    *a = false;
                }
            }
        }
        classes[(k - lo) as usize] = chosen;
        log.push(LevelLog {
            level: k,
            light_mass,
            heavy_mass,
            phi: chosen as f64 * eta,
            kept_mass: class_mass[chosen as usize],
            class_mass,
        });
    }
    if !alive.iter().any(|&a| a) {
        return Err(Error::MassBelowFloor {
            log2_mass: f64::NEG_INFINITY,
            log2_floor,
        });
    }
    let measure = mu.restrict(&alive);
    let surviving = measure.pieces.iter().map(|p| p.path.clone()).collect();
    Ok(Uniformized {
        measure,
        profile: UniformityProfile::from_classes(mu.block, eta, lo, classes)?,
        surviving,
        log,
        mass_floor: (-2.0 * eta * full).exp2(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableScale {
    /// Level `k` with `Δ = 2^(-kT)`.
    pub level: u32,
    /// `log2(1/Δ) = kT`.
    pub delta_exp: u32,
    pub sigma: f64,
    /// Descent steps taken.
    pub steps: usize,
    /// Visited levels, starting from `m`.
    pub trail: Vec<u32>,
}

/// Lowest level `k'` with `2^(-k'T) ≤ (2^(-kT))^ε`, i.e. `⌈εk⌉`.
fn window_floor(eps: f64, k: u32) -> u32 {
    (eps * k as f64 - 1e-12).ceil().max(0.0) as u32
}

/// Starting at `Δ = δ`, accept `Δ` when every ladder scale in `[Δ, Δ^ε]`
/// has `φ ≥ φ(Δ) - ε`; otherwise move to the finest violating scale and
/// retry.
pub fn stable_scale_search(profile: &UniformityProfile, eps: f64) -> Result<StableScale> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1], got {eps}")));
    }
    let mut k = profile.end();
    let mut trail = vec![k];
    loop {
        let lo = window_floor(eps, k);
        if lo < profile.start {
            return Err(Error::ProfileTooShallow {
                eps,
                needed: lo,
                start: profile.start,
            });
        }
        let base = profile.class(k).expect("level covered");
        let phi = |j: u32| profile.class(j).expect("level covered") as f64 * profile.eta;
        let limit = base as f64 * profile.eta - eps;
        let violator = (lo..k).rev().find(|&j| phi(j) < limit - 1e-12);
        match violator {
            Some(j) => {
                k = j;
                trail.push(k);
            }
            None => {
                return Ok(StableScale {
                    level: k,
                    delta_exp: k * profile.block,
                    sigma: phi(k),
                    steps: trail.len() - 1,
                    trail,
                })
            }
        }
    }
}
