//! Point-tube incidences: exact counting (direct and grid-accelerated),
//! the empirical Fu–Ren check, and multiplicity buckets of tubes through
//! anchor points.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::delta_sets::{verify_delta_set, verify_delta_set_lines, RegularityReport};
use crate::error::{Error, Result};
use crate::geometry::{tube_contains, Line, Point2, PointSet, Scale, Tube, TubeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Brute,
    Grid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Grid => "grid",
        }
    }
}

/// Uniform bucket grid over the bounding box of a point set.
pub struct IncidenceGrid<'a> {
    points: &'a [Point2],
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    ids: Vec<u32>,
}

impl<'a> IncidenceGrid<'a> {
    /// Cell side `max(min_cell, diameter/256, sqrt(area/n))`, the last term
    /// keeping about one point per cell for sparse inputs.
    pub fn new(points: &'a [Point2], min_cell: f64) -> Self {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if points.is_empty() {
            lo = Point2::default();
            hi = Point2::default();
        }
        let diam = lo.dist(hi);
        let area = (hi.x - lo.x) * (hi.y - lo.y);
        let sparse = (area / points.len().max(1) as f64).sqrt();
        let cell = min_cell.max(diam / 256.0).max(sparse).max(f64::MIN_POSITIVE);
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let key = |p: &Point2| {
            let ix = (((p.x - lo.x) / cell).floor() as usize).min(nx - 1);
            let iy = (((p.y - lo.y) / cell).floor() as usize).min(ny - 1);
            iy * nx + ix
        };
        let mut starts = vec![0usize; nx * ny + 1];
        for p in points {
            starts[key(p) + 1] += 1;
        }
        for i in 0..nx * ny {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut ids = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            ids[fill[k]] = i as u32;
            fill[k] += 1;
        }
        IncidenceGrid {
            points,
            origin: lo,
            cell,
            nx,
            ny,
            starts,
            ids,
        }
    }

    /// Calls `f` with the index of every point inside `tube`, in no
    /// particular order. Columns (or rows, for steep tubes) are walked over
    /// the slab the tube occupies, padded by one cell; every candidate gets
    /// the exact containment test.
    pub fn for_each_in(&self, tube: &Tube, mut f: impl FnMut(usize)) {
        if self.points.is_empty() {
            return;
        }
        let n = tube.line.normal();
        let (a, w) = (tube.line.offset(), tube.width());
        // n.x·x + n.y·y ∈ [a - w, a + w]
        let steep = n.y.abs() < n.x.abs();
        let (major_n, minor_n, major_count, minor_count, major_origin, minor_origin) = if steep {
            (n.y, n.x, self.ny, self.nx, self.origin.y, self.origin.x)
        } else {
            (n.x, n.y, self.nx, self.ny, self.origin.x, self.origin.y)
        };
        for major in 0..major_count {
            let u0 = major_origin + major as f64 * self.cell;
            let u1 = u0 + self.cell;
            // minor coordinate v solves major_n·u + minor_n·v = c
            let ends = [
                (a - w - major_n * u0) / minor_n,
                (a - w - major_n * u1) / minor_n,
                (a + w - major_n * u0) / minor_n,
                (a + w - major_n * u1) / minor_n,
            ];
            let vmin = ends.iter().copied().fold(f64::INFINITY, f64::min);
            let vmax = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = ((vmin - minor_origin) / self.cell).floor() - 1.0;
            let hi = ((vmax - minor_origin) / self.cell).floor() + 1.0;
            if hi < 0.0 || lo > (minor_count - 1) as f64 {
                continue;
            }
            let lo = lo.max(0.0) as usize;
            let hi = (hi as usize).min(minor_count - 1);
            for minor in lo..=hi {
                let (ix, iy) = if steep { (minor, major) } else { (major, minor) };
                let k = iy * self.nx + ix;
                for &id in &self.ids[self.starts[k]..self.starts[k + 1]] {
                    if tube_contains(tube, self.points[id as usize]) {
                        f(id as usize);
                    }
                }
            }
        }
    }

    pub fn count_in(&self, tube: &Tube) -> usize {
        let mut c = 0;
        self.for_each_in(tube, |_| c += 1);
        c
    }
}

/// Exact number of pairs `(p, T)` with `p ∈ T`.
pub fn count_incidences(points: &[Point2], tubes: &TubeSet, method: Method) -> u64 {
    match method {
        Method::Brute => tubes
            .tubes
            .par_iter()
            .map(|t| points.iter().filter(|p| tube_contains(t, **p)).count() as u64)
            .sum(),
        Method::Grid => {
            let min_width = tubes
                .iter()
                .map(|t| t.width())
                .fold(f64::INFINITY, f64::min);
            let grid = IncidenceGrid::new(points, if min_width.is_finite() { min_width } else { 1.0 });
            tubes
                .tubes
                .par_iter()
                .map(|t| grid.count_in(t) as u64)
                .sum()
        }
    }
}

/// `|T ∩ P|` for every tube, in tube order.
pub fn tube_counts(points: &[Point2], tubes: &TubeSet, min_cell: f64) -> Vec<usize> {
    let grid = IncidenceGrid::new(points, min_cell);
    tubes.tubes.par_iter().map(|t| grid.count_in(t)).collect()
}

/// `κ = min{1/2, 1/(s+t-1)}`, with `1/2` when `s + t ≤ 1`.
pub fn kappa(s: f64, t: f64) -> f64 {
    let e = s + t - 1.0;
    if e <= 0.0 {
        0.5
    } else {
        0.5f64.min(1.0 / e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceReport {
    pub count: u64,
    pub points: usize,
    pub tubes: usize,
    pub scale: Scale,
    pub s: f64,
    pub t: f64,
    pub eps: f64,
    pub kappa: f64,
    /// `|P||T| δ^(κ(s+t-1) - 5ε)`.
    pub bound_rhs: f64,
    pub satisfied: bool,
    pub method: Method,
    pub points_best_c: f64,
    pub tubes_best_c: f64,
    /// Both inputs measured as `(δ, ·, δ^-ε)`-sets.
    pub premise_verified: bool,
    /// Set when `κ(s+t-1) ≤ 0`.
    pub note: Option<&'static str>,
}

impl IncidenceReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "count={}\npoints={}\ntubes={}\nscale_exp={}\ns={}\nt={}\neps={}\nkappa={}\nbound_rhs={:?}\nsatisfied={}\nmethod={}\npoints_best_c={:?}\ntubes_best_c={:?}\npremise_verified={}\n",
            self.count,
            self.points,
            self.tubes,
            self.scale.exp(),
            self.s,
            self.t,
            self.eps,
            self.kappa,
            self.bound_rhs,
            self.satisfied,
            self.method.name(),
            self.points_best_c,
            self.tubes_best_c,
            self.premise_verified,
        );
        if let Some(n) = self.note {
            s.push_str(&format!("note={n}\n"));
        }
        s
    }

    pub const CSV_HEADER: &'static str =
        "scale_exp,points,tubes,s,t,eps,kappa,count,bound_rhs,satisfied,points_best_c,tubes_best_c,premise_verified";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:?},{},{:?},{:?},{}",
            self.scale.exp(),
            self.points,
            self.tubes,
            self.s,
            self.t,
            self.eps,
            self.kappa,
            self.count,
            self.bound_rhs,
            self.satisfied,
            self.points_best_c,
            self.tubes_best_c,
            self.premise_verified
        )
    }
}

/// Counts incidences and compares them with `|P||T| δ^(κ(s+t-1) - 5ε)`.
/// The regularity premise is measured, never enforced.
pub fn check_fu_ren(p: &PointSet, tubes: &TubeSet, s: f64, t: f64, eps: f64) -> Result<IncidenceReport> {
    if tubes.is_empty() {
        return Err(Error::Empty("tube set"));
    }
    let scale = p.scale();
    let count = count_incidences(p.points(), tubes, Method::Grid);
    let k = kappa(s, t);
    let exponent = k * (s + t - 1.0) - 5.0 * eps;
    let bound_rhs = p.len() as f64 * tubes.len() as f64 * scale.pow(exponent);
    let points_best_c = verify_delta_set(p, s)?.best_c;
    let tubes_best_c = verify_delta_set_lines(&tubes.lines(), scale, t)?.best_c;
    let allowed = scale.pow(-eps);
    Ok(IncidenceReport {
        count,
        points: p.len(),
        tubes: tubes.len(),
        scale,
        s,
        t,
        eps,
        kappa: k,
        bound_rhs,
        satisfied: count as f64 <= bound_rhs,
        method: Method::Grid,
        points_best_c,
        tubes_best_c,
        premise_verified: points_best_c <= allowed && tubes_best_c <= allowed,
        note: (s + t - 1.0 <= 0.0)
            .then_some("kappa*(s+t-1) <= 0 makes the bound vacuous"),
    })
}

/// A global tube family and, for each anchor `y`, the tubes of that family
/// through `y`.
#[derive(Clone, Debug)]
pub struct AnchoredTubes {
    pub tubes: TubeSet,
    pub anchors: Vec<(Point2, Vec<usize>)>,
}

impl AnchoredTubes {
    /// Width-δ tubes through every anchor at directions `kδ`, `0 ≤ kδ < π`;
    /// identical lines are shared.
    pub fn through_anchors(anchors: &[Point2], scale: Scale) -> Result<Self> {
        let delta = scale.value();
        let steps = (std::f64::consts::PI / delta).ceil() as usize;
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        let mut tubes = Vec::new();
        let mut out = Vec::with_capacity(anchors.len());
        for y in anchors {
            let mut ids = Vec::with_capacity(steps);
            for k in 0..steps {
                let line = Line::through(*y, k as f64 * delta);
                let key = (line.theta().to_bits(), line.offset().to_bits());
                let id = *index.entry(key).or_insert_with(|| {
                    tubes.push(Tube::new(line, delta).expect("positive width"));
                    tubes.len() - 1
                });
                ids.push(id);
            }
            out.push((*y, ids));
        }
        Ok(AnchoredTubes {
            tubes: TubeSet::new(tubes),
            anchors: out,
        })
    }
}

#[derive(Clone, Debug)]
pub struct AnchorBuckets {
    pub anchor: Point2,
    /// `buckets[j-1]`: global tube indices in bucket `j`, ascending.
    pub buckets: Vec<Vec<usize>>,
    /// Buckets emptied because they covered fewer than `2δ^ε|F|` points.
    pub discarded: Vec<bool>,
    /// Indices into `F` of points in no retained tube.
    pub f_bad: Vec<usize>,
    /// `|F_bad| / |F|` as an exact pair.
    pub f_bad_fraction: (usize, usize),
    /// Per bucket: empty, or covers at least `δ^(2ε)|F|` points.
    pub coverage_ok: Vec<bool>,
    /// `|F_bad| ≤ δ^ε|F|`.
    pub bad_ok: bool,
    pub regularity: Vec<Option<RegularityReport>>,
}

#[derive(Clone, Debug)]
pub struct MultiplicityBuckets {
    pub levels: u32,
    pub per_anchor: Vec<AnchorBuckets>,
    /// `|T ∩ F|` for every global tube.
    pub tube_counts: Vec<usize>,
    /// `high[j-1]`: tubes lying in bucket `j` for at least `δ^(-τ/2)` anchors.
    pub high: Vec<Vec<usize>>,
    pub high_threshold: f64,
}

/// Buckets are half-open internally; the closed upper edge only matters for
/// `|T ∩ F| = 2^L`.
pub const RANGE_NOTE: &str =
    "buckets use 2^(j-1) <= |T n F| < 2^j; a tube with exactly 2^j points sits in bucket j+1 (bucket L is closed)";

impl AnchorBuckets {
    pub fn f_bad_set(&self, f: &PointSet) -> PointSet {
        f.subset(&self.f_bad)
    }
}

impl MultiplicityBuckets {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "levels={}\nanchors={}\ntubes={}\nhigh_threshold={:?}\nrange_note={}\n",
            self.levels,
            self.per_anchor.len(),
            self.tube_counts.len(),
            self.high_threshold,
            RANGE_NOTE
        );
        for (a, ab) in self.per_anchor.iter().enumerate() {
            out.push_str(&format!(
                "anchor.{a}=({:?},{:?}) f_bad={}/{} bad_ok={}\n",
                ab.anchor.x, ab.anchor.y, ab.f_bad_fraction.0, ab.f_bad_fraction.1, ab.bad_ok
            ));
            for (j, b) in ab.buckets.iter().enumerate() {
                if b.is_empty() && !ab.discarded[j] {
                    continue;
                }
                let reg = ab.regularity[j]
                    .as_ref()
                    .map(|r| format!(" best_c={:?}", r.best_c))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "anchor.{a}.bucket.{}: tubes={} discarded={} coverage_ok={}{reg}\n",
                    j + 1,
                    b.len(),
                    ab.discarded[j],
                    ab.coverage_ok[j]
                ));
            }
        }
        for (j, h) in self.high.iter().enumerate() {
            if !h.is_empty() {
                out.push_str(&format!("high.{}={}\n", j + 1, h.len()));
            }
        }
        out
    }
}

/// Bucket of a multiplicity `c ≥ 1`: `2^(j-1) ≤ c < 2^j`, with `c = 2^L`
/// folded into bucket `L`.
pub fn bucket_of(c: usize, levels: u32) -> Option<u32> {
    if c == 0 {
        return None;
    }
    let j = usize::BITS - c.leading_zeros();
    Some(j.min(levels))
}

/// Sorts each anchor's tubes by multiplicity in `F`, empties buckets whose
/// union meets fewer than `2δ^ε|F|` points, and collects what the retained
/// tubes miss into `F_bad`. With `sigma`, each retained bucket also gets a
/// regularity report as a family of lines.
pub fn multiplicity_buckets(
    anchored: &AnchoredTubes,
    f: &PointSet,
    eps: f64,
    tau: f64,
    sigma: Option<f64>,
) -> Result<MultiplicityBuckets> {
    let scale = f.scale();
    let limit = scale.pow(-3.0);
    if f.len() as f64 > limit {
        return Err(Error::BucketRange {
            size: f.len(),
            limit,
        });
    }
    let levels = 3 * scale.exp();
    let grid = IncidenceGrid::new(f.points(), scale.value());
    let tube_counts: Vec<usize> = anchored
        .tubes
        .tubes
        .par_iter()
        .map(|t| grid.count_in(t))
        .collect();
    let n = f.len();
    let keep_floor = 2.0 * scale.pow(eps) * n as f64;

    let per_anchor: Vec<AnchorBuckets> = anchored
        .anchors
        .par_iter()
        .map(|(y, ids)| {
            let mut buckets = vec![Vec::new(); levels as usize];
            for &id in ids {
                if let Some(j) = bucket_of(tube_counts[id], levels) {
                    buckets[(j - 1) as usize].push(id);
                }
            }
            let mut discarded = vec![false; levels as usize];
            let mut covered = vec![false; n];
            let mut coverage_ok = vec![true; levels as usize];
            for (j, bucket) in buckets.iter_mut().enumerate() {
                bucket.sort_unstable();
                bucket.dedup();
                if bucket.is_empty() {
                    continue;
                }
                let mut hit = vec![false; n];
                for &id in bucket.iter() {
                    grid.for_each_in(&anchored.tubes.tubes[id], |i| hit[i] = true);
                }
                let reached = hit.iter().filter(|&&h| h).count();
                if (reached as f64) < keep_floor {
                    discarded[j] = true;
                    bucket.clear();
                    continue;
                }
                coverage_ok[j] = reached as f64 >= scale.pow(2.0 * eps) * n as f64;
                for (c, h) in covered.iter_mut().zip(hit) {
                    *c |= h;
                }
            }
            let f_bad: Vec<usize> = (0..n).filter(|&i| !covered[i]).collect();
            let regularity = buckets
                .iter()
                .map(|b| match sigma {
                    Some(sg) if !b.is_empty() => {
                        let lines: Vec<Line> = b.iter().map(|&i| anchored.tubes.tubes[i].line).collect();
                        verify_delta_set_lines(&lines, scale, sg).ok()
                    }
                    _ => None,
                })
                .collect();
            AnchorBuckets {
                anchor: *y,
                bad_ok: f_bad.len() as f64 <= scale.pow(eps) * n as f64,
                f_bad_fraction: (f_bad.len(), n),
                f_bad,
                buckets,
                discarded,
                coverage_ok,
                regularity,
            }
        })
        .collect();

    let high_threshold = scale.pow(-tau / 2.0);
    let mut multiplicity: Vec<HashMap<usize, usize>> = vec![HashMap::new(); levels as usize];
    for a in &per_anchor {
        for (j, b) in a.buckets.iter().enumerate() {
            for &id in b {
                *multiplicity[j].entry(id).or_default() += 1;
            }
        }
    }
    let high = multiplicity
        .into_iter()
        .map(|m| {
            let mut v: Vec<usize> = m
                .into_iter()
                .filter(|&(_, c)| c as f64 >= high_threshold)
                .map(|(id, _)| id)
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    Ok(MultiplicityBuckets {
        levels,
        per_anchor,
        tube_counts,
        high,
        high_threshold,
    })
}
