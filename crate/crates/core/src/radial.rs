//! Radial projections onto dyadic arcs of S¹ ≅ [0, 1), truncated content,
//! heavy directions and exceptional-viewpoint scans.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::content::{arcs_content, points_content};
use crate::error::{Error, Result};
use crate::geometry::{covering_number, DyadicCell, Line, Point2, PointSet, Scale, Tube};

/// Dyadic-to-arbitrary cover constants, before the `2^σ` factor.
pub const CONTENT_CONST_PLANE: f64 = 3.0;
pub const CONTENT_CONST_CIRCLE: f64 = 2.0;

/// Threshold offsets reported next to the exact exceptional count.
pub const SENSITIVITY: f64 = 0.05;

const ANGLE_MARGIN: f64 = 1e-12;
const LEAF: usize = 8;

/// Direction of `y - x` as a fraction of a full turn, in `[0, 1)`.
pub fn direction(x: Point2, y: Point2) -> f64 {
    let a = (y.y - x.y).atan2(y.x - x.x) / TAU;
    let a = if a < 0.0 { a + 1.0 } else { a };
    if a >= 1.0 {
        0.0
    } else {
        a
    }
}

fn arc_of(a: f64, depth: u32) -> u64 {
    let n = 1u64 << depth;
    ((a * n as f64).floor() as u64).min(n - 1)
}

/// Dyadic arcs of `[0, 1)` at one depth, sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcSet {
    depth: u32,
    indices: Vec<u64>,
}

impl ArcSet {
    pub fn new(depth: u32, mut indices: Vec<u64>) -> Result<Self> {
        if depth > 62 {
            return Err(Error::param(format!("arc depth {depth} too large")));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >> depth != 0) {
            return Err(Error::param(format!("arc index {i} outside [0, 2^{depth})")));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(ArcSet { depth, indices })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn cells(&self) -> Vec<DyadicCell> {
        self.indices
            .iter()
            .map(|&i| DyadicCell::arc(self.depth, i).expect("validated index"))
            .collect()
    }
}

struct Node {
    lo: Point2,
    hi: Point2,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Box tree over a point set, reused across viewpoints.
pub struct RadialIndex {
    points: Vec<Point2>,
    nodes: Vec<Node>,
    scale: Scale,
}

impl RadialIndex {
    pub fn new(k: &PointSet) -> Self {
        let mut points = k.points().to_vec();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            let n = points.len();
            build(&mut points, &mut nodes, 0, n);
        }
        RadialIndex {
            points,
            nodes,
            scale: k.scale(),
        }
    }

    /// Arcs at `depth` hit by directions from `x`; errors if some point of
    /// the set is closer than δ to `x`.
    pub fn project(&self, x: Point2, depth: u32) -> Result<ArcSet> {
        if depth > 30 {
            return Err(Error::param(format!("arc depth {depth} too large for a scan")));
        }
        let floor = self.scale.value();
        let n = 1usize << depth;
        let mut hit = vec![false; n];
        let mut count = 0usize;
        if self.nodes.is_empty() {
            return ArcSet::new(depth, Vec::new());
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if count == n {
                break;
            }
            let node = &self.nodes[id];
            if box_dist(x, node) >= floor {
                if let Some((a, b)) = span_arcs(x, node, depth) {
                    // all arcs in [a, b] (cyclic) either hit by one arc or already marked
                    if a == b {
                        let i = a as usize;
                        if !hit[i] {
                            hit[i] = true;
                            count += 1;
                        }
                        continue;
                    }
                    if cyclic(a, b, n as u64).all(|i| hit[i as usize]) {
                        continue;
                    }
                }
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => {
                    for y in &self.points[node.start..node.end] {
                        let d = x.dist(*y);
                        if d < floor {
                            return Err(Error::ViewpointTooClose {
                                x: x.x,
                                y: x.y,
                                dist: d,
                                floor,
                            });
                        }
                        let i = arc_of(direction(x, *y), depth) as usize;
                        if !hit[i] {
                            hit[i] = true;
                            count += 1;
                        }
                    }
                }
            }
        }
        let indices = (0..n as u64).filter(|&i| hit[i as usize]).collect();
        ArcSet::new(depth, indices)
    }
}

fn build(points: &mut [Point2], nodes: &mut Vec<Node>, start: usize, end: usize) -> usize {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &points[start..end] {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let id = nodes.len();
    nodes.push(Node {
        lo,
        hi,
        start,
        end,
        children: None,
    });
    if end - start > LEAF && (hi.x > lo.x || hi.y > lo.y) {
        let mid = (start + end) / 2;
        let by_x = hi.x - lo.x >= hi.y - lo.y;
        points[start..end].select_nth_unstable_by(mid - start, |a, b| {
            if by_x {
                a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
            } else {
                a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))
            }
        });
        let l = build(points, nodes, start, mid);
        let r = build(points, nodes, mid, end);
        nodes[id].children = Some((l, r));
    }
    id
}

fn box_dist(x: Point2, n: &Node) -> f64 {
    let dx = (n.lo.x - x.x).max(x.x - n.hi.x).max(0.0);
    let dy = (n.lo.y - x.y).max(x.y - n.hi.y).max(0.0);
    dx.hypot(dy)
}

/// Arc indices at the two ends of the box's angular span seen from `x`,
/// widened by a rounding margin. `None` when `x` is inside the box.
fn span_arcs(x: Point2, n: &Node, depth: u32) -> Option<(u64, u64)> {
    let c = Point2::new(0.5 * (n.lo.x + n.hi.x), 0.5 * (n.lo.y + n.hi.y));
    let ac = direction(x, c);
    let mut lo_rel: f64 = 0.0;
    let mut hi_rel: f64 = 0.0;
    for corner in [
        n.lo,
        n.hi,
        Point2::new(n.lo.x, n.hi.y),
        Point2::new(n.hi.x, n.lo.y),
    ] {
        let mut r = direction(x, corner) - ac;
        if r > 0.5 {
            r -= 1.0;
        } else if r < -0.5 {
            r += 1.0;
        }
        lo_rel = lo_rel.min(r);
        hi_rel = hi_rel.max(r);
    }
    if hi_rel - lo_rel >= 0.49 {
        return None;
    }
    let scale = (depth as f64).exp2();
    let lo = ((ac + lo_rel - ANGLE_MARGIN) * scale).floor();
    let hi = ((ac + hi_rel + ANGLE_MARGIN) * scale).floor();
    let n = 1i64 << depth;
    let wrap = |v: f64| (v as i64).rem_euclid(n) as u64;
    Some((wrap(lo), wrap(hi)))
}

fn cyclic(a: u64, b: u64, n: u64) -> impl Iterator<Item = u64> {
    let len = if b >= a { b - a + 1 } else { n - a + b + 1 };
    (0..len).map(move |k| (a + k) % n)
}

/// Arcs at `depth` containing some direction `π_x(y)`, `y ∈ K`.
pub fn radial_project(x: Point2, k: &PointSet, depth: u32) -> Result<ArcSet> {
    RadialIndex::new(k).project(x, depth)
}

pub enum ContentSet<'a> {
    Arcs(&'a ArcSet),
    Points(&'a PointSet),
}

/// Dyadic estimate of the δ-truncated content; within a factor
/// `2^σ · CONTENT_CONST_*` of the infimum over arbitrary covers.
pub fn content_estimate(s: ContentSet<'_>, sigma: f64, scale: Scale) -> Result<f64> {
    match s {
        ContentSet::Arcs(a) => arcs_content(a.indices(), a.depth(), sigma, scale),
        ContentSet::Points(p) => points_content(p.points(), sigma, scale),
    }
}

#[derive(Clone, Debug)]
pub struct HeavyTube {
    pub arc: u64,
    pub tube: Tube,
    /// Points of K inside the tube, and their weight.
    pub count: usize,
    pub mass: f64,
    /// Guaranteed lower bound: arc mass over the number of sub-tubes.
    pub declared: f64,
}

#[derive(Clone, Debug)]
pub struct HeavyDirections {
    pub depth: u32,
    pub threshold: f64,
    /// `(arc index, pushforward mass)` for every heavy arc.
    pub arcs: Vec<(u64, f64)>,
    pub tubes: Vec<HeavyTube>,
}

/// Arcs of pushforward mass at least `Δ^(Σ+ε)·‖K‖`, `Δ = 2^-depth`, and for
/// each one a width-Δ tube through `x` carrying the heaviest sub-arc.
pub fn heavy_directions(
    x: Point2,
    k: &PointSet,
    weights: Option<&[f64]>,
    big_sigma: f64,
    eps: f64,
    depth: u32,
    floor: f64,
) -> Result<HeavyDirections> {
    if depth > 30 {
        return Err(Error::param(format!("arc depth {depth} too large")));
    }
    if let Some(w) = weights {
        if w.len() != k.len() {
            return Err(Error::param("one weight per point required"));
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("weights must be finite and nonnegative"));
        }
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let dist = k.dist_to(x);
    if dist < floor {
        return Err(Error::ViewpointTooClose {
            x: x.x,
            y: x.y,
            dist,
            floor,
        });
    }
    let delta = (-(depth as f64)).exp2();
    let total: f64 = (0..k.len()).map(weight).sum();
    let threshold = delta.powf(big_sigma + eps) * total;
    let mut by_arc: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    for (i, y) in k.points().iter().enumerate() {
        by_arc.entry(arc_of(direction(x, *y), depth)).or_default().push(i);
    }
    let mut arcs = Vec::new();
    let mut tubes = Vec::new();
    for (arc, members) in by_arc {
        let mass: f64 = members.iter().map(|&i| weight(i)).sum();
        if mass < threshold || mass == 0.0 {
            continue;
        }
        arcs.push((arc, mass));
        let reach = members
            .iter()
            .map(|&i| x.dist(k.points()[i]))
            .fold(0.0, f64::max);
        // sub-arcs of angle 2πΔ/n keep every member within Δ/2 of the axis
        let n = ((TAU * reach).ceil() as usize).max(1);
        let mut sub = vec![0.0; n];
        for &i in &members {
            let a = direction(x, k.points()[i]) * (1u64 << depth) as f64 - arc as f64;
            let j = ((a.clamp(0.0, 1.0) * n as f64).floor() as usize).min(n - 1);
            sub[j] += weight(i);
        }
        let (best, _) = sub
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (j, &m)| if m > acc.1 { (j, m) } else { acc });
        let theta = (arc as f64 + (best as f64 + 0.5) / n as f64) * delta * TAU;
        let tube = Tube::new(Line::through(x, theta), delta)?;
        let (count, tmass) = k
            .points()
            .iter()
            .enumerate()
            .filter(|(_, y)| tube.contains(**y))
            .fold((0, 0.0), |(c, m), (i, _)| (c + 1, m + weight(i)));
        tubes.push(HeavyTube {
            arc,
            tube,
            count,
            mass: tmass,
            declared: mass / n as f64,
        });
    }
    Ok(HeavyDirections {
        depth,
        threshold,
        arcs,
        tubes,
    })
}

/// Least-squares fit of `log2(count)` against `m = log2(1/δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn estimate_dimension(counts: &[(Scale, u64)]) -> Result<DimensionFit> {
    if counts.len() < 3 {
        return Err(Error::LadderTooShort {
            got: counts.len(),
            need: 3,
        });
    }
    if counts.iter().any(|&(_, c)| c == 0) {
        return Err(Error::param("covering counts must be at least 1"));
    }
    let xs: Vec<f64> = counts.iter().map(|(s, _)| s.exp() as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).log2()).collect();
    fit(&xs, &ys)
}

fn fit(xs: &[f64], ys: &[f64]) -> Result<DimensionFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("ladder needs at least two distinct scales"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(DimensionFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub ladder: Vec<Scale>,
    pub sigma: f64,
    /// `counts[i][v]`: `|π_v(K)|_δ` at `ladder[i]`.
    pub counts: Vec<Vec<u64>>,
    /// Viewpoints with `count ≤ δ^-σ`, per scale.
    pub exceptional: Vec<Vec<usize>>,
    /// Exceptional counts at thresholds `δ^-(σ-0.05)` and `δ^-(σ+0.05)`.
    pub sensitivity: Vec<(usize, usize)>,
    /// `|E_δ|_δ`, with an empty set counted as one cell.
    pub exceptional_cover: Vec<u64>,
    pub exceptional_fit: DimensionFit,
    pub k_cover: Vec<u64>,
    pub k_fit: DimensionFit,
    /// `max{1 + σ - t_emp, 0}`.
    pub bound: f64,
}

impl ScanReport {
    pub fn t_emp(&self) -> f64 {
        self.k_fit.slope
    }

    pub const CSV_HEADER: &'static str = "scale_exp,viewpoint_id,covering_count,exceptional_flag";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (i, s) in self.ladder.iter().enumerate() {
            let mut flags = vec![false; self.counts[i].len()];
            for &v in &self.exceptional[i] {
                flags[v] = true;
            }
            for (v, c) in self.counts[i].iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", s.exp(), v, c, flags[v] as u8));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "surrogate=box-counting (covering-number regression), not Hausdorff dimension\nsigma={}\nviewpoints={}\nt_emp={:?}\nt_emp_residual={:?}\nexceptional_slope={:?}\nexceptional_residual={:?}\nbound={:?}\nslope_minus_bound={:?}\n",
            self.sigma,
            self.counts.first().map_or(0, |c| c.len()),
            self.k_fit.slope,
            self.k_fit.residual,
            self.exceptional_fit.slope,
            self.exceptional_fit.residual,
            self.bound,
            self.exceptional_fit.slope - self.bound,
        );
        for (i, s) in self.ladder.iter().enumerate() {
            out.push_str(&format!(
                "scale.{}: k_cover={} exceptional={} exceptional_cover={} sens_lo={} sens_hi={}\n",
                s.exp(),
                self.k_cover[i],
                self.exceptional[i].len(),
                self.exceptional_cover[i],
                self.sensitivity[i].0,
                self.sensitivity[i].1
            ));
        }
        out
    }

    /// Two-column `m log2(count)` data for the exceptional-set regression
    /// and for K's own.
    pub fn plot_data(&self) -> (String, String) {
        let col = |v: &[u64]| {
            self.ladder
                .iter()
                .zip(v)
                .map(|(s, c)| format!("{} {:?}\n", s.exp(), (*c as f64).log2()))
                .collect::<String>()
        };
        (col(&self.exceptional_cover), col(&self.k_cover))
    }
}

/// Exceptional viewpoints `{x : |π_x(K)|_δ ≤ δ^-σ}` across a ladder. At
/// each scale `K` is replaced by a δ-net of its own points.
pub fn exceptional_scan(k: &PointSet, viewpoints: &[Point2], sigma: f64, ladder: &[Scale]) -> Result<ScanReport> {
    if ladder.len() < 4 {
        return Err(Error::LadderTooShort {
            got: ladder.len(),
            need: 4,
        });
    }
    if k.is_empty() {
        return Err(Error::Empty("K"));
    }
    if viewpoints.is_empty() {
        return Err(Error::Empty("viewpoints"));
    }
    if let Some(s) = ladder.iter().find(|s| k.scale().is_finer_than(**s) && s.exp() > k.scale().exp()) {
        return Err(Error::param(format!("ladder scale 2^-{} finer than K", s.exp())));
    }
    let mut counts = Vec::with_capacity(ladder.len());
    let mut exceptional = Vec::new();
    let mut sensitivity = Vec::new();
    let mut exceptional_cover = Vec::new();
    let mut k_cover = Vec::new();
    for &s in ladder {
        let net = PointSet::separated_subset(k.points(), s)?;
        let index = RadialIndex::new(&net);
        let row: Vec<u64> = viewpoints
            .par_iter()
            .map(|x| index.project(*x, s.exp()).map(|a| a.len() as u64))
            .collect::<Result<_>>()?;
        let below = |e: f64| row.iter().filter(|&&c| c as f64 <= s.pow(-e)).count();
        let ex: Vec<usize> = (0..row.len()).filter(|&v| row[v] as f64 <= s.pow(-sigma)).collect();
        sensitivity.push((below(sigma - SENSITIVITY), below(sigma + SENSITIVITY)));
        let pts: Vec<Point2> = ex.iter().map(|&v| viewpoints[v]).collect();
        exceptional_cover.push((covering_number(&pts, s)? as u64).max(1));
        k_cover.push(covering_number(k.points(), s)? as u64);
        exceptional.push(ex);
        counts.push(row);
    }
    let pairs = |v: &[u64]| ladder.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
    let exceptional_fit = estimate_dimension(&pairs(&exceptional_cover))?;
    let k_fit = estimate_dimension(&pairs(&k_cover))?;
    Ok(ScanReport {
        ladder: ladder.to_vec(),
        sigma,
        counts,
        exceptional,
        sensitivity,
        exceptional_cover,
        exceptional_fit,
        bound: (1.0 + sigma - k_fit.slope).max(0.0),
        k_cover,
        k_fit,
    })
}
