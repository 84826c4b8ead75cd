//! Regularity of discretized sets: ball-normalized `(δ,s,C)` constants,
//! Katz-Tao constants, the decomposition of a regular set into Katz-Tao
//! pieces, and extraction of a regular subset from a set of large content.
//!
//! Constants are maxima over a fixed test family. Centres are the elements
//! themselves and, for planar sets, the centres of the ambient dyadic cells
//! of side `r` that contain an element; radii are `δ, 2δ, …, 1`. Because the
//! sets are δ-separated, `|P ∩ B|_δ` is taken to be the cardinality
//! `|P ∩ B|`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::content::points_content;
use crate::error::{Error, Result};
use crate::geometry::{Line, Point2, PointSet, Scale, Window};
use crate::spatial::{in_ball, KdTree, MetricKind};

/// `extract_regular_subset` returns a set with constant at most
/// `EXTRACTION_CONSTANT / κ`: a ball of radius `r` meets at most 9 ambient
/// cells of side `r`, and the extracted set has at least half the
/// content-predicted size.
pub const EXTRACTION_CONSTANT: f64 = 18.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularityKind {
    /// `|P ∩ B(x,r)| / (r^s |P|)`.
    BallNormalized,
    /// `|P ∩ B(x,r)| / (r/δ)^s`.
    KatzTao,
}

impl RegularityKind {
    pub fn name(self) -> &'static str {
        match self {
            RegularityKind::BallNormalized => "ball-normalized",
            RegularityKind::KatzTao => "katz-tao",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Center {
    /// The element with this index.
    Element(usize),
    /// The centre of an ambient dyadic cell.
    Cell(Point2),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub center: Center,
    pub radius: Scale,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub kind: RegularityKind,
    pub s: f64,
    pub best_c: f64,
    pub witness: Witness,
    pub size: usize,
    pub scale: Scale,
    pub balls_tested: usize,
}

impl RegularityReport {
    /// The report as a `key=value` block.
    pub fn to_text(&self) -> String {
        let (cx, cy) = match self.witness.center {
            Center::Element(i) => (format!("element:{i}"), String::new()),
            Center::Cell(p) => (format!("cell:{:?}", p.x), format!("{:?}", p.y)),
        };
        let center = if cy.is_empty() { cx } else { format!("{cx},{cy}") };
        format!(
            "kind={}\ns={}\nscale_exp={}\nsize={}\nbest_c={:?}\nwitness_center={}\nwitness_radius_exp={}\nwitness_count={}\nballs_tested={}\ncenters=elements+occupied-cell-centres\n",
            self.kind.name(),
            self.s,
            self.scale.exp(),
            self.size,
            self.best_c,
            center,
            self.witness.radius.exp(),
            self.witness.count,
            self.balls_tested,
        )
    }
}

/// Ratio of a ball count to the normalizing factor at radius `δ·2^i`.
fn ratio(kind: RegularityKind, count: usize, i: u32, scale: Scale, s: f64, size: usize) -> f64 {
    match kind {
        RegularityKind::BallNormalized => {
            let r_pow = (-((scale.exp() - i) as f64) * s).exp2();
            count as f64 / (r_pow * size as f64)
        }
        RegularityKind::KatzTao => count as f64 / katz_tao_capacity(i, s),
    }
}

/// `(r/δ)^s` for `r = δ·2^i`.
fn katz_tao_capacity(i: u32, s: f64) -> f64 {
    (i as f64).exp2().powf(s)
}

fn point_coords(p: Point2) -> [f64; 4] {
    [p.x, p.y, 0.0, 0.0]
}

/// Embeds a line so that the split metric reproduces the line metric: the
/// chord between `½(cos 2θ, sin 2θ)` values is `|sin Δθ|`, the operator norm
/// of the projection difference.
pub(crate) fn line_coords(l: &Line) -> [f64; 4] {
    let f = l.foot();
    let t = 2.0 * l.theta();
    [0.5 * t.cos(), 0.5 * t.sin(), f.x, f.y]
}

/// Centres of the ambient cells of side `δ·2^i` that contain a point,
/// in ascending `(ix, iy)` order.
fn occupied_cell_centers(points: &[Point2], scale: Scale, i: u32) -> Vec<Point2> {
    let side = Scale::new(scale.exp() - i);
    let Some(depth) = Window::AMBIENT.depth_for(side) else {
        return Vec::new();
    };
    let mut cells: Vec<(u64, u64)> = points
        .iter()
        .filter_map(|p| Window::AMBIENT.cell_index(*p, depth).ok())
        .collect();
    cells.sort_unstable();
    cells.dedup();
    let r = side.value();
    cells
        .into_iter()
        .map(|(ix, iy)| {
            Point2::new(
                Window::AMBIENT.origin.x + (ix as f64 + 0.5) * r,
                Window::AMBIENT.origin.y + (iy as f64 + 0.5) * r,
            )
        })
        .collect()
}

struct Domain<'a> {
    coords: Vec<[f64; 4]>,
    metric: MetricKind,
    points: Option<&'a [Point2]>,
    scale: Scale,
}

impl Domain<'_> {
    /// Cell centres tested at each radius index, radius ascending. The
    /// elements are tested at every radius as well.
    fn cell_centers(&self) -> Vec<(u32, Vec<Point2>)> {
        (0..=self.scale.exp())
            .map(|i| {
                let cells = self
                    .points
                    .map(|p| occupied_cell_centers(p, self.scale, i))
                    .unwrap_or_default();
                (i, cells)
            })
            .collect()
    }

    fn radius(&self, i: u32) -> f64 {
        Scale::new(self.scale.exp() - i).value()
    }
}

fn scan(domain: &Domain<'_>, kind: RegularityKind, s: f64) -> Result<RegularityReport> {
    if domain.coords.is_empty() {
        return Err(Error::EmptyRegularity);
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param(format!("exponent s must be finite and >= 0, got {s}")));
    }
    domain.scale.check_supported()?;
    let tree = KdTree::new(&domain.coords, domain.metric);
    let size = domain.coords.len();
    // maxima first; the witness search runs only at the winning radius
    let mut best: Option<(f64, u32, usize, bool)> = None;
    let mut tested = 0;
    let cells_by_radius = domain.cell_centers();
    let cell_trees: Vec<Option<KdTree>> = cells_by_radius
        .iter()
        .map(|(_, cells)| {
            (!cells.is_empty()).then(|| {
                let coords: Vec<[f64; 4]> = cells.iter().map(|p| point_coords(*p)).collect();
                KdTree::new(&coords, MetricKind::Plane)
            })
        })
        .collect();
    for ((i, cells), cell_tree) in cells_by_radius.iter().zip(&cell_trees) {
        let r = domain.radius(*i);
        tested += size + cells.len();
        // elements precede cells in the family order, so a cell only wins
        // with a strictly larger count
        let mut count = tree.max_value_over(&tree, r).expect("nonempty tree");
        let mut on_cell = false;
        if let Some(ct) = cell_tree {
            let c = tree.max_value_over(ct, r).expect("nonempty cells");
            if c > count {
                count = c;
                on_cell = true;
            }
        }
        let q = ratio(kind, count, *i, domain.scale, s, size);
        if best.as_ref().is_none_or(|(b, ..)| q > *b) {
            best = Some((q, *i, count, on_cell));
        }
    }
    let (q, i, count, on_cell) = best.expect("nonempty domain has at least one ball");
    let r = domain.radius(i);
    let center = if on_cell {
        let ct = cell_trees[i as usize].as_ref().expect("cell winner has cells");
        Center::Cell(cells_by_radius[i as usize].1[tree.first_reaching(ct, r, count).expect("attained")])
    } else {
        Center::Element(tree.first_reaching(&tree, r, count).expect("attained"))
    };
    let best = Some((
        q,
        Witness {
            center,
            radius: Scale::new(domain.scale.exp() - i),
            count,
        },
    ));
    let (best_c, witness) = best.expect("nonempty domain has at least one ball");
    Ok(RegularityReport {
        kind,
        s,
        best_c,
        witness,
        size,
        scale: domain.scale,
        balls_tested: tested,
    })
}

fn point_domain(p: &PointSet) -> Domain<'_> {
    Domain {
        coords: p.points().iter().map(|q| point_coords(*q)).collect(),
        metric: MetricKind::Plane,
        points: Some(p.points()),
        scale: p.scale(),
    }
}

fn line_domain(lines: &[Line], scale: Scale) -> Domain<'static> {
    Domain {
        coords: lines.iter().map(line_coords).collect(),
        metric: MetricKind::Split,
        points: None,
        scale,
    }
}

/// Best ball-normalized constant of a planar set.
pub fn verify_delta_set(p: &PointSet, s: f64) -> Result<RegularityReport> {
    scan(&point_domain(p), RegularityKind::BallNormalized, s)
}

/// Best Katz-Tao constant of a planar set.
pub fn verify_katz_tao(p: &PointSet, s: f64) -> Result<RegularityReport> {
    scan(&point_domain(p), RegularityKind::KatzTao, s)
}

/// Best ball-normalized constant of a family of lines under the line
/// metric; centres are the lines themselves.
pub fn verify_delta_set_lines(lines: &[Line], scale: Scale, s: f64) -> Result<RegularityReport> {
    scan(&line_domain(lines, scale), RegularityKind::BallNormalized, s)
}

pub fn verify_katz_tao_lines(lines: &[Line], scale: Scale, s: f64) -> Result<RegularityReport> {
    scan(&line_domain(lines, scale), RegularityKind::KatzTao, s)
}

/// Recomputes one ball ratio by direct enumeration; used to replay a
/// report's witness.
pub fn ratio_at(
    p: &PointSet,
    center: Point2,
    radius: Scale,
    s: f64,
    kind: RegularityKind,
) -> (usize, f64) {
    let r = radius.value();
    let count = p
        .points()
        .iter()
        .filter(|q| in_ball(q.dist(center), r))
        .count();
    let i = p.scale().exp() - radius.exp();
    (count, ratio(kind, count, i, p.scale(), s, p.len()))
}

/// Resolves a witness centre to coordinates.
pub fn witness_point(p: &PointSet, w: &Witness) -> Point2 {
    match w.center {
        Center::Element(i) => p.points()[i],
        Center::Cell(c) => c,
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub parts: Vec<PointSet>,
    /// Input indices of each part, ascending.
    pub part_indices: Vec<Vec<usize>>,
    pub h: f64,
    pub group_size: usize,
    /// Colours used by the greedy colouring of the group graph.
    pub colors: usize,
    /// Final part count after merging colour classes.
    pub n: usize,
    pub part_best_c: Vec<f64>,
    /// `C |P| δ^(t-ε)`.
    pub bound: f64,
    pub premise_best_c: f64,
    /// The input's measured constant exceeds the declared `C`.
    pub premise_warning: bool,
}

impl DecompositionReport {
    pub fn bound_satisfied(&self) -> bool {
        self.n as f64 <= self.bound
    }

    /// `part_id,point_index` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("part_id,point_index\n");
        for (j, idx) in self.part_indices.iter().enumerate() {
            for i in idx {
                out.push_str(&format!("{j},{i}\n"));
            }
        }
        out
    }
}

/// Indices of the points of `tree` in every lattice ball `B(z, r)`,
/// `z ∈ (r/2)ℤ²`, that meets `points`. Balls are listed in ascending
/// lattice order.
fn lattice_balls(points: &[Point2], tree: &KdTree, r: f64) -> Vec<Vec<usize>> {
    let step = r / 2.0;
    let mut lattice: Vec<(i64, i64)> = Vec::new();
    for p in points {
        let (x0, x1) = (((p.x - r) / step).floor() as i64, ((p.x + r) / step).ceil() as i64);
        let (y0, y1) = (((p.y - r) / step).floor() as i64, ((p.y + r) / step).ceil() as i64);
        for a in x0..=x1 {
            for b in y0..=y1 {
                let z = Point2::new(a as f64 * step, b as f64 * step);
                if in_ball(z.dist(*p), r) {
                    lattice.push((a, b));
                }
            }
        }
    }
    lattice.sort_unstable();
    lattice.dedup();
    lattice
        .par_iter()
        .map(|&(a, b)| tree.report(&[a as f64 * step, b as f64 * step, 0.0, 0.0], r))
        .collect()
}

/// Greedy colouring in index order: each vertex takes the smallest colour
/// absent among its already-coloured neighbours.
fn greedy_color(n: usize, groups: &[Vec<usize>], membership: &[Vec<usize>]) -> Vec<usize> {
    let mut color = vec![usize::MAX; n];
    for v in 0..n {
        let mut used: Vec<usize> = Vec::new();
        for &g in &membership[v] {
            for &u in &groups[g] {
                if u < v {
                    used.push(color[u]);
                }
            }
        }
        used.sort_unstable();
        used.dedup();
        let mut c = 0;
        for u in used {
            if u == c {
                c += 1;
            } else if u > c {
                break;
            }
        }
        color[v] = c;
    }
    color
}

/// Balls of the verification family in which `p` has more points than the
/// Katz-Tao capacity allows a single part: `(capacity, members)`.
fn binding_balls(p: &PointSet, t: f64) -> Vec<(usize, Vec<usize>)> {
    let domain = point_domain(p);
    let tree = KdTree::new(&domain.coords, MetricKind::Plane);
    let mut out = Vec::new();
    for (i, cells) in domain.cell_centers() {
        let r = domain.radius(i);
        let cap = katz_tao_capacity(i, t).floor() as usize;
        let centers: Vec<[f64; 4]> = domain
            .coords
            .iter()
            .copied()
            .chain(cells.iter().map(|p| point_coords(*p)))
            .collect();
        let found: Vec<Option<(usize, Vec<usize>)>> = centers
            .par_iter()
            .map(|c| (tree.count(c, r) > cap).then(|| (cap, tree.report(c, r))))
            .collect();
        out.extend(found.into_iter().flatten());
    }
    out
}

/// First-fit merge of colour classes under the Katz-Tao capacity of every
/// binding ball of the input's verification family. Any subset of `P`
/// meets the remaining balls of its own family automatically.
fn merge_classes(p: &PointSet, t: f64, classes: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let balls = binding_balls(p, t);
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); p.len()];
    for (b, (_, members)) in balls.iter().enumerate() {
        for &v in members {
            touching[v].push(b);
        }
    }
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut load: Vec<HashMap<usize, usize>> = Vec::new();
    let mut place = |unit: Vec<usize>, parts: &mut Vec<Vec<usize>>| -> bool {
        let mut add: BTreeMap<usize, usize> = BTreeMap::new();
        for &v in &unit {
            for &b in &touching[v] {
                *add.entry(b).or_default() += 1;
            }
        }
        let fits = |l: &HashMap<usize, usize>| {
            add.iter()
                .all(|(b, a)| l.get(b).copied().unwrap_or(0) + a <= balls[*b].0)
        };
        let j = match load.iter().position(fits) {
            Some(j) => j,
            None if fits(&HashMap::new()) => {
                load.push(HashMap::new());
                parts.push(Vec::new());
                load.len() - 1
            }
            None => return false,
        };
        for (b, a) in &add {
            *load[j].entry(*b).or_default() += a;
        }
        parts[j].extend(unit);
        true
    };
    for class in classes {
        if !place(class.clone(), &mut parts) {
            // a class over capacity on its own (premise fails): place its
            // points one by one; a single point always fits
            for v in class {
                place(vec![v], &mut parts);
            }
        }
    }
    for part in &mut parts {
        part.sort_unstable();
    }
    parts
}

/// Splits `P` into Katz-Tao `(δ,t,1)` pieces.
///
/// Points in each ball of the lattice families `B_r`, `r = δ, 2δ, …, 4`,
/// are cut into groups of `⌊H⌋`, `H = 4^(t+1) C |P| δ^t`; every group is a
/// clique of a conflict graph, which is coloured greedily. Colour classes
/// are then merged first-fit while every ball of the verification family
/// stays within capacity, which brings the count toward `C |P| δ^(t-ε)`.
pub fn katz_tao_decompose(p: &PointSet, t: f64, c: f64, eps: f64) -> Result<DecompositionReport> {
    if p.is_empty() {
        return Err(Error::Empty("point set"));
    }
    if !(t > 0.0 && t.is_finite() && c > 0.0 && c.is_finite() && eps >= 0.0) {
        return Err(Error::param("need t > 0, C > 0 and eps >= 0"));
    }
    let scale = p.scale();
    let n = p.len();
    let h = 4f64.powf(t + 1.0) * c * n as f64 * scale.pow(t);
    if h < 1.0 {
        return Err(Error::PremiseViolated { h });
    }
    let premise_best_c = verify_delta_set(p, t)?.best_c;
    let group_size = h.floor() as usize;

    let coords: Vec<[f64; 4]> = p.points().iter().map(|q| point_coords(*q)).collect();
    let tree = KdTree::new(&coords, MetricKind::Plane);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for e in (-2..=scale.exp() as i32).rev() {
        let r = (-(e as f64)).exp2();
        for members in lattice_balls(p.points(), &tree, r) {
            for chunk in members.chunks(group_size) {
                if chunk.len() > 1 {
                    groups.push(chunk.to_vec());
                }
            }
        }
    }
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, members) in groups.iter().enumerate() {
        for &v in members {
            membership[v].push(g);
        }
    }
    let color = greedy_color(n, &groups, &membership);
    let colors = color.iter().max().map_or(0, |c| c + 1);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); colors];
    for (v, &k) in color.iter().enumerate() {
        classes[k].push(v);
    }

    let part_indices = merge_classes(p, t, classes);
    let parts: Vec<PointSet> = part_indices.iter().map(|idx| p.subset(idx)).collect();
    let part_best_c = parts
        .par_iter()
        .map(|q| verify_katz_tao(q, t).map(|r| r.best_c))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DecompositionReport {
        n: parts.len(),
        parts,
        part_indices,
        h,
        group_size,
        colors,
        part_best_c,
        bound: c * n as f64 * scale.pow(t - eps),
        premise_best_c,
        premise_warning: premise_best_c > c,
    })
}

/// A subset of `a` that is a `(δ,s,C_abs/κ)`-set, given content at least `κ`.
///
/// Bottom-up over the ambient quadtree, each cell of side `ℓ` keeps at most
/// `⌊(ℓ/δ)^s⌋` of its children's survivors, taken round-robin.
pub fn extract_regular_subset(a: &PointSet, s: f64, kappa: f64) -> Result<PointSet> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param(format!("kappa must be positive, got {kappa}")));
    }
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::param(format!("s must lie in (0, 2], got {s}")));
    }
    if a.is_empty() {
        return Err(Error::InsufficientContent { content: 0.0, kappa });
    }
    let scale = a.scale();
    let content = points_content(a.points(), s, scale)?;
    if content < kappa * (1.0 - 1e-12) {
        return Err(Error::InsufficientContent { content, kappa });
    }
    let leaf_depth = Window::AMBIENT
        .depth_for(scale)
        .ok_or_else(|| Error::param("scale finer than the ambient window supports"))?;

    let mut level: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for (i, q) in a.points().iter().enumerate() {
        let key = Window::AMBIENT.cell_index(*q, leaf_depth)?;
        level.entry(key).or_insert_with(|| vec![i]);
    }
    for depth in (0..leaf_depth).rev() {
        let cap = ((leaf_depth - depth) as f64 * s).exp2();
        let cap = (cap + 1e-9).floor() as usize;
        let mut parents: BTreeMap<(u64, u64), Vec<Vec<usize>>> = BTreeMap::new();
        for ((ix, iy), kept) in level {
            parents.entry((ix >> 1, iy >> 1)).or_default().push(kept);
        }
        level = parents
            .into_iter()
            .map(|(key, children)| (key, round_robin(children, cap)))
            .collect();
    }
    let mut kept: Vec<usize> = level.into_values().flatten().collect();
    kept.sort_unstable();
    Ok(a.subset(&kept))
}

fn round_robin(children: Vec<Vec<usize>>, cap: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let longest = children.iter().map(Vec::len).max().unwrap_or(0);
    'outer: for k in 0..longest {
        for child in &children {
            if let Some(&v) = child.get(k) {
                if out.len() == cap {
                    break 'outer;
                }
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: u32, spacing: f64) -> Vec<Point2> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                v.push(Point2::new(i as f64 * spacing, j as f64 * spacing));
            }
        }
        v
    }

    fn segment(m: u32) -> PointSet {
        let n = 1u32 << m;
        let d = 1.0 / n as f64;
        PointSet::new((0..n).map(|i| Point2::new(i as f64 * d, 0.0)).collect(), Scale::new(m)).unwrap()
    }

    // Exhaustive oracle over the same centre/radius family, with no tree.
    fn brute_best(p: &PointSet, s: f64, kind: RegularityKind) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..=p.scale().exp() {
            let r = Scale::new(p.scale().exp() - i);
            let mut centers: Vec<Point2> = p.points().to_vec();
            centers.extend(occupied_cell_centers(p.points(), p.scale(), i));
            for c in centers {
                best = best.max(ratio_at(p, c, r, s, kind).1);
            }
        }
        best
    }

    #[test]
    fn single_point_constants() {
        let p = PointSet::new(vec![Point2::new(0.3, 0.3)], Scale::new(4)).unwrap();
        assert_eq!(verify_delta_set(&p, 1.0).unwrap().best_c, 16.0);
        for s in [0.3, 1.0, 2.0] {
            assert_eq!(verify_katz_tao(&p, s).unwrap().best_c, 1.0);
        }
    }

    #[test]
    fn grid_and_segment_constants() {
        let g = PointSet::new(grid(16, 1.0 / 16.0), Scale::new(4)).unwrap();
        let ds = verify_delta_set(&g, 2.0).unwrap();
        assert!((1.0..=9.0).contains(&ds.best_c), "{}", ds.best_c);
        assert_eq!(ds.best_c, brute_best(&g, 2.0, RegularityKind::BallNormalized));
        let kt = verify_katz_tao(&g, 2.0).unwrap();
        assert!(kt.best_c <= 9.0);
        assert_eq!(kt.best_c, brute_best(&g, 2.0, RegularityKind::KatzTao));

        let seg = segment(6);
        let ds = verify_delta_set(&seg, 1.0).unwrap();
        assert!((1.0..=4.0).contains(&ds.best_c), "{}", ds.best_c);
        assert_eq!(ds.best_c, brute_best(&seg, 1.0, RegularityKind::BallNormalized));
        let kt = verify_katz_tao(&seg, 1.0).unwrap();
        assert!(kt.best_c <= 3.0);
    }

    #[test]
    fn witness_replays() {
        let g = PointSet::new(grid(8, 0.125), Scale::new(3)).unwrap();
        for kind in [RegularityKind::BallNormalized, RegularityKind::KatzTao] {
            let rep = scan(&point_domain(&g), kind, 1.3).unwrap();
            let c = witness_point(&g, &rep.witness);
            let (count, q) = ratio_at(&g, c, rep.witness.radius, 1.3, kind);
            assert_eq!(count, rep.witness.count);
            assert_eq!(q, rep.best_c);
        }
    }

    #[test]
    fn empty_set_has_no_constant() {
        let e = PointSet::empty(Scale::new(3));
        assert!(matches!(verify_delta_set(&e, 1.0), Err(Error::EmptyRegularity)));
        assert!(matches!(verify_katz_tao(&e, 1.0), Err(Error::EmptyRegularity)));
    }

    #[test]
    fn line_family_constant() {
        let lines: Vec<Line> = (0..16).map(|i| Line::new(0.0, i as f64 / 16.0)).collect();
        let rep = verify_katz_tao_lines(&lines, Scale::new(4), 1.0).unwrap();
        assert_eq!(rep.best_c, 3.0);
        assert!(verify_delta_set_lines(&[], Scale::new(4), 1.0).is_err());
    }

    #[test]
    fn decompose_single_point() {
        let p = PointSet::new(vec![Point2::new(0.0, 0.0)], Scale::new(4)).unwrap();
        let rep = katz_tao_decompose(&p, 1.0, 16.0, 0.1).unwrap();
        assert_eq!(rep.n, 1);
        assert_eq!(rep.part_indices, vec![vec![0]]);
    }

    #[test]
    fn decompose_rejects_small_h() {
        let p = PointSet::new(vec![Point2::new(0.0, 0.0)], Scale::new(8)).unwrap();
        assert!(matches!(
            katz_tao_decompose(&p, 1.0, 1.0, 0.1),
            Err(Error::PremiseViolated { .. })
        ));
    }

    fn check_partition(p: &PointSet, rep: &DecompositionReport) {
        let mut all: Vec<usize> = rep.part_indices.concat();
        all.sort_unstable();
        assert_eq!(all, (0..p.len()).collect::<Vec<_>>());
        for part in &rep.parts {
            assert!(verify_katz_tao(part, 1.0).is_ok());
        }
    }

    #[test]
    fn decompose_segment() {
        let seg = segment(8);
        let rep = katz_tao_decompose(&seg, 1.0, 4.0, 0.1).unwrap();
        check_partition(&seg, &rep);
        assert!(!rep.premise_warning);
        for (part, c) in rep.parts.iter().zip(&rep.part_best_c) {
            assert_eq!(*c, verify_katz_tao(part, 1.0).unwrap().best_c);
            assert!(*c <= 1.0, "{c}");
        }
        assert!(rep.bound_satisfied(), "N = {} bound = {}", rep.n, rep.bound);
    }

    #[test]
    fn decompose_grid() {
        let g = PointSet::new(grid(64, 1.0 / 64.0), Scale::new(6)).unwrap();
        let rep = katz_tao_decompose(&g, 2.0, 9.0, 0.1).unwrap();
        check_partition(&g, &rep);
        for c in &rep.part_best_c {
            assert!(*c <= 1.0, "{c}");
        }
        assert!(rep.n <= rep.colors);
    }

    #[test]
    fn extract_examples() {
        let one = PointSet::new(vec![Point2::new(0.5, 0.5)], Scale::new(5)).unwrap();
        let kappa = Scale::new(5).pow(1.0);
        let out = extract_regular_subset(&one, 1.0, kappa).unwrap();
        assert_eq!(out.points(), one.points());

        let g = PointSet::new(grid(16, 1.0 / 16.0), Scale::new(4)).unwrap();
        let out = extract_regular_subset(&g, 2.0, 0.5).unwrap();
        assert!(out.len() as f64 >= 0.5 * 256.0 / EXTRACTION_CONSTANT);
        assert!(verify_delta_set(&out, 2.0).unwrap().best_c <= EXTRACTION_CONSTANT / 0.5);

        let seg = segment(7);
        let content = points_content(seg.points(), 1.0, seg.scale()).unwrap();
        let out = extract_regular_subset(&seg, 1.0, content).unwrap();
        assert!(verify_delta_set(&out, 1.0).unwrap().best_c <= EXTRACTION_CONSTANT / content);
        assert!(matches!(
            extract_regular_subset(&one, 1.0, 1.0),
            Err(Error::InsufficientContent { .. })
        ));
    }

    fn arb_set() -> impl Strategy<Value = PointSet> {
        proptest::collection::vec((0u32..32, 0u32..32), 1..80).prop_map(|cells| {
            let pts: Vec<Point2> = cells
                .into_iter()
                .map(|(i, j)| Point2::new(i as f64 / 32.0, j as f64 / 32.0))
                .collect();
            PointSet::separated_subset(&pts, Scale::new(5)).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ratio_identity(p in arb_set(), s in 0.2f64..2.0) {
            let ds = verify_delta_set(&p, s).unwrap().best_c;
            let kt = verify_katz_tao(&p, s).unwrap().best_c;
            let factor = p.len() as f64 * p.scale().pow(s);
            prop_assert!(kt <= ds * factor * (1.0 + 1e-12));
            prop_assert!((kt - ds * factor).abs() <= 1e-9 * kt);
        }

        #[test]
        fn removal_scales_constant(p in arb_set(), s in 0.2f64..2.0, keep in 1usize..80) {
            let keep = keep.min(p.len());
            let idx: Vec<usize> = (0..keep).collect();
            let q = p.subset(&idx);
            let c = keep as f64 / p.len() as f64;
            let before = verify_delta_set(&p, s).unwrap().best_c;
            let after = verify_delta_set(&q, s).unwrap().best_c;
            prop_assert!(after <= before / c * (1.0 + 1e-12));
        }

        #[test]
        fn tree_scan_matches_brute(p in arb_set(), s in 0.2f64..2.0) {
            let ds = verify_delta_set(&p, s).unwrap().best_c;
            prop_assert_eq!(ds, brute_best(&p, s, RegularityKind::BallNormalized));
        }

        #[test]
        fn decomposition_partitions(p in arb_set()) {
            let h_min = 1.0 / (16.0 * p.len() as f64 * p.scale().value());
            let rep = katz_tao_decompose(&p, 1.0, h_min.max(1.0) * 2.0, 0.1).unwrap();
            let mut all: Vec<usize> = rep.part_indices.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..p.len()).collect::<Vec<_>>());
            for c in &rep.part_best_c {
                prop_assert!(*c <= 1.0);
            }
        }
    }
}
