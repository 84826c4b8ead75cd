//! Scales, points, lines, tubes and dyadic cells.
//!
//! All sets live in the ambient window `[-2, 2]²`. Dyadic work on squares
//! goes through a [`Window`], an axis-aligned affine frame mapped onto
//! `[0, 1)²`; the ambient frame and the unit square are the two frames used
//! in practice. Because `-2` is a multiple of every dyadic side `2^-m` with
//! `m >= 0`, cells of side `r` in the ambient frame coincide with the
//! lattice `r·ℤ²`.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Finest supported scale exponent. Beyond this, `f64` coordinates in the
/// ambient window no longer resolve individual cells.
pub const MAX_SCALE_EXP: u32 = 50;

/// Relative slack on the δ-separation check, absorbing rounding in
/// generated coordinates.
pub const SEPARATION_TOL: f64 = 1e-9;

/// Covering numbers are counted with dyadic cells instead of minimal ball
/// covers. A ball of radius `r` meets at most this many cells of side `r`,
/// and each cell of side `r` sits inside one ball of radius `r`.
pub const DYADIC_COVER_CONSTANT: usize = 9;

/// A dyadic scale `δ = 2^-exp`.
///
/// Ordering is by exponent, so a *larger* `Scale` is a *finer* one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scale {
    exp: u32,
}

impl Scale {
    pub const fn new(exp: u32) -> Self {
        Scale { exp }
    }

    /// Parses a value that must be an exact power of two in `(0, 1]`.
    pub fn from_value(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::param(format!("scale {delta} is not in (0, 1]")));
        }
        let exp = -delta.log2();
        let rounded = exp.round();
        if (exp - rounded).abs() > 1e-12 {
            return Err(Error::param(format!("scale {delta} is not a power of two")));
        }
        Ok(Scale::new(rounded as u32))
    }

    pub const fn exp(self) -> u32 {
        self.exp
    }

    pub fn value(self) -> f64 {
        (-(self.exp as f64)).exp2()
    }

    /// `δ^p` computed as `2^(-exp·p)`.
    pub fn pow(self, p: f64) -> f64 {
        (-(self.exp as f64) * p).exp2()
    }

    pub fn is_finer_than(self, other: Scale) -> bool {
        self.exp > other.exp
    }

    pub(crate) fn check_supported(self) -> Result<()> {
        if self.exp > MAX_SCALE_EXP {
            Err(Error::ScaleOutOfRange {
                exp: self.exp,
                max: MAX_SCALE_EXP,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^-{}", self.exp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

/// An axis-aligned square frame `[origin, origin + side]²` mapped affinely
/// onto `[0, 1]²` for dyadic indexing. The closed upper edge is folded into
/// the last cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub origin: Point2,
    pub side: f64,
    pub name: &'static str,
}

impl Window {
    pub const AMBIENT: Window = Window {
        origin: Point2::new(-2.0, -2.0),
        side: 4.0,
        name: "ambient [-2,2]^2",
    };
    pub const UNIT: Window = Window {
        origin: Point2::new(0.0, 0.0),
        side: 1.0,
        name: "unit [0,1]^2",
    };

    pub fn contains(&self, p: Point2) -> bool {
        let (u, v) = self.normalize(p);
        (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)
    }

    pub fn normalize(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.origin.x) / self.side,
            (p.y - self.origin.y) / self.side,
        )
    }

    /// Index of the depth-`depth` cell containing `p`.
    pub fn cell_index(&self, p: Point2, depth: u32) -> Result<(u64, u64)> {
        if !self.contains(p) {
            return Err(Error::OutsideWindow {
                x: p.x,
                y: p.y,
                window: self.name,
            });
        }
        let (u, v) = self.normalize(p);
        let n = (depth as f64).exp2();
        let last = (1u64 << depth) - 1;
        let ix = ((u * n).floor() as u64).min(last);
        let iy = ((v * n).floor() as u64).min(last);
        Ok((ix, iy))
    }

    /// Side length, in ambient units, of a depth-`depth` cell.
    pub fn cell_side(&self, depth: u32) -> f64 {
        self.side * (-(depth as f64)).exp2()
    }

    /// Depth at which this window's cells have side `r`, if `r` is one of
    /// its dyadic sides.
    pub fn depth_for(&self, r: Scale) -> Option<u32> {
        let k = self.side.log2() + r.exp() as f64;
        (k >= 0.0 && k.fract() == 0.0).then_some(k as u32)
    }
}

/// A finite δ-separated planar point set tagged with its scale.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point2>,
    scale: Scale,
}

impl PointSet {
    /// Validates finiteness, non-emptiness, window membership and
    /// δ-separation.
    pub fn new(points: Vec<Point2>, scale: Scale) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point set"));
        }
        scale.check_supported()?;
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if !Window::AMBIENT.contains(*p) {
                return Err(Error::OutsideWindow {
                    x: p.x,
                    y: p.y,
                    window: Window::AMBIENT.name,
                });
            }
        }
        if let Some((first, second, dist)) = closest_violation(&points, scale.value()) {
            return Err(Error::NotSeparated {
                first,
                second,
                dist,
                delta: scale.value(),
            });
        }
        Ok(PointSet { points, scale })
    }

    /// The explicitly empty set at a scale.
    pub fn empty(scale: Scale) -> Self {
        PointSet {
            points: Vec::new(),
            scale,
        }
    }

    /// Greedy maximal δ-separated subset, scanning in input order.
    pub fn separated_subset(points: &[Point2], scale: Scale) -> Result<Self> {
        let delta = scale.value();
        let min_dist = delta * (1.0 - SEPARATION_TOL);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut kept: Vec<Point2> = Vec::new();
        for p in points {
            let key = grid_key(*p, delta);
            let clash = neighbours(key).any(|k| {
                grid.get(&k)
                    .is_some_and(|ids| ids.iter().any(|&i| kept[i].dist(*p) < min_dist))
            });
            if !clash {
                grid.entry(key).or_default().push(kept.len());
                kept.push(*p);
            }
        }
        if kept.is_empty() {
            return Ok(PointSet::empty(scale));
        }
        PointSet::new(kept, scale)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Subset by index; the result inherits separation.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        PointSet {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            scale: self.scale,
        }
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }

    /// Minimum distance from `p` to the set (infinite when empty).
    pub fn dist_to(&self, p: Point2) -> f64 {
        self.points
            .iter()
            .map(|q| q.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// `dist_to` for many query points, through a k-d tree.
    pub fn dists_to(&self, queries: &[Point2]) -> Vec<f64> {
        let coords: Vec<[f64; 4]> = self.points.iter().map(|p| [p.x, p.y, 0.0, 0.0]).collect();
        let tree = crate::spatial::KdTree::new(&coords, crate::spatial::MetricKind::Plane);
        queries
            .par_iter()
            .map(|q| tree.nearest_dist(&[q.x, q.y, 0.0, 0.0]))
            .collect()
    }
}

fn grid_key(p: Point2, cell: f64) -> (i64, i64) {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
}

fn neighbours((i, j): (i64, i64)) -> impl Iterator<Item = (i64, i64)> {
    (-1..=1).flat_map(move |di| (-1..=1).map(move |dj| (i + di, j + dj)))
}

fn closest_violation(points: &[Point2], delta: f64) -> Option<(usize, usize, f64)> {
    let min_dist = delta * (1.0 - SEPARATION_TOL);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let key = grid_key(*p, delta);
        for k in neighbours(key) {
            if let Some(ids) = grid.get(&k) {
                for &j in ids {
                    let d = points[j].dist(*p);
                    if d < min_dist {
                        return Some((j, i, d));
                    }
                }
            }
        }
        grid.entry(key).or_default().push(i);
    }
    None
}

/// An affine line stored as angle and signed offset: the set
/// `{p : p·n = offset}` with direction `(cos θ, sin θ)` and normal
/// `n = (-sin θ, cos θ)`, `θ ∈ [0, π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    theta: f64,
    offset: f64,
}

impl Line {
    /// Canonicalizes `theta` into `[0, π)`; a shift by an odd multiple of
    /// `π` flips the normal, so the offset changes sign with it.
    pub fn new(theta: f64, offset: f64) -> Self {
        let pi = std::f64::consts::PI;
        let turns = (theta / pi).floor();
        let mut t = theta - turns * pi;
        let mut a = offset;
        if (turns as i64).rem_euclid(2) == 1 {
            a = -a;
        }
        if t >= pi {
            t -= pi;
            a = -a;
        }
        if t < 0.0 {
            t = 0.0;
        }
        Line {
            theta: t,
            offset: a,
        }
    }

    /// The line through `p` with direction angle `theta`.
    pub fn through(p: Point2, theta: f64) -> Self {
        let n = Point2::new(-theta.sin(), theta.cos());
        Line::new(theta, p.dot(n))
    }

    pub fn through_points(p: Point2, q: Point2) -> Self {
        let d = q - p;
        Line::through(p, d.y.atan2(d.x))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn direction(&self) -> Point2 {
        Point2::new(self.theta.cos(), self.theta.sin())
    }

    pub fn normal(&self) -> Point2 {
        Point2::new(-self.theta.sin(), self.theta.cos())
    }

    /// The foot of the perpendicular from the origin, `{a} = L^⊥ ∩ ℓ`.
    pub fn foot(&self) -> Point2 {
        self.normal() * self.offset
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        (p.dot(self.normal()) - self.offset).abs()
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.offset.is_finite()
    }
}

/// Operator norm of the difference of the projections onto the two
/// direction subspaces, plus the distance between the feet of the
/// perpendiculars from the origin.
pub fn line_metric(l1: &Line, l2: &Line) -> f64 {
    let (u1, u2) = (l1.direction(), l2.direction());
    let m11 = u1.x * u1.x - u2.x * u2.x;
    let m12 = u1.x * u1.y - u2.x * u2.y;
    let m22 = u1.y * u1.y - u2.y * u2.y;
    projection_gap(m11, m12, m22) + l1.foot().dist(l2.foot())
}

/// Largest absolute eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
fn projection_gap(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    (mean + radius).abs().max((mean - radius).abs())
}

/// The closed `width`-neighbourhood of a line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tube {
    pub line: Line,
    width: f64,
}

impl Tube {
    pub fn new(line: Line, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::param(format!("tube width must be positive, got {width}")));
        }
        if !line.is_finite() {
            return Err(Error::param("tube line must be finite"));
        }
        Ok(Tube { line, width })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn contains(&self, p: Point2) -> bool {
        tube_contains(self, p)
    }
}

pub fn tube_contains(tube: &Tube, p: Point2) -> bool {
    tube.line.distance_to(p) <= tube.width
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TubeSet {
    pub tubes: Vec<Tube>,
}

impl TubeSet {
    pub fn new(tubes: Vec<Tube>) -> Self {
        TubeSet { tubes }
    }

    pub fn len(&self) -> usize {
        self.tubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tubes.is_empty()
    }

    pub fn lines(&self) -> Vec<Line> {
        self.tubes.iter().map(|t| t.line).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tube> {
        self.tubes.iter()
    }
}

/// A dyadic arc of `S¹ ≅ [0, 1)` (`iy == None`) or a dyadic square of
/// `[0, 1)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicCell {
    pub depth: u32,
    pub ix: u64,
    pub iy: Option<u64>,
}

impl DyadicCell {
    pub fn arc(depth: u32, index: u64) -> Result<Self> {
        Self::check(depth, index)?;
        Ok(DyadicCell {
            depth,
            ix: index,
            iy: None,
        })
    }

    pub fn square(depth: u32, ix: u64, iy: u64) -> Result<Self> {
        Self::check(depth, ix)?;
        Self::check(depth, iy)?;
        Ok(DyadicCell {
            depth,
            ix,
            iy: Some(iy),
        })
    }

    fn check(depth: u32, index: u64) -> Result<()> {
        if depth > 63 {
            return Err(Error::ScaleOutOfRange { exp: depth, max: 63 });
        }
        if index >= 1u64 << depth {
            return Err(Error::param(format!(
                "cell index {index} out of range at depth {depth}"
            )));
        }
        Ok(())
    }

    /// Side length in normalized units.
    pub fn side(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }
}

/// Number of ambient dyadic cells of side `r` meeting `points`.
pub fn covering_number(points: &[Point2], r: Scale) -> Result<usize> {
    r.check_supported()?;
    let depth = Window::AMBIENT
        .depth_for(r)
        .ok_or(Error::ScaleOutOfRange {
            exp: r.exp(),
            max: MAX_SCALE_EXP,
        })?;
    let mut cells = HashSet::with_capacity(points.len());
    for p in points {
        cells.insert(Window::AMBIENT.cell_index(*p, depth)?);
    }
    Ok(cells.len())
}

/// The depth-`depth` cells of `window` containing at least one point,
/// sorted lexicographically by `(ix, iy)`.
pub fn dyadic_cells_meeting(
    points: &[Point2],
    depth: u32,
    window: &Window,
) -> Result<Vec<DyadicCell>> {
    if depth > 63 {
        return Err(Error::ScaleOutOfRange { exp: depth, max: 63 });
    }
    let mut cells = Vec::with_capacity(points.len());
    for p in points {
        let (ix, iy) = window.cell_index(*p, depth)?;
        cells.push(DyadicCell {
            depth,
            ix,
            iy: Some(iy),
        });
    }
    cells.sort_unstable();
    cells.dedup();
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn batch_distances_match_scan() {
        let p = PointSet::new(grid(6, 0.1), Scale::new(4)).unwrap();
        let qs = [Point2::new(-1.0, 0.3), Point2::new(0.25, 0.25), Point2::new(0.2, 0.1)];
        for (q, d) in qs.iter().zip(p.dists_to(&qs)) {
            assert_eq!(d, p.dist_to(*q));
        }
    }

    fn grid(n: u32, spacing: f64) -> Vec<Point2> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                v.push(Point2::new(i as f64 * spacing, j as f64 * spacing));
            }
        }
        v
    }

    #[test]
    fn covering_examples() {
        let a = [
            Point2::new(0.0, 0.0),
            Point2::new(0.25, 0.0),
            Point2::new(0.5, 0.0),
        ];
        assert_eq!(covering_number(&a, Scale::new(2)).unwrap(), 3);
        for m in 0..20 {
            assert_eq!(covering_number(&a[..1], Scale::new(m)).unwrap(), 1);
        }
        let g = grid(16, 1.0 / 16.0);
        assert_eq!(covering_number(&g, Scale::new(4)).unwrap(), 256);
    }

    #[test]
    fn covering_rejects_unsupported_scale() {
        let a = [Point2::new(0.0, 0.0)];
        assert!(matches!(
            covering_number(&a, Scale::new(MAX_SCALE_EXP + 1)),
            Err(Error::ScaleOutOfRange { .. })
        ));
    }

    #[test]
    fn line_metric_examples() {
        let x_axis = Line::new(0.0, 0.0);
        let y_eq_1 = Line::new(0.0, 1.0);
        let y_axis = Line::new(PI / 2.0, 0.0);
        assert_eq!(line_metric(&x_axis, &x_axis), 0.0);
        assert!((line_metric(&x_axis, &y_eq_1) - 1.0).abs() < 1e-15);
        // diag(1, -1) has operator norm 1
        assert!((line_metric(&x_axis, &y_axis) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_canonicalization_keeps_the_point_set() {
        let p = Point2::new(0.3, -0.7);
        for theta in [-3.0 * PI + 0.2, -0.4, 0.0, PI, 2.5 * PI, 7.1] {
            let l = Line::through(p, theta);
            assert!((0.0..PI).contains(&l.theta()));
            assert!(l.distance_to(p) < 1e-12);
            let q = p + Point2::new(theta.cos(), theta.sin());
            assert!(l.distance_to(q) < 1e-12);
        }
    }

    #[test]
    fn metric_is_continuous_across_angle_wrap() {
        let a = Line::through(Point2::new(0.0, 1.0), 1e-6);
        let b = Line::through(Point2::new(0.0, 1.0), -1e-6);
        assert!(line_metric(&a, &b) < 1e-5);
    }

    #[test]
    fn tube_examples() {
        let t = Tube::new(Line::new(0.0, 0.0), 0.1).unwrap();
        assert!(tube_contains(&t, Point2::new(0.5, 0.05)));
        assert!(tube_contains(&t, Point2::new(0.5, 0.1)));
        assert!(!tube_contains(&t, Point2::new(0.5, 0.2)));
        assert!(Tube::new(Line::new(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn dyadic_cells_examples() {
        let c = dyadic_cells_meeting(&[Point2::new(0.1, 0.1)], 1, &Window::UNIT).unwrap();
        assert_eq!(c, vec![DyadicCell::square(1, 0, 0).unwrap()]);
        let c = dyadic_cells_meeting(
            &[Point2::new(0.9, 0.9), Point2::new(0.1, 0.1)],
            1,
            &Window::UNIT,
        )
        .unwrap();
        assert_eq!(
            c,
            vec![
                DyadicCell::square(1, 0, 0).unwrap(),
                DyadicCell::square(1, 1, 1).unwrap()
            ]
        );
        let c = dyadic_cells_meeting(&grid(4, 0.25), 2, &Window::UNIT).unwrap();
        assert_eq!(c.len(), 16);
        assert!(dyadic_cells_meeting(&[Point2::new(1.5, 0.0)], 1, &Window::UNIT).is_err());
    }

    #[test]
    fn point_set_validation() {
        let s = Scale::new(4);
        assert!(PointSet::new(vec![], s).is_err());
        assert!(PointSet::new(vec![Point2::new(0.0, 0.0), Point2::new(0.01, 0.0)], s).is_err());
        assert!(PointSet::new(vec![Point2::new(f64::NAN, 0.0)], s).is_err());
        assert!(PointSet::new(vec![Point2::new(3.0, 0.0)], s).is_err());
        let ok = PointSet::new(grid(16, 1.0 / 16.0), s).unwrap();
        assert_eq!(ok.len(), 256);
        assert!(PointSet::empty(s).is_empty());
        let thin = PointSet::separated_subset(&grid(32, 1.0 / 32.0), s).unwrap();
        assert!(thin.len() >= 256 && thin.len() < 1024);
    }

    #[test]
    fn grid_aligned_covering_equals_cardinality() {
        for m in 1..6u32 {
            let n = 1u32 << m;
            let g = grid(n, 1.0 / n as f64);
            assert_eq!(covering_number(&g, Scale::new(m)).unwrap(), g.len());
        }
    }

    fn arb_line() -> impl Strategy<Value = Line> {
        (-10.0f64..10.0, -3.0f64..3.0).prop_map(|(t, a)| Line::new(t, a))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn line_metric_triangle(a in arb_line(), b in arb_line(), c in arb_line()) {
            let ab = line_metric(&a, &b);
            let bc = line_metric(&b, &c);
            let ac = line_metric(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert!((ab - line_metric(&b, &a)).abs() < 1e-12);
        }

        #[test]
        fn tube_contains_matches_two_point_distance(
            px in -2.0f64..2.0, py in -2.0f64..2.0,
            qx in -2.0f64..2.0, qy in -2.0f64..2.0,
            theta in 0.0f64..6.3, w in 1e-3f64..1.0,
        ) {
            let p = Point2::new(px, py);
            let tube = Tube::new(Line::through(p, theta), w).unwrap();
            // independent route: |cross(b - a, q - a)| / |b - a| with two points on the axis
            let a = p;
            let b = p + Point2::new(theta.cos(), theta.sin());
            let q = Point2::new(qx, qy);
            let cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
            let d = cross.abs() / a.dist(b);
            if (d - w).abs() > 1e-12 {
                prop_assert_eq!(tube_contains(&tube, q), d <= w);
            }
        }

        #[test]
        fn covering_nonincreasing_and_bounded(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..60)
        ) {
            let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
            let mut prev = usize::MAX;
            for m in (0..12).rev() {
                let c = covering_number(&pts, Scale::new(m)).unwrap();
                prop_assert!(c <= pts.len());
                prop_assert!(c <= prev);
                prev = c;
            }
        }
    }
}
