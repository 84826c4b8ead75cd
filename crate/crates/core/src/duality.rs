//! Point-line duality in the slope-intercept chart:
//! `(a, b) ↦ {y = ax + b}` and `{y = cx + d} ↦ (-c, d)`.

use crate::error::{Error, Result};
use crate::geometry::{line_metric, Line, Point2, PointSet, Tube, TubeSet};

/// Absolute tolerance on the defining linear equation.
pub const INCIDENCE_TOL: f64 = 1e-9;

/// `|cos θ|` below this is treated as vertical.
const VERTICAL_TOL: f64 = 1e-12;

/// `{y = slope·x + intercept}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeInterceptLine {
    pub slope: f64,
    pub intercept: f64,
}

impl SlopeInterceptLine {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        if !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(SlopeInterceptLine { slope, intercept })
    }

    pub fn to_line(self) -> Line {
        let theta = self.slope.atan();
        // (0, d) lies on the line; its normal component is d·cos θ
        Line::new(theta, self.intercept * theta.cos())
    }

    pub fn from_line(line: &Line) -> Result<Self> {
        let (sin, cos) = line.theta().sin_cos();
        if cos.abs() < VERTICAL_TOL {
            return Err(Error::OutsideChart { theta: line.theta() });
        }
        Ok(SlopeInterceptLine {
            slope: sin / cos,
            intercept: line.offset() / cos,
        })
    }

    /// Signed vertical residual `y - (cx + d)`.
    pub fn residual(&self, p: Point2) -> f64 {
        p.y - self.slope.mul_add(p.x, self.intercept)
    }
}

pub fn dualize_point(p: Point2) -> SlopeInterceptLine {
    SlopeInterceptLine {
        slope: p.x,
        intercept: p.y,
    }
}

pub fn dualize_line(l: &SlopeInterceptLine) -> Result<Point2> {
    if !l.slope.is_finite() || !l.intercept.is_finite() {
        return Err(Error::OutsideChart { theta: std::f64::consts::FRAC_PI_2 });
    }
    Ok(Point2::new(-l.slope, l.intercept))
}

/// `(p ∈ ℓ, D*(ℓ) ∈ D(p))`, each tested on its own equation.
pub fn check_duality_incidence(p: Point2, l: &SlopeInterceptLine) -> Result<(bool, bool)> {
    let q = dualize_line(l)?;
    let lhs = l.residual(p).abs() <= INCIDENCE_TOL;
    let rhs = dualize_point(p).residual(q).abs() <= INCIDENCE_TOL;
    Ok((lhs, rhs))
}

/// Extreme values of `line_metric(D(p), D(q)) / |p - q|` over the sample.
/// Coincident pairs are skipped; an empty result is an error.
pub fn chart_metric_distortion(pairs: &[(Point2, Point2)]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (i, (p, q)) in pairs.iter().enumerate() {
        if !(p.is_finite() && q.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let d = p.dist(*q);
        if d == 0.0 {
            continue;
        }
        let r = line_metric(&dualize_point(*p).to_line(), &dualize_point(*q).to_line()) / d;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if lo.is_infinite() {
        return Err(Error::Empty("distortion sample"));
    }
    Ok((lo, hi))
}

/// Dual lines of a point set thickened to width `factor·δ`.
pub fn dual_tubes(points: &PointSet, factor: f64) -> Result<TubeSet> {
    let width = factor * points.scale().value();
    points
        .points()
        .iter()
        .map(|p| Tube::new(dualize_point(*p).to_line(), width))
        .collect::<Result<Vec<_>>>()
        .map(TubeSet::new)
}

/// Dual points of tube axes. Tubes whose axes coincide up to δ collapse to
/// a single point.
pub fn dual_points(tubes: &TubeSet, scale: crate::geometry::Scale) -> Result<PointSet> {
    let pts = tubes
        .iter()
        .map(|t| SlopeInterceptLine::from_line(&t.line).and_then(|l| dualize_line(&l)))
        .collect::<Result<Vec<_>>>()?;
    PointSet::separated_subset(&pts, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sil(c: f64, d: f64) -> SlopeInterceptLine {
        SlopeInterceptLine::new(c, d).unwrap()
    }

    #[test]
    fn point_and_line_examples() {
        assert_eq!(dualize_point(Point2::new(2.0, 3.0)), sil(2.0, 3.0));
        assert_eq!(dualize_point(Point2::new(0.0, 0.0)), sil(0.0, 0.0));
        assert_eq!(dualize_point(Point2::new(-1.0, 0.5)), sil(-1.0, 0.5));
        assert_eq!(dualize_line(&sil(2.0, 3.0)).unwrap(), Point2::new(-2.0, 3.0));
        assert_eq!(dualize_line(&sil(0.0, 0.0)).unwrap(), Point2::new(0.0, 0.0));
        assert_eq!(dualize_line(&sil(-1.0, 0.5)).unwrap(), Point2::new(1.0, 0.5));
    }

    #[test]
    fn vertical_lines_are_rejected() {
        let v = Line::new(std::f64::consts::FRAC_PI_2, 0.3);
        assert!(matches!(
            SlopeInterceptLine::from_line(&v),
            Err(Error::OutsideChart { .. })
        ));
    }

    #[test]
    fn incidence_examples() {
        assert_eq!(
            check_duality_incidence(Point2::new(1.0, 5.0), &sil(2.0, 3.0)).unwrap(),
            (true, true)
        );
        assert_eq!(
            check_duality_incidence(Point2::new(0.0, 0.0), &sil(0.0, 0.0)).unwrap(),
            (true, true)
        );
        // 0 vs 2+3 on the left; 3 vs (-2)(1)+0 on the right
        assert_eq!(
            check_duality_incidence(Point2::new(1.0, 0.0), &sil(2.0, 3.0)).unwrap(),
            (false, false)
        );
    }

    #[test]
    fn chart_round_trip() {
        for (c, d) in [(0.0, 0.0), (2.0, 3.0), (-1.0, 0.5), (0.25, -1.75)] {
            let back = SlopeInterceptLine::from_line(&sil(c, d).to_line()).unwrap();
            assert!((back.slope - c).abs() < 1e-12 && (back.intercept - d).abs() < 1e-12);
            let l = sil(c, d).to_line();
            for x in [-1.0, 0.0, 0.7] {
                assert!(l.distance_to(Point2::new(x, c * x + d)) < 1e-12);
            }
        }
    }

    #[test]
    fn grid_distortion_is_bounded() {
        let mut pairs = Vec::new();
        let g: Vec<Point2> = (0..=8)
            .flat_map(|i| (0..=8).map(move |j| Point2::new(i as f64 / 8.0, j as f64 / 8.0)))
            .collect();
        for p in &g {
            for q in &g {
                pairs.push((*p, *q));
            }
        }
        let (lo, hi) = chart_metric_distortion(&pairs).unwrap();
        assert!(lo >= 0.25 && hi <= 4.0, "{lo} {hi}");
    }

    #[test]
    fn random_distortion_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<(Point2, Point2)> = (0..1000)
            .map(|_| {
                (
                    Point2::new(rng.gen(), rng.gen()),
                    Point2::new(rng.gen(), rng.gen()),
                )
            })
            .collect();
        let (lo, hi) = chart_metric_distortion(&pairs).unwrap();
        assert!(lo > 0.0 && hi.is_finite());
        assert!(hi / lo < 16.0, "{lo} {hi}");
        assert!(chart_metric_distortion(&[(Point2::new(0.1, 0.1), Point2::new(0.1, 0.1))]).is_err());
    }

    #[test]
    fn incidence_agrees_on_many_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for k in 0..100_000 {
            let l = sil(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let a: f64 = rng.gen_range(-4.0..4.0);
            let p = match k % 3 {
                0 => Point2::new(a, l.slope * a + l.intercept),
                1 => Point2::new(a, l.slope * a + l.intercept + rng.gen_range(-2e-9..2e-9)),
                _ => Point2::new(a, rng.gen_range(-20.0..20.0)),
            };
            let (lhs, rhs) = check_duality_incidence(p, &l).unwrap();
            assert_eq!(lhs, rhs, "{p:?} {l:?}");
            hits += lhs as usize;
        }
        assert!(hits > 30_000);
    }

    #[test]
    fn dual_tubes_round_trip() {
        let s = crate::geometry::Scale::new(6);
        let p = PointSet::new(
            vec![Point2::new(0.1, 0.2), Point2::new(0.5, 0.9), Point2::new(0.8, 0.3)],
            s,
        )
        .unwrap();
        let t = dual_tubes(&p, 2.0).unwrap();
        assert!(t.iter().all(|x| (x.width() - 2.0 * s.value()).abs() < 1e-15));
        let back = dual_points(&t, s).unwrap();
        for (a, b) in back.points().iter().zip(p.points()) {
            assert!((a.x + b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn double_dual_flips_slope(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let q = dualize_line(&dualize_point(Point2::new(a, b))).unwrap();
            prop_assert_eq!(q, Point2::new(-a, b));
            let back = dualize_line(&dualize_point(q)).unwrap();
            prop_assert_eq!(back, Point2::new(a, b));
        }
    }
}
