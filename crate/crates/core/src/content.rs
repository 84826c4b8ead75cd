//! Truncated dyadic content: the cheapest cover by dyadic cells of side at
//! least δ, each cell of side `ℓ` costing `ℓ^σ`, computed bottom-up over
//! the dyadic tree.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Scale, Window};

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= 2.0 {
        Ok(())
    } else {
        Err(Error::param(format!("sigma must lie in (0, 2], got {sigma}")))
    }
}

/// Content of a planar set over the ambient quadtree (root side 4, leaves of
/// side δ).
pub(crate) fn points_content(points: &[Point2], sigma: f64, scale: Scale) -> Result<f64> {
    check_sigma(sigma)?;
    scale.check_supported()?;
    if points.is_empty() {
        return Ok(0.0);
    }
    let leaf = Window::AMBIENT
        .depth_for(scale)
        .ok_or_else(|| Error::param("scale coarser than the ambient window"))?;
    let mut level: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let leaf_cost = Window::AMBIENT.cell_side(leaf).powf(sigma);
    for p in points {
        level.insert(Window::AMBIENT.cell_index(*p, leaf)?, leaf_cost);
    }
    for depth in (0..leaf).rev() {
        let own = Window::AMBIENT.cell_side(depth).powf(sigma);
        let mut parents: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for ((ix, iy), cost) in level {
            *parents.entry((ix >> 1, iy >> 1)).or_default() += cost;
        }
        level = parents
            .into_iter()
            .map(|(k, children)| (k, children.min(own)))
            .collect();
    }
    Ok(level.into_values().sum())
}

/// Content of a union of dyadic arcs of `[0, 1)` at `depth`, truncated at
/// arcs of length δ. Arcs coarser than δ are full nodes; their best cover
/// is a single level, at one of the two extreme depths.
pub(crate) fn arcs_content(indices: &[u64], depth: u32, sigma: f64, scale: Scale) -> Result<f64> {
    check_sigma(sigma)?;
    if indices.is_empty() {
        return Ok(0.0);
    }
    let trunc = scale.exp();
    let full_cost = |d: u32| -> f64 {
        // one arc at depth d covered at any depth j in [d, trunc]
        let level = |j: u32| ((j - d) as f64 - j as f64 * sigma).exp2();
        if d >= trunc {
            level(d)
        } else {
            level(d).min(level(trunc))
        }
    };
    let (mut level, mut d): (BTreeMap<u64, f64>, u32) = if depth > trunc {
        let shift = depth - trunc;
        let cells: BTreeMap<u64, f64> = indices
            .iter()
            .map(|&i| (i >> shift, full_cost(trunc)))
            .collect();
        (cells, trunc)
    } else {
        (indices.iter().map(|&i| (i, full_cost(depth))).collect(), depth)
    };
    while d > 0 {
        let own = (-((d - 1) as f64) * sigma).exp2();
        let mut parents: BTreeMap<u64, f64> = BTreeMap::new();
        for (i, cost) in level {
            *parents.entry(i >> 1).or_default() += cost;
        }
        level = parents
            .into_iter()
            .map(|(k, children)| (k, children.min(own)))
            .collect();
        d -= 1;
    }
    Ok(level.into_values().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf_costs_delta_power() {
        let s = Scale::new(6);
        let v = points_content(&[Point2::new(0.1, 0.2)], 1.3, s).unwrap();
        assert!((v - s.pow(1.3)).abs() < 1e-15);
        let v = arcs_content(&[5], 6, 0.7, s).unwrap();
        assert!((v - s.pow(0.7)).abs() < 1e-15);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(points_content(&[], 1.0, Scale::new(3)).unwrap(), 0.0);
        assert_eq!(arcs_content(&[], 3, 1.0, Scale::new(3)).unwrap(), 0.0);
    }

    #[test]
    fn full_circle_at_unit_exponent() {
        let all: Vec<u64> = (0..64).collect();
        let v = arcs_content(&all, 6, 1.0, Scale::new(6)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // arcs coarser than δ, σ > 1: the finest level is cheaper than the root
        let v = arcs_content(&[0], 0, 1.5, Scale::new(4)).unwrap();
        assert!((v - 16.0 * Scale::new(4).pow(1.5)).abs() < 1e-12);
    }

    #[test]
    fn grid_content_is_unit() {
        let mut pts = Vec::new();
        for i in 0..16 {
            for j in 0..16 {
                pts.push(Point2::new(i as f64 / 16.0, j as f64 / 16.0));
            }
        }
        let v = points_content(&pts, 2.0, Scale::new(4)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
