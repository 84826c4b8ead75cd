//! Static k-d tree answering closed-ball counting and reporting queries
//! for two metrics: the plane, and the line space embedded as a pair of
//! planar coordinates whose norms add.

/// How coordinates `[a, b, c, d]` are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// Euclidean on `(a, b)`; `c, d` ignored.
    Plane,
    /// `|(a, b) - (a', b')| + |(c, d) - (c', d')|`.
    Split,
}

impl MetricKind {
    fn dims(self) -> usize {
        match self {
            MetricKind::Plane => 2,
            MetricKind::Split => 4,
        }
    }

    pub fn dist(self, p: &[f64; 4], q: &[f64; 4]) -> f64 {
        let norm = |a: f64, b: f64| (a * a + b * b).sqrt();
        let first = norm(p[0] - q[0], p[1] - q[1]);
        match self {
            MetricKind::Plane => first,
            MetricKind::Split => first + norm(p[2] - q[2], p[3] - q[3]),
        }
    }
}

/// Closed-ball membership shared by every counting routine.
#[inline]
pub fn in_ball(d: f64, r: f64) -> bool {
    d <= r
}

const LEAF: usize = 8;
const BOX_SLACK: f64 = 1e-12;

struct Node {
    lo: [f64; 4],
    hi: [f64; 4],
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
    /// Smallest original index stored below this node.
    min_id: usize,
}

pub struct KdTree {
    kind: MetricKind,
    coords: Vec<[f64; 4]>,
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(coords: &[[f64; 4]], kind: MetricKind) -> Self {
        let mut tree = KdTree {
            kind,
            coords: Vec::with_capacity(coords.len()),
            ids: (0..coords.len()).collect(),
            nodes: Vec::new(),
        };
        let mut ids = std::mem::take(&mut tree.ids);
        if !coords.is_empty() {
            tree.build(coords, &mut ids, 0, coords.len());
        }
        tree.coords = ids.iter().map(|&i| coords[i]).collect();
        tree.ids = ids;
        tree
    }

    fn build(&mut self, coords: &[[f64; 4]], ids: &mut [usize], start: usize, end: usize) -> usize {
        let dims = self.kind.dims();
        let mut lo = [0.0; 4];
        let mut hi = [0.0; 4];
        for d in 0..dims {
            lo[d] = f64::INFINITY;
            hi[d] = f64::NEG_INFINITY;
        }
        for &i in &ids[start..end] {
            for d in 0..dims {
                lo[d] = lo[d].min(coords[i][d]);
                hi[d] = hi[d].max(coords[i][d]);
            }
        }
        let node = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            start,
            end,
            children: None,
            min_id: ids[start..end].iter().copied().min().unwrap_or(usize::MAX),
        });
        if end - start > LEAF {
            let axis = (0..dims)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            if hi[axis] > lo[axis] {
                let mid = (start + end) / 2;
                ids[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                    coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b))
                });
                let left = self.build(coords, ids, start, mid);
                let right = self.build(coords, ids, mid, end);
                self.nodes[node].children = Some((left, right));
            }
        }
        node
    }

    fn box_bounds(&self, node: &Node, c: &[f64; 4]) -> (f64, f64) {
        let pair = |a: usize| {
            let mut near = [0.0; 2];
            let mut far = [0.0; 2];
            for k in 0..2 {
                let d = a + k;
                near[k] = (node.lo[d] - c[d]).max(c[d] - node.hi[d]).max(0.0);
                far[k] = (c[d] - node.lo[d]).abs().max((node.hi[d] - c[d]).abs());
            }
            (
                (near[0] * near[0] + near[1] * near[1]).sqrt(),
                (far[0] * far[0] + far[1] * far[1]).sqrt(),
            )
        };
        let (n0, f0) = pair(0);
        match self.kind {
            MetricKind::Plane => (n0, f0),
            MetricKind::Split => {
                let (n1, f1) = pair(2);
                (n0 + n1, f0 + f1)
            }
        }
    }

    /// Centre of a node's box and the largest distance from it to any
    /// point of the box.
    fn node_ball(&self, node: &Node) -> ([f64; 4], f64) {
        let mut c = [0.0; 4];
        let mut h = [0.0; 4];
        for d in 0..self.kind.dims() {
            c[d] = 0.5 * (node.lo[d] + node.hi[d]);
            h[d] = 0.5 * (node.hi[d] - node.lo[d]);
        }
        let rho = match self.kind {
            MetricKind::Plane => (h[0] * h[0] + h[1] * h[1]).sqrt(),
            MetricKind::Split => (h[0] * h[0] + h[1] * h[1]).sqrt() + (h[2] * h[2] + h[3] * h[3]).sqrt(),
        };
        (c, rho)
    }

    /// Largest `count(x, r)` over the stored items `x`, and the smallest
    /// original index attaining it.
    #[cfg(test)]
    pub fn max_count(&self, r: f64) -> Option<(usize, usize)> {
        self.max_count_over(self, r)
    }

    /// Largest `count(x, r)` over the items `x` of `centers`, with the
    /// smallest index of `centers` attaining it.
    #[cfg(test)]
    pub fn max_count_over(&self, centers: &KdTree, r: f64) -> Option<(usize, usize)> {
        let m = self.max_value_over(centers, r)?;
        Some((m, self.first_reaching(centers, r, m).expect("maximum is attained")))
    }

    /// Upper bound on `count(x, r)` for every centre `x` in node `n` of
    /// `centers`: each such ball lies in the `(r + ρ)`-ball about the
    /// node's box centre.
    fn node_bound(&self, centers: &KdTree, n: usize, r: f64) -> usize {
        let (c, rho) = centers.node_ball(&centers.nodes[n]);
        self.count(&c, (r + rho) * (1.0 + 1e-9) + 1e-12)
    }

    /// Largest `count(x, r)` over the items of `centers`, by best-first
    /// branch and bound.
    pub fn max_value_over(&self, centers: &KdTree, r: f64) -> Option<usize> {
        use std::collections::BinaryHeap;
        if centers.nodes.is_empty() {
            return None;
        }
        let mut best = 0;
        let mut heap = BinaryHeap::new();
        heap.push((self.node_bound(centers, 0, r), 0usize));
        while let Some((ub, n)) = heap.pop() {
            if ub <= best {
                break;
            }
            let node = &centers.nodes[n];
            match node.children {
                Some((a, b)) => {
                    for child in [a, b] {
                        let ub = self.node_bound(centers, child, r);
                        if ub > best {
                            heap.push((ub, child));
                        }
                    }
                }
                None => {
                    for k in node.start..node.end {
                        best = best.max(self.count(&centers.coords[k], r));
                    }
                }
            }
        }
        Some(best)
    }

    /// Smallest index of `centers` whose `r`-ball holds at least `target`
    /// items.
    pub fn first_reaching(&self, centers: &KdTree, r: f64, target: usize) -> Option<usize> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        if centers.nodes.is_empty() {
            return None;
        }
        let mut found: Option<usize> = None;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((centers.nodes[0].min_id, 0usize)));
        while let Some(Reverse((min_id, n))) = heap.pop() {
            if found.is_some_and(|f| min_id >= f) {
                break;
            }
            if self.node_bound(centers, n, r) < target {
                continue;
            }
            let node = &centers.nodes[n];
            match node.children {
                Some((a, b)) => {
                    heap.push(Reverse((centers.nodes[a].min_id, a)));
                    heap.push(Reverse((centers.nodes[b].min_id, b)));
                }
                None => {
                    for k in node.start..node.end {
                        let id = centers.ids[k];
                        if found.is_none_or(|f| id < f) && self.count(&centers.coords[k], r) >= target {
                            found = Some(id);
                        }
                    }
                }
            }
        }
        found
    }

    /// Distance from `c` to the nearest stored item; infinite when empty.
    pub fn nearest_dist(&self, c: &[f64; 4]) -> f64 {
        let mut best = f64::INFINITY;
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if self.box_bounds(node, c).0 > best {
                continue;
            }
            match node.children {
                Some((a, b)) => {
                    // nearer child last so it is popped first
                    let (da, db) = (self.box_bounds(&self.nodes[a], c).0, self.box_bounds(&self.nodes[b], c).0);
                    if da < db {
                        stack.push(b);
                        stack.push(a);
                    } else {
                        stack.push(a);
                        stack.push(b);
                    }
                }
                None => {
                    for p in &self.coords[node.start..node.end] {
                        best = best.min(self.kind.dist(p, c));
                    }
                }
            }
        }
        best
    }

    /// Number of stored items within closed distance `r` of `c`.
    pub fn count(&self, c: &[f64; 4], r: f64) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let mut total = 0;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let (near, far) = self.box_bounds(node, c);
            if near > r * (1.0 + BOX_SLACK) {
                continue;
            }
            if far < r * (1.0 - BOX_SLACK) {
                total += node.end - node.start;
                continue;
            }
            match node.children {
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => {
                    total += self.coords[node.start..node.end]
                        .iter()
                        .filter(|p| in_ball(self.kind.dist(p, c), r))
                        .count();
                }
            }
        }
        total
    }

    /// Original indices of the items within closed distance `r` of `c`,
    /// sorted ascending.
    pub fn report(&self, c: &[f64; 4], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let (near, far) = self.box_bounds(node, c);
            if near > r * (1.0 + BOX_SLACK) {
                continue;
            }
            if far < r * (1.0 - BOX_SLACK) {
                out.extend_from_slice(&self.ids[node.start..node.end]);
                continue;
            }
            match node.children {
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => {
                    for k in node.start..node.end {
                        if in_ball(self.kind.dist(&self.coords[k], c), r) {
                            out.push(self.ids[k]);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(coords: &[[f64; 4]], kind: MetricKind, c: &[f64; 4], r: f64) -> Vec<usize> {
        (0..coords.len())
            .filter(|&i| in_ball(kind.dist(&coords[i], c), r))
            .collect()
    }

    proptest! {
        #[test]
        fn tree_matches_brute_force(
            pts in proptest::collection::vec(prop::array::uniform4(-2.0f64..2.0), 0..200),
            c in prop::array::uniform4(-2.0f64..2.0),
            r in 0.0f64..3.0,
            split in any::<bool>(),
        ) {
            let kind = if split { MetricKind::Split } else { MetricKind::Plane };
            let tree = KdTree::new(&pts, kind);
            let expected = brute(&pts, kind, &c, r);
            prop_assert_eq!(tree.count(&c, r), expected.len());
            prop_assert_eq!(tree.report(&c, r), expected);
        }
    }

    proptest! {
        #[test]
        fn max_count_matches_brute_force(
            pts in proptest::collection::vec(prop::array::uniform4(-2.0f64..2.0), 1..150),
            r in 0.0f64..2.0,
            split in any::<bool>(),
        ) {
            let kind = if split { MetricKind::Split } else { MetricKind::Plane };
            let tree = KdTree::new(&pts, kind);
            let mut best = (0, usize::MAX);
            for (i, p) in pts.iter().enumerate() {
                let c = brute(&pts, kind, p, r).len();
                if c > best.0 {
                    best = (c, i);
                }
            }
            prop_assert_eq!(tree.max_count(r), Some(best));
        }

        #[test]
        fn nearest_matches_brute_force(
            pts in proptest::collection::vec(prop::array::uniform4(-2.0f64..2.0), 0..120),
            c in prop::array::uniform4(-3.0f64..3.0),
            split in any::<bool>(),
        ) {
            let kind = if split { MetricKind::Split } else { MetricKind::Plane };
            let tree = KdTree::new(&pts, kind);
            let want = pts.iter().map(|p| kind.dist(p, &c)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(tree.nearest_dist(&c), want);
        }

        #[test]
        fn max_count_over_other_centres(
            pts in proptest::collection::vec(prop::array::uniform4(-2.0f64..2.0), 1..100),
            cs in proptest::collection::vec(prop::array::uniform4(-2.0f64..2.0), 1..100),
            r in 0.0f64..2.0,
        ) {
            let tree = KdTree::new(&pts, MetricKind::Plane);
            let centers = KdTree::new(&cs, MetricKind::Plane);
            let mut best = (0, usize::MAX);
            for (i, c) in cs.iter().enumerate() {
                let n = brute(&pts, MetricKind::Plane, c, r).len();
                if best.1 == usize::MAX || n > best.0 {
                    best = (n, i);
                }
            }
            prop_assert_eq!(tree.max_count_over(&centers, r), Some(best));
        }
    }

    #[test]
    fn boundary_points_are_included() {
        let pts: Vec<[f64; 4]> = (0..64)
            .map(|i| [(i % 8) as f64 / 8.0, (i / 8) as f64 / 8.0, 0.0, 0.0])
            .collect();
        let tree = KdTree::new(&pts, MetricKind::Plane);
        // centre plus its four lattice neighbours at distance exactly 1/8
        assert_eq!(tree.count(&[0.5, 0.5, 0.0, 0.0], 0.125), 5);
    }
}
