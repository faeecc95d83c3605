//! Static 3-D kd-tree stored as an index permutation: the median of every
//! range `[lo, hi)` sits at `(lo + hi) / 2` and splits on `depth % 3`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Vector3;

#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Vector3<f64>>,
    order: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist_sq: f64,
    index: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }
}

impl KdTree {
    pub fn new(points: &[Vector3<f64>]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        build(points, &mut order, 0);
        Self {
            points: points.to_vec(),
            order,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    /// The `k` nearest points as `(index, squared distance)`, closest first.
    /// Ties break on the smaller index.
    pub fn nearest_k(&self, query: &Vector3<f64>, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search_k(query, k, 0, self.order.len(), 0, &mut heap);
        let mut out: Vec<_> = heap.into_iter().map(|c| (c.index, c.dist_sq)).collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    pub fn nearest(&self, query: &Vector3<f64>) -> Option<(usize, f64)> {
        self.nearest_k(query, 1).into_iter().next()
    }

    /// Indices of all points within `radius` (inclusive), in no particular order.
    pub fn within(&self, query: &Vector3<f64>, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.points.is_empty() {
            self.search_radius(query, radius * radius, 0, self.order.len(), 0, &mut out);
        }
        out
    }

    fn search_k(
        &self,
        query: &Vector3<f64>,
        k: usize,
        lo: usize,
        hi: usize,
        depth: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let index = self.order[mid];
        let p = &self.points[index];
        let cand = Candidate {
            dist_sq: (p - query).norm_squared(),
            index,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().expect("heap holds k items") {
            heap.pop();
            heap.push(cand);
        }
        let axis = depth % 3;
        let delta = query[axis] - p[axis];
        let (near, far) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search_k(query, k, near.0, near.1, depth + 1, heap);
        let worst = heap.peek().map_or(f64::INFINITY, |c| c.dist_sq);
        if heap.len() < k || delta * delta <= worst {
            self.search_k(query, k, far.0, far.1, depth + 1, heap);
        }
    }

    fn search_radius(
        &self,
        query: &Vector3<f64>,
        radius_sq: f64,
        lo: usize,
        hi: usize,
        depth: usize,
        out: &mut Vec<usize>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let index = self.order[mid];
        let p = &self.points[index];
        if (p - query).norm_squared() <= radius_sq {
            out.push(index);
        }
        let axis = depth % 3;
        let delta = query[axis] - p[axis];
        if delta <= 0.0 || delta * delta <= radius_sq {
            self.search_radius(query, radius_sq, lo, mid, depth + 1, out);
        }
        if delta >= 0.0 || delta * delta <= radius_sq {
            self.search_radius(query, radius_sq, mid + 1, hi, depth + 1, out);
        }
    }
}

fn build(points: &[Vector3<f64>], order: &mut [usize], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |a, b| {
        points[*a][axis]
            .total_cmp(&points[*b][axis])
            .then(a.cmp(b))
    });
    let (left, right) = order.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut right[1..], depth + 1);
}
