//! Vietoris-Rips persistence in dimensions 0 and 1.
//!
//! H0 is Kruskal's algorithm over the sorted edge list. H1 reduces the
//! coboundary matrix of the edges (rows are triangles) over GF(2), which
//! pairs the same simplices as reducing the triangle boundary matrix but
//! lets two shortcuts apply: edges that killed an H0 class are cleared up
//! front, and a column whose smallest coface is still unclaimed is paired
//! without materializing any heap.
//!
//! Edges and triangles are totally ordered by `(diameter, combinatorial
//! index)`; the same order drives both dimensions, so the H0 death edges
//! and the H1 birth edges are complementary.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::distance::DistanceMatrix;
use super::PersistencePair;

#[derive(Debug, Clone, Copy)]
struct Edge {
    diam: f64,
    hi: u32,
    lo: u32,
}

impl Edge {
    fn index(&self) -> u64 {
        binom2(self.hi as u64) + self.lo as u64
    }
}

#[inline]
fn binom2(a: u64) -> u64 {
    a * a.saturating_sub(1) / 2
}

#[inline]
fn binom3(a: u64) -> u64 {
    if a < 3 {
        0
    } else {
        a * (a - 1) * (a - 2) / 6
    }
}

/// Triangle key: diameter first, combinatorial index second.
#[derive(Debug, Clone, Copy)]
struct Tri {
    diam: f64,
    index: u64,
}

impl PartialEq for Tri {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Tri {}
impl PartialOrd for Tri {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Tri {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diam
            .total_cmp(&other.diam)
            .then(self.index.cmp(&other.index))
    }
}

fn tri_index(a: u32, b: u32, c: u32) -> u64 {
    // sort descending
    let (mut x, mut y, mut z) = (a, b, c);
    if x < y {
        core::mem::swap(&mut x, &mut y);
    }
    if y < z {
        core::mem::swap(&mut y, &mut z);
    }
    if x < y {
        core::mem::swap(&mut x, &mut y);
    }
    binom3(x as u64) + binom2(y as u64) + z as u64
}

/// All edges of diameter `<= max_eps`, sorted by `(diameter, index)`.
fn sorted_edges(dist: &DistanceMatrix, max_eps: f64) -> Vec<Edge> {
    let n = dist.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for hi in 1..n {
        for lo in 0..hi {
            let d = dist.get(hi, lo);
            if d <= max_eps {
                edges.push(Edge {
                    diam: d,
                    hi: hi as u32,
                    lo: lo as u32,
                });
            }
        }
    }
    edges.sort_by(|a, b| a.diam.total_cmp(&b.diam).then(a.index().cmp(&b.index())));
    edges
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns false when both were already connected.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Keep the smaller root so the survivor is deterministic.
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop as usize] = keep;
        true
    }
}

/// Marks the edges that merge two components (the minimum spanning forest).
fn death_edges(n: usize, edges: &[Edge]) -> Vec<bool> {
    let mut uf = UnionFind::new(n);
    edges.iter().map(|e| uf.union(e.hi, e.lo)).collect()
}

/// H0 pairs: one `(0, d)` per merging edge of positive length, plus one
/// essential pair whose death is the largest pairwise distance.
pub fn rips_h0(dist: &DistanceMatrix) -> Vec<PersistencePair> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let edges = sorted_edges(dist, f64::INFINITY);
    let deaths = death_edges(n, &edges);
    let mut out: Vec<PersistencePair> = edges
        .iter()
        .zip(&deaths)
        .filter(|(e, &d)| d && e.diam > 0.0)
        .map(|(e, _)| PersistencePair::finite(0, 0.0, e.diam))
        .collect();
    out.push(PersistencePair::essential(0, 0.0, dist.max()));
    out
}

struct Coboundary<'a> {
    dist: &'a DistanceMatrix,
    max_eps: f64,
}

impl Coboundary<'_> {
    fn cofaces(&self, e: &Edge, out: &mut Vec<Tri>) {
        out.clear();
        let (i, j) = (e.hi as usize, e.lo as usize);
        for k in 0..self.dist.len() {
            if k == i || k == j {
                continue;
            }
            let diam = e.diam.max(self.dist.get(i, k)).max(self.dist.get(j, k));
            if diam <= self.max_eps {
                out.push(Tri {
                    diam,
                    index: tri_index(e.hi, e.lo, k as u32),
                });
            }
        }
    }
}

fn pop_pivot(heap: &mut BinaryHeap<Reverse<Tri>>) -> Option<Tri> {
    while let Some(Reverse(t)) = heap.pop() {
        if heap.peek().map(|r| r.0) == Some(t) {
            heap.pop();
            continue;
        }
        return Some(t);
    }
    None
}

/// GF(2) normal form of a column of edge ids.
fn normalize(v: &mut Vec<u32>) {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    *v = out;
}

/// H1 pairs of the Rips filtration truncated at `max_eps`.
///
/// Cycles still alive at `max_eps` are reported as essential with death
/// `max_eps`. Pairs with zero persistence are dropped. Output is sorted by
/// `(birth, death)`.
pub fn rips_h1(dist: &DistanceMatrix, max_eps: f64) -> Vec<PersistencePair> {
    let n = dist.len();
    if n < 3 {
        return Vec::new();
    }
    let edges = sorted_edges(dist, max_eps);
    let deaths = death_edges(n, &edges);
    let cob = Coboundary { dist, max_eps };

    let mut pivot_owner: BTreeMap<u64, u32> = BTreeMap::new();
    // Reduction columns (edge ids) of every column that owns a pivot.
    let mut reduction: Vec<Vec<u32>> = vec![Vec::new(); edges.len()];
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(n);
    let mut extra = Vec::with_capacity(n);

    for col in (0..edges.len()).rev() {
        if deaths[col] {
            continue;
        }
        let e = edges[col];
        cob.cofaces(&e, &mut buf);
        let Some(&first) = buf.iter().min() else {
            push_nonzero(&mut out, e.diam, max_eps, true);
            continue;
        };
        let Some(&owner) = pivot_owner.get(&first.index) else {
            pivot_owner.insert(first.index, col as u32);
            reduction[col].push(col as u32);
            push_nonzero(&mut out, e.diam, first.diam, false);
            continue;
        };

        let mut heap: BinaryHeap<Reverse<Tri>> = buf.iter().map(|t| Reverse(*t)).collect();
        let mut v = vec![col as u32];
        let mut pivot = Some(first);
        let mut collided = Some(owner);
        while let (Some(p), Some(other)) = (pivot, collided) {
            for &ed in &reduction[other as usize] {
                v.push(ed);
                cob.cofaces(&edges[ed as usize], &mut extra);
                heap.extend(extra.iter().map(|t| Reverse(*t)));
            }
            // p is still in the heap (as part of the current column), and
            // the owner's column contributes it once more: they cancel.
            let _ = p;
            pivot = pop_pivot(&mut heap);
            collided = pivot.and_then(|p| pivot_owner.get(&p.index).copied());
            if let Some(p) = pivot {
                if collided.is_some() {
                    heap.push(Reverse(p));
                }
            }
        }
        match pivot {
            Some(p) => {
                normalize(&mut v);
                pivot_owner.insert(p.index, col as u32);
                reduction[col] = v;
                push_nonzero(&mut out, e.diam, p.diam, false);
            }
            None => push_nonzero(&mut out, e.diam, max_eps, true),
        }
    }
    out.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.death.total_cmp(&b.death))
    });
    out
}

fn push_nonzero(out: &mut Vec<PersistencePair>, birth: f64, death: f64, essential: bool) {
    if death > birth {
        out.push(if essential {
            PersistencePair::essential(1, birth, death)
        } else {
            PersistencePair::finite(1, birth, death)
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tda::PointCloud;

    fn cloud(rows: &[[f64; 2]]) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        DistanceMatrix::euclidean(&PointCloud::from_rows(&rows).unwrap())
    }

    #[test]
    fn line_h0() {
        let d = DistanceMatrix::euclidean(
            &PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap(),
        );
        let h0 = rips_h0(&d);
        let finite: Vec<f64> = h0
            .iter()
            .filter(|p| !p.essential)
            .map(|p| p.death)
            .collect();
        assert_eq!(finite, vec![1.0, 2.0]);
        assert_eq!(h0.iter().filter(|p| p.essential).count(), 1);
        assert_eq!(h0.last().unwrap().death, 3.0);
    }

    #[test]
    fn single_point_h0() {
        let d = DistanceMatrix::from_raw(1, vec![0.0]).unwrap();
        let h0 = rips_h0(&d);
        assert_eq!(h0.len(), 1);
        assert!(h0[0].essential);
    }

    #[test]
    fn unit_square_has_one_loop() {
        let d = cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let h1 = rips_h1(&d, d.max());
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-12);
        assert!((h1[0].death - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(!h1[0].essential);
    }

    #[test]
    fn truncated_square_loop_is_essential() {
        let d = cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let h1 = rips_h1(&d, 1.2);
        assert_eq!(h1.len(), 1);
        assert!(h1[0].essential);
        assert_eq!(h1[0].death, 1.2);
    }

    #[test]
    fn triangle_has_no_loop() {
        let d = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]]);
        assert!(rips_h1(&d, d.max()).is_empty());
    }

    #[test]
    fn duplicates_drop_zero_persistence() {
        let d = cloud(&[[0.0, 0.0], [0.0, 0.0], [2.0, 0.0]]);
        let h0 = rips_h0(&d);
        // 3 points, one zero-length merge dropped
        assert_eq!(h0.len(), 2);
    }

    #[test]
    fn gf2_normal_form() {
        let mut v = vec![3, 1, 3, 2, 3, 1];
        normalize(&mut v);
        assert_eq!(v, vec![2, 3]);
    }

    #[test]
    fn triangle_index_is_symmetric() {
        assert_eq!(tri_index(0, 1, 2), 0);
        assert_eq!(tri_index(2, 0, 1), 0);
        assert_eq!(tri_index(3, 1, 0), tri_index(0, 3, 1));
        assert_eq!(tri_index(3, 2, 1), 3);
    }
}
