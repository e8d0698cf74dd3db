//! Crossing graph, clusters, the sequential exploration and cluster fillings.

mod explore;
mod gamma;
mod index;

pub use explore::{explore_clusters_sequential, ExploredCluster};
pub use gamma::{
    estimate_beta_star, estimate_beta_star_coupled, sample_gamma_star, sample_gamma_star_coupled, BetaStarReport, GammaStar,
};
pub(crate) use index::SpatialHash;

use crate::geom::{curves_cross, farthest_distance, filled_area, BBox, Curve};
use crate::soup::Soup;
use crate::{Error, Result};
use rayon::prelude::*;

/// Pairs `(i, j)`, `i < j`, of curves that cross.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Hash cell size: median diameter clamped to the cutoffs.
fn cell_size(curves: &[Curve], lo: f64, hi: f64) -> f64 {
    let mut d: Vec<f64> = curves.iter().map(Curve::diameter).collect();
    d.sort_by(f64::total_cmp);
    let med = d[d.len() / 2];
    med.clamp(lo, hi.max(lo))
}

pub fn crossing_graph(soup: &Soup) -> CrossingGraph {
    crossing_graph_of(&soup.curves, soup.spec.eps_min, soup.spec.rho_max)
}

/// Crossing graph of an arbitrary curve list; `lo..hi` bounds the hash cell size.
pub fn crossing_graph_of(curves: &[Curve], lo: f64, hi: f64) -> CrossingGraph {
    let n = curves.len();
    if n < 2 {
        return CrossingGraph { n, edges: Vec::new() };
    }
    let boxes: Vec<BBox> = curves.iter().map(Curve::bbox).collect();
    let mut hash = SpatialHash::new(cell_size(curves, lo, hi));
    for b in &boxes {
        hash.insert(b);
    }
    let mut edges: Vec<(usize, usize)> = hash
        .candidate_pairs()
        .into_par_iter()
        .flat_map_iter(|cell| {
            cell.into_iter().filter_map(|(a, b)| {
                let (a, b) = (a as usize, b as usize);
                (boxes[a].intersects(&boxes[b]) && curves_cross(&curves[a], &curves[b])).then(|| (a.min(b), a.max(b)))
            })
        })
        .collect();
    edges.sort_unstable();
    CrossingGraph { n, edges }
}

/// All-pairs reference implementation.
pub fn crossing_graph_brute(curves: &[Curve]) -> CrossingGraph {
    let n = curves.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if curves_cross(&curves[i], &curves[j]) {
                edges.push((i, j));
            }
        }
    }
    CrossingGraph { n, edges }
}

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterInfo {
    /// Member indices, increasing.
    pub members: Vec<usize>,
    pub bbox: BBox,
    pub diameter: f64,
    /// Filled when [`ClusterSet::fill_areas`] has run.
    pub filled_area: Option<f64>,
}

/// Partition of a soup into clusters, ordered by the diameter of their
/// largest curve (the soup itself is sorted, so by smallest member index).
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSet {
    pub labels: Vec<usize>,
    pub clusters: Vec<ClusterInfo>,
}

/// Diameter of a union of curves.
pub fn union_diameter<'a>(curves: impl IntoIterator<Item = &'a Curve>) -> f64 {
    let curves: Vec<&Curve> = curves.into_iter().collect();
    // centre and radius bound per curve, for pruning pairs
    let disks: Vec<_> = curves
        .iter()
        .map(|c| {
            let b = c.bbox();
            (b.center(), 0.5 * b.width().hypot(b.height()))
        })
        .collect();
    let mut best = curves.iter().map(|c| c.diameter()).fold(0.0, f64::max);
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let ub = disks[i].0.dist(disks[j].0) + disks[i].1 + disks[j].1;
            if ub > best {
                best = best.max(farthest_distance(curves[i], curves[j]));
            }
        }
    }
    best
}

impl ClusterSet {
    pub fn from_graph(curves: &[Curve], g: &CrossingGraph) -> ClusterSet {
        Self::from_edges(curves, g.edges.iter().copied())
    }

    pub fn from_edges(curves: &[Curve], edges: impl IntoIterator<Item = (usize, usize)>) -> ClusterSet {
        let n = curves.len();
        let mut uf = UnionFind::new(n);
        for (a, b) in edges {
            uf.union(a, b);
        }
        let mut root_label = vec![usize::MAX; n];
        let mut labels = vec![0; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = uf.find(i);
            if root_label[r] == usize::MAX {
                root_label[r] = members.len();
                members.push(Vec::new());
            }
            labels[i] = root_label[r];
            members[labels[i]].push(i);
        }
        let clusters = members
            .into_par_iter()
            .map(|m| {
                let bbox = m.iter().map(|&i| curves[i].bbox()).reduce(|a, b| a.union(&b)).unwrap();
                let diameter = union_diameter(m.iter().map(|&i| &curves[i]));
                ClusterInfo {
                    members: m,
                    bbox,
                    diameter,
                    filled_area: None,
                }
            })
            .collect();
        ClusterSet { labels, clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Compute every cluster's filled area.
    pub fn fill_areas(&mut self, curves: &[Curve], pitch: f64) -> Result<()> {
        let areas: Result<Vec<f64>> = self
            .clusters
            .par_iter()
            .map(|c| filled_area(&c.members.iter().map(|&i| curves[i].clone()).collect::<Vec<_>>(), pitch))
            .collect();
        for (c, a) in self.clusters.iter_mut().zip(areas?) {
            c.filled_area = Some(a);
        }
        Ok(())
    }
}

pub fn clusters(soup: &Soup) -> ClusterSet {
    ClusterSet::from_graph(&soup.curves, &crossing_graph(soup))
}

/// Area of the filling of cluster `id`.
pub fn cluster_filling(cs: &ClusterSet, curves: &[Curve], id: usize, pitch: f64) -> Result<f64> {
    let c = cs
        .clusters
        .get(id)
        .ok_or_else(|| Error::arg("id", format!("no cluster {id} among {}", cs.len())))?;
    let members: Vec<Curve> = c.members.iter().map(|&i| curves[i].clone()).collect();
    filled_area(&members, pitch)
}
