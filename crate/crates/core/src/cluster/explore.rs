use super::{union_diameter, SpatialHash};
use crate::geom::{curves_cross, BBox, Curve};
use crate::rng::{derive, purpose};
use crate::soup::{sample_soup, SoupSpec};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExploredCluster {
    /// The largest curve, taken from the first soup.
    pub seed_curve: Curve,
    /// All curves of the cluster, the seed first.
    pub members: Vec<Curve>,
    pub diameter: f64,
}

/// The union of the clusters found so far, indexed for crossing queries.
struct Explored {
    curves: Vec<Curve>,
    boxes: Vec<BBox>,
    hash: SpatialHash,
    scratch: Vec<u32>,
}

impl Explored {
    fn new(h: f64) -> Self {
        Explored {
            curves: Vec::new(),
            boxes: Vec::new(),
            hash: SpatialHash::new(h),
            scratch: Vec::new(),
        }
    }

    fn add(&mut self, g: &Curve) {
        let b = g.bbox();
        self.hash.insert(&b);
        self.boxes.push(b);
        self.curves.push(g.clone());
    }

    fn crossed_by(&mut self, g: &Curve) -> bool {
        let b = g.bbox();
        self.hash.query(&b, &mut self.scratch);
        self.scratch
            .iter()
            .any(|&k| self.boxes[k as usize].intersects(&b) && curves_cross(&self.curves[k as usize], g))
    }
}

/// Clusters discovered one at a time from independent soups.
///
/// The next cluster is seeded by the largest curve of a first soup `Γ′` that
/// crosses none of the clusters found so far. It is then grown inside a fresh
/// soup, using only curves smaller than the seed that cross none of the
/// earlier clusters. The output has the same law as the clusters of a single
/// soup, listed by decreasing largest curve.
pub fn explore_clusters_sequential(spec: &SoupSpec, seed: u64) -> Result<Vec<ExploredCluster>> {
    let first = sample_soup(spec, derive(seed, &[purpose::EXPLORE, 0]))?;
    let h = spec.eps_min.max(0.25 * spec.rho_max);
    let mut done = Explored::new(h);
    let mut out = Vec::new();
    for g in &first.curves {
        if done.crossed_by(g) {
            continue;
        }
        if out.len() == MAX_ITERATIONS {
            return Err(Error::CapExceeded(MAX_ITERATIONS));
        }
        let n = out.len() as u64 + 1;
        let d = g.diameter();
        let fresh = sample_soup(spec, derive(seed, &[purpose::EXPLORE, n]))?;
        // fresh curves are sorted, so the smaller ones form a suffix
        let start = fresh.curves.partition_point(|c| c.diameter() >= d);
        let pool = &fresh.curves[start..];
        let boxes: Vec<BBox> = pool.iter().map(Curve::bbox).collect();
        let mut hash = SpatialHash::new(h);
        for b in &boxes {
            hash.insert(b);
        }
        // 0 = unseen, 1 = in cluster, 2 = rejected for crossing earlier clusters
        let mut state = vec![0u8; pool.len()];
        let mut members = vec![g.clone()];
        let mut scratch = Vec::new();
        let mut k = 0;
        while k < members.len() {
            let b = members[k].bbox();
            hash.query(&b, &mut scratch);
            scratch.sort_unstable();
            for &j in &scratch {
                let j = j as usize;
                if state[j] != 0 || !boxes[j].intersects(&b) || !curves_cross(&members[k], &pool[j]) {
                    continue;
                }
                if done.crossed_by(&pool[j]) {
                    state[j] = 2;
                } else {
                    state[j] = 1;
                    members.push(pool[j].clone());
                }
            }
            k += 1;
        }
        for m in &members {
            done.add(m);
        }
        let diameter = union_diameter(&members);
        out.push(ExploredCluster {
            seed_curve: g.clone(),
            members,
            diameter,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Domain;
    use crate::soup::ShapeMeasure;

    #[test]
    fn seeds_strictly_decrease_and_clusters_are_disjoint() {
        let spec = SoupSpec::new(0.3, ShapeMeasure::circle(), Domain::UnitDisk, 0.05).unwrap();
        let cl = explore_clusters_sequential(&spec, 12).unwrap();
        assert!(!cl.is_empty());
        for w in cl.windows(2) {
            assert!(w[0].seed_curve.diameter() > w[1].seed_curve.diameter());
        }
        for (a, ka) in cl.iter().enumerate() {
            assert_eq!(ka.members[0], ka.seed_curve);
            assert!(ka.members.iter().all(|m| m.diameter() <= ka.seed_curve.diameter()));
            for kb in &cl[a + 1..] {
                for x in &ka.members {
                    for y in &kb.members {
                        assert!(!curves_cross(x, y));
                    }
                }
            }
        }
        assert_eq!(cl, explore_clusters_sequential(&spec, 12).unwrap());
    }
}
