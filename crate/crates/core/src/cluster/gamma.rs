use super::{union_diameter, SpatialHash};
use crate::geom::{curves_cross, filled_area, BBox, Curve, Domain, Point};
use crate::rng::{derive, purpose, substream};
use crate::soup::{beta, sample_marked_soup, sample_shape, BetaEstimate, ShapeMeasure, SoupSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Filling of the cluster grown from one unit-diameter curve by a soup of
/// smaller curves.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaStar {
    pub c: f64,
    pub seed_curve: Curve,
    pub cluster_members: Vec<Curve>,
    pub filled_area: f64,
    pub diameter: f64,
    /// The cluster came within distance 1 of the window edge, where missing
    /// curves could have changed it.
    pub truncated: bool,
}

fn check_window(w: f64, eps_min: f64) -> Result<()> {
    if !(w >= 4.0 && w.is_finite()) {
        return Err(Error::arg("W", format!("must be ≥ 4, got {w}")));
    }
    if !(eps_min > 0.0 && eps_min < 1.0) {
        return Err(Error::arg("eps_min", format!("must lie in (0, 1), got {eps_min}")));
    }
    Ok(())
}

pub fn sample_gamma_star(c: f64, shape: &ShapeMeasure, w: f64, eps_min: f64, pitch: f64, seed: u64) -> Result<GammaStar> {
    Ok(sample_gamma_star_coupled(&[c], shape, w, eps_min, pitch, seed)?.remove(0))
}

/// `γ*` for several intensities on one marked soup, so the clusters are
/// nested in `c`.
pub fn sample_gamma_star_coupled(
    c_list: &[f64],
    shape: &ShapeMeasure,
    w: f64,
    eps_min: f64,
    pitch: f64,
    seed: u64,
) -> Result<Vec<GammaStar>> {
    check_window(w, eps_min)?;
    let c_max = c_list.iter().copied().fold(f64::NAN, f64::max);
    if c_list.is_empty() || c_list.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::arg("c", "intensities must be > 0"));
    }
    let g0 = sample_shape(shape, &mut substream(seed, &[purpose::GAMMA]));
    let gamma = g0.place(Point::ORIGIN - g0.bbox().center(), 1.0)?;
    let spec = SoupSpec::with_cutoffs(c_max, shape.clone(), Domain::square(w)?, eps_min, 1.0)?;
    let marked = sample_marked_soup(&spec, derive(seed, &[purpose::GAMMA, 1]))?;
    let curves = &marked.soup.curves;
    let boxes: Vec<BBox> = curves.iter().map(Curve::bbox).collect();
    let mut hash = SpatialHash::new(0.25);
    for b in &boxes {
        hash.insert(b);
    }
    let inner = BBox::around(Point::ORIGIN, w - 1.0);
    c_list
        .iter()
        .map(|&c| {
            let mut used = vec![false; curves.len()];
            let mut members = vec![gamma.clone()];
            let mut scratch = Vec::new();
            let mut k = 0;
            while k < members.len() {
                let b = members[k].bbox();
                hash.query(&b, &mut scratch);
                scratch.sort_unstable();
                for &j in &scratch {
                    let j = j as usize;
                    if used[j] || marked.marks[j] * c_max > c {
                        continue;
                    }
                    if boxes[j].intersects(&b) && curves_cross(&members[k], &curves[j]) {
                        used[j] = true;
                        members.push(curves[j].clone());
                    }
                }
                k += 1;
            }
            let bbox = members.iter().map(Curve::bbox).reduce(|a, b| a.union(&b)).unwrap();
            Ok(GammaStar {
                c,
                seed_curve: gamma.clone(),
                filled_area: filled_area(&members, pitch)?,
                diameter: union_diameter(&members),
                truncated: !inner.contains_box(&bbox),
                cluster_members: members,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaStarReport {
    pub c: f64,
    pub estimate: BetaEstimate,
    pub replicas: usize,
    pub truncated: usize,
    /// Diameters of the kept (untruncated) fillings, in replica order.
    pub diameters: Vec<f64>,
}

impl BetaStarReport {
    pub fn truncation_rate(&self) -> f64 {
        self.truncated as f64 / self.replicas as f64
    }

    /// Empirical `P(|γ*| > x)` over the kept samples.
    pub fn diameter_tail(&self, x: f64) -> f64 {
        if self.diameters.is_empty() {
            return 0.0;
        }
        self.diameters.iter().filter(|&&d| d > x).count() as f64 / self.diameters.len() as f64
    }
}

/// Mean area of `γ*`, times the shape mass, over untruncated samples.
pub fn estimate_beta_star(
    c: f64,
    shape: &ShapeMeasure,
    w: f64,
    eps_min: f64,
    pitch: f64,
    replicas: usize,
    seed: u64,
) -> Result<BetaStarReport> {
    Ok(estimate_beta_star_coupled(&[c], shape, w, eps_min, pitch, replicas, seed)?.remove(0))
}

/// As [`estimate_beta_star`] for several `c` on shared marked soups.
/// `c = 0` gives the filling of the initial curve alone.
pub fn estimate_beta_star_coupled(
    c_list: &[f64],
    shape: &ShapeMeasure,
    w: f64,
    eps_min: f64,
    pitch: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<BetaStarReport>> {
    check_window(w, eps_min)?;
    if replicas < 100 {
        return Err(Error::arg("replicas", format!("must be ≥ 100, got {replicas}")));
    }
    if c_list.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::arg("c", "intensities must be ≥ 0"));
    }
    let positive: Vec<f64> = c_list.iter().copied().filter(|&c| c > 0.0).collect();
    let samples: Vec<Vec<GammaStar>> = if positive.is_empty() {
        Vec::new()
    } else {
        (0..replicas as u64)
            .into_par_iter()
            .map(|r| sample_gamma_star_coupled(&positive, shape, w, eps_min, pitch, derive(seed, &[purpose::GAMMA, r])))
            .collect::<Result<_>>()?
    };
    let mut out = Vec::with_capacity(c_list.len());
    for &c in c_list {
        if c == 0.0 {
            out.push(BetaStarReport {
                c,
                estimate: beta(shape, replicas, pitch, seed)?,
                replicas,
                truncated: 0,
                diameters: Vec::new(),
            });
            continue;
        }
        let k = positive.iter().position(|&p| p == c).unwrap();
        let kept: Vec<&GammaStar> = samples.iter().map(|s| &s[k]).filter(|g| !g.truncated).collect();
        let truncated = replicas - kept.len();
        if truncated * 10 > replicas {
            return Err(Error::WidenWindow {
                truncated,
                total: replicas,
            });
        }
        let areas: Vec<f64> = kept.iter().map(|g| shape.mass * g.filled_area).collect();
        out.push(BetaStarReport {
            c,
            estimate: BetaEstimate::from_samples(&areas),
            replicas,
            truncated,
            diameters: kept.iter().map(|g| g.diameter).collect(),
        });
    }
    Ok(out)
}
