use super::stats::weighted_line;
use crate::geom::{for_each_interior_cell, BBox, Grid, Raster};
use crate::rng::{derive, purpose};
use crate::soup::{beta, sample_plane_soup, ShapeMeasure};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    pub dim: f64,
    pub stderr: f64,
    pub r2: f64,
}

/// Slope of `log N(s)` against `log(1/s)` by least squares.
pub fn box_dimension(counts: &[(f64, f64)]) -> Result<DimensionFit> {
    if counts.len() < 3 {
        return Err(Error::InsufficientData(format!("need ≥ 3 scales, got {}", counts.len())));
    }
    if let Some(&(s, _)) = counts.iter().find(|(s, n)| !(*n > 0.0) || !(*s > 0.0)) {
        return Err(Error::Degenerate(format!("no occupied boxes at scale {s}")));
    }
    let xs: Vec<f64> = counts.iter().map(|(s, _)| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| n.ln()).collect();
    let f = weighted_line(&xs, &ys, &vec![1.0; xs.len()], false);
    Ok(DimensionFit {
        dim: f.slope,
        stderr: f.slope_stderr,
        r2: f.r2,
    })
}

/// Occupied-box counts of `raster` for square blocks of `factor × factor` cells.
pub fn box_counts(raster: &Raster, factors: &[usize]) -> Vec<(f64, f64)> {
    let Grid { nx, ny, pitch, .. } = raster.grid;
    factors
        .iter()
        .map(|&f| {
            let (bx, by) = (nx.div_ceil(f), ny.div_ceil(f));
            let mut hit = vec![false; bx * by];
            for j in 0..ny {
                for i in 0..nx {
                    if raster.get(i, j) {
                        hit[i / f + (j / f) * bx] = true;
                    }
                }
            }
            (pitch * f as f64, hit.iter().filter(|h| **h).count() as f64)
        })
        .collect()
}

/// Surviving fraction of cell centres at one scale against `(s/M)^{cβ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePoint {
    pub scale: f64,
    pub fraction: f64,
    /// Standard error of `fraction` across replicas.
    pub sigma: f64,
    pub expected: f64,
    /// `p(1−p)/σ²`: the number of independent points giving the same precision.
    pub n_eff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainingReport {
    pub c: f64,
    pub beta: f64,
    pub rho_max: f64,
    pub replicas: usize,
    /// `(scale, mean number of surviving cells)`.
    pub counts: Vec<(f64, f64)>,
    pub one_point: Vec<OnePoint>,
    pub fit: DimensionFit,
    /// `max(0, 2 − cβ)`.
    pub expected_dim: f64,
}

/// Multi-scale remaining set of the whole-plane soup seen through a square window.
///
/// At scale `s` the window is cut into cells of side `s`, and a cell
/// survives when its centre avoids the interiors of all curves of diameter
/// in `(s, rho_max]`. A point survives with probability `(s/rho_max)^{cβ}`,
/// so the mean count is exactly proportional to `s^{cβ − 2}`.
pub fn remaining_dimension(
    c: f64,
    shape: &ShapeMeasure,
    window: BBox,
    scales: &[f64],
    rho_max: f64,
    replicas: usize,
    seed: u64,
) -> Result<RemainingReport> {
    if (window.width() - window.height()).abs() > 1e-12 * window.width() {
        return Err(Error::arg("window", "must be square"));
    }
    if scales.len() < 3 {
        return Err(Error::arg("scales", "need ≥ 3 scales"));
    }
    if replicas < 2 {
        return Err(Error::arg("replicas", "must be ≥ 2"));
    }
    let mut sizes = Vec::with_capacity(scales.len());
    for &s in scales {
        let n = (window.width() / s).round();
        if !(s > 0.0 && s < rho_max) || n < 1.0 || (n * s - window.width()).abs() > 1e-9 * window.width() {
            return Err(Error::arg("scales", format!("{s} must divide the window and lie below rho_max")));
        }
        sizes.push(n as usize);
    }
    let s_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let counts: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let soup = sample_plane_soup(c, shape, window, s_min, rho_max, derive(seed, &[purpose::SOUP, r]))?;
            scales
                .iter()
                .zip(&sizes)
                .map(|(&s, &n)| {
                    let grid = Grid::new(window.min, window.width() / n as f64, n, n)?;
                    let mut covered = vec![false; grid.len()];
                    for g in soup.curves.iter().take_while(|g| g.diameter() > s) {
                        for_each_interior_cell(g, &grid, |k| covered[k] = true);
                    }
                    Ok(covered.iter().filter(|c| !**c).count() as f64)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let b = beta(shape, 1000, 0.01, seed)?.mean;
    let m = replicas as f64;
    let mut mean_counts = Vec::new();
    let mut one_point = Vec::new();
    for (k, (&s, &n)) in scales.iter().zip(&sizes).enumerate() {
        let cells = (n * n) as f64;
        let fr: Vec<f64> = counts.iter().map(|row| row[k] / cells).collect();
        let mean = fr.iter().sum::<f64>() / m;
        let var = fr.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let sigma = (var / m).sqrt();
        mean_counts.push((s, mean * cells));
        one_point.push(OnePoint {
            scale: s,
            fraction: mean,
            sigma,
            expected: (s / rho_max).powf(c * b),
            n_eff: if sigma > 0.0 { mean * (1.0 - mean) / (sigma * sigma) } else { f64::INFINITY },
        });
    }
    let fit = box_dimension(&mean_counts)?;
    Ok(RemainingReport {
        c,
        beta: b,
        rho_max,
        replicas,
        counts: mean_counts,
        one_point,
        fit,
        expected_dim: (2.0 - c * b).max(0.0),
    })
}
