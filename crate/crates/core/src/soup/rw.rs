//! Random-walk loop soup on a square lattice.

use super::{poisson, ShapeMeasure, Soup, SoupSpec};
use crate::geom::{Curve, Domain, LatticeLoop, Step};
use crate::rng::{purpose, substream, StreamRng};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `C(2n,n)/4^n` for `n = 0..=n_max`.
fn central_ratios(n_max: u32) -> Vec<f64> {
    let mut a = Vec::with_capacity(n_max as usize + 1);
    a.push(1.0);
    for n in 1..=n_max as usize {
        let prev = a[n - 1];
        a.push(prev * (2 * n - 1) as f64 / (2 * n) as f64);
    }
    a
}

/// Per-site mass of rooted-out loops of length `2n`: `C(2n,n)² 4^{-2n} / (2n)`.
pub fn loop_weight(n: u32) -> f64 {
    assert!(n >= 1);
    let a = central_ratios(n)[n as usize];
    a * a / (2 * n) as f64
}

/// `Σ_{n=1}^{n_max} loop_weight(n)`.
pub fn per_site_mass(n_max: u32) -> f64 {
    let a = central_ratios(n_max);
    (1..=n_max as usize).map(|n| a[n] * a[n] / (2 * n) as f64).sum()
}

fn cumulative_weights(n_max: u32) -> Vec<f64> {
    let a = central_ratios(n_max);
    let mut acc = 0.0;
    (1..=n_max as usize)
        .map(|n| {
            acc += a[n] * a[n] / (2 * n) as f64;
            acc
        })
        .collect()
}

fn pick(cum: &[f64], rng: &mut StreamRng) -> u32 {
    let u = rng.random::<f64>() * cum[cum.len() - 1];
    let k = cum.partition_point(|&w| w <= u);
    k.min(cum.len() - 1) as u32 + 1
}

pub(super) fn sample_half_length(n_max: u32, rng: &mut StreamRng) -> u32 {
    pick(&cumulative_weights(n_max), rng)
}

/// Uniform closed nearest-neighbour walk of length `2n`.
///
/// In the coordinates `u = x + y`, `v = x − y` each step changes both by ±1,
/// so a closed walk is a pair of independent ±1 bridges of length `2n`.
pub fn sample_closed_walk(n: u32, rng: &mut StreamRng) -> Vec<Step> {
    let len = 2 * n as usize;
    let bridge = |rng: &mut StreamRng| {
        let mut b: Vec<i8> = (0..len).map(|k| if k < n as usize { 1 } else { -1 }).collect();
        b.shuffle(rng);
        b
    };
    let u = bridge(rng);
    let v = bridge(rng);
    u.iter()
        .zip(&v)
        .map(|(&a, &b)| match (a, b) {
            (1, 1) => Step::E,
            (-1, -1) => Step::W,
            (1, -1) => Step::N,
            _ => Step::S,
        })
        .collect()
}

/// A uniform closed walk of length `2n` rooted at `origin`, drawn with the given mesh.
pub fn sample_rw_loop(n: u32, origin: (i64, i64), mesh: f64, rng: &mut StreamRng) -> LatticeLoop {
    LatticeLoop::new(origin, sample_closed_walk(n, rng), mesh).expect("bridges close up")
}

/// Random-walk loop soup with loops of half-length `≤ n_max` contained in `window`.
///
/// Every lattice site of `mesh·ℤ²` in the window roots a Poisson number of
/// loops with mean `c·per_site_mass(n_max)`; the half-length of each is drawn
/// with probability proportional to its weight.
pub fn sample_rw_loop_soup(window: &Domain, c: f64, n_max: u32, mesh: f64, seed: u64) -> Result<Soup> {
    window.validate()?;
    if n_max < 1 {
        return Err(Error::arg("n_max", "must be ≥ 1"));
    }
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(Error::arg("mesh", format!("must be > 0, got {mesh}")));
    }
    let mass = per_site_mass(n_max);
    let shape = ShapeMeasure::rw_loop(n_max, super::LengthRule::LoopMeasure).with_mass(mass);
    let spec = SoupSpec::with_cutoffs(c, shape, window.clone(), mesh, window.diameter())?;
    let cum = cumulative_weights(n_max);
    let bb = window.bbox();
    let i0 = (bb.min.x / mesh).ceil() as i64;
    let i1 = (bb.max.x / mesh).floor() as i64;
    let j0 = (bb.min.y / mesh).ceil() as i64;
    let j1 = (bb.max.y / mesh).floor() as i64;
    let mut rng = substream(seed, &[purpose::LOOP]);
    let mut kept = Vec::new();
    let mut candidates = 0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = crate::geom::Point::new(i as f64 * mesh, j as f64 * mesh);
            if !window.contains_point(p) {
                continue;
            }
            let k = poisson(c * mass, &mut rng);
            for _ in 0..k {
                candidates += 1;
                let n = pick(&cum, &mut rng);
                let l = Curve::Lattice(sample_rw_loop(n, (i, j), mesh, &mut rng));
                if window.contains_curve(&l) {
                    kept.push(l);
                }
            }
        }
    }
    kept.sort_by(|a, b| b.diameter().total_cmp(&a.diameter()));
    Ok(Soup {
        spec,
        curves: kept,
        seed,
        candidates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwAreaReport {
    pub n: u32,
    pub replicas: usize,
    pub mean_area: f64,
    pub std_err: f64,
    /// `(π/5)·n`: mean filled area of a Brownian loop of the same duration.
    pub expected: f64,
    pub ratio: f64,
}

/// Mean filled area of uniform closed walks of length `2n` on the unit lattice.
///
/// A coordinate of the walk moves with variance 1/2 per step, so a walk of
/// `2n` steps has the covariance of a standard Brownian loop of duration `n`,
/// whose filling has mean area `π·n/5`.
pub fn rw_area_check(n: u32, replicas: usize, seed: u64) -> Result<RwAreaReport> {
    if n < 1 {
        return Err(Error::arg("n", "must be ≥ 1"));
    }
    if replicas < 1 {
        return Err(Error::arg("replicas", "must be ≥ 1"));
    }
    let areas: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, &[purpose::LOOP, r]);
            sample_rw_loop(n, (0, 0), 1.0, &mut rng).filled_area()
        })
        .collect();
    let est = super::BetaEstimate::from_samples(&areas);
    let expected = PI * n as f64 / 5.0;
    Ok(RwAreaReport {
        n,
        replicas,
        mean_area: est.mean,
        std_err: est.half_width / 1.96,
        expected,
        ratio: est.mean / expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: exact binomials in u128.
    fn weight_by_binomial(n: u32) -> f64 {
        let mut c: u128 = 1;
        for k in 0..n as u128 {
            c = c * (2 * n as u128 - k) / (k + 1);
        }
        let c = c as f64;
        c * c / 4f64.powi(2 * n as i32) / (2 * n) as f64
    }

    #[test]
    fn first_weight_is_one_eighth() {
        assert_eq!(loop_weight(1), 0.125);
        for n in 1..=30 {
            assert!((loop_weight(n) - weight_by_binomial(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn per_site_mass_matches_frozen_sum() {
        // partial sum to n = 100, computed independently ahead of time
        assert!((per_site_mass(100) - 0.218_469_1).abs() < 5e-7, "{}", per_site_mass(100));
    }

    #[test]
    fn closed_walks_return() {
        let mut rng = substream(2, &[]);
        for n in [1, 2, 5, 40] {
            for _ in 0..50 {
                let w = sample_closed_walk(n, &mut rng);
                assert_eq!(w.len(), 2 * n as usize);
                let (x, y) = w.iter().fold((0, 0), |(x, y), s| (x + s.delta().0, y + s.delta().1));
                assert_eq!((x, y), (0, 0));
            }
        }
    }

    #[test]
    fn length_two_loops_are_flat() {
        let r = rw_area_check(1, 500, 4).unwrap();
        assert_eq!(r.mean_area, 0.0);
    }

    #[test]
    fn length_four_mean_area_is_two_ninths() {
        // 36 closed 4-step walks, of which the 8 rooted oriented unit squares
        // enclose area 1 and the rest are flat
        let mut total = 0.0;
        let mut count = 0;
        for a in Step::ALL {
            for b in Step::ALL {
                for c in Step::ALL {
                    for d in Step::ALL {
                        if let Ok(l) = LatticeLoop::new((0, 0), vec![a, b, c, d], 1.0) {
                            total += l.filled_area();
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 36);
        assert_eq!(total, 8.0);
        let r = rw_area_check(2, 40_000, 8).unwrap();
        let sigma = ((2.0 / 9.0) * (7.0 / 9.0) / 40_000.0f64).sqrt();
        assert!((r.mean_area - 2.0 / 9.0).abs() < 4.0 * sigma, "{}", r.mean_area);
    }

    #[test]
    fn coordinate_variance_per_step_is_one_half() {
        let mut rng = substream(3, &[]);
        let mut ss = 0.0;
        let mut m = 0usize;
        for _ in 0..2000 {
            for s in sample_closed_walk(50, &mut rng) {
                ss += (s.delta().0 * s.delta().0) as f64;
                m += 1;
            }
        }
        assert!((ss / m as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn soup_loops_are_closed_and_contained() {
        let w = Domain::square(1.0).unwrap();
        let s = sample_rw_loop_soup(&w, 1.0, 10, 0.1, 5).unwrap();
        assert!(!s.is_empty());
        for g in &s.curves {
            let Curve::Lattice(l) = g else { panic!() };
            assert_eq!(l.len() % 2, 0);
            assert!(w.contains_curve(g));
        }
        assert!(sample_rw_loop_soup(&w, 1.0, 0, 0.1, 5).is_err());
        assert!(sample_rw_loop_soup(&w, 1.0, 3, 0.0, 5).is_err());
    }
}
