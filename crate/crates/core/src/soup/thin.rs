use super::{sample_shape, BetaEstimate, ShapeKind, ShapeMeasure};
use crate::geom::{neighborhood_area, Curve, Point};
use crate::rng::{purpose, substream};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Number of shapes averaged when the neighbourhood area is not shape-independent.
const SHAPE_SAMPLES: u64 = 32;

/// Composite Simpson rule for `f` on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫₀^{1/R} (dr/r)·E[|{z : d(z,γ) ≤ r}|]` times the shape mass: the mass of
/// the curves that cross the annulus between radii 1 and `R` (up to scaling).
///
/// Returns `f64::INFINITY` when the integrand does not vanish at small `r`,
/// i.e. the shapes are not thin.
pub fn mu_l_r(shape: &ShapeMeasure, r_big: f64, pitch: f64) -> Result<f64> {
    shape.validate()?;
    if !(r_big >= 2.0 && r_big.is_finite()) {
        return Err(Error::arg("R", format!("must be ≥ 2, got {r_big}")));
    }
    let top = 1.0 / r_big;
    let (area, lo, nodes): (Box<dyn Fn(f64) -> f64 + Sync>, f64, usize) = match shape.kind {
        ShapeKind::Circle => {
            let g = Curve::Circle {
                center: Point::new(0.5, 0.0),
                diam: 1.0,
            };
            (Box::new(move |r| neighborhood_area(&g, r, 0.0).unwrap()), top * (-30f64).exp(), 3000)
        }
        ShapeKind::Stick | ShapeKind::DiscreteStick { .. } => {
            // the capsule area does not depend on the direction
            let g = Curve::Stick {
                a: Point::ORIGIN,
                b: Point::new(1.0, 0.0),
            };
            (Box::new(move |r| neighborhood_area(&g, r, 0.0).unwrap()), top * (-30f64).exp(), 3000)
        }
        ShapeKind::RwLoop { .. } => {
            if !(pitch > 0.0 && pitch < top / 4.0) {
                return Err(Error::Resolution {
                    pitch,
                    limit: top / 4.0,
                });
            }
            let shapes: Vec<Curve> = (0..SHAPE_SAMPLES)
                .map(|k| sample_shape(shape, &mut substream(0, &[purpose::SHAPE, k])))
                .collect();
            let f = move |r: f64| {
                shapes
                    .par_iter()
                    .map(|g| neighborhood_area(g, r, pitch).unwrap())
                    .sum::<f64>()
                    / shapes.len() as f64
            };
            (Box::new(f), 4.0 * pitch, 48)
        }
    };
    // near 0 the integrand behaves like r^s; s ≤ 0 means divergence
    let a_lo = area(lo);
    let s = (area(2.0 * lo) / a_lo).log2();
    if !(s > 0.05) {
        return Ok(f64::INFINITY);
    }
    let body = simpson(|t| area(t.exp()), lo.ln(), top.ln(), nodes);
    Ok(shape.mass * (body + a_lo / s))
}

/// `m·E[area of the filling]` of a unit-diameter shape.
pub fn beta(shape: &ShapeMeasure, replicas: usize, pitch: f64, seed: u64) -> Result<BetaEstimate> {
    shape.validate()?;
    if replicas < 1 {
        return Err(Error::arg("replicas", "must be ≥ 1"));
    }
    match shape.kind {
        ShapeKind::Circle => Ok(BetaEstimate::exact(shape.mass * PI / 4.0, replicas)),
        ShapeKind::Stick | ShapeKind::DiscreteStick { .. } => Ok(BetaEstimate::exact(0.0, replicas)),
        ShapeKind::RwLoop { .. } => {
            let _ = pitch; // lattice fillings are exact
            let xs: Vec<f64> = (0..replicas as u64)
                .into_par_iter()
                .map(|k| {
                    let g = sample_shape(shape, &mut substream(seed, &[purpose::SHAPE, k]));
                    match g {
                        Curve::Lattice(l) => shape.mass * l.filled_area(),
                        _ => unreachable!(),
                    }
                })
                .collect();
            Ok(BetaEstimate::from_samples(&xs))
        }
    }
}
