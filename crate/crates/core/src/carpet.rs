//! Approximate carpet membership, the annulus-crossing event and the remaining set.
//!
//! Paths may run along curves but never through their interiors, so on a
//! raster a cell is blocked exactly when its centre is interior to a kept
//! curve, and connectivity is 4-adjacency between free cells.

use crate::geom::{for_each_interior_cell, flood, rasterize_interiors, Curve, Domain, Grid, Point, Raster};
use crate::soup::{sample_soup, ShapeMeasure, Soup, SoupSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarpetQuery {
    pub x: Point,
    pub eps: f64,
    pub pitch: f64,
}

impl CarpetQuery {
    pub fn new(x: Point, eps: f64, pitch: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::arg("eps", format!("must be > 0, got {eps}")));
        }
        if !(pitch > 0.0 && pitch <= eps / 4.0) {
            return Err(Error::Resolution { pitch, limit: eps / 4.0 });
        }
        Ok(CarpetQuery { x, eps, pitch })
    }
}

/// Whether `q.x` connects to the boundary of the soup's domain without
/// entering the interior of any curve at distance more than `q.eps` from it.
pub fn is_in_c_eps(q: &CarpetQuery, soup: &Soup) -> Result<bool> {
    let q = CarpetQuery::new(q.x, q.eps, q.pitch)?;
    let domain = &soup.spec.domain;
    if !domain.contains_point(q.x) {
        return Err(Error::arg("x", format!("{:?} is outside the domain", q.x)));
    }
    let grid = Grid::covering(&domain.bbox(), q.pitch)?;
    let mut passable = vec![true; grid.len()];
    for g in soup.curves.iter().filter(|g| g.distance_to(q.x) > q.eps) {
        for_each_interior_cell(g, &grid, |k| passable[k] = false);
    }
    let target = grid.cell_of(q.x).map(|(i, j)| grid.index(i, j)).unwrap_or(grid.len() - 1);
    if !passable[target] {
        return Ok(false);
    }
    let outside = (0..grid.len()).filter(|&k| !domain.contains_point(grid.center_of(k)));
    let reached = flood(&grid, &passable, grid.border().chain(outside));
    Ok(reached[target])
}

/// Both memberships on the same soup.
pub fn two_point_c_eps(x: Point, y: Point, soup: &Soup, eps: f64, pitch: f64) -> Result<(bool, bool)> {
    if x == y {
        return Err(Error::arg("y", "the two points must differ"));
    }
    Ok((
        is_in_c_eps(&CarpetQuery::new(x, eps, pitch)?, soup)?,
        is_in_c_eps(&CarpetQuery::new(y, eps, pitch)?, soup)?,
    ))
}

/// Outcome of one annulus-crossing trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingTrial {
    pub eps: f64,
    pub success: bool,
    /// Curves contained in the annulus.
    pub curves_used: usize,
    /// Curves in the unit-disk soup.
    pub curves_total: usize,
    pub pitch: f64,
    pub seed: u64,
}

/// Soup in the unit disk used by the annulus-crossing trials.
pub fn crossing_soup(c: f64, shape: &ShapeMeasure, eps_min: f64, seed: u64) -> Result<Soup> {
    let spec = SoupSpec::with_cutoffs(c, shape.clone(), Domain::UnitDisk, eps_min, 2.0)?;
    sample_soup(&spec, seed)
}

/// The crossing events for several inner radii on one soup.
///
/// Each cell stores the largest distance to the origin among the curves
/// whose interior covers it. A curve sits in the annulus `{ε < |z| < 1}`
/// exactly when that distance exceeds `ε`, so the cell is blocked for `ε`
/// iff the stored value is above `ε`. The results are therefore coupled:
/// success for `ε` implies success for every larger `ε'`.
pub fn crossing_events(soup: &Soup, eps_list: &[f64], pitch: f64) -> Result<Vec<CrossingTrial>> {
    if soup.spec.domain != Domain::UnitDisk {
        return Err(Error::InvalidDomain("annulus crossings need the unit disk".into()));
    }
    for &e in eps_list {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::arg("eps", format!("must lie in (0, 1), got {e}")));
        }
        CarpetQuery::new(Point::ORIGIN, e, pitch)?;
    }
    let eps_lo = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let half = pitch * (1.0 / pitch).ceil();
    let n = (2.0 * half / pitch).round() as usize;
    let grid = Grid::new(Point::new(-half, -half), pitch, n, n)?;
    let d_in: Vec<f64> = soup.curves.iter().map(|g| g.distance_to(Point::ORIGIN)).collect();
    CROSSING_BUFFERS.with_borrow_mut(|(level, reached, stack)| {
        level.clear();
        level.resize(grid.len(), 0.0);
        for (g, &d) in soup.curves.iter().zip(&d_in) {
            if d > eps_lo {
                let d = d as f32;
                for_each_interior_cell(g, &grid, |k| level[k] = level[k].max(d));
            }
        }
        reached.resize(grid.len(), false);
        Ok(eps_list
            .iter()
            .map(|&eps| {
                reached.fill(false);
                CrossingTrial {
                    eps,
                    success: annulus_flood(&grid, level, eps, reached, stack),
                    curves_used: d_in.iter().filter(|&&d| d > eps).count(),
                    curves_total: soup.len(),
                    pitch,
                    seed: soup.seed,
                }
            })
            .collect())
    })
}

type Buffers = (Vec<f32>, Vec<bool>, Vec<usize>);

thread_local! {
    // Fine rasters are large; reuse them across trials on the same worker.
    static CROSSING_BUFFERS: std::cell::RefCell<Buffers> = const { std::cell::RefCell::new((Vec::new(), Vec::new(), Vec::new())) };
}

/// Nearest and farthest distance from the origin to the square of cell `(i, j)`.
#[inline]
fn cell_span(grid: &Grid, i: usize, j: usize) -> (f64, f64) {
    let p = grid.center(i, j);
    let h = 0.5 * grid.pitch;
    let (ax, ay) = (p.x.abs(), p.y.abs());
    ((ax - h).max(0.0).hypot((ay - h).max(0.0)), (ax + h).hypot(ay + h))
}

/// Flood free cells (`level ≤ eps`) from the cells meeting `∂B(0,ε)`; true as
/// soon as a cell meeting the unit circle is reached. Any 4-connected path
/// leaving the unit disk passes through such a cell, so checking the far
/// corner is enough.
fn annulus_flood(grid: &Grid, level: &[f32], eps: f64, reached: &mut [bool], stack: &mut Vec<usize>) -> bool {
    stack.clear();
    let lim = eps as f32;
    let nx = grid.nx;
    let rows = grid.rows_between(-eps - grid.pitch, eps + grid.pitch);
    let cols = grid.cols_between(-eps - grid.pitch, eps + grid.pitch);
    if let (Some((j0, j1)), Some((i0, i1))) = (rows, cols) {
        for j in j0..=j1 {
            for i in i0..=i1 {
                let (near, far) = cell_span(grid, i, j);
                let k = grid.index(i, j);
                if near <= eps && eps <= far && level[k] <= lim {
                    stack.push(k);
                }
            }
        }
    }
    let n = grid.len();
    while let Some(k) = stack.pop() {
        if reached[k] {
            continue;
        }
        reached[k] = true;
        let i = k % nx;
        if cell_span(grid, i, k / nx).1 >= 1.0 {
            return true;
        }
        let mut push = |m: usize| {
            if !reached[m] && level[m] <= lim {
                stack.push(m);
            }
        };
        if i + 1 < nx {
            push(k + 1);
        }
        if i > 0 {
            push(k - 1);
        }
        if k + nx < n {
            push(k + nx);
        }
        if k >= nx {
            push(k - nx);
        }
    }
    false
}

/// One annulus-crossing trial: is there a path from `∂B(0,ε)` to the unit
/// circle avoiding the interiors of the soup curves contained in the annulus?
pub fn event_a_eps(c: f64, shape: &ShapeMeasure, eps: f64, pitch: f64, eps_min: f64, seed: u64) -> Result<CrossingTrial> {
    let soup = crossing_soup(c, shape, eps_min, seed)?;
    Ok(crossing_events(&soup, &[eps], pitch)?.remove(0))
}

/// `F_ε` on the bounding box of `window`: occupied cells are those in the
/// window whose centre avoids the interiors of all curves of diameter above `eps_cut`.
pub fn remaining_raster(soup: &Soup, eps_cut: f64, window: &Domain, pitch: f64) -> Result<Raster> {
    if !(eps_cut >= soup.spec.eps_min) {
        return Err(Error::arg(
            "eps_cut",
            format!("must be ≥ eps_min = {}, got {eps_cut}", soup.spec.eps_min),
        ));
    }
    let big: Vec<Curve> = soup.curves.iter().filter(|g| g.diameter() > eps_cut).cloned().collect();
    let mut r = rasterize_interiors(&big, window, pitch)?;
    for k in 0..r.grid.len() {
        r.occupied[k] = !r.occupied[k] && window.contains_point(r.grid.center_of(k));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soup::sample_plane_soup;
    use crate::BBox;

    fn soup_of(curves: Vec<Curve>) -> Soup {
        let spec = SoupSpec::new(1.0, ShapeMeasure::circle(), Domain::UnitDisk, 0.01).unwrap();
        Soup {
            spec,
            curves,
            seed: 0,
            candidates: 0,
        }
    }

    fn circle(x: f64, y: f64, d: f64) -> Curve {
        Curve::circle(Point::new(x, y), d).unwrap()
    }

    #[test]
    fn empty_soup_is_all_carpet() {
        let s = soup_of(vec![]);
        for x in [Point::ORIGIN, Point::new(0.5, 0.3), Point::new(-0.9, 0.0)] {
            assert!(is_in_c_eps(&CarpetQuery::new(x, 0.1, 0.02).unwrap(), &s).unwrap());
        }
        assert_eq!(two_point_c_eps(Point::ORIGIN, Point::new(0.2, 0.0), &s, 0.1, 0.02).unwrap(), (true, true));
    }

    #[test]
    fn surrounding_circle_blocks_only_when_far() {
        let s = soup_of(vec![circle(0.0, 0.0, 1.0)]);
        let far = CarpetQuery::new(Point::new(0.1, 0.0), 0.1, 0.01).unwrap();
        assert!(!is_in_c_eps(&far, &s).unwrap());
        let near = CarpetQuery::new(Point::new(0.45, 0.0), 0.1, 0.01).unwrap();
        assert!(is_in_c_eps(&near, &s).unwrap());
    }

    #[test]
    fn resolution_is_enforced() {
        assert!(matches!(CarpetQuery::new(Point::ORIGIN, 0.1, 0.03), Err(Error::Resolution { .. })));
    }

    #[test]
    fn crossing_blocked_by_a_ring_of_discs() {
        // an annulus-shaped barrier made of overlapping discs around the origin
        let curves: Vec<Curve> = (0..24)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 24.0;
                circle(0.5 * t.cos(), 0.5 * t.sin(), 0.2)
            })
            .collect();
        let s = soup_of(curves);
        let t = crossing_events(&s, &[0.1, 0.3, 0.45], 0.005).unwrap();
        assert_eq!(t.iter().map(|t| t.success).collect::<Vec<_>>(), vec![false, false, true]);
        assert_eq!(t[0].curves_used, 24);
        assert_eq!(t[2].curves_used, 0);
        let empty = crossing_events(&soup_of(vec![]), &[0.1], 0.01).unwrap();
        assert!(empty[0].success);
    }

    #[test]
    fn crossing_events_are_coupled() {
        let shape = ShapeMeasure::circle();
        for seed in 0..20 {
            let soup = crossing_soup(0.5, &shape, 0.0125, seed).unwrap();
            let t = crossing_events(&soup, &[0.4, 0.2, 0.1, 0.05], 0.05 / 8.0).unwrap();
            for w in t.windows(2) {
                assert!(w[0].success || !w[1].success);
                assert!(w[0].curves_used <= w[1].curves_used);
            }
        }
    }

    #[test]
    fn stick_soup_leaves_everything() {
        let spec = SoupSpec::new(1.0, ShapeMeasure::stick(), Domain::square(1.0).unwrap(), 0.05).unwrap();
        let soup = sample_soup(&spec, 1).unwrap();
        assert!(!soup.is_empty());
        let r = remaining_raster(&soup, 0.05, &spec.domain, 0.02).unwrap();
        assert_eq!(r.count(), r.grid.len());
    }

    #[test]
    fn remaining_set_shrinks_with_the_cut() {
        let w = BBox::new(Point::ORIGIN, Point::new(1.0, 1.0));
        let soup = sample_plane_soup(0.5, &ShapeMeasure::circle(), w, 0.02, 2.0, 3).unwrap();
        let win = Domain::from_bbox(w).unwrap();
        let mut prev: Option<Raster> = None;
        for cut in [0.5, 0.2, 0.1, 0.05, 0.02] {
            let r = remaining_raster(&soup, cut, &win, 0.01).unwrap();
            if let Some(p) = &prev {
                assert!(r.occupied.iter().zip(&p.occupied).all(|(a, b)| !a || *b));
            }
            prev = Some(r);
        }
        assert!(remaining_raster(&soup, 0.01, &win, 0.01).is_err());
    }

    #[test]
    fn carpet_membership_is_monotone_and_ball_stable() {
        let spec = SoupSpec::new(0.4, ShapeMeasure::circle(), Domain::UnitDisk, 0.02).unwrap();
        for seed in 0..6 {
            let soup = sample_soup(&spec, seed).unwrap();
            let x = Point::new(0.1, -0.05);
            let mut prev = true;
            // one raster for every ε keeps the queries coupled
            for eps in [0.4, 0.2, 0.1, 0.05] {
                let now = is_in_c_eps(&CarpetQuery::new(x, eps, 0.05 / 8.0).unwrap(), &soup).unwrap();
                assert!(prev || !now);
                prev = now;
            }
            let eps = 0.16;
            if is_in_c_eps(&CarpetQuery::new(x, eps / 2.0, eps / 16.0).unwrap(), &soup).unwrap() {
                for k in 0..8 {
                    let t = k as f64 * std::f64::consts::PI / 4.0;
                    let y = x + 0.07 * Point::new(t.cos(), t.sin());
                    assert!(is_in_c_eps(&CarpetQuery::new(y, eps, eps / 16.0).unwrap(), &soup).unwrap());
                }
            }
        }
    }
}
