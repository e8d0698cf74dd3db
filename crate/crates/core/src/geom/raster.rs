use super::segment::point_segment_distance;
use super::{BBox, Curve, Domain, Point};
use crate::{Error, Result};
use std::f64::consts::PI;

/// A uniform grid of square cells; cell `(i,j)` covers
/// `[origin.x + i·pitch, origin.x + (i+1)·pitch) × [origin.y + j·pitch, …)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub origin: Point,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(origin: Point, pitch: f64, nx: usize, ny: usize) -> Result<Grid> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::arg("pitch", format!("must be > 0, got {pitch}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::arg("pitch", "grid must have at least one cell"));
        }
        Ok(Grid { origin, pitch, nx, ny })
    }

    /// Smallest grid anchored at `b.min` that covers `b`.
    pub fn covering(b: &BBox, pitch: f64) -> Result<Grid> {
        let nx = (b.width() / pitch).ceil().max(1.0) as usize;
        let ny = (b.height() / pitch).ceil().max(1.0) as usize;
        Grid::new(b.min, pitch, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.pitch,
            self.origin.y + (j as f64 + 0.5) * self.pitch,
        )
    }

    #[inline]
    pub fn center_of(&self, k: usize) -> Point {
        self.center(k % self.nx, k / self.nx)
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.pitch).floor();
        let fy = ((p.y - self.origin.y) / self.pitch).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Cells along one axis whose centres lie strictly inside `(lo, hi)`.
    #[inline]
    fn centers_between(lo: f64, hi: f64, origin: f64, pitch: f64, n: usize) -> Option<(usize, usize)> {
        let a = ((lo - origin) / pitch - 0.5).floor() + 1.0;
        let b = ((hi - origin) / pitch - 0.5).ceil() - 1.0;
        let a = a.max(0.0);
        let b = b.min(n as f64 - 1.0);
        if a > b {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }

    #[inline]
    pub(crate) fn cols_between(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        Self::centers_between(lo, hi, self.origin.x, self.pitch, self.nx)
    }

    #[inline]
    pub(crate) fn rows_between(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        Self::centers_between(lo, hi, self.origin.y, self.pitch, self.ny)
    }

    /// Indices of the cells on the outer ring of the grid.
    pub fn border(&self) -> impl Iterator<Item = usize> + '_ {
        let (nx, ny) = (self.nx, self.ny);
        (0..nx)
            .flat_map(move |i| [i, i + (ny - 1) * nx])
            .chain((0..ny).flat_map(move |j| [j * nx, nx - 1 + j * nx]))
    }
}

/// A bit grid over a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub grid: Grid,
    pub occupied: Vec<bool>,
}

impl Raster {
    pub fn empty(grid: Grid) -> Raster {
        Raster {
            grid,
            occupied: vec![false; grid.len()],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.occupied[self.grid.index(i, j)]
    }

    pub fn count(&self) -> usize {
        self.occupied.iter().filter(|b| **b).count()
    }

    pub fn occupied_area(&self) -> f64 {
        self.count() as f64 * self.grid.pitch * self.grid.pitch
    }

    /// Binary PGM (P5), top row first, 255 for occupied cells.
    pub fn to_pgm(&self) -> Vec<u8> {
        let Grid { nx, ny, .. } = self.grid;
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        out.reserve(nx * ny);
        for j in (0..ny).rev() {
            for i in 0..nx {
                out.push(if self.get(i, j) { 255 } else { 0 });
            }
        }
        out
    }
}

/// Call `f` with the index of every cell whose centre lies in the curve's interior.
pub(crate) fn for_each_interior_cell(curve: &Curve, grid: &Grid, mut f: impl FnMut(usize)) {
    match curve {
        Curve::Circle { center, diam } => {
            let r = 0.5 * diam;
            let r2 = r * r;
            let Some((j0, j1)) = grid.rows_between(center.y - r, center.y + r) else {
                return;
            };
            for j in j0..=j1 {
                let dy = grid.origin.y + (j as f64 + 0.5) * grid.pitch - center.y;
                let h2 = r2 - dy * dy;
                if h2 <= 0.0 {
                    continue;
                }
                let h = h2.sqrt();
                if let Some((i0, i1)) = grid.cols_between(center.x - h, center.x + h) {
                    let row = j * grid.nx;
                    for i in i0..=i1 {
                        f(row + i);
                    }
                }
            }
        }
        Curve::Stick { .. } => {}
        _ => {
            let b = curve.bbox();
            let (Some((i0, i1)), Some((j0, j1))) =
                (grid.cols_between(b.min.x, b.max.x), grid.rows_between(b.min.y, b.max.y))
            else {
                return;
            };
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if curve.interior_contains(grid.center(i, j)) {
                        f(grid.index(i, j));
                    }
                }
            }
        }
    }
}

/// Call `f` for cells crossed by the trace. Points are sampled at most half a
/// pitch apart, so consecutive marked cells are 8-adjacent and the marked set
/// blocks any 4-connected flood.
pub(crate) fn for_each_trace_cell(curve: &Curve, grid: &Grid, mut f: impl FnMut(usize)) {
    let mut mark = |p: Point| {
        if let Some((i, j)) = grid.cell_of(p) {
            f(grid.index(i, j));
        }
    };
    match curve {
        Curve::Circle { center, diam } => {
            let r = 0.5 * diam;
            let n = ((2.0 * PI * r) / (0.5 * grid.pitch)).ceil().max(8.0) as usize;
            for k in 0..n {
                let t = 2.0 * PI * k as f64 / n as f64;
                mark(*center + r * Point::new(t.cos(), t.sin()));
            }
        }
        _ => curve.for_each_segment(|a, b| {
            let n = (a.dist(b) / (0.5 * grid.pitch)).ceil().max(1.0) as usize;
            for k in 0..=n {
                mark(a + (k as f64 / n as f64) * (b - a));
            }
        }),
    }
}

/// 4-connected flood over `passable` cells from `seeds`; returns the reached set.
pub fn flood(grid: &Grid, passable: &[bool], seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut reached = vec![false; grid.len()];
    let mut stack: Vec<usize> = seeds.into_iter().filter(|&k| passable[k]).collect();
    let nx = grid.nx;
    let n = grid.len();
    while let Some(k) = stack.pop() {
        if reached[k] {
            continue;
        }
        reached[k] = true;
        let i = k % nx;
        if i + 1 < nx && passable[k + 1] && !reached[k + 1] {
            stack.push(k + 1);
        }
        if i > 0 && passable[k - 1] && !reached[k - 1] {
            stack.push(k - 1);
        }
        if k + nx < n && passable[k + nx] && !reached[k + nx] {
            stack.push(k + nx);
        }
        if k >= nx && passable[k - nx] && !reached[k - nx] {
            stack.push(k - nx);
        }
    }
    reached
}

/// Area of the filling of the union of `curves`, estimated on a raster.
///
/// Cells are blocked when their centre is interior to some curve or the trace
/// passes through them; the exterior is flooded from the border. Every
/// non-exterior cell counts except trace-only cells facing the exterior,
/// whose centres lie outside the filling. The error is O(perimeter·pitch).
pub fn filled_area(curves: &[Curve], pitch: f64) -> Result<f64> {
    if curves.is_empty() {
        return Ok(0.0);
    }
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::arg("pitch", format!("must be > 0, got {pitch}")));
    }
    let bb = curves
        .iter()
        .map(Curve::bbox)
        .reduce(|a, b| a.union(&b))
        .unwrap()
        .inflate(2.0 * pitch);
    let grid = Grid::covering(&bb, pitch)?;
    let mut interior = vec![false; grid.len()];
    let mut trace = vec![false; grid.len()];
    for c in curves {
        for_each_interior_cell(c, &grid, |k| interior[k] = true);
        for_each_trace_cell(c, &grid, |k| trace[k] = true);
    }
    let passable: Vec<bool> = interior.iter().zip(&trace).map(|(a, b)| !a && !b).collect();
    let outside = flood(&grid, &passable, grid.border());
    let nx = grid.nx;
    let n = grid.len();
    let touches_outside = |k: usize| {
        let i = k % nx;
        (i + 1 < nx && outside[k + 1])
            || (i > 0 && outside[k - 1])
            || (k + nx < n && outside[k + nx])
            || (k >= nx && outside[k - nx])
    };
    let count = (0..n)
        .filter(|&k| !outside[k] && !(trace[k] && !interior[k] && touches_outside(k)))
        .count();
    Ok(count as f64 * pitch * pitch)
}

/// Area of `{z : d(z, γ) ≤ r}`. Exact for circles and sticks, raster otherwise.
pub fn neighborhood_area(curve: &Curve, r: f64, pitch: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::arg("r", format!("must be > 0, got {r}")));
    }
    match curve {
        Curve::Circle { diam, .. } => {
            let rad = 0.5 * diam;
            Ok(if r <= rad {
                4.0 * PI * rad * r
            } else {
                PI * (rad + r) * (rad + r)
            })
        }
        Curve::Stick { a, b } => Ok(2.0 * r * a.dist(*b) + PI * r * r),
        _ => {
            if !(pitch > 0.0 && pitch.is_finite()) {
                return Err(Error::arg("pitch", format!("must be > 0, got {pitch}")));
            }
            let grid = Grid::covering(&curve.bbox().inflate(r + 2.0 * pitch), pitch)?;
            let mut hit = vec![false; grid.len()];
            curve.for_each_segment(|a, b| {
                let sb = BBox::of_points(&[a, b]).inflate(r);
                let (Some((i0, i1)), Some((j0, j1))) =
                    (grid.cols_between(sb.min.x, sb.max.x), grid.rows_between(sb.min.y, sb.max.y))
                else {
                    return;
                };
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let k = grid.index(i, j);
                        if !hit[k] && point_segment_distance(grid.center(i, j), a, b) <= r {
                            hit[k] = true;
                        }
                    }
                }
            });
            Ok(hit.iter().filter(|h| **h).count() as f64 * pitch * pitch)
        }
    }
}

/// Raster of the union of curve interiors over the bounding box of `window`.
pub fn rasterize_interiors(curves: &[Curve], window: &Domain, pitch: f64) -> Result<Raster> {
    window.validate()?;
    let grid = Grid::covering(&window.bbox(), pitch)?;
    let mut r = Raster::empty(grid);
    for c in curves {
        for_each_interior_cell(c, &grid, |k| r.occupied[k] = true);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Step::*;

    fn unit_circle() -> Curve {
        Curve::circle(Point::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn disc_filled_area() {
        let a = filled_area(&[unit_circle()], 1.0 / 512.0).unwrap();
        assert!((a / (PI / 4.0) - 1.0).abs() < 0.02, "{a}");
    }

    #[test]
    fn square_filled_area() {
        let sq = Curve::poly(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let a = filled_area(&[sq], 1.0 / 512.0).unwrap();
        assert!((a - 1.0).abs() < 0.01, "{a}");
    }

    #[test]
    fn stick_filled_area_vanishes_with_pitch() {
        let s = Curve::stick(Point::new(0.1, 0.2), Point::new(0.9, 0.7)).unwrap();
        for pitch in [0.1, 0.01, 0.001] {
            let a = filled_area(std::slice::from_ref(&s), pitch).unwrap();
            assert!(a <= s.perimeter() * 2.0 * pitch, "{pitch}: {a}");
        }
        assert_eq!(filled_area(&[], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn ring_of_sticks_is_filled() {
        let p = |x, y| Point::new(x, y);
        let sticks = [
            Curve::stick(p(0.0, 0.0), p(1.0, 0.0)).unwrap(),
            Curve::stick(p(1.0, 0.0), p(1.0, 1.0)).unwrap(),
            Curve::stick(p(1.0, 1.0), p(0.0, 1.0)).unwrap(),
            Curve::stick(p(0.0, 1.0), p(0.0, 0.0)).unwrap(),
        ];
        let a = filled_area(&sticks, 1.0 / 256.0).unwrap();
        assert!((a - 1.0).abs() < 0.02, "{a}");
    }

    #[test]
    fn lattice_fill_matches_exact_faces() {
        let l = Curve::lattice((0, 0), vec![E, E, N, N, W, S, W, S], 0.5).unwrap();
        let exact = match &l {
            Curve::Lattice(l) => l.filled_area(),
            _ => unreachable!(),
        };
        assert_eq!(exact, 3.0 * 0.25);
        let a = filled_area(&[l], 1.0 / 256.0).unwrap();
        assert!((a - exact).abs() < 0.02, "{a}");
    }

    #[test]
    fn exact_neighborhoods() {
        let a = neighborhood_area(&unit_circle(), 0.1, 0.0).unwrap();
        assert!((a - 0.2 * PI).abs() < 1e-12);
        let s = Curve::stick(Point::new(0.0, 0.0), Point::new(1.0, 0.0)).unwrap();
        let a = neighborhood_area(&s, 0.1, 0.0).unwrap();
        assert!((a - (0.2 + PI * 0.01)).abs() < 1e-12);
        let a = neighborhood_area(&unit_circle(), 10.0, 0.0).unwrap();
        assert!((a - PI * 10.5 * 10.5).abs() < 1e-9);
    }

    #[test]
    fn raster_neighborhood_of_square_loop() {
        // r-neighbourhood of a unit square's boundary: (1+2r)² − (1−2r)² + corners rounded
        let sq = Curve::poly(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let r = 0.1;
        let exact = (1.0 + 2.0 * r) * (1.0 + 2.0 * r) - (4.0 - PI) * r * r - (1.0 - 2.0 * r) * (1.0 - 2.0 * r);
        let a = neighborhood_area(&sq, r, 1.0 / 1024.0).unwrap();
        assert!((a / exact - 1.0).abs() < 0.01, "{a} vs {exact}");
    }

    #[test]
    fn interior_rasters() {
        let win = Domain::square(1.0).unwrap();
        let pitch = 1.0 / 256.0;
        let empty = rasterize_interiors(&[], &win, pitch).unwrap();
        assert_eq!(empty.count(), 0);
        let one = rasterize_interiors(&[unit_circle()], &win, pitch).unwrap();
        assert!((one.occupied_area() / (PI / 4.0) - 1.0).abs() < 0.02);
        let nested = [unit_circle(), Curve::circle(Point::new(0.1, 0.0), 0.5).unwrap()];
        let two = rasterize_interiors(&nested, &win, pitch).unwrap();
        assert_eq!(two, one);
    }

    #[test]
    fn pgm_header_and_size() {
        let g = Grid::new(Point::ORIGIN, 1.0, 3, 2).unwrap();
        let mut r = Raster::empty(g);
        r.occupied[0] = true;
        let bytes = r.to_pgm();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 6);
        // cell (0,0) is the bottom-left, written in the last row
        assert_eq!(bytes[header.len() + 3], 255);
    }
}
