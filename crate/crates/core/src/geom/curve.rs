use super::lattice::LatticeLoop;
use super::segment::{circle_segment_angles, point_segment_distance, segment_hits, segments_intersect};
use super::{BBox, Point};
use crate::{Error, Result};
use std::f64::consts::PI;

/// A closed polygon given by its vertices; the closing edge is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyLoop {
    vertices: Vec<Point>,
}

impl PolyLoop {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidCurve("polygon needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidCurve("polygon vertex is not finite".into()));
        }
        Ok(PolyLoop { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Non-zero winding rule.
    fn winding_contains(&self, p: Point) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut wn = 0i32;
        for k in 0..n {
            let a = v[k];
            let b = v[(k + 1) % n];
            let side = (b - a).cross(p - a);
            if a.y <= p.y {
                if b.y > p.y && side > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && side < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }
}

/// One planar curve of a soup.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Circle { center: Point, diam: f64 },
    Stick { a: Point, b: Point },
    Poly(PolyLoop),
    Lattice(LatticeLoop),
}

impl Curve {
    pub fn circle(center: Point, diam: f64) -> Result<Curve> {
        if !center.is_finite() {
            return Err(Error::InvalidCurve("circle centre is not finite".into()));
        }
        if !(diam > 0.0 && diam.is_finite()) {
            return Err(Error::InvalidCurve(format!("circle diameter must be > 0, got {diam}")));
        }
        Ok(Curve::Circle { center, diam })
    }

    pub fn stick(a: Point, b: Point) -> Result<Curve> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidCurve("stick endpoint is not finite".into()));
        }
        if a == b {
            return Err(Error::InvalidCurve("stick endpoints coincide".into()));
        }
        Ok(Curve::Stick { a, b })
    }

    pub fn poly(vertices: Vec<Point>) -> Result<Curve> {
        PolyLoop::new(vertices).map(Curve::Poly)
    }

    pub fn lattice(origin: (i64, i64), steps: Vec<super::Step>, mesh: f64) -> Result<Curve> {
        LatticeLoop::new(origin, steps, mesh).map(Curve::Lattice)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Curve::Circle { center, diam } => Curve::circle(*center, *diam).map(|_| ()),
            Curve::Stick { a, b } => Curve::stick(*a, *b).map(|_| ()),
            Curve::Poly(p) => PolyLoop::new(p.vertices.clone()).map(|_| ()),
            Curve::Lattice(_) => Ok(()),
        }
    }

    /// Whether the curve bounds a (possibly empty) open interior. Sticks do not.
    pub fn has_interior(&self) -> bool {
        !matches!(self, Curve::Stick { .. })
    }

    /// Vertices of polygonal curves (sticks give their two endpoints); empty for circles.
    fn vertices(&self) -> &[Point] {
        match self {
            Curve::Circle { .. } => &[],
            Curve::Stick { a, .. } => std::slice::from_ref(a),
            Curve::Poly(p) => &p.vertices,
            Curve::Lattice(l) => l.vertices(),
        }
    }

    /// Visit every edge of the trace as `(start, end)`.
    pub(crate) fn for_each_segment(&self, mut f: impl FnMut(Point, Point)) {
        match self {
            Curve::Circle { .. } => {}
            Curve::Stick { a, b } => f(*a, *b),
            _ => {
                let v = self.vertices();
                let n = v.len();
                for k in 0..n {
                    f(v[k], v[(k + 1) % n]);
                }
            }
        }
    }

    fn point_set(&self) -> Vec<Point> {
        match self {
            Curve::Circle { .. } => Vec::new(),
            Curve::Stick { a, b } => vec![*a, *b],
            _ => self.vertices().to_vec(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Curve::Circle { diam, .. } => *diam,
            Curve::Stick { a, b } => a.dist(*b),
            _ => point_set_diameter(self.vertices()),
        }
    }

    /// Leftmost point, ties broken by the smallest y.
    pub fn anchor(&self) -> Point {
        match self {
            Curve::Circle { center, diam } => Point::new(center.x - 0.5 * diam, center.y),
            Curve::Stick { a, b } => {
                if b.left_lower_than(*a) {
                    *b
                } else {
                    *a
                }
            }
            _ => {
                let v = self.vertices();
                v.iter()
                    .copied()
                    .fold(v[0], |best, p| if p.left_lower_than(best) { p } else { best })
            }
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Curve::Circle { center, diam } => BBox::around(*center, 0.5 * diam),
            Curve::Stick { a, b } => BBox::of_points(&[*a, *b]),
            _ => BBox::of_points(self.vertices()),
        }
    }

    /// The image `z + ρ·γ`.
    pub fn place(&self, z: Point, rho: f64) -> Result<Curve> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidScale(rho));
        }
        let map = |p: Point| z + rho * p;
        Ok(match self {
            Curve::Circle { center, diam } => Curve::Circle {
                center: map(*center),
                diam: rho * diam,
            },
            Curve::Stick { a, b } => Curve::Stick { a: map(*a), b: map(*b) },
            Curve::Poly(p) => Curve::Poly(PolyLoop {
                vertices: p.vertices.iter().map(|&v| map(v)).collect(),
            }),
            Curve::Lattice(l) => Curve::Lattice(l.placed(z, rho)),
        })
    }

    /// Euclidean distance from `p` to the trace.
    pub fn distance_to(&self, p: Point) -> f64 {
        match self {
            Curve::Circle { center, diam } => (p.dist(*center) - 0.5 * diam).abs(),
            _ => {
                let mut best = f64::INFINITY;
                self.for_each_segment(|a, b| best = best.min(point_segment_distance(p, a, b)));
                best
            }
        }
    }

    /// Largest distance from `p` to a point of the trace.
    pub fn max_distance_to(&self, p: Point) -> f64 {
        match self {
            Curve::Circle { center, diam } => p.dist(*center) + 0.5 * diam,
            _ => self.point_set().iter().map(|v| v.dist(p)).fold(0.0, f64::max),
        }
    }

    /// True iff `p` lies in the open filled interior. Sticks have none.
    pub fn interior_contains(&self, p: Point) -> bool {
        match self {
            Curve::Circle { center, diam } => p.dist(*center) < 0.5 * diam,
            Curve::Stick { .. } => false,
            Curve::Poly(poly) => poly.winding_contains(p),
            Curve::Lattice(l) => l.fill_contains(p),
        }
    }

    /// Length of the trace.
    pub fn perimeter(&self) -> f64 {
        match self {
            Curve::Circle { diam, .. } => PI * diam,
            _ => {
                let mut s = 0.0;
                self.for_each_segment(|a, b| s += a.dist(b));
                s
            }
        }
    }
}

fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn point_set_diameter(points: &[Point]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max(hull[i].dist(hull[j]));
        }
    }
    best
}

/// Largest distance between a point of `a` and a point of `b`.
pub fn farthest_distance(a: &Curve, b: &Curve) -> f64 {
    match (a, b) {
        (Curve::Circle { center: ca, diam: da }, Curve::Circle { center: cb, diam: db }) => {
            ca.dist(*cb) + 0.5 * (da + db)
        }
        (Curve::Circle { center, diam }, other) | (other, Curve::Circle { center, diam }) => {
            other.max_distance_to(*center) + 0.5 * diam
        }
        _ => {
            let pa = a.point_set();
            let pb = b.point_set();
            let mut best = 0.0f64;
            for &p in &pa {
                for &q in &pb {
                    best = best.max(p.dist(q));
                }
            }
            best
        }
    }
}

/// Whether the trace of `a` meets the open interior of `b`.
fn meets_interior(a: &Curve, b: &Curve) -> bool {
    debug_assert!(b.has_interior());
    if let Curve::Circle { center, diam } = b {
        return a.distance_to(*center) < 0.5 * diam;
    }
    let bb = b.bbox();
    match a {
        Curve::Circle { center, diam } => {
            let r = 0.5 * diam;
            let mut angles = Vec::new();
            b.for_each_segment(|p, q| circle_segment_angles(*center, r, p, q, &mut angles));
            let at = |t: f64| *center + r * Point::new(t.cos(), t.sin());
            if angles.is_empty() {
                return b.interior_contains(at(0.0));
            }
            angles.sort_by(f64::total_cmp);
            let n = angles.len();
            (0..n).any(|k| {
                let lo = angles[k];
                let hi = if k + 1 < n { angles[k + 1] } else { angles[0] + 2.0 * PI };
                hi > lo && b.interior_contains(at(0.5 * (lo + hi)))
            })
        }
        _ => {
            let mut hits = Vec::new();
            let mut found = false;
            a.for_each_segment(|p, q| {
                if found || !BBox::of_points(&[p, q]).intersects(&bb) {
                    return;
                }
                hits.clear();
                hits.push(0.0);
                hits.push(1.0);
                b.for_each_segment(|c, d| segment_hits(p, q, c, d, &mut hits));
                hits.sort_by(f64::total_cmp);
                for w in hits.windows(2) {
                    if w[1] > w[0] && b.interior_contains(p + (0.5 * (w[0] + w[1])) * (q - p)) {
                        found = true;
                        return;
                    }
                }
            });
            found
        }
    }
}

/// The crossing relation that generates soup clusters.
///
/// Two interior-bearing curves cross when each meets the interior of the
/// other. A stick crosses a loop when it meets the loop's interior, and two
/// sticks cross when the segments intersect. The relation is symmetric.
pub fn curves_cross(a: &Curve, b: &Curve) -> bool {
    if !a.bbox().intersects(&b.bbox()) {
        return false;
    }
    match (a, b) {
        (Curve::Circle { center: ca, diam: da }, Curve::Circle { center: cb, diam: db }) => {
            let d = ca.dist(*cb);
            let (ra, rb) = (0.5 * da, 0.5 * db);
            d < ra + rb && d > (ra - rb).abs()
        }
        (Curve::Stick { a: p, b: q }, Curve::Stick { a: c, b: d }) => segments_intersect(*p, *q, *c, *d),
        (Curve::Stick { .. }, _) => meets_interior(a, b),
        (_, Curve::Stick { .. }) => meets_interior(b, a),
        _ => meets_interior(a, b) && meets_interior(b, a),
    }
}
