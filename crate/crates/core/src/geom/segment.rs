use super::Point;

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + t * d)
}

/// Parameters `t ∈ [0,1]` along `a→b` where the closed segment `c→d` touches it.
/// Collinear overlaps contribute both ends of the shared stretch.
pub(crate) fn segment_hits(a: Point, b: Point, c: Point, d: Point, out: &mut Vec<f64>) {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    let qp = c - a;
    let scale = r.norm() * s.norm();
    if denom.abs() <= 1e-14 * scale {
        // parallel
        if qp.cross(r).abs() > 1e-12 * (r.norm() * qp.norm()).max(f64::MIN_POSITIVE) {
            return;
        }
        let rr = r.dot(r);
        if rr == 0.0 {
            return;
        }
        let t0 = qp.dot(r) / rr;
        let t1 = (d - a).dot(r) / rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if lo <= hi {
            out.push(lo);
            out.push(hi);
        }
        return;
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        out.push(t);
    }
}

pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let mut v = Vec::new();
    segment_hits(a, b, c, d, &mut v);
    !v.is_empty()
}

/// Angles (atan2 convention) at which the circle meets the closed segment `a→b`.
pub(crate) fn circle_segment_angles(center: Point, r: f64, a: Point, b: Point, out: &mut Vec<f64>) {
    let d = b - a;
    let f = a - center;
    let qa = d.dot(d);
    if qa == 0.0 {
        return;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.dot(f) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
        if (0.0..=1.0).contains(&t) {
            let p = a + t * d - center;
            out.push(p.y.atan2(p.x));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments_hit_once() {
        let mut v = Vec::new();
        segment_hits(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
            &mut v,
        );
        assert_eq!(v.len(), 1);
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collinear_overlap_reports_both_ends() {
        let mut v = Vec::new();
        segment_hits(
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(3.0, 0.0),
            &mut v,
        );
        assert_eq!(v, vec![0.25, 0.75]);
    }

    #[test]
    fn distance_to_segment_clamps_to_ends() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert_eq!(point_segment_distance(Point::new(2.0, 0.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point::new(0.5, 3.0), a, b), 3.0);
    }
}
