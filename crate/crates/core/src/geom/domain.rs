use super::{BBox, Curve, Point};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A bounded planar domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    UnitDisk,
    Disk { center: Point, radius: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Annulus { center: Point, r_in: f64, r_out: f64 },
}

impl Domain {
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Domain> {
        let d = Domain::Rect { x0, y0, x1, y1 };
        d.validate()?;
        Ok(d)
    }

    pub fn square(half: f64) -> Result<Domain> {
        Domain::rect(-half, -half, half, half)
    }

    pub fn from_bbox(b: BBox) -> Result<Domain> {
        Domain::rect(b.min.x, b.min.y, b.max.x, b.max.y)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::UnitDisk => true,
            Domain::Disk { center, radius } => center.is_finite() && radius > 0.0 && radius.is_finite(),
            Domain::Rect { x0, y0, x1, y1 } => {
                [x0, y0, x1, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1
            }
            Domain::Annulus { center, r_in, r_out } => {
                center.is_finite() && r_in > 0.0 && r_in < r_out && r_out.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}")))
        }
    }

    fn disk_params(&self) -> Option<(Point, f64, f64)> {
        match *self {
            Domain::UnitDisk => Some((Point::ORIGIN, 0.0, 1.0)),
            Domain::Disk { center, radius } => Some((center, 0.0, radius)),
            Domain::Annulus { center, r_in, r_out } => Some((center, r_in, r_out)),
            Domain::Rect { .. } => None,
        }
    }

    pub fn bbox(&self) -> BBox {
        match *self {
            Domain::Rect { x0, y0, x1, y1 } => BBox::new(Point::new(x0, y0), Point::new(x1, y1)),
            _ => {
                let (c, _, r) = self.disk_params().unwrap();
                BBox::around(c, r)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Rect { x0, y0, x1, y1 } => (x1 - x0).hypot(y1 - y0),
            _ => 2.0 * self.disk_params().unwrap().2,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Rect { .. } => self.bbox().area(),
            _ => {
                let (_, a, b) = self.disk_params().unwrap();
                std::f64::consts::PI * (b * b - a * a)
            }
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        match *self {
            Domain::Rect { .. } => self.bbox().contains(p),
            _ => {
                let (c, a, b) = self.disk_params().unwrap();
                let d = p.dist(c);
                d >= a && d <= b
            }
        }
    }

    /// Whether the whole curve lies in the (closed) domain.
    pub fn contains_curve(&self, curve: &Curve) -> bool {
        match *self {
            Domain::Rect { .. } => self.bbox().contains_box(&curve.bbox()),
            _ => {
                let (c, a, b) = self.disk_params().unwrap();
                curve.max_distance_to(c) <= b && (a == 0.0 || curve.distance_to(c) >= a)
            }
        }
    }

    /// Distance from `p` to the boundary of the domain.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match *self {
            Domain::Rect { x0, y0, x1, y1 } => {
                if self.contains_point(p) {
                    (p.x - x0).min(x1 - p.x).min(p.y - y0).min(y1 - p.y)
                } else {
                    let dx = (x0 - p.x).max(p.x - x1).max(0.0);
                    let dy = (y0 - p.y).max(p.y - y1).max(0.0);
                    dx.hypot(dy)
                }
            }
            _ => {
                let (c, a, b) = self.disk_params().unwrap();
                let d = p.dist(c);
                let outer = (d - b).abs();
                if a > 0.0 {
                    outer.min((d - a).abs())
                } else {
                    outer
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Domain::UnitDisk.validate().is_ok());
        assert!(Domain::rect(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Domain::Annulus { center: Point::ORIGIN, r_in: 1.0, r_out: 0.5 }.validate().is_err());
        assert!(Domain::Disk { center: Point::ORIGIN, radius: -1.0 }.validate().is_err());
    }

    #[test]
    fn containment() {
        let c = Curve::circle(Point::new(0.5, 0.0), 0.8).unwrap();
        assert!(Domain::UnitDisk.contains_curve(&c));
        let c = Curve::circle(Point::new(0.5, 0.0), 1.2).unwrap();
        assert!(!Domain::UnitDisk.contains_curve(&c));
        // a circle winding around the hole of an annulus without touching it
        let ring = Domain::Annulus { center: Point::ORIGIN, r_in: 0.1, r_out: 1.0 };
        let c = Curve::circle(Point::new(0.05, 0.0), 1.0).unwrap();
        assert!(ring.contains_curve(&c));
        let c = Curve::circle(Point::new(0.3, 0.0), 0.5).unwrap();
        assert!(!ring.contains_curve(&c));
    }

    #[test]
    fn json_shape() {
        let d: Domain = serde_json::from_str(r#"{"kind":"rect","x0":-1,"y0":-1,"x1":1,"y1":1}"#).unwrap();
        assert_eq!(d.bbox().area(), 4.0);
        let d: Domain = serde_json::from_str(r#"{"kind":"unit_disk"}"#).unwrap();
        assert_eq!(d, Domain::UnitDisk);
    }
}
