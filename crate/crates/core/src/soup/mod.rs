//! Shape measures and Poisson samplers for scale-invariant soups.
//!
//! A soup of intensity `c·μ` is sampled in the "place" form: a normalised
//! shape `γ` (diameter 1, anchor at the origin) is drawn from the shape
//! measure, a scale `ρ` from the density `∝ ρ⁻³` between the diameter
//! cutoffs, and an anchor position `z` uniformly; the curve is `z + ργ`.
//! Restricting to a domain keeps the curves contained in it. Because every
//! kept curve has its anchor inside the domain's bounding box, drawing `z`
//! on that box and thinning by containment is exact.

mod rw;
mod thin;

pub use rw::{
    loop_weight, per_site_mass, rw_area_check, sample_closed_walk, sample_rw_loop, sample_rw_loop_soup,
    RwAreaReport,
};
pub use thin::{beta, mu_l_r};

use crate::geom::{BBox, Curve, Domain, Point};
use crate::rng::{purpose, substream, StreamRng};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the half-length of a random-walk loop shape is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthRule {
    /// `P(n) ∝ C(2n,n)² 4^{-2n} / (2n)` on `1..=n_max`, the random-walk loop measure.
    #[default]
    LoopMeasure,
    /// Always `n = n_max`.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Circle,
    Stick,
    DiscreteStick {
        n: u32,
    },
    RwLoop {
        n_max: u32,
        #[serde(default)]
        length_rule: LengthRule,
    },
}

/// A finite measure on unit-diameter curves anchored at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeMeasure {
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(default = "unit_mass")]
    pub mass: f64,
}

fn unit_mass() -> f64 {
    1.0
}

impl ShapeMeasure {
    pub fn circle() -> Self {
        ShapeMeasure {
            kind: ShapeKind::Circle,
            mass: 1.0,
        }
    }

    pub fn stick() -> Self {
        ShapeMeasure {
            kind: ShapeKind::Stick,
            mass: 1.0,
        }
    }

    pub fn discrete_stick(n: u32) -> Self {
        ShapeMeasure {
            kind: ShapeKind::DiscreteStick { n },
            mass: 1.0,
        }
    }

    pub fn rw_loop(n_max: u32, length_rule: LengthRule) -> Self {
        ShapeMeasure {
            kind: ShapeKind::RwLoop { n_max, length_rule },
            mass: 1.0,
        }
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::arg("shape.mass", format!("must be > 0, got {}", self.mass)));
        }
        match self.kind {
            ShapeKind::DiscreteStick { n } if n < 3 => Err(Error::arg("shape.n", "n-gon needs n ≥ 3")),
            ShapeKind::RwLoop { n_max, .. } if n_max < 1 => Err(Error::arg("shape.n_max", "must be ≥ 1")),
            _ => Ok(()),
        }
    }

    /// Whether every shape has an empty interior.
    pub fn is_segment(&self) -> bool {
        matches!(self.kind, ShapeKind::Stick | ShapeKind::DiscreteStick { .. })
    }
}

/// Stick of unit length along direction `theta`, re-anchored at the origin.
fn normalized_stick(theta: f64) -> Curve {
    let u = 0.5 * Point::new(theta.cos(), theta.sin());
    let (a, b) = (Point::ORIGIN - u, u);
    let anchor = if b.left_lower_than(a) { b } else { a };
    Curve::Stick {
        a: a - anchor,
        b: b - anchor,
    }
}

/// Rescale and translate a curve to diameter 1 with its anchor at the origin.
pub fn normalize(curve: &Curve) -> Result<Curve> {
    let d = curve.diameter();
    let a = curve.anchor();
    curve.place(Point::new(-a.x / d, -a.y / d), 1.0 / d)
}

/// Draw one normalised curve from the shape measure.
pub fn sample_shape(shape: &ShapeMeasure, rng: &mut StreamRng) -> Curve {
    match shape.kind {
        ShapeKind::Circle => Curve::Circle {
            center: Point::new(0.5, 0.0),
            diam: 1.0,
        },
        ShapeKind::Stick => normalized_stick(PI * rng.random::<f64>()),
        ShapeKind::DiscreteStick { n } => {
            // u and -u give the same stick: fold the vertex angle into [0, π)
            let k = rng.random_range(0..n) as u64;
            let folded = (2 * k) % n as u64;
            normalized_stick(PI * folded as f64 / n as f64)
        }
        ShapeKind::RwLoop { n_max, length_rule } => {
            let n = match length_rule {
                LengthRule::Fixed => n_max,
                LengthRule::LoopMeasure => rw::sample_half_length(n_max, rng),
            };
            let l = sample_rw_loop(n, (0, 0), 1.0, rng);
            normalize(&Curve::Lattice(l)).expect("lattice loops have positive diameter")
        }
    }
}

/// Parameters of a soup restricted to a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoupSpec {
    pub c: f64,
    pub shape: ShapeMeasure,
    pub domain: Domain,
    pub eps_min: f64,
    pub rho_max: f64,
}

impl SoupSpec {
    /// Spec with the upper cutoff at the domain diameter.
    pub fn new(c: f64, shape: ShapeMeasure, domain: Domain, eps_min: f64) -> Result<Self> {
        let rho_max = domain.diameter();
        Self::with_cutoffs(c, shape, domain, eps_min, rho_max)
    }

    pub fn with_cutoffs(c: f64, shape: ShapeMeasure, domain: Domain, eps_min: f64, rho_max: f64) -> Result<Self> {
        let s = SoupSpec {
            c,
            shape,
            domain,
            eps_min,
            rho_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidSpec(format!("intensity c must be > 0, got {}", self.c)));
        }
        self.shape.validate()?;
        self.domain.validate()?;
        if !(self.eps_min > 0.0) {
            return Err(Error::InvalidSpec(format!("eps_min must be > 0, got {}", self.eps_min)));
        }
        if !(self.eps_min < self.rho_max) {
            return Err(Error::InvalidSpec(format!(
                "eps_min {} must be below rho_max {}",
                self.eps_min, self.rho_max
            )));
        }
        if self.rho_max > self.domain.diameter() * (1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "rho_max {} exceeds the domain diameter {}",
                self.rho_max,
                self.domain.diameter()
            )));
        }
        Ok(())
    }

    /// Mean number of candidates drawn on the domain's bounding box.
    pub fn candidate_intensity(&self) -> f64 {
        scale_mass(self.c * self.shape.mass * self.domain.bbox().area(), self.eps_min, self.rho_max)
    }
}

/// `k·∫_lo^hi dρ/ρ³`.
#[inline]
fn scale_mass(k: f64, lo: f64, hi: f64) -> f64 {
    0.5 * k * (lo.powi(-2) - hi.powi(-2))
}

/// Inverse CDF of the density `∝ ρ⁻³` on `[lo, hi]`.
#[inline]
pub fn sample_scale(lo: f64, hi: f64, u: f64) -> f64 {
    let a = lo.powi(-2);
    let b = hi.powi(-2);
    (a - u * (a - b)).powf(-0.5)
}

fn poisson(lambda: f64, rng: &mut StreamRng) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// A sampled soup: curves sorted by decreasing diameter, ties by sample order.
#[derive(Clone, Debug, PartialEq)]
pub struct Soup {
    pub spec: SoupSpec,
    pub curves: Vec<Curve>,
    pub seed: u64,
    /// Candidates drawn before the containment thinning.
    pub candidates: u64,
}

impl Soup {
    pub fn empty(spec: SoupSpec, seed: u64) -> Soup {
        Soup {
            spec,
            curves: Vec::new(),
            seed,
            candidates: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn acceptance(&self) -> f64 {
        if self.candidates == 0 {
            1.0
        } else {
            self.curves.len() as f64 / self.candidates as f64
        }
    }
}

/// A soup sampled at intensity `c_max` with an independent uniform mark per
/// curve. Keeping the curves with `mark·c_max ≤ c` gives a soup of intensity
/// `c`, and the soups are nested in `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedSoup {
    pub soup: Soup,
    pub marks: Vec<f64>,
}

impl MarkedSoup {
    pub fn restrict(&self, c: f64) -> Result<Soup> {
        let c_max = self.soup.spec.c;
        if !(c > 0.0 && c <= c_max) {
            return Err(Error::arg("c", format!("must lie in (0, {c_max}], got {c}")));
        }
        let mut spec = self.soup.spec.clone();
        spec.c = c;
        let curves = self
            .soup
            .curves
            .iter()
            .zip(&self.marks)
            .filter(|(_, &m)| m * c_max <= c)
            .map(|(g, _)| g.clone())
            .collect();
        Ok(Soup {
            spec,
            curves,
            seed: self.soup.seed,
            candidates: self.soup.candidates,
        })
    }
}

fn sort_by_diameter(mut curves: Vec<(Curve, f64)>) -> (Vec<Curve>, Vec<f64>) {
    // stable: equal diameters keep sample order
    curves.sort_by(|a, b| b.0.diameter().total_cmp(&a.0.diameter()));
    curves.into_iter().unzip()
}

/// Sample the soup of intensity `c·μ` restricted to `spec.domain`.
pub fn sample_soup(spec: &SoupSpec, seed: u64) -> Result<Soup> {
    Ok(sample_marked_soup(spec, seed)?.soup)
}

/// As [`sample_soup`], also returning the coupling marks.
pub fn sample_marked_soup(spec: &SoupSpec, seed: u64) -> Result<MarkedSoup> {
    spec.validate()?;
    let mut rng = substream(seed, &[purpose::SOUP]);
    let bb = spec.domain.bbox();
    let n = poisson(spec.candidate_intensity(), &mut rng);
    let mut kept = Vec::new();
    for _ in 0..n {
        let rho = sample_scale(spec.eps_min, spec.rho_max, rng.random());
        let z = Point::new(
            bb.min.x + bb.width() * rng.random::<f64>(),
            bb.min.y + bb.height() * rng.random::<f64>(),
        );
        let shape = sample_shape(&spec.shape, &mut rng);
        let mark: f64 = rng.random();
        let curve = shape.place(z, rho)?;
        if spec.domain.contains_curve(&curve) {
            kept.push((curve, mark));
        }
    }
    let (curves, marks) = sort_by_diameter(kept);
    Ok(MarkedSoup {
        soup: Soup {
            spec: spec.clone(),
            curves,
            seed,
            candidates: n,
        },
        marks,
    })
}

/// Every curve of the whole-plane soup that can meet `window`.
///
/// Diameters are drawn octave by octave; the anchors of curves in the band
/// `[a, b]` are uniform on `window` inflated by `b`, which holds every curve
/// of that band meeting the window. Nothing is thinned, so the result is the
/// whole-plane soup restricted to anchors in those inflated boxes. The soup's
/// domain is the window inflated by `2·rho_max`, which contains every curve.
pub fn sample_plane_soup(
    c: f64,
    shape: &ShapeMeasure,
    window: BBox,
    eps_min: f64,
    rho_max: f64,
    seed: u64,
) -> Result<Soup> {
    let domain = Domain::from_bbox(window.inflate(2.0 * rho_max))?;
    let spec = SoupSpec::with_cutoffs(c, shape.clone(), domain, eps_min, rho_max)?;
    let mut kept = Vec::new();
    let mut candidates = 0;
    let mut lo = eps_min;
    let mut band = 0u64;
    while lo < rho_max {
        let hi = (2.0 * lo).min(rho_max);
        let region = window.inflate(hi);
        let mut rng = substream(seed, &[purpose::SOUP, band]);
        let n = poisson(scale_mass(c * shape.mass * region.area(), lo, hi), &mut rng);
        candidates += n;
        for _ in 0..n {
            let rho = sample_scale(lo, hi, rng.random());
            let z = Point::new(
                region.min.x + region.width() * rng.random::<f64>(),
                region.min.y + region.height() * rng.random::<f64>(),
            );
            let g = sample_shape(shape, &mut rng);
            kept.push((g.place(z, rho)?, 0.0));
        }
        lo = hi;
        band += 1;
    }
    let (curves, _) = sort_by_diameter(kept);
    Ok(Soup {
        spec,
        curves,
        seed,
        candidates,
    })
}

/// Monte Carlo mean with a 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl BetaEstimate {
    pub fn exact(value: f64, n: usize) -> Self {
        BetaEstimate {
            mean: value,
            half_width: 0.0,
            n: n.max(1),
        }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        BetaEstimate {
            mean,
            half_width: 1.96 * (var / n as f64).sqrt(),
            n,
        }
    }

    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }
}
