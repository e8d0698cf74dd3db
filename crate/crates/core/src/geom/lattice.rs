use super::Point;
use crate::{Error, Result};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// One unit move of a nearest-neighbour walk on ℤ².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    E,
    N,
    W,
    S,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::E, Step::N, Step::W, Step::S];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Step::E => (1, 0),
            Step::N => (0, 1),
            Step::W => (-1, 0),
            Step::S => (0, -1),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Step::E => 'E',
            Step::N => 'N',
            Step::W => 'W',
            Step::S => 'S',
        }
    }

    pub fn from_char(c: char) -> Option<Step> {
        match c {
            'E' => Some(Step::E),
            'N' => Some(Step::N),
            'W' => Some(Step::W),
            'S' => Some(Step::S),
            _ => None,
        }
    }
}

/// A closed nearest-neighbour walk drawn on the lattice `offset + mesh·ℤ²`.
///
/// Vertex `k` sits at `offset + mesh·(origin + s₁ + … + s_k)`. The loop may
/// self-intersect; its interior is the filling, i.e. every bounded
/// component of the complement of its trace.
pub struct LatticeLoop {
    origin: (i64, i64),
    steps: Vec<Step>,
    mesh: f64,
    offset: Point,
    cache: OnceLock<Arc<Cache>>,
}

struct Cache {
    ints: Vec<(i64, i64)>,
    points: Vec<Point>,
    fill: FaceFill,
}

/// Enclosed unit faces of the lattice, face `(i,j)` being `[i,i+1]×[j,j+1]`.
struct FaceFill {
    i0: i64,
    j0: i64,
    w: usize,
    h: usize,
    enclosed: Vec<bool>,
    count: usize,
}

impl FaceFill {
    fn build(ints: &[(i64, i64)]) -> FaceFill {
        let imin = ints.iter().map(|v| v.0).min().unwrap();
        let imax = ints.iter().map(|v| v.0).max().unwrap();
        let jmin = ints.iter().map(|v| v.1).min().unwrap();
        let jmax = ints.iter().map(|v| v.1).max().unwrap();
        // one face of padding on every side
        let i0 = imin - 1;
        let j0 = jmin - 1;
        let w = (imax - imin + 2) as usize;
        let h = (jmax - jmin + 2) as usize;
        // hwall[x + y*w]: horizontal edge (i,j)->(i+1,j), separates faces (i,j-1) and (i,j)
        // vwall[x + y*(w+1)]: vertical edge (i,j)->(i,j+1), separates faces (i-1,j) and (i,j)
        let mut hwall = vec![false; w * (h + 1)];
        let mut vwall = vec![false; (w + 1) * h];
        let n = ints.len();
        for k in 0..n {
            let (a, b) = (ints[k], ints[(k + 1) % n]);
            if a.1 == b.1 {
                let i = a.0.min(b.0);
                hwall[(i - i0) as usize + (a.1 - j0) as usize * w] = true;
            } else {
                let j = a.1.min(b.1);
                vwall[(a.0 - i0) as usize + (j - j0) as usize * (w + 1)] = true;
            }
        }
        let mut outside = vec![false; w * h];
        let mut stack = Vec::new();
        for x in 0..w {
            stack.push((x, 0));
            stack.push((x, h - 1));
        }
        for y in 0..h {
            stack.push((0, y));
            stack.push((w - 1, y));
        }
        while let Some((x, y)) = stack.pop() {
            let k = x + y * w;
            if outside[k] {
                continue;
            }
            outside[k] = true;
            if x + 1 < w && !vwall[x + 1 + y * (w + 1)] {
                stack.push((x + 1, y));
            }
            if x > 0 && !vwall[x + y * (w + 1)] {
                stack.push((x - 1, y));
            }
            if y + 1 < h && !hwall[x + (y + 1) * w] {
                stack.push((x, y + 1));
            }
            if y > 0 && !hwall[x + y * w] {
                stack.push((x, y - 1));
            }
        }
        let enclosed: Vec<bool> = outside.iter().map(|o| !o).collect();
        let count = enclosed.iter().filter(|e| **e).count();
        FaceFill {
            i0,
            j0,
            w,
            h,
            enclosed,
            count,
        }
    }

    fn contains_face(&self, i: i64, j: i64) -> bool {
        let x = i - self.i0;
        let y = j - self.j0;
        if x < 0 || y < 0 || x as usize >= self.w || y as usize >= self.h {
            return false;
        }
        self.enclosed[x as usize + y as usize * self.w]
    }
}

impl LatticeLoop {
    pub fn new(origin: (i64, i64), steps: Vec<Step>, mesh: f64) -> Result<Self> {
        Self::with_offset(origin, steps, mesh, Point::ORIGIN)
    }

    pub fn with_offset(origin: (i64, i64), steps: Vec<Step>, mesh: f64, offset: Point) -> Result<Self> {
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(Error::InvalidCurve(format!("lattice mesh must be > 0, got {mesh}")));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidCurve("lattice offset must be finite".into()));
        }
        if steps.len() < 2 {
            return Err(Error::InvalidCurve("lattice loop needs at least two steps".into()));
        }
        let (sx, sy) = steps
            .iter()
            .fold((0i64, 0i64), |(x, y), s| (x + s.delta().0, y + s.delta().1));
        if sx != 0 || sy != 0 {
            return Err(Error::InvalidCurve("lattice walk is not closed".into()));
        }
        Ok(LatticeLoop {
            origin,
            steps,
            mesh,
            offset,
            cache: OnceLock::new(),
        })
    }

    pub fn origin(&self) -> (i64, i64) {
        self.origin
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn offset(&self) -> Point {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps_string(&self) -> String {
        self.steps.iter().map(|s| s.to_char()).collect()
    }

    fn cache(&self) -> &Cache {
        self.cache.get_or_init(|| {
            let mut ints = Vec::with_capacity(self.steps.len());
            let (mut x, mut y) = self.origin;
            for s in &self.steps {
                ints.push((x, y));
                let (dx, dy) = s.delta();
                x += dx;
                y += dy;
            }
            let points = ints
                .iter()
                .map(|&(i, j)| self.to_plane(i as f64, j as f64))
                .collect();
            let fill = FaceFill::build(&ints);
            Arc::new(Cache { ints, points, fill })
        })
    }

    #[inline]
    fn to_plane(&self, i: f64, j: f64) -> Point {
        Point::new(self.offset.x + self.mesh * i, self.offset.y + self.mesh * j)
    }

    /// Integer vertex coordinates, one per step (the closing vertex is not repeated).
    pub fn lattice_vertices(&self) -> &[(i64, i64)] {
        &self.cache().ints
    }

    /// Plane coordinates of the vertices.
    pub fn vertices(&self) -> &[Point] {
        &self.cache().points
    }

    /// Number of unit faces in the filling.
    pub fn enclosed_faces(&self) -> usize {
        self.cache().fill.count
    }

    /// Exact area of the filling.
    pub fn filled_area(&self) -> f64 {
        self.enclosed_faces() as f64 * self.mesh * self.mesh
    }

    pub(crate) fn fill_contains(&self, p: Point) -> bool {
        let qx = (p.x - self.offset.x) / self.mesh;
        let qy = (p.y - self.offset.y) / self.mesh;
        self.cache().fill.contains_face(qx.floor() as i64, qy.floor() as i64)
    }

    pub(crate) fn placed(&self, z: Point, rho: f64) -> LatticeLoop {
        LatticeLoop {
            origin: self.origin,
            steps: self.steps.clone(),
            mesh: rho * self.mesh,
            offset: z + rho * self.offset,
            cache: OnceLock::new(),
        }
    }
}

impl Clone for LatticeLoop {
    fn clone(&self) -> Self {
        LatticeLoop {
            origin: self.origin,
            steps: self.steps.clone(),
            mesh: self.mesh,
            offset: self.offset,
            cache: self.cache.clone(),
        }
    }
}

impl PartialEq for LatticeLoop {
    fn eq(&self, o: &Self) -> bool {
        self.origin == o.origin && self.steps == o.steps && self.mesh == o.mesh && self.offset == o.offset
    }
}

impl fmt::Debug for LatticeLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeLoop")
            .field("origin", &self.origin)
            .field("steps", &self.steps_string())
            .field("mesh", &self.mesh)
            .field("offset", &self.offset)
            .finish()
    }
}
