use crate::geom::BBox;
use std::collections::HashMap;

/// Uniform hash grid over bounding boxes.
pub(crate) struct SpatialHash {
    h: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
    ranges: Vec<[i64; 4]>,
}

impl SpatialHash {
    pub fn new(h: f64) -> Self {
        SpatialHash {
            h,
            cells: HashMap::new(),
            ranges: Vec::new(),
        }
    }

    fn range(&self, b: &BBox) -> [i64; 4] {
        [
            (b.min.x / self.h).floor() as i64,
            (b.min.y / self.h).floor() as i64,
            (b.max.x / self.h).floor() as i64,
            (b.max.y / self.h).floor() as i64,
        ]
    }

    /// Insert the next id (ids are consecutive from 0).
    pub fn insert(&mut self, b: &BBox) -> u32 {
        let id = self.ranges.len() as u32;
        let r = self.range(b);
        for j in r[1]..=r[3] {
            for i in r[0]..=r[2] {
                self.cells.entry((i, j)).or_default().push(id);
            }
        }
        self.ranges.push(r);
        id
    }

    /// Ids whose boxes share a cell with `b`, each once.
    pub fn query(&self, b: &BBox, out: &mut Vec<u32>) {
        out.clear();
        let r = self.range(b);
        for j in r[1]..=r[3] {
            for i in r[0]..=r[2] {
                if let Some(v) = self.cells.get(&(i, j)) {
                    for &id in v {
                        // report each id only in the first shared cell
                        let q = self.ranges[id as usize];
                        if i == r[0].max(q[0]) && j == r[1].max(q[1]) {
                            out.push(id);
                        }
                    }
                }
            }
        }
    }

    /// Every unordered pair of ids sharing a cell, each pair once, grouped by cell.
    pub fn candidate_pairs(&self) -> Vec<Vec<(u32, u32)>> {
        let mut keys: Vec<_> = self.cells.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .filter_map(|(i, j)| {
                let v = &self.cells[&(i, j)];
                let mut out = Vec::new();
                for (x, &a) in v.iter().enumerate() {
                    let ra = self.ranges[a as usize];
                    for &b in &v[x + 1..] {
                        let rb = self.ranges[b as usize];
                        if i == ra[0].max(rb[0]) && j == ra[1].max(rb[1]) {
                            out.push((a, b));
                        }
                    }
                }
                (!out.is_empty()).then_some(out)
            })
            .collect()
    }
}
