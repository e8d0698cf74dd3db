//! Soup persistence (JSON Lines) and CSV tables.
//!
//! A soup file starts with a header object `{"spec": …, "seed": …}` and
//! has one curve record per following line:
//!
//! ```text
//! {"kind":"circle","center":[x,y],"diam":d}
//! {"kind":"stick","a":[x,y],"b":[x,y]}
//! {"kind":"polyloop","v":[[x,y],…]}
//! {"kind":"lattice","origin":[i,j],"steps":"ENWS…","mesh":m}
//! ```
//!
//! Lattice loops that were moved off the integer grid carry an extra
//! `"offset":[x,y]`.

use crate::carpet::CrossingTrial;
use crate::cluster::ClusterSet;
use crate::geom::{Curve, LatticeLoop, Point, Step};
use crate::soup::{Soup, SoupSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum CurveRecord {
    Circle {
        center: Point,
        diam: f64,
    },
    Stick {
        a: Point,
        b: Point,
    },
    Polyloop {
        v: Vec<Point>,
    },
    Lattice {
        origin: (i64, i64),
        steps: String,
        mesh: f64,
        #[serde(default, skip_serializing_if = "is_origin")]
        offset: Point,
    },
}

fn is_origin(p: &Point) -> bool {
    *p == Point::ORIGIN
}

impl From<&Curve> for CurveRecord {
    fn from(c: &Curve) -> Self {
        match c {
            Curve::Circle { center, diam } => CurveRecord::Circle {
                center: *center,
                diam: *diam,
            },
            Curve::Stick { a, b } => CurveRecord::Stick { a: *a, b: *b },
            Curve::Poly(p) => CurveRecord::Polyloop { v: p.vertices().to_vec() },
            Curve::Lattice(l) => CurveRecord::Lattice {
                origin: l.origin(),
                steps: l.steps_string(),
                mesh: l.mesh(),
                offset: l.offset(),
            },
        }
    }
}

impl TryFrom<CurveRecord> for Curve {
    type Error = Error;

    fn try_from(r: CurveRecord) -> Result<Curve> {
        match r {
            CurveRecord::Circle { center, diam } => Curve::circle(center, diam),
            CurveRecord::Stick { a, b } => Curve::stick(a, b),
            CurveRecord::Polyloop { v } => Curve::poly(v),
            CurveRecord::Lattice {
                origin,
                steps,
                mesh,
                offset,
            } => {
                let steps = steps
                    .chars()
                    .map(|ch| Step::from_char(ch).ok_or_else(|| Error::InvalidCurve(format!("bad step {ch:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Curve::Lattice(LatticeLoop::with_offset(origin, steps, mesh, offset)?))
            }
        }
    }
}

pub fn curve_to_json(c: &Curve) -> String {
    serde_json::to_string(&CurveRecord::from(c)).expect("curve records serialise")
}

pub fn curve_from_json(s: &str) -> Result<Curve> {
    let r: CurveRecord = serde_json::from_str(s).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    r.try_into()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    spec: SoupSpec,
    seed: u64,
    #[serde(default)]
    candidates: u64,
}

pub fn write_soup(soup: &Soup, w: impl Write) -> Result<()> {
    let mut w = BufWriter::new(w);
    let header = Header {
        spec: soup.spec.clone(),
        seed: soup.seed,
        candidates: soup.candidates,
    };
    serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    for c in &soup.curves {
        serde_json::to_writer(&mut w, &CurveRecord::from(c)).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a soup; any malformed line fails the whole read.
pub fn read_soup(r: impl Read) -> Result<Soup> {
    let mut lines = BufReader::new(r).lines();
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    let first = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))??;
    let header: Header = serde_json::from_str(&first).map_err(|e| parse_err(1, e.to_string()))?;
    header.spec.validate().map_err(|e| parse_err(1, e.to_string()))?;
    let mut curves = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let n = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CurveRecord = serde_json::from_str(&line).map_err(|e| parse_err(n, e.to_string()))?;
        curves.push(Curve::try_from(rec).map_err(|e| parse_err(n, e.to_string()))?);
    }
    Ok(Soup {
        spec: header.spec,
        curves,
        seed: header.seed,
        candidates: header.candidates,
    })
}

pub fn save_soup(soup: &Soup, path: impl AsRef<Path>) -> Result<()> {
    write_soup(soup, File::create(path)?)
}

pub fn load_soup(path: impl AsRef<Path>) -> Result<Soup> {
    read_soup(File::open(path)?)
}

/// Serialise rows as CSV with a header line.
pub fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, w: impl Write) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        k => Error::InvalidArgument {
            field: "csv",
            reason: format!("{k:?}"),
        },
    }
}

#[derive(Serialize)]
struct TrialRow {
    eps: f64,
    seed: u64,
    success: bool,
    curves_total: usize,
    curves_kept: usize,
    pitch: f64,
}

pub fn write_trial_log(trials: &[CrossingTrial], w: impl Write) -> Result<()> {
    write_csv(
        trials.iter().map(|t| TrialRow {
            eps: t.eps,
            seed: t.seed,
            success: t.success,
            curves_total: t.curves_total,
            curves_kept: t.curves_used,
            pitch: t.pitch,
        }),
        w,
    )
}

#[derive(Serialize)]
struct ClusterRow {
    cluster_id: usize,
    size: usize,
    diameter: f64,
    filled_area: Option<f64>,
    truncated_flag: bool,
}

/// One row per cluster; `truncated` flags clusters that may be cut by the window.
pub fn write_cluster_report(cs: &ClusterSet, truncated: &[bool], w: impl Write) -> Result<()> {
    write_csv(
        cs.clusters.iter().enumerate().map(|(k, c)| ClusterRow {
            cluster_id: k,
            size: c.members.len(),
            diameter: c.diameter,
            filled_area: c.filled_area,
            truncated_flag: truncated.get(k).copied().unwrap_or(false),
        }),
        w,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Domain;
    use crate::soup::{sample_soup, ShapeMeasure};

    #[test]
    fn record_formats() {
        let c = Curve::circle(Point::new(0.5, -1.0), 0.25).unwrap();
        assert_eq!(curve_to_json(&c), r#"{"kind":"circle","center":[0.5,-1.0],"diam":0.25}"#);
        let l = Curve::lattice((1, 2), vec![Step::E, Step::N, Step::W, Step::S], 0.5).unwrap();
        assert_eq!(curve_to_json(&l), r#"{"kind":"lattice","origin":[1,2],"steps":"ENWS","mesh":0.5}"#);
        for c in [c, l, Curve::stick(Point::ORIGIN, Point::new(0.1, 0.3)).unwrap()] {
            assert_eq!(curve_from_json(&curve_to_json(&c)).unwrap(), c);
        }
        let p = curve_from_json(r#"{"kind":"polyloop","v":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(p, Curve::Poly(_)));
        assert!(curve_from_json(r#"{"kind":"lattice","origin":[0,0],"steps":"EX","mesh":1}"#).is_err());
    }

    #[test]
    fn soup_round_trip() {
        let spec = SoupSpec::new(0.3, ShapeMeasure::circle(), Domain::UnitDisk, 0.05).unwrap();
        let soup = sample_soup(&spec, 7).unwrap();
        let mut buf = Vec::new();
        write_soup(&soup, &mut buf).unwrap();
        assert_eq!(read_soup(&buf[..]).unwrap(), soup);
    }

    #[test]
    fn header_only_and_broken_files() {
        let spec = SoupSpec::new(0.3, ShapeMeasure::circle(), Domain::UnitDisk, 0.05).unwrap();
        let empty = Soup::empty(spec, 1);
        let mut buf = Vec::new();
        write_soup(&empty, &mut buf).unwrap();
        assert_eq!(read_soup(&buf[..]).unwrap(), empty);
        let mut two = buf.clone();
        two.extend_from_slice(b"{\"kind\":\"circle\",\"center\":[0,0],\"diam\":0.5}\n{\"kind\":\"circ");
        match read_soup(&two[..]) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_soup(&b""[..]), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_has_header_and_lf() {
        let t = CrossingTrial {
            eps: 0.1,
            success: true,
            curves_used: 3,
            curves_total: 9,
            pitch: 0.0125,
            seed: 4,
        };
        let mut buf = Vec::new();
        write_trial_log(&[t], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "eps,seed,success,curves_total,curves_kept,pitch\n0.1,4,true,9,3,0.0125\n");
    }
}
