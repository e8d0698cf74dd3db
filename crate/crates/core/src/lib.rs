//! Scale-invariant Poisson soups of planar curves.
//!
//! The crate samples soups whose intensity factorises into a uniform
//! location, a `dρ/ρ³` scale law and a shape measure on unit-diameter
//! curves, groups the curves into crossing clusters, and estimates the
//! carpet and remaining-set dimensions by Monte Carlo. Closed-form values
//! for the Brownian loop-soup carpet are available in [`estimate::cle`].
//!
//! All estimators take a master seed and derive independent counter-based
//! substreams per replica (see [`rng`]), so results are bit-identical for a
//! fixed seed regardless of how many worker threads run them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carpet;
pub mod cluster;
pub mod error;
pub mod estimate;
pub mod geom;
pub mod io;
pub mod rng;
pub mod soup;

pub use error::{Error, Result};
pub use geom::{BBox, Curve, Domain, Grid, LatticeLoop, Point, PolyLoop, Raster, Step};
pub use soup::{BetaEstimate, LengthRule, ShapeKind, ShapeMeasure, Soup, SoupSpec};
