use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed-form exponents of the Brownian loop-soup carpet at intensity `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleValues {
    pub c: f64,
    pub kappa: f64,
    /// Carpet dimension from `κ`.
    pub d: f64,
    /// Carpet dimension from the closed form in `c`.
    pub d_closed: f64,
    pub boundary_dim: f64,
    /// `2 − cβ`, when a `β` was supplied.
    pub delta: Option<f64>,
}

/// `κ ∈ (8/3, 4]` solving `c = (3κ−8)(6−κ)/(2κ)`.
pub fn kappa_of_c(c: f64) -> f64 {
    let b = 26.0 - 2.0 * c;
    (b - (b * b - 576.0).max(0.0).sqrt()) / 6.0
}

pub fn d_of_kappa(kappa: f64) -> f64 {
    2.0 - (3.0 * kappa - 8.0) * (8.0 - kappa) / (32.0 * kappa)
}

pub fn d_of_c(c: f64) -> f64 {
    2.0 - c / 16.0 - (5.0 + c - (25.0 + c * c - 26.0 * c).sqrt()) / 96.0
}

pub fn cle_values(c: f64, beta: Option<f64>) -> Result<CleValues> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::arg("c", format!("must lie in (0, 1], got {c}")));
    }
    let kappa = kappa_of_c(c);
    Ok(CleValues {
        c,
        kappa,
        d: d_of_kappa(kappa),
        d_closed: d_of_c(c),
        boundary_dim: 1.0 + kappa / 8.0,
        delta: beta.map(|b| 2.0 - c * b),
    })
}
