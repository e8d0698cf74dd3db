//! Monte Carlo estimators, exponent fits and closed-form exponents.

mod cle;
mod remaining;
mod stats;

pub use cle::{cle_values, d_of_c, d_of_kappa, kappa_of_c, CleValues};
pub use remaining::{box_counts, box_dimension, remaining_dimension, DimensionFit, OnePoint, RemainingReport};
pub use stats::{ks_two_sample, weighted_line, wilson, KsResult, LineFit};

use crate::carpet::{crossing_events, crossing_soup, CrossingTrial};
use crate::cluster::{clusters, explore_clusters_sequential};
use crate::geom::Domain;
use crate::rng::{derive, purpose};
use crate::soup::{beta, sample_marked_soup, sample_soup, ShapeMeasure, SoupSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const Z95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PRow {
    pub eps: f64,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl PRow {
    pub fn new(eps: f64, trials: u64, successes: u64) -> PRow {
        let (ci_lo, ci_hi) = wilson(successes, trials, Z95);
        let p_hat = successes as f64 / trials as f64;
        PRow {
            eps,
            trials,
            successes,
            p_hat,
            ci_lo: ci_lo.min(p_hat),
            ci_hi: ci_hi.max(p_hat),
        }
    }

    /// Binomial standard error of `p_hat`.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Crossing probabilities by inner radius, largest radius first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTable {
    pub rows: Vec<PRow>,
}

impl PTable {
    pub fn from_counts(counts: impl IntoIterator<Item = (f64, u64, u64)>) -> PTable {
        let mut rows: Vec<PRow> = counts.into_iter().map(|(e, n, s)| PRow::new(e, n, s)).collect();
        rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        PTable { rows }
    }

    pub fn row(&self, eps: f64) -> Option<&PRow> {
        self.rows.iter().find(|r| r.eps == eps)
    }

    /// The rows with at least 10 successes, i.e. those [`fit_alpha`] accepts.
    pub fn fittable(&self) -> PTable {
        PTable {
            rows: self.rows.iter().copied().filter(|r| r.successes >= 10).collect(),
        }
    }
}

/// How the raster pitch and the lower diameter cutoff follow the inner radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PitchRule {
    /// One soup per replica shared by every radius, pitch `min ε / 8`.
    /// The outcomes are coupled across radii.
    #[default]
    Common,
    /// An independent soup per radius with pitch `ε / 8`.
    PerEps,
}

/// `eps_min = 2·pitch`.
pub fn eps_min_for(pitch: f64) -> f64 {
    2.0 * pitch
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::arg("eps_list", "must not be empty"));
    }
    if let Some(e) = eps_list.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::arg("eps_list", format!("values must lie in (0, 1), got {e}")));
    }
    Ok(())
}

/// Every crossing trial, replica-major in the order of `eps_list`.
pub fn crossing_trials(
    c: f64,
    shape: &ShapeMeasure,
    eps_list: &[f64],
    replicas: usize,
    rule: PitchRule,
    seed: u64,
) -> Result<Vec<CrossingTrial>> {
    check_eps_list(eps_list)?;
    let per_replica = |r: u64| -> Result<Vec<CrossingTrial>> {
        match rule {
            PitchRule::Common => {
                let pitch = eps_list.iter().copied().fold(f64::INFINITY, f64::min) / 8.0;
                let s = derive(seed, &[purpose::SOUP, r]);
                let soup = crossing_soup(c, shape, eps_min_for(pitch), s)?;
                crossing_events(&soup, eps_list, pitch)
            }
            PitchRule::PerEps => eps_list
                .iter()
                .enumerate()
                .map(|(k, &e)| {
                    let pitch = e / 8.0;
                    let s = derive(seed, &[purpose::SOUP, r, k as u64]);
                    let soup = crossing_soup(c, shape, eps_min_for(pitch), s)?;
                    Ok(crossing_events(&soup, &[e], pitch)?.remove(0))
                })
                .collect(),
        }
    };
    let all: Vec<Vec<CrossingTrial>> = (0..replicas as u64).into_par_iter().map(per_replica).collect::<Result<_>>()?;
    Ok(all.into_iter().flatten().collect())
}

pub fn table_from_trials(eps_list: &[f64], trials: &[CrossingTrial]) -> PTable {
    PTable::from_counts(eps_list.iter().map(|&e| {
        let (n, s) = trials
            .iter()
            .filter(|t| t.eps == e)
            .fold((0, 0), |(n, s), t| (n + 1, s + t.success as u64));
        (e, n, s)
    }))
}

/// Crossing probabilities `P(A_ε)` with Wilson intervals.
pub fn estimate_p(
    c: f64,
    shape: &ShapeMeasure,
    eps_list: &[f64],
    replicas: usize,
    rule: PitchRule,
    seed: u64,
) -> Result<PTable> {
    if replicas < 100 {
        return Err(Error::arg("replicas", format!("must be ≥ 100, got {replicas}")));
    }
    let trials = crossing_trials(c, shape, eps_list, replicas, rule, seed)?;
    Ok(table_from_trials(eps_list, &trials))
}

/// Crossing tables at the usual cutoff `2·pitch` and at half of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSensitivity {
    pub pitch: f64,
    pub base: PTable,
    pub halved: PTable,
}

/// Reruns the common-pitch trials with the lower cutoff halved. Both tables
/// come from the same fine soups: dropping the curves below `2·pitch` leaves
/// exactly a soup with the usual cutoff, so the comparison is paired.
pub fn cutoff_sensitivity(
    c: f64,
    shape: &ShapeMeasure,
    eps_list: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<CutoffSensitivity> {
    check_eps_list(eps_list)?;
    let pitch = eps_list.iter().copied().fold(f64::INFINITY, f64::min) / 8.0;
    let eps_min = eps_min_for(pitch);
    let pairs: Vec<(Vec<CrossingTrial>, Vec<CrossingTrial>)> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let fine = crossing_soup(c, shape, eps_min / 2.0, derive(seed, &[purpose::SOUP, r]))?;
            let mut coarse = fine.clone();
            coarse.spec = SoupSpec::with_cutoffs(c, shape.clone(), Domain::UnitDisk, eps_min, 2.0)?;
            coarse.curves.retain(|g| g.diameter() >= eps_min);
            Ok((crossing_events(&coarse, eps_list, pitch)?, crossing_events(&fine, eps_list, pitch)?))
        })
        .collect::<Result<_>>()?;
    let (base, halved): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let flat = |v: Vec<Vec<CrossingTrial>>| v.into_iter().flatten().collect::<Vec<_>>();
    Ok(CutoffSensitivity {
        pitch,
        base: table_from_trials(eps_list, &flat(base)),
        halved: table_from_trials(eps_list, &flat(halved)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub alpha_hat: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub r2: f64,
    pub dim_hat: f64,
    /// `ε^α̂ ≤ p̂·(1 + 3σ_rel)` on every row.
    pub bracket_ok: bool,
}

/// Weighted fit of `log p̂` against `log ε`; the slope is `α̂`.
pub fn fit_alpha(pt: &PTable) -> Result<ExponentReport> {
    if pt.rows.len() < 3 {
        return Err(Error::InsufficientData(format!("need ≥ 3 rows, got {}", pt.rows.len())));
    }
    if let Some(r) = pt.rows.iter().find(|r| r.successes < 10) {
        return Err(Error::InsufficientData(format!(
            "row eps={} has {} successes (< 10)",
            r.eps, r.successes
        )));
    }
    let rel_var = |r: &PRow| {
        // shrink away from p = 1, where the plug-in variance vanishes
        let p = (r.successes as f64 + 0.5) / (r.trials as f64 + 1.0);
        (1.0 - p) / (r.trials as f64 * p)
    };
    let xs: Vec<f64> = pt.rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = pt.rows.iter().map(|r| r.p_hat.ln()).collect();
    let ws: Vec<f64> = pt.rows.iter().map(|r| 1.0 / rel_var(r)).collect();
    let f = weighted_line(&xs, &ys, &ws, true);
    let alpha = f.slope;
    let bracket_ok = pt
        .rows
        .iter()
        .all(|r| r.eps.powf(alpha) <= r.p_hat * (1.0 + 3.0 * rel_var(r).sqrt()));
    Ok(ExponentReport {
        alpha_hat: alpha,
        stderr: f.slope_stderr,
        intercept: f.intercept,
        r2: f.r2,
        dim_hat: 2.0 - alpha,
        bracket_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub c: f64,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    pub eps: f64,
    pub rows: Vec<PhaseRow>,
    /// Consecutive grid values where `p̂` drops through 1/2.
    pub bracket: Option<(f64, f64)>,
}

/// Crossing probability at a fixed radius across intensities, with soups
/// nested in `c` through uniform marks.
pub fn phase_scan(shape: &ShapeMeasure, c_grid: &[f64], eps: f64, replicas: usize, seed: u64) -> Result<PhaseScan> {
    check_eps_list(&[eps])?;
    if c_grid.is_empty() || c_grid.windows(2).any(|w| w[0] >= w[1]) || c_grid[0] <= 0.0 {
        return Err(Error::arg("c_grid", "must be positive and strictly increasing"));
    }
    if replicas < 1 {
        return Err(Error::arg("replicas", "must be ≥ 1"));
    }
    let pitch = eps / 8.0;
    let c_max = *c_grid.last().unwrap();
    let spec = SoupSpec::with_cutoffs(c_max, shape.clone(), Domain::UnitDisk, eps_min_for(pitch), 2.0)?;
    let outcomes: Vec<Vec<bool>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let marked = sample_marked_soup(&spec, derive(seed, &[purpose::MARKS, r]))?;
            c_grid
                .iter()
                .map(|&c| Ok(crossing_events(&marked.restrict(c)?, &[eps], pitch)?[0].success))
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<PhaseRow> = c_grid
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let s = outcomes.iter().filter(|o| o[k]).count() as u64;
            let r = PRow::new(eps, replicas as u64, s);
            PhaseRow {
                c,
                trials: r.trials,
                successes: s,
                p_hat: r.p_hat,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
            }
        })
        .collect();
    let bracket = rows
        .windows(2)
        .find(|w| w[0].p_hat >= 0.5 && w[1].p_hat < 0.5)
        .map(|w| (w[0].c, w[1].c));
    Ok(PhaseScan { eps, rows, bracket })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallCRow {
    pub c: f64,
    pub alpha_hat: f64,
    pub stderr: f64,
    pub ratio: f64,
    pub beta: f64,
    /// `α̂ ≥ cβ − 3·stderr`.
    pub inequality_ok: bool,
    pub r2: f64,
    pub table: PTable,
}

/// Exponent fits at several small intensities, compared with `c·β`.
pub fn small_c_report(
    shape: &ShapeMeasure,
    c_list: &[f64],
    eps_list: &[f64],
    replicas: usize,
    rule: PitchRule,
    seed: u64,
) -> Result<Vec<SmallCRow>> {
    let b = beta(shape, replicas.max(1), 0.01, seed)?.mean;
    c_list
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let table = estimate_p(c, shape, eps_list, replicas, rule, derive(seed, &[k as u64]))?;
            let fit = fit_alpha(&table.fittable())?;
            Ok(SmallCRow {
                c,
                alpha_hat: fit.alpha_hat,
                stderr: fit.stderr,
                ratio: fit.alpha_hat / c,
                beta: b,
                inequality_ok: fit.alpha_hat >= c * b - 3.0 * fit.stderr,
                r2: fit.r2,
                table,
            })
        })
        .collect()
}

/// Counts of clusters with diameter at least `min_diameter`, from direct
/// clustering and from the sequential exploration, one per replica each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationCheck {
    pub direct: Vec<f64>,
    pub sequential: Vec<f64>,
    pub ks: KsResult,
}

pub fn exploration_check(spec: &SoupSpec, min_diameter: f64, replicas: usize, seed: u64) -> Result<ExplorationCheck> {
    let pairs: Vec<(f64, f64)> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let soup = sample_soup(spec, derive(seed, &[purpose::SOUP, r]))?;
            let direct = clusters(&soup).clusters.iter().filter(|c| c.diameter >= min_diameter).count();
            let seq = explore_clusters_sequential(spec, derive(seed, &[purpose::EXPLORE, r]))?
                .iter()
                .filter(|c| c.diameter >= min_diameter)
                .count();
            Ok((direct as f64, seq as f64))
        })
        .collect::<Result<_>>()?;
    let (direct, sequential): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ks = ks_two_sample(&direct, &sequential);
    Ok(ExplorationCheck { direct, sequential, ks })
}
