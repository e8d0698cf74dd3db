//! Small statistical helpers.

use serde::{Deserialize, Serialize};

/// Wilson score interval for `s` successes out of `n` at normal quantile `z`.
pub fn wilson(s: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = s as f64 / n;
    let z2 = z * z;
    let den = 1.0 + z2 / n;
    let mid = (p + z2 / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    ((mid - half).max(0.0), (mid + half).min(1.0))
}

/// Result of a straight-line fit `y = a + b·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

/// Weighted least squares. With `known_variance`, weights are inverse
/// variances and the slope error is inflated by the reduced chi-square when
/// that exceeds 1; otherwise the usual residual-based error is used.
pub fn weighted_line(xs: &[f64], ys: &[f64], ws: &[f64], known_variance: bool) -> LineFit {
    let k = xs.len();
    assert!(k >= 2 && ys.len() == k && ws.len() == k);
    let sw: f64 = ws.iter().sum();
    let xm = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = (0..k).map(|i| ws[i] * (xs[i] - xm) * (ys[i] - ym)).sum();
    let syy: f64 = ys.iter().zip(ws).map(|(y, w)| w * (y - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = (0..k).map(|i| ws[i] * (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = (k as f64 - 2.0).max(1.0);
    let slope_stderr = if known_variance {
        (1.0 / sxx).sqrt() * (ss_res / dof).max(1.0).sqrt()
    } else {
        (ss_res / dof / sxx).sqrt()
    };
    LineFit {
        intercept,
        slope,
        slope_stderr,
        r2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
}

/// `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value (with
/// the usual small-sample correction). Conservative for discrete data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    KsResult {
        d,
        p_value: kolmogorov_q((en + 0.12 + 0.11 / en) * d),
    }
}
