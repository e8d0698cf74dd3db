use crate::config::{need, Command, RunConfig};
use crate::output::OutDir;
use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};
use soupfall::cluster::{clusters, estimate_beta_star_coupled};
use soupfall::estimate::{
    cle_values, crossing_trials, cutoff_sensitivity, fit_alpha, phase_scan, remaining_dimension, small_c_report,
    table_from_trials, PTable, PitchRule,
};
use soupfall::io::{write_cluster_report, write_csv, write_soup, write_trial_log};
use soupfall::rng::{derive, purpose};
use soupfall::soup::{rw_area_check, sample_plane_soup, sample_rw_loop_soup, sample_soup};
use soupfall::{carpet, Domain, ShapeKind, SoupSpec};

const DEFAULT_SCALES: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

fn table_csv(t: &PTable) -> Result<Vec<u8>> {
    csv_bytes(&t.rows)
}

/// Runs one command, writing its files into `out` and returning the summary.
pub fn dispatch(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let cmd = cfg.command()?;
    let seed = cfg.seed();
    match cmd {
        Command::Sample => sample(cfg, out),
        Command::CarpetProb | Command::FitAlpha => carpet_prob(cfg, cmd, out),
        Command::RemainingDim => {
            let c = need(&cfg.c, "c", cmd)?;
            let shape = cfg.shape();
            let scales = cfg.scales.clone().unwrap_or_else(|| DEFAULT_SCALES.to_vec());
            let rho_max = cfg.rho_max.unwrap_or(2.0);
            let window = cfg.window();
            let replicas = cfg.replicas.unwrap_or(100);
            let rep = remaining_dimension(c, &shape, window, &scales, rho_max, replicas, seed)?;
            out.write("one_point.csv", &csv_bytes(&rep.one_point)?)?;
            #[derive(Serialize)]
            struct Count {
                scale: f64,
                mean_count: f64,
            }
            out.write(
                "counts.csv",
                &csv_bytes(rep.counts.iter().map(|&(scale, mean_count)| Count { scale, mean_count }))?,
            )?;
            // one picture of the finest remaining set, from the first replica's soup
            let s_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
            let soup = sample_plane_soup(c, &shape, window, s_min, rho_max, derive(seed, &[purpose::SOUP, 0]))?;
            let raster = carpet::remaining_raster(&soup, s_min, &Domain::from_bbox(window)?, s_min / 4.0)?;
            out.write("remaining.pgm", &raster.to_pgm())?;
            Ok(json!({
                "fit": rep.fit,
                "expected_dim": rep.expected_dim,
                "beta": rep.beta,
                "replicas": rep.replicas,
            }))
        }
        Command::PhaseScan => {
            let c_grid = need(&cfg.c_grid, "c_grid", cmd)?;
            let eps = need(&cfg.eps, "eps", cmd)?;
            let scan = phase_scan(&cfg.shape(), &c_grid, eps, cfg.replicas.unwrap_or(1000), seed)?;
            out.write("phase.csv", &csv_bytes(&scan.rows)?)?;
            Ok(json!({ "eps": scan.eps, "bracket": scan.bracket }))
        }
        Command::BetaStar => {
            let c_list = match (&cfg.c_grid, cfg.c) {
                (Some(g), _) => g.clone(),
                (None, Some(c)) => vec![c],
                (None, None) => need(&cfg.c, "c", cmd).map(|c| vec![c])?,
            };
            let w = cfg.w.unwrap_or(8.0);
            let eps_min = cfg.eps_min.unwrap_or(0.02);
            let pitch = cfg.pitch.unwrap_or(1.0 / 128.0);
            let replicas = cfg.replicas.unwrap_or(1000);
            let reports = estimate_beta_star_coupled(&c_list, &cfg.shape(), w, eps_min, pitch, replicas, seed)?;
            #[derive(Serialize)]
            struct Row {
                c: f64,
                beta_star: f64,
                half_width: f64,
                kept: usize,
                truncated: usize,
                truncation_rate: f64,
            }
            #[derive(Serialize)]
            struct Tail {
                c: f64,
                x: f64,
                tail: f64,
            }
            let rows = reports.iter().map(|r| Row {
                c: r.c,
                beta_star: r.estimate.mean,
                half_width: r.estimate.half_width,
                kept: r.diameters.len(),
                truncated: r.truncated,
                truncation_rate: r.truncation_rate(),
            });
            out.write("beta_star.csv", &csv_bytes(rows)?)?;
            let xs: Vec<f64> = (0..=4 * w as usize).map(|k| k as f64 * 0.25).collect();
            let tails = reports
                .iter()
                .flat_map(|r| xs.iter().map(move |&x| Tail { c: r.c, x, tail: r.diameter_tail(x) }));
            out.write("diameter_tail.csv", &csv_bytes(tails)?)?;
            Ok(json!({ "W": w, "eps_min": eps_min, "pitch": pitch, "replicas": replicas }))
        }
        Command::SmallC => {
            let c_grid = need(&cfg.c_grid, "c_grid", cmd)?;
            let eps_list = need(&cfg.eps_list, "eps_list", cmd)?;
            let rule = cfg.pitch_rule.unwrap_or_default();
            let rows = small_c_report(&cfg.shape(), &c_grid, &eps_list, cfg.replicas.unwrap_or(1000), rule, seed)?;
            #[derive(Serialize)]
            struct Row {
                c: f64,
                alpha_hat: f64,
                stderr: f64,
                beta: f64,
                ratio: f64,
                inequality_ok: bool,
                r2: f64,
            }
            #[derive(Serialize)]
            struct TableRow {
                c: f64,
                eps: f64,
                trials: u64,
                successes: u64,
                p_hat: f64,
                ci_lo: f64,
                ci_hi: f64,
            }
            out.write(
                "small_c.csv",
                &csv_bytes(rows.iter().map(|r| Row {
                    c: r.c,
                    alpha_hat: r.alpha_hat,
                    stderr: r.stderr,
                    beta: r.beta,
                    ratio: r.ratio,
                    inequality_ok: r.inequality_ok,
                    r2: r.r2,
                }))?,
            )?;
            let tables = rows.iter().flat_map(|r| {
                r.table.rows.iter().map(move |p| TableRow {
                    c: r.c,
                    eps: p.eps,
                    trials: p.trials,
                    successes: p.successes,
                    p_hat: p.p_hat,
                    ci_lo: p.ci_lo,
                    ci_hi: p.ci_hi,
                })
            });
            out.write("small_c_tables.csv", &csv_bytes(tables)?)?;
            Ok(json!({ "pitch_rule": rule, "rows": rows.len() }))
        }
        Command::Cle => {
            let v = cle_values(need(&cfg.c, "c", cmd)?, cfg.beta)?;
            out.write_json("cle.json", &v)?;
            Ok(serde_json::to_value(v)?)
        }
        Command::RwArea => {
            let rep = rw_area_check(cfg.n.unwrap_or(200), cfg.replicas.unwrap_or(2000), seed)?;
            out.write("rw_area.csv", &csv_bytes([&rep])?)?;
            Ok(serde_json::to_value(rep)?)
        }
    }
}

fn sample(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let cmd = Command::Sample;
    let c = need(&cfg.c, "c", cmd)?;
    let shape = cfg.shape();
    let domain = cfg.domain();
    let soup = match (&shape.kind, cfg.mesh) {
        (ShapeKind::RwLoop { n_max, .. }, Some(mesh)) => {
            sample_rw_loop_soup(&domain, c, cfg.n_max.unwrap_or(*n_max), mesh, cfg.seed())?
        }
        _ => {
            let eps_min = need(&cfg.eps_min, "eps_min", cmd)?;
            let spec = match cfg.rho_max {
                Some(r) => SoupSpec::with_cutoffs(c, shape, domain.clone(), eps_min, r)?,
                None => SoupSpec::new(c, shape, domain.clone(), eps_min)?,
            };
            sample_soup(&spec, cfg.seed())?
        }
    };
    let mut jsonl = Vec::new();
    write_soup(&soup, &mut jsonl)?;
    out.write("soup.jsonl", &jsonl)?;

    let mut cs = clusters(&soup);
    if let Some(pitch) = cfg.pitch {
        cs.fill_areas(&soup.curves, pitch)?;
        let raster = soupfall::geom::rasterize_interiors(&soup.curves, &domain, pitch)?;
        out.write("interiors.pgm", &raster.to_pgm())?;
    }
    // a cluster near the boundary may have lost members to the restriction
    let truncated: Vec<bool> = cs
        .clusters
        .iter()
        .map(|k| domain.boundary_distance(k.bbox.center()) < 1.5 * k.diameter)
        .collect();
    let mut report = Vec::new();
    write_cluster_report(&cs, &truncated, &mut report)?;
    out.write("clusters.csv", &report)?;
    Ok(json!({
        "curves": soup.len(),
        "candidates": soup.candidates,
        "acceptance": soup.acceptance(),
        "clusters": cs.len(),
        "largest_cluster_diameter": cs.clusters.iter().map(|k| k.diameter).fold(0.0, f64::max),
    }))
}

fn carpet_prob(cfg: &RunConfig, cmd: Command, out: &mut OutDir) -> Result<Value> {
    let shape = cfg.shape();
    let table = if let (Command::FitAlpha, Some(path)) = (cmd, &cfg.table) {
        read_table(path)?
    } else {
        let c = need(&cfg.c, "c", cmd)?;
        let eps_list = need(&cfg.eps_list, "eps_list", cmd)?;
        let replicas = cfg.replicas.unwrap_or(1000);
        let rule = cfg.pitch_rule.unwrap_or_default();
        let trials = crossing_trials(c, &shape, &eps_list, replicas, rule, cfg.seed())?;
        let mut log = Vec::new();
        write_trial_log(&trials, &mut log)?;
        out.write("trials.csv", &log)?;
        if cfg.sensitivity == Some(true) {
            if rule != PitchRule::Common {
                return Err(soupfall::Error::InvalidArgument {
                    field: "sensitivity",
                    reason: "needs pitch_rule common".into(),
                }
                .into());
            }
            let s = cutoff_sensitivity(c, &shape, &eps_list, replicas, cfg.seed())?;
            #[derive(Serialize)]
            struct Row {
                eps: f64,
                p_base: f64,
                p_halved: f64,
                successes_base: u64,
                successes_halved: u64,
            }
            let rows = s.base.rows.iter().zip(&s.halved.rows).map(|(b, h)| Row {
                eps: b.eps,
                p_base: b.p_hat,
                p_halved: h.p_hat,
                successes_base: b.successes,
                successes_halved: h.successes,
            });
            out.write("sensitivity.csv", &csv_bytes(rows)?)?;
        }
        table_from_trials(&eps_list, &trials)
    };
    out.write("p_table.csv", &table_csv(&table)?)?;
    if cmd == Command::FitAlpha {
        let fit = fit_alpha(&table)?;
        Ok(json!({ "fit": fit }))
    } else {
        Ok(json!({ "rows": table.rows.len() }))
    }
}

fn read_table(path: &std::path::Path) -> Result<PTable> {
    struct Row {
        eps: f64,
        trials: u64,
        successes: u64,
    }
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading table {}: {e}", path.display()))?;
    let mut counts = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1).filter(|(_, l)| !l.trim().is_empty()) {
        let parse = || -> Option<Row> {
            let mut f = line.split(',').map(str::trim);
            let row = Row {
                eps: f.next()?.parse().ok()?,
                trials: f.next()?.parse().ok()?,
                successes: f.next()?.parse().ok()?,
            };
            Some(row)
        };
        let r = parse().ok_or(soupfall::Error::Parse {
            line: k + 1,
            msg: "expected eps,trials,successes".into(),
        })?;
        if r.successes > r.trials || r.trials == 0 {
            return Err(soupfall::Error::Parse {
                line: k + 1,
                msg: "need 0 ≤ successes ≤ trials and trials > 0".into(),
            }
            .into());
        }
        counts.push((r.eps, r.trials, r.successes));
    }
    Ok(PTable::from_counts(counts))
}
