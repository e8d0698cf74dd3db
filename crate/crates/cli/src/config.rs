use serde::{Deserialize, Serialize};
use soupfall::estimate::PitchRule;
use soupfall::{BBox, Domain, Point, ShapeMeasure};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    CarpetProb,
    FitAlpha,
    RemainingDim,
    PhaseScan,
    BetaStar,
    SmallC,
    Cle,
    RwArea,
}

/// One run, read from a single JSON document. Fields a command does not use
/// are ignored by it; unknown fields are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeMeasure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch_rule: Option<PitchRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
    /// Half-length of the random-walk loops in `rw-area`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Half-width of the `beta-star` window.
    #[serde(rename = "W", alias = "w", skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    /// `[[x0, y0], [x1, y1]]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[Point; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Also rerun `carpet-prob` with the lower cutoff halved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<bool>,
    /// CSV with columns `eps,trials,successes` for `fit-alpha`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))
    }

    pub fn command(&self) -> Result<Command, ConfigError> {
        self.command.ok_or_else(|| ConfigError("missing field `command`".into()))
    }

    pub fn shape(&self) -> ShapeMeasure {
        self.shape.clone().unwrap_or_else(ShapeMeasure::circle)
    }

    pub fn domain(&self) -> Domain {
        self.domain.clone().unwrap_or(Domain::UnitDisk)
    }

    pub fn window(&self) -> BBox {
        match self.window {
            Some([a, b]) => BBox::new(a, b),
            None => BBox::new(Point::ORIGIN, Point::new(1.0, 1.0)),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// `field` is required by the running command.
pub fn need<T: Clone>(v: &Option<T>, field: &str, cmd: Command) -> Result<T, ConfigError> {
    v.clone().ok_or_else(|| {
        let name = serde_json::to_value(cmd).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        ConfigError(format!("missing field `{field}` (required by {name})"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_sample_config() {
        let c = RunConfig::from_json(
            r#"{"command":"sample","shape":{"kind":"circle"},"domain":{"kind":"unit_disk"},"c":0.3,"eps_min":0.05,"seed":7}"#,
        )
        .unwrap();
        assert_eq!(c.command().unwrap(), Command::Sample);
        assert_eq!(c.shape(), ShapeMeasure::circle());
        assert_eq!(c.seed(), 7);
    }

    #[test]
    fn rejects_unknown_fields() {
        let e = RunConfig::from_json(r#"{"command":"cle","c":1.0,"colour":"red"}"#).unwrap_err();
        assert!(e.0.contains("colour"), "{e}");
        assert!(RunConfig::from_json(r#"{"command":"dance"}"#).is_err());
    }

    #[test]
    fn window_width_alias() {
        let c = RunConfig::from_json(r#"{"command":"beta-star","W":6}"#).unwrap();
        assert_eq!(c.w, Some(6.0));
        let c = RunConfig::from_json(r#"{"command":"beta-star","w":5}"#).unwrap();
        assert_eq!(c.w, Some(5.0));
    }

    #[test]
    fn missing_field_names_it() {
        let c = RunConfig::from_json(r#"{"command":"sample"}"#).unwrap();
        let e = need(&c.c, "c", Command::Sample).unwrap_err();
        assert_eq!(e.0, "missing field `c` (required by sample)");
    }
}
