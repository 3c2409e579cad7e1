//! Experiment configuration files.
//!
//! The format is a nested key/value text file (TOML syntax, JSON-compatible
//! data model). A minimal file such as
//!
//! ```toml
//! [model]
//! variant = "system02"
//! ```
//!
//! expands to the documented defaults: 32 modes, unit coefficients on
//! `(0, pi)`, damping exponents `(1, 1, 1)` and seed 1. Unknown keys are
//! rejected with the offending key named, so typos never pass silently.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParameters, SystemVariant};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// Spectral modes per field.
    pub modes: usize,
    /// Seed for every random probe drawn during a run.
    pub seed: u64,
    /// Worker threads for sweeps; 0 uses the default pool.
    pub workers: usize,
    /// Output path prefix; `--out` and `SEMIBEAM_OUT_DIR` take precedence /
    /// provide a fallback respectively.
    pub out: Option<String>,
    pub time: TimeConfig,
    pub lambda: LambdaConfig,
    pub fit: FitConfig,
    pub audit: AuditConfigSection,
    pub sweep: SweepConfigSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig::default(),
            modes: 32,
            seed: 1,
            workers: 0,
            out: None,
            time: TimeConfig::default(),
            lambda: LambdaConfig::default(),
            fit: FitConfig::default(),
            audit: AuditConfigSection::default(),
            sweep: SweepConfigSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub variant: String,
    pub length: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
    pub rho5: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub b1: f64,
    pub b2: f64,
    pub vdw: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub delta: f64,
    pub beta_thermal: f64,
    pub conductivity: f64,
    pub exponents: [f64; 3],
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            variant: "system02".to_owned(),
            length: std::f64::consts::PI,
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            rho4: 1.0,
            rho5: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            b1: 1.0,
            b2: 1.0,
            vdw: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            delta: 1.0,
            beta_thermal: 1.0,
            conductivity: 1.0,
            exponents: [1.0, 1.0, 1.0],
        }
    }
}

impl ModelConfig {
    pub fn to_params(&self) -> Result<ModelParameters> {
        let variant: SystemVariant = self.variant.parse()?;
        let params = ModelParameters {
            variant,
            length: self.length,
            rho1: self.rho1,
            rho2: self.rho2,
            rho3: self.rho3,
            rho4: self.rho4,
            rho5: self.rho5,
            kappa1: self.kappa1,
            kappa2: self.kappa2,
            b1: self.b1,
            b2: self.b2,
            vdw: self.vdw,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            gamma3: self.gamma3,
            delta: self.delta,
            beta_thermal: self.beta_thermal,
            conductivity: self.conductivity,
            exponents: self.exponents,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Time grid for trajectory runs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    /// Number of intervals; the grid has `samples + 1` points including 0.
    pub samples: usize,
    /// Snapshot stride (0 = no snapshots).
    pub snapshots: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { t_end: 20.0, samples: 400, snapshots: 0 }
    }
}

/// Frequency grid for resolvent work.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaConfig {
    pub min: f64,
    /// Upper edge; 0 selects the truncation validity limit `mu_{N/2}`.
    pub max: f64,
    pub count: usize,
    /// Log-spaced grid when true, linear otherwise.
    pub log: bool,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig { min: 1.0, max: 0.0, count: 50, log: true }
    }
}

impl LambdaConfig {
    /// Materialize the grid, clipping `max = 0` to the validity limit.
    pub fn grid(&self, length: f64, modes: usize) -> Result<Vec<f64>> {
        let hi = if self.max > 0.0 { self.max } else { crate::resolvent::validity_limit(length, modes)? };
        if !(self.min > 0.0) || hi <= self.min {
            return Err(Error::Config(format!(
                "lambda grid requires 0 < min < max, got [{}, {hi}]",
                self.min
            )));
        }
        if self.count < 1 {
            return Err(Error::Config("lambda.count must be at least 1".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = self.count;
        let grid = (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                if self.log {
                    self.min * (hi / self.min).powf(t)
                } else {
                    self.min + (hi - self.min) * t
                }
            })
            .collect();
        Ok(grid)
    }
}

/// Exponent-fit window and pass tolerance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Fit window; omitted bounds default to `[10, mu_12]` clipped to the grid.
    pub window_min: Option<f64>,
    pub window_max: Option<f64>,
    /// Expected slope; omitted means derived from the damping exponents.
    pub target: Option<f64>,
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window_min: None, window_max: None, target: None, tolerance: 0.15 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfigSection {
    /// Random forcing probes per frequency.
    pub probes: usize,
    /// Flag ceiling for audited ratios.
    pub ceiling: f64,
    /// Probe band limit (0 = min(16, modes)).
    pub probe_modes: usize,
}

impl Default for AuditConfigSection {
    fn default() -> Self {
        AuditConfigSection { probes: 20, ceiling: 1e4, probe_modes: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfigSection {
    /// Include the corner triples of the region.
    pub corners: bool,
    /// Number of random exponent triples.
    pub random: usize,
    /// "unit" for `[0,1]^3`, "analytic" for `[1/2,1]^3`.
    pub region: String,
}

impl Default for SweepConfigSection {
    fn default() -> Self {
        SweepConfigSection { corners: true, random: 10, region: "unit".to_owned() }
    }
}

impl SweepConfigSection {
    pub fn bounds(&self) -> Result<(f64, f64)> {
        match self.region.as_str() {
            "unit" => Ok((0.0, 1.0)),
            "analytic" => Ok((0.5, 1.0)),
            other => Err(Error::Config(format!(
                "sweep.region must be \"unit\" or \"analytic\", got \"{other}\""
            ))),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.to_params()?;
        if self.modes == 0 {
            return Err(Error::Config("modes must be at least 1".into()));
        }
        if !(self.time.t_end > 0.0) {
            return Err(Error::Config("time.t_end must be positive".into()));
        }
        if self.time.samples < 2 {
            return Err(Error::Config("time.samples must be at least 2".into()));
        }
        if !(self.fit.tolerance >= 0.0) {
            return Err(Error::Config("fit.tolerance must be nonnegative".into()));
        }
        if self.audit.probes == 0 {
            return Err(Error::Config("audit.probes must be at least 1".into()));
        }
        self.sweep.bounds()?;
        self.lambda.grid(self.model.length, self.modes)?;
        Ok(())
    }
}

/// Load and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_expands_to_documented_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("min.toml");
        std::fs::write(&path, "[model]\nvariant = \"system02\"\n").unwrap();
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.modes, 32);
        assert_eq!(cfg.model.length, std::f64::consts::PI);
        assert_eq!(cfg.model.exponents, [1.0, 1.0, 1.0]);
        assert_eq!(cfg.model.kappa1, 1.0);
        let p = cfg.model.to_params().unwrap();
        assert_eq!(p.variant, SystemVariant::System02);
    }

    #[test]
    fn invalid_gamma_is_rejected_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "[model]\nvariant = \"system02\"\ngamma1 = -1.0\n").unwrap();
        match parse_config(&path) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "gamma1"),
            other => panic!("expected gamma1 rejection, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("typo.toml");
        std::fs::write(&path, "[model]\nvariant = \"system02\"\ngamma7 = 1.0\n").unwrap();
        match parse_config(&path) {
            Err(Error::Config(msg)) => assert!(msg.contains("gamma7"), "message: {msg}"),
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn ramos_corner_is_a_valid_configuration() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramos.toml");
        std::fs::write(
            &path,
            "[model]\nvariant = \"system01\"\nexponents = [0.0, 0.0, 0.0]\n",
        )
        .unwrap();
        let cfg = parse_config(&path).unwrap();
        let p = cfg.model.to_params().unwrap();
        assert_eq!(p.variant, SystemVariant::System01);
        assert_eq!(p.exponents, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn missing_file_is_a_config_error() {
        assert!(matches!(
            parse_config(Path::new("/nonexistent/nope.toml")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn lambda_grid_clips_to_validity_limit() {
        let cfg = ExperimentConfig::default();
        let grid = cfg.lambda.grid(std::f64::consts::PI, 32).unwrap();
        assert_eq!(grid.len(), 50);
        assert!((grid[0] - 1.0).abs() < 1e-12);
        let mu16 = crate::spectral::eigenvalue(16, std::f64::consts::PI).unwrap();
        assert!((grid[49] - mu16).abs() <= 1e-9 * mu16);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_serializes_back_to_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
