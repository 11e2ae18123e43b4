//! Experiment configuration: TOML file, then `NLE_` environment overrides,
//! then validation. The resolved config is what gets echoed with every run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("CONFIG_INVALID at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("CONFIG_INVALID: {0}")]
    Parse(String),
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// A preset name or `all`.
    pub preset: String,
    pub seed: u64,
    /// Worker threads for Monte Carlo; 0 lets rayon decide.
    pub threads: usize,
    pub out: String,
    pub cauchy_density: CauchyDensity,
    pub lp_partition: LpPartition,
    pub scaling_identity: ScalingIdentity,
    pub assumption_check: AssumptionCheck,
    pub density_decay: DensityDecay,
    pub apriori_sweep: AprioriSweep,
    pub corollary_sweep: AprioriSweep,
    pub mc_cross_check: McCrossCheck,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: "all".into(),
            seed: 20240917,
            threads: 0,
            out: "nle-out".into(),
            cauchy_density: CauchyDensity::default(),
            lp_partition: LpPartition::default(),
            scaling_identity: ScalingIdentity::default(),
            assumption_check: AssumptionCheck::default(),
            density_decay: DensityDecay::default(),
            apriori_sweep: AprioriSweep::default(),
            corollary_sweep: AprioriSweep::default(),
            mc_cross_check: McCrossCheck::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if !(1..=2).contains(&self.dim) {
            return Err(invalid(&format!("{path}.dim"), "must be 1 or 2"));
        }
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(invalid(&format!("{path}.n"), "must be a power of two >= 4"));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(invalid(&format!("{path}.length"), "must be positive"));
        }
        Ok(())
    }
}

/// Cauchy kernel oracle, mass conservation and propagator composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CauchyDensity {
    pub grid: GridSpec,
    pub t: f64,
    /// Half-width of the comparison window.
    pub window: f64,
    pub mass_times: Vec<f64>,
    pub mass_grid_1d: GridSpec,
    pub mass_grid_2d: GridSpec,
    /// The composition test uses `2^level` pieces.
    pub composition_level: u32,
    pub composition_c: f64,
    pub composition_grid: GridSpec,
}

impl Default for CauchyDensity {
    fn default() -> Self {
        Self {
            grid: GridSpec { dim: 1, n: 4096, length: 400.0 },
            t: 1.0,
            window: 20.0,
            mass_times: vec![0.1, 1.0, 5.0],
            mass_grid_1d: GridSpec { dim: 1, n: 1024, length: 100.0 },
            mass_grid_2d: GridSpec { dim: 2, n: 64, length: 40.0 },
            composition_level: 4,
            composition_c: 3.0,
            composition_grid: GridSpec { dim: 1, n: 512, length: 50.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpPartition {
    pub bases: Vec<u64>,
    pub grid: GridSpec,
    /// Random band-limited functions for the monotonicity check.
    pub samples: usize,
    /// Highest wavenumber of the random functions.
    pub kmax: i64,
    pub alpha: f64,
}

impl Default for LpPartition {
    fn default() -> Self {
        Self { bases: vec![2, 4, 8], grid: GridSpec { dim: 1, n: 1024, length: 40.0 }, samples: 100, kmax: 120, alpha: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingIdentity {
    pub alphas: Vec<f64>,
    pub max_block: u32,
    pub xi_points: usize,
    /// `xi` samples are log-spaced in `[1/xi_range, xi_range]` with alternating sign.
    pub xi_range: f64,
}

impl Default for ScalingIdentity {
    fn default() -> Self {
        Self { alphas: vec![0.5, 1.0, 1.5], max_block: 10, xi_points: 256, xi_range: 1e3 }
    }
}

/// Axis-stable model in d=2 with intensity oscillating in `[1/C, C]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionCheck {
    pub alpha: f64,
    pub big_c: f64,
    pub r0: f64,
    pub horizon: f64,
    pub oscillation_level: u32,
    pub t_samples: usize,
    pub xi_samples: usize,
}

impl Default for AssumptionCheck {
    fn default() -> Self {
        Self { alpha: 1.0, big_c: 1.0, r0: 0.25, horizon: 4.0, oscillation_level: 3, t_samples: 16, xi_samples: 81 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityDecay {
    pub alpha: f64,
    pub grid: GridSpec,
    pub blocks: Vec<u32>,
    pub times: Vec<f64>,
}

impl Default for DensityDecay {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            grid: GridSpec { dim: 1, n: 2048, length: 200.0 },
            blocks: (1..=6).collect(),
            times: (0..=8).map(|i| 1.0 + 0.5 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AprioriSweep {
    pub alpha: f64,
    pub grid: GridSpec,
    pub horizons: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub steps: usize,
    pub grading: f64,
    /// Initial data `exp(-(x/width)^2)`.
    pub width: f64,
    pub quadrature_horizons: Vec<f64>,
}

impl Default for AprioriSweep {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            grid: GridSpec { dim: 1, n: 256, length: 40.0 },
            horizons: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            p: 2.0,
            q: 2.0,
            gamma: 1.0,
            steps: 64,
            grading: 2.0,
            width: 1.0,
            quadrature_horizons: vec![1.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McCrossCheck {
    pub alpha: f64,
    pub epsilon: f64,
    pub paths: usize,
    pub t: f64,
    pub probes: Vec<f64>,
    pub grid: GridSpec,
    /// Initial data `exp(-(x/width)^2)`.
    pub width: f64,
}

impl Default for McCrossCheck {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            epsilon: 0.1,
            paths: 100_000,
            t: 1.0,
            probes: (-4..=4).map(f64::from).collect(),
            grid: GridSpec { dim: 1, n: 2048, length: 256.0 },
            width: 1.0,
        }
    }
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

fn alpha(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v < 2.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("stability index must lie in (0, 2), got {v}")))
    }
}

fn nonempty<T>(path: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(invalid(path, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies `NLE_<KEY>` overrides; nested keys are joined by `__`, e.g.
    /// `NLE_MC_CROSS_CHECK__PATHS=1000` or `NLE_SEED=7`. Values are TOML
    /// literals; anything that does not parse is taken as a string.
    pub fn with_env_overrides(self, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self, ConfigError> {
        let mut table = toml::Table::try_from(&self).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut any = false;
        for (key, raw) in vars {
            let Some(rest) = key.strip_prefix("NLE_") else { continue };
            let path: Vec<String> = rest.split("__").map(|s| s.to_ascii_lowercase()).collect();
            let dotted = path.join(".");
            let value = parse_literal(&raw);
            let mut node = &mut table;
            for part in &path[..path.len() - 1] {
                node = match node.get_mut(part) {
                    Some(toml::Value::Table(t)) => t,
                    _ => return Err(invalid(&dotted, "no such table")),
                };
            }
            let leaf = path.last().expect("split yields one part");
            if !node.contains_key(leaf) {
                return Err(invalid(&dotted, "no such field"));
            }
            node.insert(leaf.clone(), value);
            any = true;
        }
        if !any {
            return Ok(self);
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.preset != "all" && !crate::presets::PRESETS.contains(&self.preset.as_str()) {
            return Err(invalid("preset", format!("unknown preset `{}`", self.preset)));
        }
        if self.out.is_empty() {
            return Err(invalid("out", "must not be empty"));
        }
        let c = &self.cauchy_density;
        c.grid.validate("cauchy_density.grid")?;
        c.mass_grid_1d.validate("cauchy_density.mass_grid_1d")?;
        c.mass_grid_2d.validate("cauchy_density.mass_grid_2d")?;
        c.composition_grid.validate("cauchy_density.composition_grid")?;
        if c.grid.dim != 1 || c.mass_grid_1d.dim != 1 || c.composition_grid.dim != 1 {
            return Err(invalid("cauchy_density.grid.dim", "must be 1"));
        }
        if c.mass_grid_2d.dim != 2 {
            return Err(invalid("cauchy_density.mass_grid_2d.dim", "must be 2"));
        }
        positive("cauchy_density.t", c.t)?;
        positive("cauchy_density.window", c.window)?;
        positive("cauchy_density.composition_c", c.composition_c)?;
        nonempty("cauchy_density.mass_times", &c.mass_times)?;
        for (i, t) in c.mass_times.iter().enumerate() {
            positive(&format!("cauchy_density.mass_times[{i}]"), *t)?;
        }
        if c.composition_level == 0 || c.composition_level > 12 {
            return Err(invalid("cauchy_density.composition_level", "must lie in 1..=12"));
        }

        let l = &self.lp_partition;
        l.grid.validate("lp_partition.grid")?;
        nonempty("lp_partition.bases", &l.bases)?;
        if l.bases.iter().any(|&n| n < 2) {
            return Err(invalid("lp_partition.bases", "every base must be >= 2"));
        }
        alpha("lp_partition.alpha", l.alpha)?;
        if l.kmax < 1 || l.kmax >= (l.grid.n / 2) as i64 {
            return Err(invalid("lp_partition.kmax", "must lie in 1..n/2"));
        }

        let s = &self.scaling_identity;
        nonempty("scaling_identity.alphas", &s.alphas)?;
        for (i, a) in s.alphas.iter().enumerate() {
            alpha(&format!("scaling_identity.alphas[{i}]"), *a)?;
        }
        if s.xi_points == 0 {
            return Err(invalid("scaling_identity.xi_points", "must be positive"));
        }
        if !(s.xi_range > 1.0) {
            return Err(invalid("scaling_identity.xi_range", "must exceed 1"));
        }

        let a = &self.assumption_check;
        alpha("assumption_check.alpha", a.alpha)?;
        if !(a.big_c >= 1.0) {
            return Err(invalid("assumption_check.big_c", "must be >= 1"));
        }
        positive("assumption_check.r0", a.r0)?;
        positive("assumption_check.horizon", a.horizon)?;
        if a.t_samples == 0 || a.xi_samples == 0 {
            return Err(invalid("assumption_check.t_samples", "sample counts must be positive"));
        }

        let d = &self.density_decay;
        alpha("density_decay.alpha", d.alpha)?;
        d.grid.validate("density_decay.grid")?;
        nonempty("density_decay.blocks", &d.blocks)?;
        nonempty("density_decay.times", &d.times)?;
        for (i, t) in d.times.iter().enumerate() {
            positive(&format!("density_decay.times[{i}]"), *t)?;
        }

        for (name, a) in [("apriori_sweep", &self.apriori_sweep), ("corollary_sweep", &self.corollary_sweep)] {
            alpha(&format!("{name}.alpha"), a.alpha)?;
            a.grid.validate(&format!("{name}.grid"))?;
            nonempty(&format!("{name}.horizons"), &a.horizons)?;
            for (i, t) in a.horizons.iter().enumerate() {
                positive(&format!("{name}.horizons[{i}]"), *t)?;
            }
            for (i, t) in a.quadrature_horizons.iter().enumerate() {
                positive(&format!("{name}.quadrature_horizons[{i}]"), *t)?;
            }
            if !(a.p >= 1.0) {
                return Err(invalid(&format!("{name}.p"), "must be >= 1"));
            }
            positive(&format!("{name}.q"), a.q)?;
            if !a.gamma.is_finite() {
                return Err(invalid(&format!("{name}.gamma"), "must be finite"));
            }
            if a.steps == 0 {
                return Err(invalid(&format!("{name}.steps"), "must be positive"));
            }
            if !(a.grading >= 1.0) {
                return Err(invalid(&format!("{name}.grading"), "must be >= 1"));
            }
            positive(&format!("{name}.width"), a.width)?;
        }

        let m = &self.mc_cross_check;
        alpha("mc_cross_check.alpha", m.alpha)?;
        if !(m.epsilon > 0.0 && m.epsilon < 1.0) {
            return Err(invalid("mc_cross_check.epsilon", "must lie in (0, 1)"));
        }
        if m.paths == 0 {
            return Err(invalid("mc_cross_check.paths", "must be positive"));
        }
        positive("mc_cross_check.t", m.t)?;
        positive("mc_cross_check.width", m.width)?;
        m.grid.validate("mc_cross_check.grid")?;
        if m.grid.dim != 1 {
            return Err(invalid("mc_cross_check.grid.dim", "must be 1"));
        }
        nonempty("mc_cross_check.probes", &m.probes)?;
        let half = 0.5 * m.grid.length;
        for (i, x) in m.probes.iter().enumerate() {
            if !(x.abs() < half) {
                return Err(invalid(&format!("mc_cross_check.probes[{i}]"), "must lie inside the torus"));
            }
        }
        Ok(())
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Environment variables with the `NLE_` prefix, sorted for a stable order.
pub fn nle_env() -> BTreeMap<String, String> {
    std::env::vars().filter(|(k, _)| k.starts_with("NLE_")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = ExperimentConfig::from_toml("seed = 5\n[mc_cross_check]\npaths = 10\n").unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.mc_cross_check.paths, 10);
        assert_eq!(c.mc_cross_check.alpha, 0.8);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(ExperimentConfig::from_toml("[mc_cross_check]\npath = 10\n").is_err());
    }

    #[test]
    fn env_overrides_nested_fields() {
        let vars = vec![
            ("NLE_SEED".to_string(), "99".to_string()),
            ("NLE_MC_CROSS_CHECK__PROBES".to_string(), "[0.0, 1.5]".to_string()),
            ("NLE_OUT".to_string(), "elsewhere".to_string()),
            ("NLE_CAUCHY_DENSITY__GRID__N".to_string(), "2048".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ];
        let c = ExperimentConfig::default().with_env_overrides(vars).unwrap();
        assert_eq!(c.seed, 99);
        assert_eq!(c.mc_cross_check.probes, vec![0.0, 1.5]);
        assert_eq!(c.out, "elsewhere");
        assert_eq!(c.cauchy_density.grid.n, 2048);
        let bad = ExperimentConfig::default().with_env_overrides(vec![("NLE_NOPE".into(), "1".into())]);
        assert!(matches!(bad, Err(ConfigError::Invalid { path, .. }) if path == "nope"));
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = ExperimentConfig::default();
        c.apriori_sweep.grid.n = 100;
        match c.validate() {
            Err(ConfigError::Invalid { path, .. }) => assert_eq!(path, "apriori_sweep.grid.n"),
            other => panic!("{other:?}"),
        }
        let mut c = ExperimentConfig::default();
        c.mc_cross_check.epsilon = 1.5;
        assert!(c.validate().unwrap_err().to_string().contains("mc_cross_check.epsilon"));
        let c = ExperimentConfig { preset: "nope".into(), ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
    }
}
