//! Run configuration: one JSON file describes one run. Unknown keys are
//! rejected; omitted blocks fall back to the desk-scale defaults (2π×2π
//! torus, m = 1, μ_p = 0.5, λ = 1, n = 1, Λ = 5 for ~20 modes).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::{Limits, ModelParams};
use crate::lightfront::LightFrontParams;
use crate::manifold::{build_catalog, ManifoldSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    pub model: ModelBlock,
    pub truncation: TruncationBlock,
    pub scan: ScanBlock,
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifold: ManifoldSpec::torus(2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI),
            model: ModelBlock::default(),
            truncation: TruncationBlock::default(),
            scan: ScanBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub boson_mass: f64,
    pub binding_energy: f64,
    pub coupling: f64,
    pub boson_number: usize,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            boson_mass: 1.0,
            binding_energy: 0.5,
            coupling: 1.0,
            boson_number: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationBlock {
    /// Eigenvalue cutoff Λ: modes with σ ≤ Λ enter the catalog.
    pub lambda_cutoff: f64,
    pub mode_ceiling: usize,
    pub sector_dim_ceiling: usize,
    pub dense_ceiling: usize,
    pub prune_uncoupled: bool,
}

impl Default for TruncationBlock {
    fn default() -> Self {
        Self {
            lambda_cutoff: 5.0,
            mode_ceiling: 200_000,
            sector_dim_ceiling: 200_000,
            dense_ceiling: 5_000,
            prune_uncoupled: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanBlock {
    /// Number of spectral-parameter samples in flow scans.
    pub e_points: usize,
    /// Optional explicit flow window; defaults to [analytic lower bound,
    /// threshold).
    pub e_start: Option<f64>,
    pub e_stop: Option<f64>,
    /// |λ_k| grid for the decay checks (log-spaced).
    pub lambda_k: GridBlock,
    /// Cutoff sweep for the renormalization command (log-spaced).
    pub renorm_cutoffs: GridBlock,
    /// Heat-kernel time grid (log-spaced).
    pub heat_kernel_times: GridBlock,
    /// Number of random (E₁, E₂) pairs in the pseudo-resolvent check.
    pub resolvent_pairs: usize,
}

impl Default for ScanBlock {
    fn default() -> Self {
        Self {
            e_points: 50,
            e_start: None,
            e_stop: None,
            lambda_k: GridBlock {
                min: 1e2,
                max: 1e6,
                points: 9,
            },
            renorm_cutoffs: GridBlock {
                min: 100.0,
                max: 1000.0,
                points: 25,
            },
            heat_kernel_times: GridBlock {
                min: 1e-4,
                max: 10.0,
                points: 40,
            },
            resolvent_pairs: 20,
        }
    }
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            min: 1.0,
            max: 10.0,
            points: 9,
        }
    }
}

impl GridBlock {
    pub fn log_grid(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max > self.min && self.points >= 2) {
            return Err(Error::Config(format!(
                "grid needs 0 < min < max and points >= 2, got min = {}, max = {}, points = {}",
                self.min, self.max, self.points
            )));
        }
        Ok(crate::numeric::log_space(self.min, self.max, self.points))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Output directory; flag --out and LEELAB_OUT override/precede it.
    pub directory: Option<String>,
    pub formats: Formats,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
        }
    }
}

impl RunConfig {
    /// Parse and re-validate a configuration file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold.validate()?;
        // constructing the params re-runs every model invariant
        self.model_params()?;
        Ok(())
    }

    pub fn limits(&self) -> Limits {
        Limits {
            sector_dim_ceiling: self.truncation.sector_dim_ceiling,
            dense_ceiling: self.truncation.dense_ceiling,
        }
    }

    /// Build the catalog at the configured cutoff and wrap the model block.
    pub fn model_params(&self) -> Result<ModelParams> {
        self.model_params_at(self.truncation.lambda_cutoff)
    }

    /// Same model over a catalog at a different cutoff (renorm sweeps).
    pub fn model_params_at(&self, cutoff: f64) -> Result<ModelParams> {
        let catalog = build_catalog(
            &self.manifold,
            cutoff,
            self.model.boson_mass,
            self.truncation.prune_uncoupled,
            self.truncation.mode_ceiling,
        )?;
        ModelParams::new(
            catalog,
            self.model.binding_energy,
            self.model.coupling,
            self.model.boson_number,
            self.limits(),
        )
    }

    pub fn lightfront_params(&self) -> Result<LightFrontParams> {
        LightFrontParams::new(
            self.model.boson_mass,
            self.model.binding_energy,
            self.model.coupling,
            self.model.boson_number,
        )
    }

    /// Canonical serialization: field order is fixed by the struct, so the
    /// bytes are stable for hashing and byte-identical reports.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hash identifying (command, config, software version).
    pub fn config_hash(&self, command: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(b"\0");
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(b"\0");
        hasher.update(self.canonical_json().as_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_give_about_twenty_modes() {
        let config = RunConfig::default();
        config.validate().unwrap();
        let params = config.model_params().unwrap();
        assert!(
            (15..=25).contains(&params.catalog.len()),
            "{}",
            params.catalog.len()
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"model": {"boson_mass": 1.0, "typo_key": 2}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
        let text = r#"{"unknown_block": {}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn invalid_model_is_rejected_on_load() {
        let text = r#"{"model": {"binding_energy": 1.5}}"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn hash_depends_on_command_and_config() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        b.model.coupling = 2.0;
        assert_ne!(a.config_hash("renorm"), b.config_hash("renorm"));
        assert_ne!(a.config_hash("renorm"), a.config_hash("flow"));
        assert_eq!(
            a.config_hash("renorm"),
            RunConfig::default().config_hash("renorm")
        );
    }
}
