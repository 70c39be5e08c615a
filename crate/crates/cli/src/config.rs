//! Configuration loading: a preset, overlaid by an optional TOML file,
//! overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use semireg::risk::ExperimentConfig;
use toml::{Table, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Full-scale protocol: p = 100001, N = 10000, n in {20, 100, 200, 1000}.
    PaperSec6,
    /// Desk-scale surrogate: p = 1001, N = 500, n in {20, 100}, k* = 5.
    DeskScale,
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::PaperSec6 => ExperimentConfig::default(),
            Preset::DeskScale => {
                let mut c = ExperimentConfig {
                    n_values: vec![20, 100],
                    p: Some(1001),
                    replications: 500,
                    ..ExperimentConfig::default()
                };
                c.estimator.k_star = Some(5);
                c
            }
        }
    }
}

/// Canonical TOML text of a configuration.
pub fn to_toml(config: &ExperimentConfig) -> Result<String, CliError> {
    toml::to_string(config).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
}

/// Tables carrying a variant tag replace the base value instead of merging,
/// so switching e.g. the inter-arrival law does not inherit stale fields.
fn is_tagged(table: &Table) -> bool {
    table.contains_key("kind") || table.contains_key("law")
}

fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) if !is_tagged(&o) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Overlays TOML `text` on `base`. Unknown keys are rejected.
pub fn overlay(base: &ExperimentConfig, text: &str) -> Result<ExperimentConfig, CliError> {
    let overlay: Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
    let mut table: Table = to_toml(base)?
        .parse()
        .map_err(|e| CliError::Config(format!("{e}")))?;
    merge(&mut table, overlay);
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict_h5: bool,
}

pub fn load(preset: Preset, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut config = preset.config();
    if let Some(path) = &overrides.config_path {
        config = overlay(&config, &read(path)?)?;
    }
    if let Some(seed) = overrides.seed {
        config.base_seed = seed;
    }
    if overrides.strict_h5 {
        config.strict_h5 = true;
    }
    // TOML integers are signed 64-bit
    if config.base_seed > i64::MAX as u64 {
        return Err(CliError::Config(format!(
            "seed {} exceeds the largest storable value {}",
            config.base_seed,
            i64::MAX
        )));
    }
    config.validate()?;
    Ok(config)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use semireg::noise::InterarrivalLaw;
    use semireg::signal::SignalSpec;

    #[test]
    fn empty_overlay_keeps_defaults() {
        let base = Preset::PaperSec6.config();
        let c = overlay(&base, "").unwrap();
        assert_eq!(c, base);
        assert_eq!(c.noise.rho1, 0.5);
        assert_eq!(c.noise.interarrival, InterarrivalLaw::ChiSquared { df: 3.0 });
        assert_eq!(c.estimator.k0, 100);
    }

    #[test]
    fn round_trip() {
        for preset in [Preset::PaperSec6, Preset::DeskScale] {
            let mut c = preset.config();
            c.signal = SignalSpec::TrigPolynomial {
                coefficients: vec![0.1, -0.3, 1e-17, 2.5],
            };
            c.estimator.eps = Some(0.3);
            let text = to_toml(&c).unwrap();
            assert_eq!(overlay(&ExperimentConfig::default(), &text).unwrap(), c);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let base = Preset::DeskScale.config();
        assert!(overlay(&base, "replicates = 3").is_err());
        assert!(overlay(&base, "[noise]\nrho3 = 1.0").is_err());
        assert!(overlay(&base, "[noise.interarrival]\nlaw = \"exponential\"\nrate = 1.0\ndf = 2.0").is_err());
    }

    #[test]
    fn tagged_tables_replace() {
        let base = Preset::DeskScale.config();
        let c = overlay(&base, "[noise.interarrival]\nlaw = \"exponential\"\nrate = 2.0\n").unwrap();
        assert_eq!(c.noise.interarrival, InterarrivalLaw::Exponential { rate: 2.0 });
        assert_eq!(c.noise.rho2, 0.5);
        assert_eq!(c.p, Some(1001));
    }

    #[test]
    fn strict_h5_rejects_low_frequency() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "n_values = [100]\np = 10\n").unwrap();
        let mut o = Overrides {
            config_path: Some(path),
            ..Overrides::default()
        };
        assert!(load(Preset::DeskScale, &o).is_ok());
        o.strict_h5 = true;
        assert!(matches!(load(Preset::DeskScale, &o), Err(CliError::Library(_))));
    }

    #[test]
    fn seed_echo_and_limit() {
        let mut o = Overrides {
            seed: Some(42),
            ..Overrides::default()
        };
        let c = load(Preset::DeskScale, &o).unwrap();
        assert_eq!(c.base_seed, 42);
        assert!(to_toml(&c).unwrap().contains("base_seed = 42"));
        o.seed = Some(u64::MAX);
        assert!(load(Preset::DeskScale, &o).is_err());
    }
}
