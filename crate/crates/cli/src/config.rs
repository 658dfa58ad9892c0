//! Run configuration: a JSON file whose keys can be overridden by flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "surrogate",
    version,
    about = "Smooth-surrogate information-criterion optimization",
    allow_negative_numbers = true
)]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for output files (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// select, cluster, oracle-subset, oracle-partition or surface.
    #[arg(long)]
    pub mode: Option<String>,
    /// CSV input with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// aic, bic or gic:<c>.
    #[arg(long)]
    pub objective: Option<String>,
    /// sech, gaussian or rational.
    #[arg(long)]
    pub smoother: Option<String>,
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Gradient tolerance per sharpness step.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Lagrange series order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Snap tolerance for zeros and fusions.
    #[arg(long)]
    pub snap: Option<f64>,
    /// Comma-separated named seeds: ols, zero, data, mean.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<String>>,
    /// Comma-separated starting sharpness values; every seed is run from each.
    #[arg(long, value_delimiter = ',')]
    pub start_k: Option<Vec<f64>>,
    /// Known noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub response: Option<String>,
    /// Comma-separated data columns to cluster.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Seed of the synthetic regression toy (implies synthetic data).
    #[arg(long)]
    pub synthetic_seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SeedSpec {
    Named(String),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// Parameter index swept along the slice.
    pub coordinate: Option<usize>,
    pub k_list: Vec<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: Option<usize>,
    /// Values of the other parameters; defaults to the least-squares fit.
    pub base: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub kind: String,
    pub seed: Option<u64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub mode: Option<String>,
    pub data: Option<PathBuf>,
    pub synthetic: Option<SyntheticConfig>,
    pub response: Option<String>,
    pub predictors: Option<Vec<String>>,
    pub intercept: Option<bool>,
    pub columns: Option<Vec<String>>,
    pub objective: Option<String>,
    pub smoother: Option<String>,
    pub k0: Option<f64>,
    pub ratio: Option<f64>,
    pub kmax: Option<f64>,
    pub tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub root_max_iter: Option<usize>,
    pub order: Option<usize>,
    pub seeds: Option<Vec<SeedSpec>>,
    pub start_k: Option<Vec<f64>>,
    pub snap: Option<f64>,
    pub penalize: Option<Vec<bool>>,
    pub sigma: Option<f64>,
    pub surface: Option<SurfaceConfig>,
}

/// A merged configuration plus enough provenance to point error messages
/// at the offending config line or flag.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: Config,
    pub out: PathBuf,
    source: Option<(PathBuf, String)>,
    from_flags: BTreeSet<&'static str>,
}

impl Settings {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let (mut config, source) = match &args.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let config = serde_json::from_str::<Config>(&text)
                    .map_err(|e| CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
                (config, Some((path.clone(), text)))
            }
            None => (Config::default(), None),
        };
        // Data paths in a config file are relative to the file.
        if let (Some(data), Some((path, _))) = (&config.data, &source) {
            if data.is_relative() {
                let dir = path.parent().unwrap_or(Path::new(""));
                config.data = Some(dir.join(data));
            }
        }

        let mut from_flags = BTreeSet::new();
        macro_rules! take {
            ($field:ident, $key:literal) => {
                if let Some(v) = args.$field {
                    config.$field = Some(v);
                    from_flags.insert($key);
                }
            };
        }
        take!(mode, "mode");
        take!(data, "data");
        take!(objective, "objective");
        take!(smoother, "smoother");
        take!(k0, "k0");
        take!(ratio, "ratio");
        take!(kmax, "kmax");
        take!(tol, "tol");
        take!(max_sweeps, "max_sweeps");
        take!(order, "order");
        take!(snap, "snap");
        take!(start_k, "start_k");
        take!(sigma, "sigma");
        take!(response, "response");
        take!(columns, "columns");
        if let Some(seeds) = args.seeds {
            config.seeds = Some(seeds.into_iter().map(SeedSpec::Named).collect());
            from_flags.insert("seeds");
        }
        if let Some(seed) = args.synthetic_seed {
            let current = config.synthetic.take();
            config.synthetic = Some(SyntheticConfig {
                kind: current
                    .as_ref()
                    .map_or_else(|| crate::TOY_KIND.to_string(), |s| s.kind.clone()),
                seed: Some(seed),
                n: current.and_then(|s| s.n),
            });
            from_flags.insert("synthetic");
        }
        Ok(Self {
            config,
            out: args.out,
            source,
            from_flags,
        })
    }

    /// Config error attributed to `key`: the flag that set it, or the first
    /// config line mentioning it.
    pub fn error(&self, key: &str, message: impl std::fmt::Display) -> CliError {
        if self.from_flags.contains(key) {
            let flag = match key {
                "synthetic" => "synthetic-seed".to_string(),
                other => other.replace('_', "-"),
            };
            return CliError::Config(format!("--{flag}: {message}"));
        }
        match &self.source {
            Some((path, text)) => {
                let needle = format!("\"{key}\"");
                match text.lines().position(|l| l.contains(&needle)) {
                    Some(i) => CliError::Config(format!("{}:{}: {message}", path.display(), i + 1)),
                    None => CliError::Config(format!("{}: {message}", path.display())),
                }
            }
            None => CliError::Config(format!("{key}: {message}")),
        }
    }

    /// Config error not tied to a single key.
    pub fn invalid(&self, message: impl std::fmt::Display) -> CliError {
        match &self.source {
            Some((path, _)) => CliError::Config(format!("{}: {message}", path.display())),
            None => CliError::Config(message.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Args {
        Args::parse_from(std::iter::once("surrogate").chain(list.iter().copied()))
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            "{\n  \"mode\": \"select\",\n  \"k0\": 0.5,\n  \"data\": \"d.csv\"\n}\n",
        )
        .unwrap();
        let s = Settings::from_args(args(&["--config", path.to_str().unwrap(), "--k0", "2"])).unwrap();
        assert_eq!(s.config.k0, Some(2.0));
        assert_eq!(s.config.mode.as_deref(), Some("select"));
        assert_eq!(s.config.data, Some(dir.path().join("d.csv")));
        assert!(s.error("k0", "bad").to_string().starts_with("--k0"));
        assert!(s.error("mode", "bad").to_string().ends_with("run.json:2: bad"));
    }

    #[test]
    fn malformed_config_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, "{\n  \"mode\": \"select\",\n  \"bogus\": 1\n}\n").unwrap();
        let err = Settings::from_args(args(&["--config", path.to_str().unwrap()])).unwrap_err();
        assert!(err.to_string().contains("run.json:3:"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn seeds_accept_names_and_vectors() {
        let c: Config = serde_json::from_str(r#"{"seeds": ["ols", [0.0, 1.5]]}"#).unwrap();
        assert_eq!(
            c.seeds.unwrap(),
            vec![SeedSpec::Named("ols".into()), SeedSpec::Values(vec![0.0, 1.5])]
        );
    }
}
