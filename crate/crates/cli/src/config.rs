//! Run configuration: TOML file, then environment, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use attractor_mfpt::analysis::SweepSpec;

/// Overrides the output directory from the config file.
pub const OUT_DIR_ENV: &str = "MFPT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Structured key-value config file (TOML)
    #[arg(long, short = 'c', global = true)]
    pub config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per grid point
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Base rate tau2
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Step cap per trial
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Comma-separated tau1/tau2 values
    #[arg(long, global = true, value_delimiter = ',')]
    pub tau12_list: Option<Vec<f64>>,
    /// Comma-separated tau/epsilon values
    #[arg(long, global = true, value_delimiter = ',')]
    pub ratio_list: Option<Vec<f64>>,
}

pub fn load_spec(path: &Path) -> Result<SweepSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl Overrides {
    /// Config file (or defaults), then `MFPT_OUT_DIR`, then flags.
    pub fn resolve(&self) -> Result<SweepSpec> {
        let mut spec = match &self.config {
            Some(p) => load_spec(p)?,
            None => SweepSpec::default(),
        };
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            spec.out_dir = Some(dir.into());
        }
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    spec.$f = v.clone();
                }
            )*};
        }
        set!(seed, trials, a, b, tau, cap, tau12_list, ratio_list);
        if let Some(o) = &self.out {
            spec.out_dir = Some(o.clone());
        }
        Ok(spec)
    }
}

pub fn out_dir(spec: &SweepSpec) -> Result<PathBuf> {
    let dir = spec
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}
