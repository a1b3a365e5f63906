use clap::Args;
use msf_core::master_system::{catalog_lookup, CatalogParams, MasterSystem};
use msf_core::verification::{GridSpec, CHECK_NAMES, DEFAULT_GRID_N};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub n: Option<usize>,
    pub order: Option<u8>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub profile_csv: Option<PathBuf>,
}

/// Contents of a config file; every field may be overridden by a flag.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub m: Option<u32>,
    #[serde(alias = "C")]
    pub c: Option<f64>,
    pub r0: Option<f64>,
    pub k: Option<usize>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// JSON or TOML config file (chosen by extension)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Deformation constant C
    #[arg(long = "c-const", allow_hyphen_values = true)]
    pub c_const: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub rmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rmax: Option<f64>,
    /// Output path (stdout when absent)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Number of levels for spectra
    #[arg(long)]
    pub k: Option<usize>,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub family: String,
    pub params: CatalogParams,
    pub c: f64,
    pub r0: Option<f64>,
    pub k: usize,
    pub grid: GridConfig,
    pub checks: Vec<String>,
    pub report: Option<PathBuf>,
    pub profile_csv: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display())),
        Some("toml") => toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display())),
        _ => Err(format!("{}: config must end in .json or .toml", path.display())),
    }
}

impl RunFlags {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let cfg = match &self.config {
            Some(p) => load(p)?,
            None => RunConfig::default(),
        };
        for name in &cfg.checks {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(format!("unknown check `{name}`"));
            }
        }
        let mut grid = cfg.grid.clone();
        grid.n = self.grid_n.or(grid.n);
        grid.r_min = self.rmin.or(grid.r_min);
        grid.r_max = self.rmax.or(grid.r_max);
        Ok(Resolved {
            family: self.family.clone().or(cfg.family).unwrap_or_else(|| "oscillator-like".into()),
            params: CatalogParams {
                alpha: self.alpha.or(cfg.alpha).unwrap_or(0.0),
                beta: self.beta.or(cfg.beta).unwrap_or(2.0),
                m: self.m.or(cfg.m).unwrap_or(0),
            },
            c: self.c_const.or(cfg.c).unwrap_or(2.0),
            r0: self.r0.or(cfg.r0),
            k: self.k.or(cfg.k).unwrap_or(6),
            grid,
            checks: cfg.checks,
            report: self.report.clone().or(cfg.output.report),
            profile_csv: cfg.output.profile_csv,
        })
    }
}

impl Resolved {
    pub fn system(&self) -> msf_core::Result<MasterSystem> {
        catalog_lookup(&self.family, self.params)
    }

    /// The family default box with any configured fields replacing it.
    pub fn grid_spec(&self, sys: &MasterSystem) -> msf_core::Result<GridSpec> {
        let n = self.grid.n.unwrap_or(DEFAULT_GRID_N);
        let base = GridSpec::for_system(sys, n)?;
        let g = GridSpec {
            r_min: self.grid.r_min.unwrap_or(base.r_min),
            r_max: self.grid.r_max.unwrap_or(base.r_max),
            n,
            order: self.grid.order.unwrap_or(2),
        };
        g.validate()?;
        Ok(g)
    }
}
