use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "NOISEMAGIC_OUT_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every subcommand. The same keys are accepted in a JSON
/// config file; anything given on the command line wins.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    /// System sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Logical qubits (default N/2).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub p_steps: Option<usize>,
    /// Coherent rotation angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    /// Temperature parameter of the generalized amplitude damping channel.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Encoder samples per grid point.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Skip SVG plots.
    #[arg(long)]
    pub no_plot: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Overrides {
    /// Field-wise `top.or(self)`.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            n: top.n.or(self.n),
            k: top.k.or(self.k),
            p_min: top.p_min.or(self.p_min),
            p_max: top.p_max.or(self.p_max),
            p_steps: top.p_steps.or(self.p_steps),
            alpha: top.alpha.or(self.alpha),
            alpha_min: top.alpha_min.or(self.alpha_min),
            alpha_max: top.alpha_max.or(self.alpha_max),
            alpha_steps: top.alpha_steps.or(self.alpha_steps),
            eta: top.eta.or(self.eta),
            samples: top.samples.or(self.samples),
            seed: top.seed.or(self.seed),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
            no_plot: top.no_plot || self.no_plot,
            threads: top.threads.or(self.threads),
        }
    }

    pub fn from_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Evenly spaced grid including both ends; a single step yields `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub const fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.max } else { self.min + i as f64 * h }).collect()
    }

    fn check(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.steps == 0 {
            bail!("{name} grid needs at least one step");
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            bail!("{name} grid [{}, {}] is invalid", self.min, self.max);
        }
        if self.min < lo || self.max > hi {
            bail!("{name} grid [{}, {}] leaves [{lo}, {hi}]", self.min, self.max);
        }
        Ok(())
    }
}

/// Per-command defaults, overridden by the config file and then by flags.
#[derive(Clone, Debug)]
pub struct Defaults {
    pub sizes: Vec<usize>,
    pub p: Grid,
    pub alpha: f64,
    pub alpha_grid: Grid,
    pub samples: Option<usize>,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            sizes: vec![4],
            p: Grid::new(0.0, 1.0, 21),
            alpha: 1.3,
            alpha_grid: Grid::new(0.0, std::f64::consts::PI, 33),
            samples: None,
        }
    }
}

pub const DEFAULT_SEED: u64 = 2024;

/// Fully resolved settings, echoed into the run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub sizes: Vec<usize>,
    pub k: Option<usize>,
    pub p: Grid,
    pub alpha: f64,
    pub alpha_grid: Grid,
    pub eta: Option<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub plot: bool,
    pub threads: Option<usize>,
}

impl Settings {
    /// `defaults < file < environment (output directory only) < flags`.
    pub fn resolve(defaults: Defaults, file: Overrides, env_out: Option<PathBuf>, flags: Overrides) -> Result<Self> {
        let env = Overrides { out: env_out, ..Overrides::default() };
        let o = file.layered(env).layered(flags);
        let s = Settings {
            sizes: o.n.unwrap_or(defaults.sizes),
            k: o.k,
            p: Grid::new(
                o.p_min.unwrap_or(defaults.p.min),
                o.p_max.unwrap_or(defaults.p.max),
                o.p_steps.unwrap_or(defaults.p.steps),
            ),
            alpha: o.alpha.unwrap_or(defaults.alpha),
            alpha_grid: Grid::new(
                o.alpha_min.unwrap_or(defaults.alpha_grid.min),
                o.alpha_max.unwrap_or(defaults.alpha_grid.max),
                o.alpha_steps.unwrap_or(defaults.alpha_grid.steps),
            ),
            eta: o.eta,
            samples: o.samples.or(defaults.samples),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            out: o.out.unwrap_or_else(|| PathBuf::from("results")),
            format: o.format.unwrap_or_default(),
            plot: !o.no_plot,
            threads: o.threads,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if self.sizes.is_empty() {
            bail!("no system sizes given");
        }
        self.p.check("p", 0.0, 1.0)?;
        self.alpha_grid.check("alpha", f64::NEG_INFINITY, f64::INFINITY)?;
        if !self.alpha.is_finite() {
            bail!("alpha must be finite");
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                bail!("eta = {eta} outside [0, 1]");
            }
        }
        if self.samples == Some(0) {
            bail!("samples must be at least 1");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(())
    }

    /// Logical qubits for size `n`: the `--k` flag or `n / 2`.
    pub fn logical(&self, n: usize) -> usize {
        self.k.unwrap_or(n / 2)
    }

    pub fn samples_or(&self, fallback: usize) -> usize {
        self.samples.unwrap_or(fallback)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        assert_eq!(Grid::new(0.0, 1.0, 5).points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Grid::new(0.3, 0.9, 1).points(), vec![0.3]);
        let g = Grid::new(0.0, 1.0, 21).points();
        assert_eq!(g.len(), 21);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn precedence() {
        let file = Overrides { seed: Some(5), samples: Some(10), out: Some("a".into()), ..Default::default() };
        let flags = Overrides { samples: Some(20), ..Default::default() };
        let s = Settings::resolve(Defaults::default(), file.clone(), Some("b".into()), flags).unwrap();
        assert_eq!((s.seed, s.samples, s.out.clone()), (5, Some(20), PathBuf::from("b")));
        let flags = Overrides { out: Some("c".into()), ..Default::default() };
        let s = Settings::resolve(Defaults::default(), file, Some("b".into()), flags).unwrap();
        assert_eq!(s.out, PathBuf::from("c"));
    }

    #[test]
    fn rejects_bad_grids() {
        let bad = Overrides { p_max: Some(1.5), ..Default::default() };
        assert!(Settings::resolve(Defaults::default(), Overrides::default(), None, bad).is_err());
        let bad = Overrides { p_steps: Some(0), ..Default::default() };
        assert!(Settings::resolve(Defaults::default(), Overrides::default(), None, bad).is_err());
        let bad = Overrides { p_min: Some(0.8), p_max: Some(0.2), ..Default::default() };
        assert!(Settings::resolve(Defaults::default(), Overrides::default(), None, bad).is_err());
    }

    #[test]
    fn config_file_keys() {
        let o: Overrides = serde_json::from_str(r#"{"n": [2, 4], "p-steps": 3, "no-plot": true}"#).unwrap();
        assert_eq!(o.n, Some(vec![2, 4]));
        assert_eq!(o.p_steps, Some(3));
        assert!(o.no_plot);
        assert!(serde_json::from_str::<Overrides>(r#"{"bogus": 1}"#).is_err());
    }
}
