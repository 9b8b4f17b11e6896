//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qwork_core::duality::log_spaced;
use qwork_core::{DrivenTwoLevel, MeasurementScheme};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Projective,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Every field is optional so that unset
/// flags fall through to the config file and then to the defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Level splitting omega0 (units of the drive strength).
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Drive frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Protocol duration.
    #[arg(long)]
    pub t: Option<f64>,
    /// State angle(s) in radians, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Measurement error for single-point commands.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    #[arg(long)]
    pub sigma_points: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,
    /// Output file, or directory for `fig1`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub tol_propagator: Option<f64>,
    #[arg(long)]
    pub tol_quadrature: Option<f64>,
}

impl Overrides {
    fn overlay(self, flags: Overrides) -> Overrides {
        Overrides {
            omega0: flags.omega0.or(self.omega0),
            omega: flags.omega.or(self.omega),
            t: flags.t.or(self.t),
            theta: flags.theta.or(self.theta),
            sigma: flags.sigma.or(self.sigma),
            sigma_min: flags.sigma_min.or(self.sigma_min),
            sigma_max: flags.sigma_max.or(self.sigma_max),
            sigma_points: flags.sigma_points.or(self.sigma_points),
            scheme: flags.scheme.or(self.scheme),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
            tol_propagator: flags.tol_propagator.or(self.tol_propagator),
            tol_quadrature: flags.tol_quadrature.or(self.tol_quadrature),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega0: f64,
    pub omega: f64,
    pub t: f64,
    pub thetas: Vec<f64>,
    pub scheme: SchemeKind,
    pub sigma: f64,
    pub sigma_grid: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tol_propagator: f64,
    pub tol_quadrature: f64,
}

pub const DEFAULT_THETAS: [f64; 3] = [PI / 16.0, FRAC_PI_8, FRAC_PI_4];
pub const DEFAULT_SIGMA: f64 = 0.5;
pub const DEFAULT_SIGMA_MIN: f64 = 1e-3;
pub const DEFAULT_SIGMA_MAX: f64 = 1e2;
pub const DEFAULT_SIGMA_POINTS: usize = 60;
pub const DEFAULT_TOL_PROPAGATOR: f64 = 1e-10;
pub const DEFAULT_TOL_QUADRATURE: f64 = 1e-10;

fn bad(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config(format!("{field}: {}", reason.into()))
}

impl RunConfig {
    /// Reads `file` (if any), overlays `flags` and validates the result.
    pub fn load(file: Option<&Path>, flags: Overrides) -> Result<Self, CliError> {
        let base = match file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| bad("config", format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<Overrides>(&text).map_err(|e| bad("config", e.to_string()))?
            }
            None => Overrides::default(),
        };
        Self::resolve(base.overlay(flags))
    }

    pub fn resolve(o: Overrides) -> Result<Self, CliError> {
        let reference = DrivenTwoLevel::reference();
        let cfg = RunConfig {
            omega0: o.omega0.unwrap_or(reference.omega0()),
            omega: o.omega.unwrap_or(reference.omega()),
            t: o.t.unwrap_or(100.0),
            thetas: o.theta.unwrap_or_else(|| DEFAULT_THETAS.to_vec()),
            scheme: o.scheme.unwrap_or(SchemeKind::Gaussian),
            sigma: o.sigma.unwrap_or(DEFAULT_SIGMA),
            sigma_grid: {
                let lo = o.sigma_min.unwrap_or(DEFAULT_SIGMA_MIN);
                let hi = o.sigma_max.unwrap_or(DEFAULT_SIGMA_MAX);
                let n = o.sigma_points.unwrap_or(DEFAULT_SIGMA_POINTS);
                if !(lo > 0.0 && lo.is_finite()) {
                    return Err(bad("sigma_min", format!("must be > 0, got {lo}")));
                }
                if !hi.is_finite() || n == 0 || (n > 1 && !(hi > lo)) {
                    return Err(bad(
                        "sigma_max",
                        format!("sigma grid must be strictly increasing ({lo} .. {hi}, {n} points)"),
                    ));
                }
                log_spaced(lo, hi, n)
            },
            out: o.out,
            format: o.format.unwrap_or(Format::Csv),
            tol_propagator: o.tol_propagator.unwrap_or(DEFAULT_TOL_PROPAGATOR),
            tol_quadrature: o.tol_quadrature.unwrap_or(DEFAULT_TOL_QUADRATURE),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        DrivenTwoLevel::new(self.omega0, self.omega).map_err(|e| bad("model", e.to_string()))?;
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(bad("t", format!("must be finite and >= 0, got {}", self.t)));
        }
        if self.thetas.is_empty() {
            return Err(bad("theta", "at least one angle is required"));
        }
        for &th in &self.thetas {
            if !(0.0..=FRAC_PI_2).contains(&th) {
                return Err(bad("theta", format!("{th} is outside [0, pi/2]")));
            }
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(bad("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        if self.sigma_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(bad("sigma_points", "sigma grid is not strictly increasing"));
        }
        for (name, tol) in [("tol_propagator", self.tol_propagator), ("tol_quadrature", self.tol_quadrature)] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(bad(name, format!("must be > 0, got {tol}")));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> DrivenTwoLevel {
        DrivenTwoLevel::new(self.omega0, self.omega).expect("validated")
    }

    pub fn measurement(&self) -> MeasurementScheme {
        match self.scheme {
            SchemeKind::Projective => MeasurementScheme::Projective,
            SchemeKind::Gaussian => MeasurementScheme::Gaussian { sigma: self.sigma },
        }
    }
}
