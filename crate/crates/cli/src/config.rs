//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use qmeter::cycle::EngineParams;
use qmeter::measurement::MeasureFault;
use qmeter::propagator::DEFAULT_STEPS;
use qmeter::sweep::{GridSpec, DEFAULT_GRID_POINTS};
use qmeter::units;

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 0x514d_4554;
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Anti-Hermitian drift injected by `--inject-fault skip-rehermitize`.
pub const FAULT_DRIFT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    /// β = 1/ħω, i.e. βħω = 1.
    InverseHbarOmega,
    /// Explicit inverse temperature in 1/peV.
    PerPev(f64),
}

impl FromStr for Beta {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inverse_hbar_omega" {
            return Ok(Beta::InverseHbarOmega);
        }
        s.parse().map(Beta::PerPev).map_err(|_| {
            CliError::Config(format!(
                "beta: expected inverse_hbar_omega or a number, got {s:?}"
            ))
        })
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Beta::InverseHbarOmega => f.write_str("inverse_hbar_omega"),
            Beta::PerPev(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    SkipRehermitize,
}

impl FromStr for Fault {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Fault::None),
            "skip-rehermitize" => Ok(Fault::SkipRehermitize),
            _ => Err(CliError::Config(format!("unknown fault {s:?}"))),
        }
    }
}

impl Fault {
    pub fn measure_fault(self) -> MeasureFault {
        match self {
            Fault::None => MeasureFault::None,
            Fault::SkipRehermitize => MeasureFault::SkipRehermitization { drift: FAULT_DRIFT },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hbar_omega_pev: f64,
    pub tau_us: f64,
    pub beta: Beta,
    pub alpha_rad: Option<f64>,
    pub phi_rad: Option<f64>,
    pub steps: usize,
    pub grid_alpha_points: usize,
    pub grid_phi_points: usize,
    pub seed: u64,
    pub samples: usize,
    pub fault: Fault,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hbar_omega_pev: units::DEFAULT_HBAR_OMEGA_PEV,
            tau_us: units::DEFAULT_TAU_US,
            beta: Beta::InverseHbarOmega,
            alpha_rad: None,
            phi_rad: None,
            steps: DEFAULT_STEPS,
            grid_alpha_points: DEFAULT_GRID_POINTS,
            grid_phi_points: DEFAULT_GRID_POINTS,
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            fault: Fault::None,
        }
    }
}

/// Optional values from either source; `None` leaves the lower layer in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub hbar_omega_pev: Option<f64>,
    pub tau_us: Option<f64>,
    pub beta: Option<Beta>,
    pub alpha_rad: Option<f64>,
    pub phi_rad: Option<f64>,
    pub steps: Option<usize>,
    pub grid_alpha_points: Option<usize>,
    pub grid_phi_points: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub fault: Option<Fault>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}")))
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_file_text(text: &str) -> Result<Overrides> {
    let mut seen = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim().to_string();
        if seen.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!(
                "line {}: duplicate key {key}",
                n + 1
            )));
        }
    }
    let mut o = Overrides::default();
    for (key, raw) in &seen {
        let raw = raw.as_str();
        match key.as_str() {
            "hbar_omega_peV" => o.hbar_omega_pev = Some(parse_value(key, raw)?),
            "tau_us" => o.tau_us = Some(parse_value(key, raw)?),
            "beta" => o.beta = Some(raw.parse()?),
            "alpha_rad" => o.alpha_rad = Some(parse_value(key, raw)?),
            "phi_rad" => o.phi_rad = Some(parse_value(key, raw)?),
            "steps" => o.steps = Some(parse_value(key, raw)?),
            "grid.alpha_points" => o.grid_alpha_points = Some(parse_value(key, raw)?),
            "grid.phi_points" => o.grid_phi_points = Some(parse_value(key, raw)?),
            "seed" => o.seed = Some(parse_value(key, raw)?),
            "samples" => o.samples = Some(parse_value(key, raw)?),
            "inject_fault" => o.fault = Some(raw.parse()?),
            _ => return Err(CliError::Config(format!("unknown key {key}"))),
        }
    }
    Ok(o)
}

pub fn load_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_file_text(&text)
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            hbar_omega_pev,
            tau_us,
            beta,
            steps,
            grid_alpha_points,
            grid_phi_points,
            seed,
            samples,
            fault
        );
        if o.alpha_rad.is_some() {
            self.alpha_rad = o.alpha_rad;
        }
        if o.phi_rad.is_some() {
            self.phi_rad = o.phi_rad;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.hbar_omega_pev) {
            return Err(CliError::Config("hbar_omega must be positive".into()));
        }
        if !positive(self.tau_us) {
            return Err(CliError::Config("tau must be positive".into()));
        }
        if let Beta::PerPev(b) = self.beta {
            if !(b.is_finite() && b >= 0.0) {
                return Err(CliError::Config("beta must be non-negative".into()));
            }
        }
        for (name, v) in [("alpha", self.alpha_rad), ("phi", self.phi_rad)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be finite")));
            }
        }
        if self
            .alpha_rad
            .is_some_and(|a| !(0.0..=std::f64::consts::PI).contains(&a))
        {
            return Err(CliError::Config("alpha must lie in [0, pi]".into()));
        }
        if self.steps < 2 {
            return Err(CliError::Config("steps must be at least 2".into()));
        }
        if self.grid_alpha_points < 3 || self.grid_phi_points < 3 {
            return Err(CliError::Config(
                "grid needs at least 3 points per axis".into(),
            ));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(())
    }

    pub fn omega_tau(&self) -> f64 {
        units::omega_tau(self.hbar_omega_pev, self.tau_us)
    }

    pub fn beta_hbar_omega(&self) -> f64 {
        match self.beta {
            Beta::InverseHbarOmega => 1.0,
            Beta::PerPev(b) => units::beta_hbar_omega(b, self.hbar_omega_pev),
        }
    }

    pub fn angles(&self) -> Result<(f64, f64)> {
        match (self.alpha_rad, self.phi_rad) {
            (Some(a), Some(p)) => Ok((a, p)),
            _ => Err(CliError::Config(
                "alpha_rad and phi_rad are required".into(),
            )),
        }
    }

    pub fn engine_params(&self) -> EngineParams {
        EngineParams {
            omega_tau: self.omega_tau(),
            beta_hbar_omega: self.beta_hbar_omega(),
            alpha: self.alpha_rad.unwrap_or(0.0),
            phi: self.phi_rad.unwrap_or(0.0),
            steps: self.steps,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.engine_params())
            .with_points(self.grid_alpha_points, self.grid_phi_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_reference_phase() {
        let c = RunConfig::default();
        assert!((c.omega_tau() - 0.015193).abs() < 1e-6);
        assert_eq!(c.beta_hbar_omega(), 1.0);
    }

    #[test]
    fn file_then_flags() {
        let file =
            parse_file_text("# engine\ntau_us = 5\nbeta = 2.5\ngrid.alpha_points=9\n").unwrap();
        let mut c = RunConfig::default();
        c.apply(&file);
        c.apply(&Overrides {
            tau_us: Some(20.0),
            ..Overrides::default()
        });
        assert_eq!(c.tau_us, 20.0);
        assert_eq!(c.beta, Beta::PerPev(2.5));
        assert_eq!(c.grid_alpha_points, 9);
        assert_eq!(c.beta_hbar_omega(), 2.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_file_text("tau_us 5").is_err());
        assert!(parse_file_text("colour = red").is_err());
        assert!(parse_file_text("steps = 4\nsteps = 5").is_err());
        assert!(parse_file_text("beta = hot").is_err());
        let c = RunConfig {
            tau_us: -1.0,
            ..RunConfig::default()
        };
        assert_eq!(
            c.validate().unwrap_err().to_string(),
            "tau must be positive"
        );
        let c = RunConfig {
            steps: 1,
            ..RunConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
    }
}
