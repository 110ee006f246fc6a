//! Flat `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key must appear in
//! [`KNOWN_KEYS`]; anything else is a config error. Values are kept as text
//! until a command asks for them, so defaults are resolved in one place and
//! echoed into the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use kramers_core::fokker_planck::{Axis, PhaseGrid};
use kramers_core::langevin_sim::{HistogramSpec, Sampling};
use kramers_core::{BathParams, InitialCondition, Mode, NoiseKernel, Ordering, Potential, SimConfig, StepPoint};

use crate::CliError;

/// Every accepted key with its default, or `None` when there is no default.
pub const KNOWN_KEYS: &[(&str, Option<&str>)] = &[
    ("bath.model", Some("ohmic")),
    ("bath.mass", Some("1")),
    ("bath.gamma", Some("1")),
    ("bath.kbt", Some("1")),
    ("bath.hbar", Some("0")),
    ("bath.omega_d", None),
    ("potential.kind", Some("harmonic")),
    ("potential.omega0", Some("1")),
    ("potential.a", Some("-1")),
    ("potential.b", Some("0.25")),
    ("potential.coeffs", Some("")),
    ("kernels.t_max", Some("5")),
    ("kernels.dt", Some("0.005")),
    ("kernels.omega_max", None),
    ("kernels.n_omega", Some("1001")),
    ("sim.mode", Some("overdamped")),
    ("sim.dt", Some("0.001")),
    ("sim.steps", Some("1000")),
    ("sim.n_traj", Some("1000")),
    ("sim.seed", Some("0")),
    ("sim.x0", Some("0")),
    ("sim.v0", Some("0")),
    ("sim.noise", Some("white")),
    ("sim.step_point", Some("pre")),
    ("sim.burn_in", None),
    ("sim.stride", Some("1")),
    ("sim.hist_lo", Some("-6")),
    ("sim.hist_hi", Some("6")),
    ("sim.hist_bins", Some("60")),
    ("sim.autocorr_lags", Some("0")),
    ("simulate.langevin", Some("true")),
    ("simulate.fp", Some("false")),
    ("simulate.compare", Some("false")),
    ("fp.ordering", Some("momenta_left")),
    ("fp.x_min", Some("-6")),
    ("fp.x_max", Some("6")),
    ("fp.nx", Some("128")),
    ("fp.v_min", Some("-6")),
    ("fp.v_max", Some("6")),
    ("fp.nv", Some("128")),
    ("fp.dt", None),
    ("fp.t_end", Some("1")),
    ("fp.samples", Some("20")),
    ("fp.x0", None),
    ("fp.v0", None),
    ("fp.width", Some("0.5")),
    ("compare.times", Some("0,1")),
    ("compare.cells_per_bin", Some("8")),
    ("decohere.nx", Some("64")),
    ("decohere.dx", Some("0.25")),
    ("decohere.ny", Some("128")),
    ("decohere.dy", Some("0.2")),
    ("decohere.separation", Some("6")),
    ("decohere.sigma", Some("0.5")),
    ("decohere.dt", Some("0.0001")),
    ("decohere.steps", Some("10")),
    ("decohere.snapshots", Some("2")),
    ("decohere.ordering", Some("momenta_left")),
    ("decohere.p_max", Some("4")),
    ("decohere.np", Some("81")),
    ("det.n", Some("10000")),
    ("det.random_cases", Some("100")),
    ("det.gamma", Some("2")),
    ("det.total_time", Some("1")),
    ("det.drude_ratio", Some("100")),
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn config_error(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {reason}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected key = value", lineno + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    fn raw(&self, key: &str) -> Option<&str> {
        if let Some(v) = self.values.get(key) {
            return Some(v);
        }
        KNOWN_KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d)
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn string(&self, key: &str) -> Result<String, CliError> {
        self.required(key).map(str::to_string)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v = self.required(key)?;
        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| config_error(key, format!("`{v}` is not a finite number")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(_) => self.f64(key).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let v = self.required(key)?;
        v.parse::<usize>().map_err(|_| config_error(key, format!("`{v}` is not a non-negative integer")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let v = self.required(key)?;
        v.parse::<u64>().map_err(|_| config_error(key, format!("`{v}` is not a non-negative integer")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.required(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(config_error(key, format!("`{v}` is not a boolean"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.required(key)?;
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| config_error(key, format!("`{s}` is not a number"))))
            .collect()
    }

    fn ordering(&self, key: &str) -> Result<Ordering, CliError> {
        match self.required(key)? {
            "momenta_left" => Ok(Ordering::MomentaLeft),
            "symmetric" => Ok(Ordering::Symmetric),
            v => Err(config_error(key, format!("`{v}` is not momenta_left or symmetric"))),
        }
    }

    /// Resolved view of every key that has a value, defaults included.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        KNOWN_KEYS.iter().filter_map(|(k, _)| self.raw(k).map(|v| (k.to_string(), v.to_string()))).collect()
    }

    pub fn bath(&self) -> Result<BathParams, CliError> {
        let params = BathParams::new(self.f64("bath.mass")?, self.f64("bath.gamma")?, self.f64("bath.kbt")?, self.f64("bath.hbar")?)?;
        match self.required("bath.model")? {
            "ohmic" => Ok(params),
            "drude" => {
                if self.raw("bath.omega_d").is_none() {
                    return Err(CliError::Config("drude bath needs `bath.omega_d`".into()));
                }
                Ok(params.with_drude_cutoff(self.f64("bath.omega_d")?)?)
            }
            v => Err(config_error("bath.model", format!("`{v}` is not ohmic or drude"))),
        }
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        Ok(match self.required("potential.kind")? {
            "harmonic" => Potential::harmonic(self.f64("bath.mass")?, self.f64("potential.omega0")?)?,
            "double_well" => Potential::double_well(self.f64("potential.a")?, self.f64("potential.b")?)?,
            "polynomial" => Potential::polynomial(self.f64_list("potential.coeffs")?)?,
            "free" => Potential::free(),
            v => return Err(config_error("potential.kind", format!("`{v}` is not harmonic, double_well, polynomial or free"))),
        })
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        match self.required("sim.mode")? {
            "overdamped" => Ok(Mode::Overdamped),
            "inertial" => Ok(Mode::Inertial),
            v => Err(config_error("sim.mode", format!("`{v}` is not overdamped or inertial"))),
        }
    }

    pub fn sim(&self) -> Result<SimConfig, CliError> {
        let params = self.bath()?;
        let steps = self.usize("sim.steps")?;
        let mut sim =
            SimConfig::new(self.potential()?, params, self.f64("sim.dt")?, steps, self.usize("sim.n_traj")?, self.u64("sim.seed")?);
        sim.initial = InitialCondition::Point { x: self.f64("sim.x0")?, v: self.f64("sim.v0")? };
        sim.noise = match self.required("sim.noise")? {
            "white" => NoiseKernel::White,
            "colored" => {
                if params.omega_d.is_none() {
                    return Err(CliError::Config("colored noise needs a drude bath with `bath.omega_d`".into()));
                }
                NoiseKernel::Colored { params, model: params.spectral_density() }
            }
            v => return Err(config_error("sim.noise", format!("`{v}` is not white or colored"))),
        };
        sim.step_point = match self.required("sim.step_point")? {
            "pre" => StepPoint::PrePoint,
            "post" => StepPoint::PostPoint,
            v => return Err(config_error("sim.step_point", format!("`{v}` is not pre or post"))),
        };
        let burn_in = match self.raw("sim.burn_in") {
            Some(_) => self.usize("sim.burn_in")?,
            None => steps,
        };
        sim.sampling = Sampling { burn_in, stride: self.usize("sim.stride")? };
        let (lo, hi, bins) = (self.f64("sim.hist_lo")?, self.f64("sim.hist_hi")?, self.usize("sim.hist_bins")?);
        sim.hist_x = HistogramSpec { lo, hi, bins };
        if self.mode()? == Mode::Inertial {
            sim.hist_v = Some(HistogramSpec { lo, hi, bins });
        }
        sim.autocorr_lags = self.usize("sim.autocorr_lags")?;
        Ok(sim)
    }

    pub fn fp_ordering(&self) -> Result<Ordering, CliError> {
        self.ordering("fp.ordering")
    }

    pub fn decohere_ordering(&self) -> Result<Ordering, CliError> {
        self.ordering("decohere.ordering")
    }

    /// Line grid for overdamped runs, plane grid for inertial ones.
    pub fn fp_grid(&self) -> Result<PhaseGrid, CliError> {
        let x = Axis::new(self.f64("fp.x_min")?, self.f64("fp.x_max")?, self.usize("fp.nx")?)?;
        Ok(match self.mode()? {
            Mode::Overdamped => PhaseGrid::line(x),
            Mode::Inertial => PhaseGrid::plane(x, Axis::new(self.f64("fp.v_min")?, self.f64("fp.v_max")?, self.usize("fp.nv")?)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_defaults() {
        let cfg = RunConfig::parse("# header\n\nbath.gamma = 2.5  # trailing\n").unwrap();
        assert_eq!(cfg.f64("bath.gamma").unwrap(), 2.5);
        assert_eq!(cfg.f64("bath.mass").unwrap(), 1.0);
        assert_eq!(cfg.resolved()["bath.model"], "ohmic");
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert!(matches!(RunConfig::parse("bath.gama = 1"), Err(CliError::Config(m)) if m.contains("bath.gama")));
        assert!(RunConfig::parse("bath.gamma = 1\nbath.gamma = 2").is_err());
        assert!(RunConfig::parse("bath.gamma 1").is_err());
    }

    #[test]
    fn drude_without_cutoff_names_the_key() {
        let cfg = RunConfig::parse("bath.model = drude").unwrap();
        let err = cfg.bath().unwrap_err();
        assert!(err.to_string().contains("bath.omega_d"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn lists_and_booleans() {
        let cfg = RunConfig::parse("compare.times = 0, 0.5,1\nsimulate.fp = yes").unwrap();
        assert_eq!(cfg.f64_list("compare.times").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(cfg.bool("simulate.fp").unwrap());
        assert!(RunConfig::parse("sim.steps = -3").unwrap().usize("sim.steps").is_err());
    }
}
