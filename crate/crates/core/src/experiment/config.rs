//! Flat key-value experiment configuration.
//!
//! A config file is TOML with top-level keys only. Missing keys take the
//! defaults of the named problem, so a file may be as short as
//! `problem = "burgers"`. Overrides (from the command line) are applied as a
//! second table on top of the file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gram::NuggetKind;
use crate::kernels::KernelSpec;
use crate::problems::{burgers_spec, darcy_ip_spec, eikonal_spec, elliptic_spec, ProblemSpec, Tau};
use crate::solver::{InnerRoute, Mode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemName {
    Elliptic,
    Burgers,
    Eikonal,
    Darcy,
}

impl ProblemName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Elliptic => "elliptic",
            ProblemName::Burgers => "burgers",
            ProblemName::Eikonal => "eikonal",
            ProblemName::Darcy => "darcy",
        }
    }
}

impl std::str::FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(ProblemName::Elliptic),
            "burgers" => Ok(ProblemName::Burgers),
            "eikonal" => Ok(ProblemName::Eikonal),
            "darcy" => Ok(ProblemName::Darcy),
            _ => Err(Error::InvalidArgument(format!("unknown problem {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointMode {
    Random,
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaRule {
    /// Use `sigma` as given.
    Fixed,
    /// `sigma = M^(-1/4)`.
    MQuarter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitName {
    /// i.i.d. `N(0, init_scale^2)`, seeded by `seed`.
    Random,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Eliminate,
    Relax,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemName,
    #[serde(rename = "M")]
    pub m: usize,
    /// Interior count; takes precedence over `interior_fraction` for single runs.
    #[serde(rename = "M_omega", skip_serializing_if = "Option::is_none", default)]
    pub m_omega: Option<usize>,
    pub interior_fraction: f64,
    pub points: PointMode,
    pub seed: u64,
    /// One value (isotropic) or one per axis (anisotropic).
    pub sigma: Vec<f64>,
    pub sigma_rule: SigmaRule,
    pub nugget: NuggetKind,
    pub eta: f64,
    /// Used instead of `eta` when `M <= eta_small_max_m`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta_small: Option<f64>,
    pub eta_small_max_m: usize,
    /// Nugget for the coefficient field of the inverse problem.
    pub eta_coef: f64,
    pub mode: ModeName,
    pub beta: f64,
    pub route: InnerRoute,
    pub max_iters: usize,
    pub loss_tol: f64,
    pub step_tol: f64,
    pub init: InitName,
    pub init_scale: f64,
    pub reps: usize,
    pub m_list: Vec<usize>,
    pub eta_list: Vec<f64>,
    pub test_grid: usize,
    pub tau: Tau,
    pub nu: f64,
    pub square_v4: bool,
    pub eps: f64,
    pub gamma: f64,
    /// Standard deviation of the synthetic observation noise; defaults to `gamma`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub obs_noise: Option<f64>,
    pub n_obs: usize,
    /// Reference finite-difference grid (cells per axis).
    pub fd_n: usize,
    pub quad_order: usize,
    /// Record wall-clock seconds; `false` writes 0 for byte-stable output.
    pub timing: bool,
    /// Threads inside a single solve.
    pub parallel: bool,
    /// Concurrent cells in a batch study; each cell runs single-threaded.
    pub jobs: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn for_problem(problem: ProblemName) -> Self {
        let base = Self {
            schema_version: SCHEMA_VERSION,
            problem,
            m: 1024,
            m_omega: None,
            interior_fraction: 0.9,
            points: PointMode::Random,
            seed: 0,
            sigma: vec![0.2],
            sigma_rule: SigmaRule::Fixed,
            nugget: NuggetKind::Adaptive,
            eta: 1e-12,
            eta_small: None,
            eta_small_max_m: 1200,
            eta_coef: 1e-5,
            mode: ModeName::Eliminate,
            beta: 1e-5,
            route: InnerRoute::Constrained,
            max_iters: 10,
            loss_tol: 1e-12,
            step_tol: 1e-8,
            init: InitName::Random,
            init_scale: 1.0,
            reps: 1,
            m_list: vec![300, 600, 1200, 2400],
            eta_list: (1..=12).map(|k| 10f64.powi(-k)).collect(),
            test_grid: 60,
            tau: Tau::Cubic,
            nu: 0.02,
            square_v4: false,
            eps: 0.1,
            gamma: 1e-3,
            obs_noise: None,
            n_obs: 40,
            fd_n: 256,
            quad_order: 100,
            timing: true,
            parallel: true,
            jobs: 1,
            out: PathBuf::from("results"),
        };
        match problem {
            ProblemName::Elliptic => Self { m_omega: Some(900), ..base },
            ProblemName::Burgers => Self {
                m: 2400,
                interior_fraction: 5.0 / 6.0,
                sigma: vec![1.0 / 20.0, 1.0 / 3.0],
                eta: 1e-10,
                eta_small: Some(1e-5),
                ..base
            },
            ProblemName::Eikonal => Self {
                m: 2400,
                sigma_rule: SigmaRule::MQuarter,
                eta: 1e-10,
                eta_small: Some(1e-5),
                max_iters: 20,
                fd_n: 1000,
                ..base
            },
            ProblemName::Darcy => Self {
                m: 500,
                m_omega: Some(400),
                eta: 1e-5,
                init: InitName::Zero,
                max_iters: 20,
                ..base
            },
        }
    }

    /// Parse a TOML document; keys absent from it get the problem defaults.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let table: toml::Table = s.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Self::from_tables(&table, &toml::Table::new())
    }

    /// Merge `file` then `overrides` over the defaults of the problem they name
    /// (`overrides` wins, default `elliptic`).
    pub fn from_tables(file: &toml::Table, overrides: &toml::Table) -> Result<Self> {
        let problem = overrides
            .get("problem")
            .or_else(|| file.get("problem"))
            .map(|v| v.as_str().ok_or_else(|| Error::Parse("problem must be a string".into())))
            .transpose()?
            .map(str::parse)
            .transpose()?
            .unwrap_or(ProblemName::Elliptic);
        let mut table = toml::Table::try_from(Self::for_problem(problem)).map_err(|e| Error::Parse(e.to_string()))?;
        for (k, v) in file.iter().chain(overrides) {
            table.insert(k.clone(), v.clone());
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// SHA-256 of the canonical TOML rendering, leaving out the keys that
    /// only change where and how fast a run executes.
    pub fn hash(&self) -> String {
        let mut table = toml::Table::try_from(self).unwrap_or_default();
        for k in ["jobs", "parallel", "out"] {
            table.remove(k);
        }
        let text = toml::to_string(&table).unwrap_or_default();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Interior count for the current `M`.
    pub fn resolved_m_omega(&self) -> usize {
        self.m_omega.unwrap_or_else(|| (self.interior_fraction * self.m as f64).round() as usize)
    }

    pub fn resolved_eta(&self) -> f64 {
        match self.eta_small {
            Some(e) if self.m <= self.eta_small_max_m => e,
            _ => self.eta,
        }
    }

    pub fn resolved_sigma(&self) -> Vec<f64> {
        match self.sigma_rule {
            SigmaRule::Fixed => self.sigma.clone(),
            SigmaRule::MQuarter => vec![(self.m as f64).powf(-0.25); self.sigma.len()],
        }
    }

    pub fn solver_mode(&self) -> Mode {
        match self.mode {
            ModeName::Eliminate => Mode::Eliminate,
            ModeName::Relax => Mode::Relax { beta: self.beta },
            ModeName::Mixed => Mode::Mixed { beta: self.beta },
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        match self.problem {
            ProblemName::Elliptic => Ok(elliptic_spec(self.tau)),
            ProblemName::Burgers => burgers_spec(self.nu, self.square_v4),
            ProblemName::Eikonal => eikonal_spec(self.eps),
            ProblemName::Darcy => darcy_ip_spec(self.gamma, self.n_obs),
        }
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        let sigma = self.resolved_sigma();
        let dim = 2;
        match sigma.len() {
            1 => KernelSpec::isotropic(sigma[0], dim),
            n if n == dim => KernelSpec::anisotropic(&sigma),
            n => Err(Error::InvalidArgument(format!("sigma needs 1 or {dim} values, got {n}"))),
        }
    }

    /// Copy with `M` replaced; the interior count follows `interior_fraction`.
    pub fn with_m(&self, m: usize) -> Self {
        Self { m, m_omega: None, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let mi = self.resolved_m_omega();
        if self.points == PointMode::Random && (mi == 0 || mi >= self.m) {
            return Err(Error::InvalidArgument(format!("need 1 <= M_omega < M, got M={}, M_omega={mi}", self.m)));
        }
        if !(self.interior_fraction > 0.0 && self.interior_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("interior_fraction must be in (0, 1), got {}", self.interior_fraction)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be >= 1".into()));
        }
        if self.test_grid == 0 {
            return Err(Error::InvalidArgument("test_grid must be >= 1".into()));
        }
        if self.mode != ModeName::Eliminate && !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        self.kernel()?;
        self.problem_spec()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::from_toml_str("problem = \"burgers\"\nM = 600\n").unwrap();
        assert_eq!(cfg.sigma, vec![0.05, 1.0 / 3.0]);
        assert_eq!(cfg.resolved_m_omega(), 500);
        assert_eq!(cfg.resolved_eta(), 1e-5);
        assert_eq!(cfg.with_m(2400).resolved_eta(), 1e-10);

        let mut over = toml::Table::new();
        over.insert("seed".into(), toml::Value::Integer(7));
        let file: toml::Table = "problem = \"eikonal\"\nseed = 3".parse().unwrap();
        let cfg = ExperimentConfig::from_tables(&file, &over).unwrap();
        assert_eq!(cfg.seed, 7);
        assert!((cfg.resolved_sigma()[0] - 2400f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_and_hash() {
        for p in [ProblemName::Elliptic, ProblemName::Burgers, ProblemName::Eikonal, ProblemName::Darcy] {
            let cfg = ExperimentConfig::for_problem(p);
            let text = cfg.to_toml_string().unwrap();
            let back = ExperimentConfig::from_toml_str(&text).unwrap();
            assert_eq!(cfg, back);
            assert_eq!(cfg.hash(), back.hash());
            assert_eq!(cfg.hash().len(), 64);
        }
        let a = ExperimentConfig::for_problem(ProblemName::Elliptic);
        assert_ne!(a.hash(), ExperimentConfig { seed: 1, ..a.clone() }.hash());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("schema_version = 9").is_err());
        let cfg = ExperimentConfig::from_toml_str("M = 100\nM_omega = 100").unwrap();
        assert_eq!(cfg.validate().unwrap_err().status(), "config-error");
    }
}
