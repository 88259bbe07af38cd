use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::observables::Normalization;
use crate::params::{LatticeParams, ModelParams};

pub const KEYS: &[&str] = &[
    "omega_r",
    "omega_cut",
    "gamma",
    "beta",
    "n_env",
    "eps",
    "eps_tilde",
    "t_max",
    "sweep_axis",
    "sweep_values",
    "fit_lo",
    "fit_hi",
    "normalization",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Time,
    Gamma,
    Beta,
    NEnv,
    /// Values are integer refinement factors `r`: `(ε, ε̃) → (ε/r, ε̃/r)` on the same physical times.
    EpsRefine,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Time => "time",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Beta => "beta",
            SweepAxis::NEnv => "n_env",
            SweepAxis::EpsRefine => "eps-refine",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "time" => SweepAxis::Time,
            "gamma" => SweepAxis::Gamma,
            "beta" => SweepAxis::Beta,
            "n_env" => SweepAxis::NEnv,
            "eps-refine" => SweepAxis::EpsRefine,
            _ => return Err(Error::Config(format!("unknown sweep_axis {s:?}"))),
        })
    }
}

/// One sweep. Unset physical keys take the reference values
/// (`ω_r = 0.08`, `ω_cut = 2`, `γ = 0.1`, `β = 0.05`, `N_E = 64`, `ε = 0.05`).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub omega_r: f64,
    pub omega_cut: f64,
    pub gamma: f64,
    pub beta: f64,
    pub n_env: usize,
    pub eps: f64,
    pub eps_tilde: Option<f64>,
    pub t_max: f64,
    pub axis: SweepAxis,
    /// A single `0` for the time axis.
    pub values: Vec<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub normalization: Normalization,
    /// `None` writes to standard output.
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_r: 0.08,
            omega_cut: 2.0,
            gamma: 0.1,
            beta: 0.05,
            n_env: 64,
            eps: 0.05,
            eps_tilde: None,
            t_max: 1.2,
            axis: SweepAxis::Time,
            values: vec![0.0],
            fit_window: None,
            normalization: Normalization::Trace,
            out: None,
        }
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            split_pair(line).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        if map.insert(k.clone(), v).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {k:?}",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Splits `key=value`, as used by both config lines and `--set`.
pub fn split_pair(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key = value, got {s:?}"))?;
    let k = k.trim();
    if !KEYS.contains(&k) {
        return Err(format!("unknown key {k:?}"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn integral(key: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!(
            "{key}: expected a non-negative integer, got {v}"
        )))
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (k, v) in map {
            match k.as_str() {
                "omega_r" => cfg.omega_r = num(k, v)?,
                "omega_cut" => cfg.omega_cut = num(k, v)?,
                "gamma" => cfg.gamma = num(k, v)?,
                "beta" => cfg.beta = num(k, v)?,
                "n_env" => cfg.n_env = num(k, v)?,
                "eps" => cfg.eps = num(k, v)?,
                "eps_tilde" => cfg.eps_tilde = Some(num(k, v)?),
                "t_max" => cfg.t_max = num(k, v)?,
                "sweep_axis" => cfg.axis = v.parse()?,
                "sweep_values" => {
                    cfg.values = v
                        .split(',')
                        .map(|s| num::<f64>(k, s.trim()))
                        .collect::<Result<_>>()?
                }
                "normalization" => cfg.normalization = v.parse()?,
                "out" => cfg.out = (!v.is_empty() && v != "-").then(|| PathBuf::from(v)),
                "fit_lo" | "fit_hi" => {}
                _ => return Err(Error::Config(format!("unknown key {k:?}"))),
            }
        }
        cfg.fit_window = match (map.get("fit_lo"), map.get("fit_hi")) {
            (Some(lo), Some(hi)) => Some((num("fit_lo", lo)?, num("fit_hi", hi)?)),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "fit_lo and fit_hi must be given together".into(),
                ))
            }
        };
        if cfg.axis == SweepAxis::Time && !map.contains_key("sweep_values") {
            cfg.values = vec![0.0];
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of base steps on the time grid, `round(t_max / ε)`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.eps).round() as usize
    }

    pub fn t_grid(&self) -> Vec<f64> {
        (1..=self.n_steps()).map(|n| n as f64 * self.eps).collect()
    }

    /// Model parameters for one axis value.
    pub fn model_for(&self, value: f64) -> Result<ModelParams> {
        let (mut gamma, mut beta, mut n_env) = (self.gamma, self.beta, self.n_env);
        match self.axis {
            SweepAxis::Gamma => gamma = value,
            SweepAxis::Beta => beta = value,
            SweepAxis::NEnv => n_env = integral("sweep_values", value)?,
            SweepAxis::Time | SweepAxis::EpsRefine => {}
        }
        ModelParams::new(self.omega_r, self.omega_cut, gamma, beta, n_env)
    }

    /// Lattice for one axis value at base step `n` (time `n ε`).
    pub fn lattice_for(&self, value: f64, model: &ModelParams, n: usize) -> Result<LatticeParams> {
        let refine = match self.axis {
            SweepAxis::EpsRefine => integral("sweep_values", value)?,
            _ => 1,
        };
        let base_tilde = match self.eps_tilde {
            Some(s) => s,
            None => crate::params::default_eps_tilde(model.beta)?.0,
        };
        let r = refine as f64;
        LatticeParams::new(self.eps / r, n * refine, model.beta, Some(base_tilde / r))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.values.is_empty() {
            return bad("sweep_values is empty".into());
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if self.n_steps() == 0 {
            return bad(format!("t_max = {} is shorter than one step", self.t_max));
        }
        if self.axis == SweepAxis::EpsRefine && self.values.iter().any(|&v| v < 1.0) {
            return bad("eps-refine values are refinement factors >= 1".into());
        }
        for &v in &self.values {
            let model = self
                .model_for(v)
                .map_err(|e| Error::Config(format!("sweep value {v}: {e}")))?;
            self.lattice_for(v, &model, 1)
                .map_err(|e| Error::Config(format!("sweep value {v}: {e}")))?;
        }
        if let Some((lo, hi)) = self.fit_window {
            let inside = self
                .t_grid()
                .iter()
                .filter(|&&t| {
                    t >= lo - super::fit::WINDOW_SLACK && t <= hi + super::fit::WINDOW_SLACK
                })
                .count();
            if inside < 2 {
                return bad(format!(
                    "fit window [{lo}, {hi}] covers {inside} grid points, need 2"
                ));
            }
        }
        Ok(())
    }
}
