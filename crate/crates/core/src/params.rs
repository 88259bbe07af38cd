//! Physical and lattice inputs of the Caldeira-Leggett model and the constants derived from them.
//!
//! Units have `M = m = 1`. The environment is `N_E` oscillators with frequencies
//! `ω_k = ω_cut (k/N_E)^{1/3}`, which reproduces an Ohmic spectral density for
//! uniformly distributed `k/N_E`. The microscopic coupling `c` is fixed so that the
//! frequency shift `c² Σ_k ω_k⁻²` equals its large-`N_E` value `4γω_cut/π`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Euclidean step used when the inverse temperature is at least [`EUCLIDEAN_STEP_THRESHOLD`].
pub const DEFAULT_EUCLIDEAN_STEP: f64 = 0.05;
pub const EUCLIDEAN_STEP_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_r: f64,
    pub omega_cut: f64,
    pub gamma: f64,
    pub beta: f64,
    pub n_env: usize,
    pub sigma_sq_override: Option<f64>,
}

impl ModelParams {
    pub fn new(omega_r: f64, omega_cut: f64, gamma: f64, beta: f64, n_env: usize) -> Result<Self> {
        let params = Self {
            omega_r,
            omega_cut,
            gamma,
            beta,
            n_env,
            sigma_sq_override: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_sigma_sq(mut self, sigma_sq: f64) -> Result<Self> {
        self.sigma_sq_override = Some(sigma_sq);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega_r", self.omega_r)?;
        positive("omega_cut", self.omega_cut)?;
        positive("beta", self.beta)?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(domain(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        if self.n_env == 0 && self.gamma != 0.0 {
            return Err(domain("n_env = 0 requires gamma = 0"));
        }
        if let Some(s) = self.sigma_sq_override {
            positive("sigma_sq", s)?;
        }
        Ok(())
    }

    /// Variance of the initial wave packet; the ground state of `ω_r` unless overridden.
    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq_override.unwrap_or(1.0 / (2.0 * self.omega_r))
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let omega_k = if self.n_env == 0 {
            Vec::new()
        } else {
            environment_frequencies(self.omega_cut, self.n_env)?
        };
        let coupling_c = if self.n_env == 0 {
            0.0
        } else {
            coupling_from_gamma(self.gamma, self.omega_cut, self.n_env)?
        };
        Ok(DerivedParams {
            omega_b: bare_frequency(self.omega_r, self.gamma, self.omega_cut),
            coupling_c,
            omega_k,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub omega_b: f64,
    pub coupling_c: f64,
    /// `ω_k` for `k = 1..=N_E`, stored at index `k - 1`.
    pub omega_k: Vec<f64>,
}

impl DerivedParams {
    pub fn n_env(&self) -> usize {
        self.omega_k.len()
    }

    /// `ω_b² − c² Σ_k ω_k⁻²`, which reproduces the input `ω_r²`.
    pub fn renormalized_frequency_sq(&self) -> f64 {
        let shift: f64 = self.omega_k.iter().map(|w| 1.0 / (w * w)).sum();
        self.omega_b * self.omega_b - self.coupling_c * self.coupling_c * shift
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub eps: f64,
    pub n_t: usize,
    pub eps_tilde: f64,
    pub n_beta: usize,
}

impl LatticeParams {
    /// Real-time step `eps` with `n_t` steps, and a Euclidean leg closing exactly at `beta`.
    ///
    /// `eps_tilde` defaults to [`default_eps_tilde`]; either way it is rounded so that
    /// `n_beta * eps_tilde == beta`.
    pub fn new(eps: f64, n_t: usize, beta: f64, eps_tilde: Option<f64>) -> Result<Self> {
        positive("eps", eps)?;
        positive("beta", beta)?;
        if n_t == 0 {
            return Err(domain("n_t must be >= 1"));
        }
        let (eps_tilde, n_beta) = match eps_tilde {
            None => default_eps_tilde(beta)?,
            Some(step) => {
                positive("eps_tilde", step)?;
                close_euclidean_leg(beta, step)
            }
        };
        Ok(Self {
            eps,
            n_t,
            eps_tilde,
            n_beta,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.n_t as f64 * self.eps
    }
}

/// `ω_k = ω_cut (k/N_E)^{1/3}` for `k = 1..=N_E`.
pub fn environment_frequencies(omega_cut: f64, n_env: usize) -> Result<Vec<f64>> {
    positive("omega_cut", omega_cut)?;
    if n_env == 0 {
        return Err(domain("n_env must be >= 1"));
    }
    let n = n_env as f64;
    Ok((1..=n_env)
        .map(|k| omega_cut * (k as f64 / n).cbrt())
        .collect())
}

/// Microscopic coupling `c ≥ 0` with `c² = (4γ/π) ω_cut³ / Σ_k (N_E/k)^{2/3}`.
pub fn coupling_from_gamma(gamma: f64, omega_cut: f64, n_env: usize) -> Result<f64> {
    positive("omega_cut", omega_cut)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(domain(format!(
            "gamma must be finite and >= 0, got {gamma}"
        )));
    }
    if n_env == 0 {
        return Err(domain("n_env must be >= 1"));
    }
    let n = n_env as f64;
    let sum: f64 = (1..=n_env).map(|k| (n / k as f64).powf(2.0 / 3.0)).sum();
    Ok((4.0 * gamma / PI * omega_cut.powi(3) / sum).sqrt())
}

/// `ω_b = sqrt(ω_r² + 4γω_cut/π)`.
pub fn bare_frequency(omega_r: f64, gamma: f64, omega_cut: f64) -> f64 {
    (omega_r * omega_r + 4.0 * gamma * omega_cut / PI).sqrt()
}

/// Euclidean step and step count: `0.05` for `β ≥ 0.2`, else `β/4`, rounded so the leg closes at `β`.
pub fn default_eps_tilde(beta: f64) -> Result<(f64, usize)> {
    positive("beta", beta)?;
    let step = if beta >= EUCLIDEAN_STEP_THRESHOLD {
        DEFAULT_EUCLIDEAN_STEP
    } else {
        beta / 4.0
    };
    Ok(close_euclidean_leg(beta, step))
}

fn close_euclidean_leg(beta: f64, step: f64) -> (f64, usize) {
    let n_beta = ((beta / step).round() as usize).max(1);
    (beta / n_beta as f64, n_beta)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}
