//! Decoherence observables from the solved saddle-point systems.
//!
//! With `u = ℳ⁻¹c` and `v = ℳ⁻¹c̃`, the magnitude of the reduced density matrix is
//!
//! ```text
//! |ρ(x_F, x̃_F)| ∝ exp{-½Γ_diag((x_F+x̃_F)/2)² - ½Γ_off((x_F-x̃_F)/2)²},
//! Γ_diag = 2(J-K),  Γ_off = 2(J+K),  J = Re(c·u),  K = Re(c·v).
//! ```
//!
//! The `x`-independent prefactor `det⁻¹ᐟ²ℳ` and the phase of `ρ` are never computed.

use log::warn;
use num_complex::Complex64;

use crate::assembly::{assemble, QuadraticForm};
use crate::contour::build_contour;
use crate::error::{Error, Result};
use crate::params::{LatticeParams, ModelParams};
use crate::solver::{factorize, Factorization};

/// Relative tolerance on `Re(c·u) = Re(c̃·v)` and `Re(c·v) = Re(c̃·u)`.
pub const JK_SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceObservables {
    pub t: f64,
    pub j: f64,
    pub k: f64,
    pub gamma_diag: f64,
    pub gamma_offdiag: f64,
    /// `None` when `γ = 0`, where the rescaling is undefined.
    pub gamma_tilde: Option<f64>,
    /// Largest relative mismatch between the two routes to `J` and to `K`.
    pub jk_asymmetry: f64,
}

impl DecoherenceObservables {
    /// The positivity and exact-relation invariants of a normalizable Gaussian `ρ`.
    pub fn check_invariants(&self) -> Result<()> {
        if !(self.gamma_diag > 0.0 && self.gamma_offdiag > 0.0) {
            return Err(Error::Inconsistent(format!(
                "non-normalizable density matrix at t = {}: gamma_diag = {}, gamma_offdiag = {}",
                self.t, self.gamma_diag, self.gamma_offdiag
            )));
        }
        if self.gamma_diag != 2.0 * (self.j - self.k)
            || self.gamma_offdiag != 2.0 * (self.j + self.k)
        {
            return Err(Error::Inconsistent(format!(
                "widths at t = {} do not match J, K",
                self.t
            )));
        }
        if self.jk_asymmetry > JK_SYMMETRY_TOLERANCE {
            return Err(Error::Inconsistent(format!(
                "J/K symmetry violated at t = {}: {:e}",
                self.t, self.jk_asymmetry
            )));
        }
        Ok(())
    }
}

/// Both routes to `J` and `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JkRoutes {
    /// `Re(c·ℳ⁻¹c)`
    pub j: f64,
    /// `Re(c̃·ℳ⁻¹c̃)`
    pub j_alt: f64,
    /// `Re(c·ℳ⁻¹c̃)`
    pub k: f64,
    /// `Re(c̃·ℳ⁻¹c)`
    pub k_alt: f64,
}

impl JkRoutes {
    pub fn asymmetry(&self) -> f64 {
        let dj = (self.j - self.j_alt).abs() / (1.0 + self.j.abs());
        let dk = (self.k - self.k_alt).abs() / (1.0 + self.k.abs());
        dj.max(dk)
    }
}

pub fn compute_jk_routes(form: &QuadraticForm, fact: &Factorization) -> Result<JkRoutes> {
    let lift = |v: &[f64]| -> Vec<Complex64> { v.iter().map(|&x| x.into()).collect() };
    let c = lift(&form.c_vec);
    let ct = lift(&form.c_tilde_vec);
    let u = fact.solve(&c)?;
    let v = fact.solve(&ct)?;
    let dot = |a: &[f64], b: &[Complex64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y.re).sum() };
    Ok(JkRoutes {
        j: dot(&form.c_vec, &u),
        j_alt: dot(&form.c_tilde_vec, &v),
        k: dot(&form.c_vec, &v),
        k_alt: dot(&form.c_tilde_vec, &u),
    })
}

/// `(J, K)`, after checking that both routes agree.
pub fn compute_jk(form: &QuadraticForm, fact: &Factorization) -> Result<(f64, f64)> {
    let routes = compute_jk_routes(form, fact)?;
    let asym = routes.asymmetry();
    if asym > JK_SYMMETRY_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "J/K routes disagree: J = {} vs {}, K = {} vs {} (relative {asym:e})",
            routes.j, routes.j_alt, routes.k, routes.k_alt
        )));
    }
    Ok((routes.j, routes.k))
}

/// `(Γ_diag, Γ_off-diag) = (2(J−K), 2(J+K))`.
pub fn gammas(j: f64, k: f64) -> (f64, f64) {
    let diag = 2.0 * (j - k);
    let off = 2.0 * (j + k);
    if diag <= 0.0 || off <= 0.0 {
        warn!("non-positive width: gamma_diag = {diag}, gamma_offdiag = {off}");
    }
    (diag, off)
}

/// `Γ̃ = β/(8γ) (Γ_off(t) − 2ω_r)`.
pub fn gamma_tilde(gamma_offdiag_t: f64, gamma: f64, beta: f64, omega_r: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::UndefinedRescaling);
    }
    Ok(beta / (8.0 * gamma) * (gamma_offdiag_t - 2.0 * omega_r))
}

/// High-temperature master-equation growth `8γt/β` of `Γ_off-diag`.
pub fn master_equation_reference(gamma: f64, beta: f64, t: f64) -> f64 {
    8.0 * gamma * t / beta
}

/// Assemble, factorize and extract observables at `t = n_t ε`.
pub fn observe(model: &ModelParams, lattice: &LatticeParams) -> Result<DecoherenceObservables> {
    let derived = model.derive()?;
    let contour = build_contour(lattice.n_t, lattice.n_beta, model.n_env)?;
    let form = assemble(&derived, model, lattice, &contour)?;
    let fact = factorize(&form)?;
    let routes = compute_jk_routes(&form, &fact)?;
    let jk_asymmetry = routes.asymmetry();
    if jk_asymmetry > JK_SYMMETRY_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "J/K routes disagree at t = {} (relative {jk_asymmetry:e})",
            lattice.t_final()
        )));
    }
    let (j, k) = (routes.j, routes.k);
    let (gamma_diag, gamma_offdiag) = gammas(j, k);
    let gamma_tilde = gamma_tilde(gamma_offdiag, model.gamma, model.beta, model.omega_r).ok();
    Ok(DecoherenceObservables {
        t: lattice.t_final(),
        j,
        k,
        gamma_diag,
        gamma_offdiag,
        gamma_tilde,
        jk_asymmetry,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Unit trapezoidal trace along the diagonal.
    Trace,
    /// Unit maximum.
    Peak,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(Self::Trace),
            "peak" => Ok(Self::Peak),
            _ => Err(Error::Config(format!(
                "unknown normalization {s:?} (expected trace or peak)"
            ))),
        }
    }
}

/// Uniform grid on `[-half_width, half_width]` for both `x_F` and `x̃_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn axis(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![0.0],
            n => {
                let step = 2.0 * self.half_width / (n - 1) as f64;
                (0..n).map(|i| -self.half_width + i as f64 * step).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub axis: Vec<f64>,
    /// `|ρ(axis[i], axis[j])|` at `i * axis.len() + j`.
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl DensityGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis.len() + j]
    }

    /// Trapezoidal `Σ ρ(x, x) Δx` on a uniform axis.
    pub fn trace(&self) -> f64 {
        trapezoid_diagonal(&self.axis, |i| self.at(i, i))
    }
}

fn trapezoid_diagonal(axis: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let n = axis.len();
    if n < 2 {
        return f64::NAN;
    }
    let dx = axis[1] - axis[0];
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                0.5 * f(i)
            } else {
                f(i)
            }
        })
        .sum::<f64>()
        * dx
}

/// Widths are taken from `(J, K)`; `det⁻¹ᐟ²ℳ` is replaced by `normalization`.
pub fn density_grid(
    form: &QuadraticForm,
    fact: &Factorization,
    spec: GridSpec,
    normalization: Normalization,
) -> Result<DensityGrid> {
    let (j, k) = compute_jk(form, fact)?;
    let (diag, off) = gammas(j, k);
    density_grid_from_widths(diag, off, spec, normalization)
}

pub fn density_grid_from_widths(
    gamma_diag: f64,
    gamma_offdiag: f64,
    spec: GridSpec,
    normalization: Normalization,
) -> Result<DensityGrid> {
    let axis = spec.axis();
    if axis.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = axis.len();
    let mut values = Vec::with_capacity(n * n);
    for &x in &axis {
        for &xt in &axis {
            let s = 0.5 * (x + xt);
            let d = 0.5 * (x - xt);
            values.push((-0.5 * gamma_diag * s * s - 0.5 * gamma_offdiag * d * d).exp());
        }
    }
    let scale = match normalization {
        Normalization::Peak => values.iter().copied().fold(0.0, f64::max),
        Normalization::Trace => {
            let tr = trapezoid_diagonal(&axis, |i| values[i * n + i]);
            if !tr.is_finite() {
                return Err(Error::EmptyGrid);
            }
            tr
        }
    };
    values.iter_mut().for_each(|v| *v /= scale);
    Ok(DensityGrid {
        axis,
        values,
        normalization,
    })
}
