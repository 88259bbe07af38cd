//! Continuous-time reference: exact Gaussian-state evolution of system plus environment.
//!
//! The Hamiltonian `H = ½pᵀp + ½ rᵀ V r` with `r = (x, q¹, …, q^N)`,
//! `V_00 = ω_b²`, `V_kk = ω_k²`, `V_0k = −c`, is linear, so a Gaussian state stays
//! Gaussian and its phase-space covariance evolves as `Σ(t) = S(t) Σ(0) S(t)ᵀ`.
//! `S(t)` follows from the normal modes of `V`.
//!
//! Widths of the reduced density matrix. For a Gaussian Wigner function with reduced
//! covariance `(Σ_xx, Σ_xp, Σ_pp)`, write `X = (x+x̃)/2` and `y = x−x̃`. Then
//! `ρ(X + y/2, X − y/2) = ∫dp W(X, p) e^{ipy}`. The `X` marginal is
//! `exp(−X²/2Σ_xx)`, and the Fourier transform over `p` at fixed `X` contributes
//! `exp(−y² Δ/2Σ_xx)` with `Δ = Σ_xx Σ_pp − Σ_xp²`, plus a phase. Matching against
//! `exp{−½Γ_diag X² − ½Γ_off (y/2)²}` gives
//!
//! ```text
//! Γ_diag = 1/Σ_xx,    Γ_off-diag = 4Δ/Σ_xx.
//! ```
//!
//! A pure state has `Δ = 1/4`, so `Γ_diag = Γ_off-diag`; the ground state of `ω`
//! gives `2ω` for both.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::params::{DerivedParams, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    /// Phase-space covariance in the order `(x, p, q¹, p¹, …)`.
    pub sigma: DMatrix<f64>,
    pub t: f64,
}

impl CovarianceState {
    pub fn modes(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// `(Σ_xx, Σ_xp, Σ_pp)` of the system.
    pub fn system_block(&self) -> (f64, f64, f64) {
        (self.sigma[(0, 0)], self.sigma[(0, 1)], self.sigma[(1, 1)])
    }
}

/// Product of the system wave packet and thermal states of the uncoupled environment.
pub fn initial_covariance(model: &ModelParams, derived: &DerivedParams) -> CovarianceState {
    let n = 1 + derived.n_env();
    let mut sigma = DMatrix::zeros(2 * n, 2 * n);
    let s2 = model.sigma_sq();
    sigma[(0, 0)] = s2;
    sigma[(1, 1)] = 0.25 / s2;
    for (k, &w) in derived.omega_k.iter().enumerate() {
        let coth = 1.0 / (0.5 * model.beta * w).tanh();
        let a = 2 * (k + 1);
        sigma[(a, a)] = coth / (2.0 * w);
        sigma[(a + 1, a + 1)] = 0.5 * w * coth;
    }
    CovarianceState { sigma, t: 0.0 }
}

/// Frequency-squared matrix `V` over `(x, q¹, …, q^N)`.
pub fn frequency_matrix(derived: &DerivedParams) -> DMatrix<f64> {
    let n = 1 + derived.n_env();
    let mut v = DMatrix::zeros(n, n);
    v[(0, 0)] = derived.omega_b * derived.omega_b;
    for (k, &w) in derived.omega_k.iter().enumerate() {
        v[(k + 1, k + 1)] = w * w;
        v[(0, k + 1)] = -derived.coupling_c;
        v[(k + 1, 0)] = -derived.coupling_c;
    }
    v
}

/// Symplectic propagator `S(t)` in the interleaved `(x, p, q¹, p¹, …)` order.
pub fn propagator(derived: &DerivedParams, t: f64) -> Result<DMatrix<f64>> {
    let v = frequency_matrix(derived);
    let n = v.nrows();
    let eig = SymmetricEigen::new(v);
    let mut cos_m = DMatrix::zeros(n, n);
    let mut sin_over = DMatrix::zeros(n, n);
    let mut sin_times = DMatrix::zeros(n, n);
    for (a, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < 0.0 {
            return Err(Error::Instability { eigenvalue: lambda });
        }
        let w = lambda.sqrt();
        let wt = w * t;
        cos_m[(a, a)] = wt.cos();
        sin_over[(a, a)] = if wt.abs() < 1e-8 {
            t * (1.0 - wt * wt / 6.0)
        } else {
            wt.sin() / w
        };
        sin_times[(a, a)] = -w * wt.sin();
    }
    let o = &eig.eigenvectors;
    let ot = o.transpose();
    let c = o * cos_m * &ot;
    let sn = o * sin_over * &ot;
    let sp = o * sin_times * &ot;
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            s[(2 * i, 2 * j)] = c[(i, j)];
            s[(2 * i, 2 * j + 1)] = sn[(i, j)];
            s[(2 * i + 1, 2 * j)] = sp[(i, j)];
            s[(2 * i + 1, 2 * j + 1)] = c[(i, j)];
        }
    }
    Ok(s)
}

/// Advances `state` by `t`.
pub fn evolve(state: &CovarianceState, derived: &DerivedParams, t: f64) -> Result<CovarianceState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!(
            "evolution time must be finite and >= 0, got {t}"
        )));
    }
    if state.modes() != 1 + derived.n_env() {
        return Err(Error::Dimension {
            expected: 2 * (1 + derived.n_env()),
            got: state.sigma.nrows(),
        });
    }
    let s = propagator(derived, t)?;
    let mut sigma = &s * &state.sigma * s.transpose();
    // restore exact symmetry lost to rounding
    let sym = 0.5 * (&sigma + sigma.transpose());
    sigma = sym;
    Ok(CovarianceState {
        sigma,
        t: state.t + t,
    })
}

/// `(Γ_diag, Γ_off-diag) = (1/Σ_xx, 4 det Σ₂ₓ₂ / Σ_xx)` of the reduced system state.
pub fn widths_from_covariance(state: &CovarianceState) -> Result<(f64, f64)> {
    let (xx, xp, pp) = state.system_block();
    let det = xx * pp - xp * xp;
    if !(xx > 0.0 && det > 0.0) {
        return Err(Error::Inconsistent(format!(
            "reduced covariance not positive definite: xx = {xx}, det = {det}"
        )));
    }
    Ok((1.0 / xx, 4.0 * det / xx))
}

/// Widths at time `t` starting from the initial product state.
pub fn oracle_widths(model: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let derived = model.derive()?;
    let state = evolve(&initial_covariance(model, &derived), &derived, t)?;
    widths_from_covariance(&state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn state(xx: f64, xp: f64, pp: f64) -> CovarianceState {
        CovarianceState {
            sigma: DMatrix::from_row_slice(2, 2, &[xx, xp, xp, pp]),
            t: 0.0,
        }
    }

    #[test]
    fn initial_variances() {
        let m = ModelParams::new(0.08, 2.0, 0.1, 0.4, 3).unwrap();
        let d = m.derive().unwrap();
        let s = initial_covariance(&m, &d);
        assert!(rel(s.sigma[(0, 0)], 6.25) < 1e-15);
        assert!(rel(s.sigma[(1, 1)], 0.04) < 1e-15);
        assert!((s.sigma[(0, 0)] * s.sigma[(1, 1)] - 0.25).abs() < 1e-15);
        for k in 1..=3 {
            let prod = s.sigma[(2 * k, 2 * k)] * s.sigma[(2 * k + 1, 2 * k + 1)];
            assert!(prod > 0.25);
        }
        let cold = ModelParams::new(0.08, 2.0, 0.1, 1e4, 3).unwrap();
        let s = initial_covariance(&cold, &d);
        for (k, w) in d.omega_k.iter().enumerate() {
            assert!(rel(s.sigma[(2 * k + 2, 2 * k + 2)], 0.5 / w) < 1e-14);
        }
    }

    #[test]
    fn width_examples() {
        let w = 0.7;
        let (a, b) = widths_from_covariance(&state(0.5 / w, 0.0, 0.5 * w)).unwrap();
        assert!(rel(a, 2.0 * w) < 1e-15 && rel(b, 2.0 * w) < 1e-15);

        let beta = 1.3;
        let coth = 1.0 / (0.5 * beta * w).tanh();
        let (a, b) = widths_from_covariance(&state(coth / (2.0 * w), 0.0, 0.5 * w * coth)).unwrap();
        assert!(rel(a, 2.0 * w / coth) < 1e-14);
        assert!(rel(b, 2.0 * w * coth) < 1e-14);

        let s = 3.0;
        let (a, b) = widths_from_covariance(&state(s / (2.0 * w), 0.0, w / (2.0 * s))).unwrap();
        assert!(rel(a, b) < 1e-14 && rel(b, 2.0 * w / s) < 1e-14);

        assert!(widths_from_covariance(&state(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let m = ModelParams::new(0.08, 2.0, 0.1, 0.05, 4).unwrap();
        let d = m.derive().unwrap();
        let s0 = initial_covariance(&m, &d);
        let s = evolve(&s0, &d, 0.0).unwrap();
        assert!((&s.sigma - &s0.sigma).abs().max() < 1e-12 * s0.sigma.abs().max());
        assert!(evolve(&s0, &d, -1.0).is_err());
    }

    #[test]
    fn decoupled_ground_state_is_stationary() {
        let m = ModelParams::new(0.08, 2.0, 0.0, 0.05, 4).unwrap();
        let d = m.derive().unwrap();
        let s0 = initial_covariance(&m, &d);
        for i in 0..=100 {
            let t = 0.1 * i as f64;
            let (a, b) = widths_from_covariance(&evolve(&s0, &d, t).unwrap()).unwrap();
            assert!(
                (a - 0.16).abs() <= 1e-9 && (b - 0.16).abs() <= 1e-9,
                "t = {t}"
            );
        }
    }

    #[test]
    fn propagator_is_symplectic() {
        let m = ModelParams::new(0.08, 2.0, 0.4, 0.05, 8).unwrap();
        let d = m.derive().unwrap();
        let n = 2 * (1 + d.n_env());
        let mut j = DMatrix::zeros(n, n);
        for a in 0..n / 2 {
            j[(2 * a, 2 * a + 1)] = 1.0;
            j[(2 * a + 1, 2 * a)] = -1.0;
        }
        let s0 = initial_covariance(&m, &d);
        for t in [0.3, 1.0, 4.0, 10.0] {
            let s = propagator(&d, t).unwrap();
            assert!((s.determinant() - 1.0).abs() < 1e-10);
            assert!((&s * &j * s.transpose() - &j).abs().max() < 1e-10);
            let st = evolve(&s0, &d, t).unwrap();
            assert!(st.sigma.clone().cholesky().is_some());
            let (xx, xp, pp) = st.system_block();
            assert!(xx * pp - xp * xp >= 0.25 - 1e-10);
        }
    }

    #[test]
    fn two_mode_closed_form() {
        // N_E = 1: diagonalize the 2x2 frequency-squared matrix by hand
        let m = ModelParams::new(0.3, 1.5, 0.2, 0.5, 1).unwrap();
        let d = m.derive().unwrap();
        let (a, b, c) = (d.omega_b.powi(2), d.omega_k[0].powi(2), -d.coupling_c);
        let mean = 0.5 * (a + b);
        let rad = (0.25 * (a - b).powi(2) + c * c).sqrt();
        let (l1, l2) = (mean - rad, mean + rad);
        // eigenvector of l1: (c, l1 - a), normalized
        let norm = (c * c + (l1 - a).powi(2)).sqrt();
        let (u0, u1) = (c / norm, (l1 - a) / norm);
        let o = [[u0, -u1], [u1, u0]];
        let t = 2.7;
        let (w1, w2) = (l1.sqrt(), l2.sqrt());
        let f = |g: &dyn Fn(f64) -> f64| {
            let (g1, g2) = (g(w1), g(w2));
            let mut r = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = o[i][0] * g1 * o[j][0] + o[i][1] * g2 * o[j][1];
                }
            }
            r
        };
        let cm = f(&|w| (w * t).cos());
        let sn = f(&|w| (w * t).sin() / w);
        let sp = f(&|w| -w * (w * t).sin());
        let s = propagator(&d, t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[(2 * i, 2 * j)] - cm[i][j]).abs() < 1e-10);
                assert!((s[(2 * i, 2 * j + 1)] - sn[i][j]).abs() < 1e-10);
                assert!((s[(2 * i + 1, 2 * j)] - sp[i][j]).abs() < 1e-10);
                assert!((s[(2 * i + 1, 2 * j + 1)] - cm[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matches_matrix_exponential_of_generator() {
        let m = ModelParams::new(0.08, 2.0, 0.1, 0.05, 4).unwrap();
        let d = m.derive().unwrap();
        let v = frequency_matrix(&d);
        let n = v.nrows();
        // d/dt (r, p) = (p, -V r), interleaved order
        let mut gen = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            gen[(2 * i, 2 * i + 1)] = 1.0;
            for j in 0..n {
                gen[(2 * i + 1, 2 * j)] = -v[(i, j)];
            }
        }
        let t = 1.7;
        let expm = (gen * t).exp();
        let s = propagator(&d, t).unwrap();
        assert!((expm - s).abs().max() < 1e-10);
    }

    #[test]
    fn negative_mode_is_reported() {
        let d = DerivedParams {
            omega_b: 0.1,
            coupling_c: 1.0,
            omega_k: vec![1.0],
        };
        assert!(
            matches!(propagator(&d, 1.0), Err(Error::Instability { eigenvalue }) if eigenvalue < 0.0)
        );
    }
}
