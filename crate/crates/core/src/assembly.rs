//! Quadratic form of the effective action on the closed-time contour.
//!
//! With `X` the integration variables and `(x_F, x̃_F)` the final system coordinates,
//!
//! ```text
//! S_eff = -i{S(x,q) - S(x̃,q̃)} + S_0(q̃_0) + (x_0² + x̃_0²)/(4σ²)
//!       = ½ XᵀℳX - C·X + B,
//! C_μ = i(c_μ x_F - c̃_μ x̃_F),   B = -(i/2) b (x_F² - x̃_F²).
//! ```
//!
//! `S` is the real-time lattice action with slice-averaged potential and coupling
//! terms; `S_0` is the free Euclidean action of the thermal leg.

use num_complex::Complex64;

use crate::contour::{Branch, ContourIndex, Link, Node, Segment, Site};
use crate::error::{Error, Result};
use crate::params::{DerivedParams, LatticeParams, ModelParams};
use crate::sparse::{SparseSymMatrix, SymmetricBuilder};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub m: SparseSymMatrix,
    pub c_vec: Vec<f64>,
    pub c_tilde_vec: Vec<f64>,
    /// `1/ε − ω_b² ε/2`.
    pub b: f64,
    /// System variables; every other variable belongs to exactly one oscillator ring.
    pub system: Vec<usize>,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `C_μ = i(c_μ x_F − c̃_μ x̃_F)`.
    pub fn source(&self, x_f: f64, x_tilde_f: f64) -> Vec<Complex64> {
        self.c_vec
            .iter()
            .zip(&self.c_tilde_vec)
            .map(|(&c, &ct)| I * (c * x_f - ct * x_tilde_f))
            .collect()
    }

    /// `B = −(i/2) b (x_F² − x̃_F²)`.
    pub fn boundary_scalar(&self, x_f: f64, x_tilde_f: f64) -> Complex64 {
        -0.5 * I * self.b * (x_f * x_f - x_tilde_f * x_tilde_f)
    }

    /// `½ XᵀℳX − C·X + B`.
    pub fn evaluate(&self, x: &[f64], x_f: f64, x_tilde_f: f64) -> Result<Complex64> {
        check_len(self.dim(), x.len())?;
        let xc: Vec<Complex64> = x.iter().map(|&v| v.into()).collect();
        let quad = 0.5 * self.m.bilinear(&xc, &xc);
        let lin: Complex64 = self
            .source(x_f, x_tilde_f)
            .iter()
            .zip(x)
            .map(|(c, &v)| c * v)
            .sum();
        Ok(quad - lin + self.boundary_scalar(x_f, x_tilde_f))
    }
}

struct Accumulator {
    builder: SymmetricBuilder,
    c_vec: Vec<f64>,
    c_tilde_vec: Vec<f64>,
    half_b_forward: f64,
    half_b_backward: f64,
}

impl Accumulator {
    /// Adds the action term `w·u·v` carrying prefactor `weight` in `S_eff`.
    ///
    /// Real-time terms on the forward branch carry `−i`, backward `+i`, Euclidean and
    /// initial-state terms `1`. Terms with a fixed final coordinate feed the source
    /// vectors or the boundary scalar instead of the matrix.
    fn bilinear(&mut self, weight: Complex64, w: f64, u: Site, v: Site) {
        match (u, v) {
            (Site::Var(i), Site::Var(j)) => {
                let scale = if i == j { 2.0 } else { 1.0 };
                self.builder.add(i, j, weight * (scale * w));
            }
            (Site::Var(i), Site::FinalForward) | (Site::FinalForward, Site::Var(i)) => {
                debug_assert_eq!(weight, -I);
                self.c_vec[i] += w;
            }
            (Site::Var(i), Site::FinalBackward) | (Site::FinalBackward, Site::Var(i)) => {
                debug_assert_eq!(weight, I);
                self.c_tilde_vec[i] += w;
            }
            (Site::FinalForward, Site::FinalForward) => self.half_b_forward += w,
            (Site::FinalBackward, Site::FinalBackward) => self.half_b_backward += w,
            _ => unreachable!("no action term joins the two final coordinates"),
        }
    }

    fn kinetic_link(&mut self, weight: Complex64, step: f64, onsite: f64, link: &Link) {
        self.bilinear(weight, onsite, link.a, link.a);
        self.bilinear(weight, onsite, link.b, link.b);
        self.bilinear(weight, -1.0 / step, link.a, link.b);
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

fn branch_weight(branch: Branch) -> Complex64 {
    match branch {
        Branch::Forward => -I,
        Branch::Backward => I,
    }
}

fn check_consistency(
    derived: &DerivedParams,
    lattice: &LatticeParams,
    contour: &ContourIndex,
) -> Result<()> {
    if contour.n_t() != lattice.n_t
        || contour.n_beta() != lattice.n_beta
        || contour.n_env() != derived.n_env()
    {
        return Err(Error::Inconsistent(format!(
            "contour (n_t={}, n_beta={}, n_env={}) does not match lattice (n_t={}, n_beta={}) and n_env={}",
            contour.n_t(),
            contour.n_beta(),
            contour.n_env(),
            lattice.n_t,
            lattice.n_beta,
            derived.n_env()
        )));
    }
    Ok(())
}

pub fn assemble(
    derived: &DerivedParams,
    model: &ModelParams,
    lattice: &LatticeParams,
    contour: &ContourIndex,
) -> Result<QuadraticForm> {
    check_consistency(derived, lattice, contour)?;
    let d = contour.dim();
    let eps = lattice.eps;
    let eps_t = lattice.eps_tilde;
    let half_c_eps = 0.5 * derived.coupling_c * eps;
    let mut acc = Accumulator {
        builder: SymmetricBuilder::new(d),
        c_vec: vec![0.0; d],
        c_tilde_vec: vec![0.0; d],
        half_b_forward: 0.0,
        half_b_backward: 0.0,
    };

    for link in contour.links() {
        match link.segment {
            Segment::ForwardSystem | Segment::BackwardSystem => {
                let branch = if link.segment == Segment::ForwardSystem {
                    Branch::Forward
                } else {
                    Branch::Backward
                };
                let weight = branch_weight(branch);
                let w2 = derived.omega_b * derived.omega_b;
                acc.kinetic_link(weight, eps, 0.5 / eps - 0.25 * eps * w2, &link);
                if half_c_eps != 0.0 {
                    for osc in 0..contour.n_env() {
                        let qa = contour.env(osc, branch, link.step);
                        let qb = contour.env(osc, branch, link.step + 1);
                        acc.bilinear(weight, half_c_eps, link.a, qa);
                        acc.bilinear(weight, half_c_eps, link.b, qb);
                    }
                }
            }
            Segment::ForwardEnv | Segment::BackwardEnv => {
                let branch = if link.segment == Segment::ForwardEnv {
                    Branch::Forward
                } else {
                    Branch::Backward
                };
                let w = derived.omega_k[link.osc.expect("env link has an oscillator")];
                acc.kinetic_link(
                    branch_weight(branch),
                    eps,
                    0.5 / eps - 0.25 * eps * w * w,
                    &link,
                );
            }
            Segment::EuclideanEnv => {
                let w = derived.omega_k[link.osc.expect("env link has an oscillator")];
                acc.kinetic_link(ONE, eps_t, 0.5 / eps_t + 0.25 * eps_t * w * w, &link);
            }
        }
    }

    let packet = 0.25 / model.sigma_sq();
    for branch in [Branch::Forward, Branch::Backward] {
        let x0 = contour.system(branch, 0);
        acc.bilinear(ONE, packet, x0, x0);
    }

    if acc.half_b_forward != acc.half_b_backward {
        return Err(Error::Inconsistent(
            "forward and backward boundary scalars differ".into(),
        ));
    }
    Ok(QuadraticForm {
        m: acc.builder.build(),
        c_vec: acc.c_vec,
        c_tilde_vec: acc.c_tilde_vec,
        b: 2.0 * acc.half_b_forward,
        system: contour.system_indices().collect(),
    })
}

/// Effective action by literal summation of the lattice actions; no matrix involved.
pub fn evaluate_action_direct(
    x: &[f64],
    x_f: f64,
    x_tilde_f: f64,
    derived: &DerivedParams,
    model: &ModelParams,
    lattice: &LatticeParams,
    contour: &ContourIndex,
) -> Result<Complex64> {
    check_consistency(derived, lattice, contour)?;
    check_len(contour.dim(), x.len())?;
    let n_t = lattice.n_t;
    let n_env = derived.n_env();

    let value = |node: Node, boundary: f64| contour.index_of(node).map_or(boundary, |i| x[i]);
    let path = |branch: Branch, boundary: f64| -> Vec<f64> {
        (0..=n_t)
            .map(|slice| value(Node::System { branch, slice }, boundary))
            .collect()
    };
    let env_path = |osc: usize, branch: Branch| -> Vec<f64> {
        (0..=n_t)
            .map(|slice| value(Node::Env { osc, branch, slice }, f64::NAN))
            .collect()
    };

    let sys_fwd = path(Branch::Forward, x_f);
    let sys_bwd = path(Branch::Backward, x_tilde_f);
    let env_fwd: Vec<_> = (0..n_env).map(|k| env_path(k, Branch::Forward)).collect();
    let env_bwd: Vec<_> = (0..n_env).map(|k| env_path(k, Branch::Backward)).collect();

    let s_fwd = real_time_action(&sys_fwd, &env_fwd, derived, lattice.eps);
    let s_bwd = real_time_action(&sys_bwd, &env_bwd, derived, lattice.eps);

    let mut s_thermal = 0.0;
    let et = lattice.eps_tilde;
    for (k, &w) in derived.omega_k.iter().enumerate() {
        let leg: Vec<f64> = (0..=lattice.n_beta)
            .map(|step| value(Node::Thermal { osc: k, step }, f64::NAN))
            .collect();
        for j in 0..lattice.n_beta {
            let (a, b) = (leg[j], leg[j + 1]);
            s_thermal += 0.5 * et * (((b - a) / et).powi(2) + w * w * 0.5 * (a * a + b * b));
        }
    }

    let packet = (sys_fwd[0].powi(2) + sys_bwd[0].powi(2)) / (4.0 * model.sigma_sq());
    Ok(-I * (s_fwd - s_bwd) + s_thermal + packet)
}

fn real_time_action(x: &[f64], q: &[Vec<f64>], derived: &DerivedParams, eps: f64) -> f64 {
    let n_t = x.len() - 1;
    let wb2 = derived.omega_b * derived.omega_b;
    let mut s = 0.0;
    for n in 0..n_t {
        s += 0.5
            * eps
            * (((x[n] - x[n + 1]) / eps).powi(2) - wb2 * 0.5 * (x[n].powi(2) + x[n + 1].powi(2)));
    }
    for (qk, &w) in q.iter().zip(&derived.omega_k) {
        for n in 0..n_t {
            s += 0.5
                * eps
                * (((qk[n] - qk[n + 1]) / eps).powi(2)
                    - w * w * 0.5 * (qk[n].powi(2) + qk[n + 1].powi(2)));
        }
    }
    for qk in q {
        for n in 0..n_t {
            s += derived.coupling_c * eps * 0.5 * (x[n] * qk[n] + x[n + 1] * qk[n + 1]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::build_contour;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        model: ModelParams,
        derived: DerivedParams,
        lattice: LatticeParams,
        contour: ContourIndex,
    }

    fn setup(gamma: f64, n_t: usize, n_beta: usize, n_env: usize) -> Setup {
        let model = ModelParams::new(0.08, 2.0, gamma, 0.05, n_env).unwrap();
        let derived = model.derive().unwrap();
        let lattice = LatticeParams::new(0.05, n_t, 0.05, Some(0.05 / n_beta as f64)).unwrap();
        assert_eq!(lattice.n_beta, n_beta);
        let contour = build_contour(n_t, n_beta, n_env).unwrap();
        Setup {
            model,
            derived,
            lattice,
            contour,
        }
    }

    impl Setup {
        fn form(&self) -> QuadraticForm {
            assemble(&self.derived, &self.model, &self.lattice, &self.contour).unwrap()
        }
        fn direct(&self, x: &[f64], xf: f64, xtf: f64) -> Complex64 {
            evaluate_action_direct(
                x,
                xf,
                xtf,
                &self.derived,
                &self.model,
                &self.lattice,
                &self.contour,
            )
            .unwrap()
        }
    }

    #[test]
    fn boundary_scalar_matches_formula() {
        let s = setup(0.1, 3, 2, 2);
        let f = s.form();
        let wb = s.derived.omega_b;
        assert!((f.b - (1.0 / 0.05 - wb * wb * 0.05 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn source_vectors_supported_on_final_slices() {
        let s = setup(0.1, 3, 2, 2);
        let f = s.form();
        let c = s.derived.coupling_c;
        let x_last = s.contour.system(Branch::Forward, 2).var().unwrap();
        let xt_last = s.contour.system(Branch::Backward, 2).var().unwrap();
        let q_final: Vec<usize> = (0..2)
            .map(|k| s.contour.env(k, Branch::Forward, 3).var().unwrap())
            .collect();
        for mu in 0..f.dim() {
            if mu == x_last {
                assert!((f.c_vec[mu] + 20.0).abs() < 1e-12);
                assert_eq!(f.c_tilde_vec[mu], 0.0);
            } else if mu == xt_last {
                assert!((f.c_tilde_vec[mu] + 20.0).abs() < 1e-12);
                assert_eq!(f.c_vec[mu], 0.0);
            } else if q_final.contains(&mu) {
                assert!((f.c_vec[mu] - c * 0.05 / 2.0).abs() < 1e-15);
                assert_eq!(f.c_vec[mu], f.c_tilde_vec[mu]);
            } else {
                assert_eq!((f.c_vec[mu], f.c_tilde_vec[mu]), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn decoupled_form_is_block_diagonal() {
        let s = setup(0.0, 4, 2, 3);
        let f = s.form();
        let n_sys = 2 * 4;
        for (i, j, _) in f.m.iter() {
            assert_eq!(i < n_sys, j < n_sys, "coupling entry at ({i}, {j})");
        }
    }

    #[test]
    fn zero_input_and_boundary_only() {
        let s = setup(0.1, 3, 2, 2);
        let x = vec![0.0; s.contour.dim()];
        assert_eq!(s.direct(&x, 0.0, 0.0), Complex64::new(0.0, 0.0));
        let f = s.form();
        let v = s.direct(&x, 1.0, 0.0);
        assert!((v - (-0.5 * I * f.b)).norm() < 1e-12);
        assert!((f.evaluate(&x, 1.0, 0.0).unwrap() - v).norm() < 1e-12);
    }

    #[test]
    fn decoupled_action_is_additive() {
        let s = setup(0.0, 3, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = s.contour.dim();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n_sys = 6;
        let mut sys_only = x.clone();
        sys_only[n_sys..].iter_mut().for_each(|v| *v = 0.0);
        let mut env_only = x.clone();
        env_only[..n_sys].iter_mut().for_each(|v| *v = 0.0);
        let total = s.direct(&x, 0.3, -0.7);
        let parts = s.direct(&sys_only, 0.3, -0.7) + s.direct(&env_only, 0.0, 0.0);
        assert!((total - parts).norm() < 1e-12 * (1.0 + total.norm()));
    }

    #[test]
    fn quadratic_form_matches_direct_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut draws = 0;
        for n_t in 1..=6 {
            for n_beta in 1..=4 {
                for n_env in 0..=3 {
                    let gamma = if n_env == 0 {
                        0.0
                    } else {
                        rng.gen_range(0.0..0.5)
                    };
                    let s = setup(gamma, n_t, n_beta, n_env);
                    let f = s.form();
                    for _ in 0..2 {
                        let x: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                        let (xf, xtf) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                        let direct = s.direct(&x, xf, xtf);
                        let quad = f.evaluate(&x, xf, xtf).unwrap();
                        assert!(
                            (direct - quad).norm() <= 1e-11 * (1.0 + direct.norm()),
                            "({n_t},{n_beta},{n_env}): {direct} vs {quad}"
                        );
                        draws += 1;
                    }
                }
            }
        }
        assert!(draws >= 100);
    }

    #[test]
    fn matrix_is_exactly_symmetric_and_sparse() {
        let s = setup(0.2, 6, 4, 3);
        let f = s.form();
        for (i, j, v) in f.m.iter() {
            assert_eq!(v, f.m.get(j, i));
        }
        assert!(f.m.nnz() <= 7 * f.dim());
    }

    #[test]
    fn backward_branch_is_conjugate_of_forward() {
        let s = setup(0.1, 5, 3, 2);
        let f = s.form();
        let c = &s.contour;
        let mirror = |mu: usize| -> Option<usize> {
            match c.node(mu)? {
                Node::System { slice, .. } => c.index_of(Node::System {
                    branch: Branch::Backward,
                    slice,
                }),
                Node::Env {
                    osc,
                    branch: Branch::Forward,
                    slice,
                } if slice < c.n_t() => c.index_of(Node::Env {
                    osc,
                    branch: Branch::Backward,
                    slice,
                }),
                _ => None,
            }
        };
        let forward: Vec<usize> = (0..f.dim())
            .filter(|&mu| {
                matches!(
                    c.node(mu),
                    Some(Node::System {
                        branch: Branch::Forward,
                        ..
                    }) | Some(Node::Env {
                        branch: Branch::Forward,
                        ..
                    })
                ) && mirror(mu).is_some()
            })
            .collect();
        for &a in &forward {
            for &b in &forward {
                let (ma, mb) = (mirror(a).unwrap(), mirror(b).unwrap());
                assert_eq!(f.m.get(a, b).conj(), f.m.get(ma, mb), "entry ({a}, {b})");
            }
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let s = setup(0.1, 3, 2, 2);
        let other = build_contour(4, 2, 2).unwrap();
        assert!(matches!(
            assemble(&s.derived, &s.model, &s.lattice, &other),
            Err(Error::Inconsistent(_))
        ));
        let short = vec![0.0; 3];
        assert!(matches!(
            evaluate_action_direct(&short, 0.0, 0.0, &s.derived, &s.model, &s.lattice, &s.contour),
            Err(Error::Dimension { .. })
        ));
    }
}
