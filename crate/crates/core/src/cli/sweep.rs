use rayon::prelude::*;

use super::config::{SweepAxis, SweepConfig};
use super::fit::{fit_linear, FitResult};
use crate::error::Result;
use crate::observables::{master_equation_reference, observe, DecoherenceObservables};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub obs: DecoherenceObservables,
    /// `8γt/β`
    pub me_prediction: f64,
}

fn evaluate(cfg: &SweepConfig, value: f64, step: usize) -> Result<SweepRow> {
    let model = cfg.model_for(value)?;
    let lattice = cfg.lattice_for(value, &model, step)?;
    let context = || {
        format!(
            "{} = {value}, t = {} (gamma = {}, beta = {}, n_env = {}, eps = {})",
            cfg.axis,
            lattice.t_final(),
            model.gamma,
            model.beta,
            model.n_env,
            lattice.eps
        )
    };
    let obs = observe(&model, &lattice).map_err(|e| e.at(context()))?;
    obs.check_invariants().map_err(|e| e.at(context()))?;
    Ok(SweepRow {
        axis_value: value,
        obs,
        me_prediction: master_equation_reference(model.gamma, model.beta, obs.t),
    })
}

/// Every `(axis value, time)` point, evaluated in parallel on the current rayon pool and
/// returned sorted by `(axis_value, t)`.
pub fn run_axis_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let steps = cfg.n_steps();
    let tasks: Vec<(f64, usize)> = cfg
        .values
        .iter()
        .flat_map(|&v| (1..=steps).map(move |n| (v, n)))
        .collect();
    let mut rows = tasks
        .par_iter()
        .map(|&(v, n)| evaluate(cfg, v, n))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.axis_value
            .total_cmp(&b.axis_value)
            .then(a.obs.t.total_cmp(&b.obs.t))
    });
    Ok(rows)
}

/// Observables of the first axis value on the time grid.
pub fn run_time_series(cfg: &SweepConfig) -> Result<Vec<DecoherenceObservables>> {
    let single = SweepConfig {
        axis: if cfg.axis == SweepAxis::EpsRefine {
            SweepAxis::EpsRefine
        } else {
            cfg.axis
        },
        values: vec![cfg.values[0]],
        ..cfg.clone()
    };
    Ok(run_axis_sweep(&single)?
        .into_iter()
        .map(|r| r.obs)
        .collect())
}

/// Fits `Γ̃` against `t` for every series in `rows` that has finite `Γ̃`.
pub fn fit_series(rows: &[SweepRow], window: (f64, f64)) -> Vec<(f64, Result<FitResult>)> {
    let mut values: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
    values.dedup();
    values
        .into_iter()
        .map(|v| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.axis_value == v)
                .filter_map(|r| r.obs.gamma_tilde.map(|g| (r.obs.t, g)))
                .collect();
            (v, fit_linear(&pts, window))
        })
        .collect()
}
