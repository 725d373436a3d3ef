//! Runs the requested methods over one shared grid.

use std::collections::BTreeMap;

use qdecay_core::{
    ansatz_propagate, apply_map, default_ansatz_kernel, evolve_one_excitation, markov_propagate,
    nz_kernel_exact, nz_kernel_lorentzian, nz_kernel_perturbative, nz_propagate, solve_amplitude,
    tcl_coefficients, tcl_propagate, tcl_rates_perturbative, AmplitudeSolution64,
    CorrelationFunction64, DynamicalMapPoint, MarkovParams64, MemoryKernel64, PerturbativeRates,
    QubitState64, TclCoefficients64, TimeGrid64, C64, MAX_PHASE_PER_STEP,
};
use rayon::prelude::*;

use crate::config::{Method, ScenarioConfig};
use crate::error::CliError;

/// Quantities every method and report can draw on.
pub struct Shared {
    pub grid: TimeGrid64,
    pub cf: CorrelationFunction64,
    pub rho0: QubitState64,
    pub amplitude: AmplitudeSolution64,
    pub tcl: TclCoefficients64,
}

impl Shared {
    pub fn new(config: &ScenarioConfig) -> Result<Self, CliError> {
        let grid = config.grid()?;
        let cf = config.correlation()?;
        let amplitude = solve_amplitude(&cf, &grid).map_err(|e| CliError::numeric("exact", e))?;
        let tcl = tcl_coefficients(
            &amplitude.g,
            &amplitude.gdot,
            config.tolerances.breakdown_threshold,
        )
        .map_err(|e| CliError::numeric("tcl-exact", e))?;
        Ok(Self {
            grid,
            cf,
            rho0: config.initial_state(),
            amplitude,
            tcl,
        })
    }

    pub fn exact_kernel(&self) -> Result<MemoryKernel64, CliError> {
        nz_kernel_exact(&self.cf, &self.amplitude.g, &self.grid)
            .map_err(|e| CliError::numeric("nz-exact", e))
    }

    /// Truncated TCL coefficients through `order` (2 or 4).
    pub fn tcl_truncated(&self, order: usize) -> Result<TclCoefficients64, CliError> {
        let name = if order == 2 {
            "tcl-order2"
        } else {
            "tcl-order4"
        };
        let terms = [2, 4]
            .into_iter()
            .filter(|o| *o <= order)
            .map(|o| tcl_rates_perturbative(&self.cf, &self.grid, o))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::numeric(name, e))?;
        PerturbativeRates::accumulate(&terms).map_err(|e| CliError::numeric(name, e))
    }
}

/// States of one method; rows past the last state are undefined (NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: Method,
    pub states: Vec<QubitState64>,
}

fn from_amplitude(values: &[C64], rho0: &QubitState64) -> Vec<QubitState64> {
    values
        .iter()
        .map(|g| apply_map(DynamicalMapPoint::new(*g), rho0))
        .collect()
}

pub fn run_method(
    method: Method,
    shared: &Shared,
    config: &ScenarioConfig,
) -> Result<Trajectory, CliError> {
    let name = method.name();
    let num = |e| CliError::numeric(name, e);
    let (grid, rho0) = (&shared.grid, &shared.rho0);
    let states = match method {
        Method::Exact => from_amplitude(shared.amplitude.g.values(), rho0),
        Method::TclExact => tcl_propagate(&shared.tcl, rho0, grid).map_err(num)?.states,
        Method::TclOrder2 => {
            tcl_propagate(&shared.tcl_truncated(2)?, rho0, grid)
                .map_err(num)?
                .states
        }
        Method::TclOrder4 => {
            tcl_propagate(&shared.tcl_truncated(4)?, rho0, grid)
                .map_err(num)?
                .states
        }
        Method::NzExact => {
            nz_propagate(&shared.exact_kernel()?, rho0, grid)
                .map_err(num)?
                .states
        }
        Method::NzAnalytic => {
            let p = config.lorentzian().ok_or_else(|| {
                CliError::config(None, "nz-analytic needs a Lorentzian correlation".into())
            })?;
            nz_propagate(&nz_kernel_lorentzian(&p, grid).map_err(num)?, rho0, grid)
                .map_err(num)?
                .states
        }
        Method::NzOrder2 | Method::NzOrder4 => {
            let order = if method == Method::NzOrder2 { 2 } else { 4 };
            let kernel = nz_kernel_perturbative(&shared.cf, grid, order).map_err(num)?;
            nz_propagate(&kernel, rho0, grid).map_err(num)?.states
        }
        Method::Markov => markov_propagate(&markov(shared, config)?, rho0, grid),
        Method::Ansatz => {
            let params = markov(shared, config)?;
            let h = default_ansatz_kernel(&shared.cf, &params, grid).map_err(num)?;
            ansatz_propagate(&params, &h, rho0, grid)
                .map_err(num)?
                .states
        }
        Method::Oracle => {
            let modes = config.oracle_modes()?;
            // substep so each RK4 step resolves the fastest mode phase
            let sub = (grid.step() * modes.max_detuning() / MAX_PHASE_PER_STEP)
                .ceil()
                .max(1.0) as usize;
            let fine =
                TimeGrid64::new(grid.step() / sub as f64, grid.count() * sub).map_err(num)?;
            let run = evolve_one_excitation(&modes, C64::new(1.0, 0.0), &fine).map_err(num)?;
            let c1: Vec<C64> = run.c1.values().iter().step_by(sub).copied().collect();
            from_amplitude(&c1, rho0)
        }
    };
    if let Some(index) = states
        .iter()
        .position(|s| !(s.rho11.is_finite() && s.rho10.re.is_finite() && s.rho10.im.is_finite()))
    {
        return Err(CliError::Numeric {
            method: name.into(),
            index: Some(index),
            message: "non-finite state".into(),
        });
    }
    Ok(Trajectory { method, states })
}

/// The exact map applied to the initial state.
pub fn run_method_exact(shared: &Shared) -> Vec<QubitState64> {
    from_amplitude(shared.amplitude.g.values(), &shared.rho0)
}

fn markov(shared: &Shared, config: &ScenarioConfig) -> Result<MarkovParams64, CliError> {
    config.markov_params(&shared.cf, &shared.grid)
}

/// Runs every requested method (in parallel), in the configured order.
pub fn run_methods(shared: &Shared, config: &ScenarioConfig) -> Result<Vec<Trajectory>, CliError> {
    config
        .methods
        .par_iter()
        .map(|m| run_method(*m, shared, config))
        .collect()
}

/// Largest per-entry differences between two trajectories over the rows
/// both define.
pub fn entry_deviations(a: &[QubitState64], b: &[QubitState64]) -> [f64; 4] {
    let mut out = [0.0f64; 4];
    for (x, y) in a.iter().zip(b) {
        let d = [
            (x.rho11 - y.rho11).abs(),
            (x.rho00() - y.rho00()).abs(),
            (x.rho10.re - y.rho10.re).abs(),
            (x.rho10.im - y.rho10.im).abs(),
        ];
        for (o, v) in out.iter_mut().zip(d) {
            *o = o.max(v);
        }
    }
    out
}

pub fn min_populations(trajectories: &[Trajectory]) -> BTreeMap<String, f64> {
    trajectories
        .iter()
        .map(|t| {
            (
                t.method.name().to_string(),
                t.states
                    .iter()
                    .map(|s| s.rho11)
                    .fold(f64::INFINITY, f64::min),
            )
        })
        .collect()
}
