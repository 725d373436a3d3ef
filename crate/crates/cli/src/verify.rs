//! Invariant checks behind `qdecay verify`.

use qdecay_core::{
    check_kernel_identity, min_choi_eigenvalue, nz_kernel_lorentzian, DynamicalMapPoint,
};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::scenario::{Shared, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Size of the violation; zero when the invariant holds exactly.
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub fn run_checks(
    config: &ScenarioConfig,
    shared: &Shared,
    trajectories: &[Trajectory],
) -> Result<Vec<Check>, CliError> {
    let tol = config.tolerances;
    let num = |what: &'static str| move |e| CliError::numeric(what, e);

    let hermitian = shared
        .cf
        .hermitian_defect(&shared.grid)
        .map_err(num("hermitian check"))?;

    let mut kernels = vec![shared.exact_kernel()?];
    if let Some(p) = config.lorentzian() {
        kernels.push(nz_kernel_lorentzian(&p, &shared.grid).map_err(num("nz-analytic"))?);
    }
    let mut constraint = 0.0f64;
    for k in &kernels {
        let (sum, eps) = k
            .constraint_residuals(&shared.cf)
            .map_err(num("constraint check"))?;
        constraint = constraint.max(sum).max(eps);
    }

    let identity =
        check_kernel_identity(&shared.cf, &shared.grid).map_err(num("identity check"))?;

    let g = shared.amplitude.g.values();
    let choi = g
        .iter()
        .map(|v| violation(min_choi_eigenvalue(DynamicalMapPoint::new(*v))))
        .fold(0.0f64, f64::max);
    let contractivity = g
        .iter()
        .map(|v| violation(1.0 - v.norm()))
        .fold(0.0f64, f64::max);
    let trace = trajectories
        .iter()
        .flat_map(|t| &t.states)
        .map(|s| (s.trace() - 1.0).abs())
        .fold(0.0f64, f64::max);

    Ok(vec![
        Check {
            name: "hermitian-symmetry",
            residual: hermitian,
            tolerance: tol.hermitian,
        },
        Check {
            name: "constraint-identities",
            residual: constraint,
            tolerance: tol.constraint,
        },
        Check {
            name: "identity-residual",
            residual: identity,
            tolerance: tol.identity,
        },
        Check {
            name: "choi-psd",
            residual: choi,
            tolerance: tol.choi,
        },
        Check {
            name: "contractivity",
            residual: contractivity,
            tolerance: tol.contractivity,
        },
        Check {
            name: "trace",
            residual: trace,
            tolerance: tol.trace,
        },
    ])
}

/// How far `x` lies below zero.
fn violation(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        0.0
    }
}
