//! Comparison report serialized to `report.json`.

use std::collections::BTreeMap;

use qdecay_core::{check_kernel_identity, min_choi_eigenvalue, DynamicalMapPoint};
use serde::Serialize;

use crate::config::Method;
use crate::error::CliError;
use crate::scenario::{entry_deviations, min_populations, Shared, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDeviation {
    pub method: String,
    pub reference: String,
    pub rho11: f64,
    pub rho00: f64,
    pub re_rho10: f64,
    pub im_rho10: f64,
    pub max: f64,
    /// Rows compared; shorter than the grid when a method broke down.
    pub compared_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    pub k_sum: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub h: f64,
    pub t_end: f64,
    pub grid_points: usize,
    pub methods: Vec<String>,
    pub deviations: Vec<PairDeviation>,
    pub breakdown_time: Option<f64>,
    pub breakdown_index: Option<usize>,
    pub min_choi_eigenvalue: f64,
    pub min_population: BTreeMap<String, f64>,
    pub identity_residual: f64,
    pub constraint_residuals: ConstraintResiduals,
    pub kernel_conditioning_warning: Option<String>,
}

impl ComparisonReport {
    /// Every method is compared against the exact map.
    pub fn build(shared: &Shared, trajectories: &[Trajectory]) -> Result<Self, CliError> {
        let exact = crate::scenario::run_method_exact(shared);
        let deviations = trajectories
            .iter()
            .filter(|t| t.method != Method::Exact)
            .map(|t| {
                let [rho11, rho00, re_rho10, im_rho10] = entry_deviations(&t.states, &exact);
                PairDeviation {
                    method: t.method.name().into(),
                    reference: Method::Exact.name().into(),
                    rho11,
                    rho00,
                    re_rho10,
                    im_rho10,
                    max: rho11.max(rho00).max(re_rho10).max(im_rho10),
                    compared_points: t.states.len().min(exact.len()),
                }
            })
            .collect();
        let min_choi = shared
            .amplitude
            .g
            .values()
            .iter()
            .map(|g| min_choi_eigenvalue(DynamicalMapPoint::new(*g)))
            .fold(f64::INFINITY, f64::min);
        let identity = check_kernel_identity(&shared.cf, &shared.grid)
            .map_err(|e| CliError::numeric("identity check", e))?;
        let kernel = shared.exact_kernel()?;
        let (k_sum, epsilon) = kernel
            .constraint_residuals(&shared.cf)
            .map_err(|e| CliError::numeric("nz-exact", e))?;
        Ok(Self {
            h: shared.grid.step(),
            t_end: shared.grid.end(),
            grid_points: shared.grid.len(),
            methods: trajectories
                .iter()
                .map(|t| t.method.name().to_string())
                .collect(),
            deviations,
            breakdown_time: shared.tcl.breakdown_time(),
            breakdown_index: shared.tcl.breakdown,
            min_choi_eigenvalue: min_choi,
            min_population: min_populations(trajectories),
            identity_residual: identity,
            constraint_residuals: ConstraintResiduals { k_sum, epsilon },
            kernel_conditioning_warning: kernel.warning.map(|w| {
                format!(
                    "|G|^2 below threshold for {} points from index {} (min {:e})",
                    w.run_length, w.first_index, w.min_value
                )
            }),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report has no non-string keys") + "\n"
    }
}
