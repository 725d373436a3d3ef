//! Nakajima-Zwanzig memory kernel and integrodifferential propagation.
//!
//! The kernel is a triple `(ε, k₁, k₂)`: the population obeys
//! `ρ̇₁₁ = −∫k₁(t−s)ρ₁₁(s)ds` and the coherence
//! `ρ̇₁₀ = −∫[(k₁+k₂)/2 + iε](t−s)ρ₁₀(s)ds`. The coherence kernel is fixed to
//! `f` by the constraints `ε = f₂`, `k₁ + k₂ = 2f₁`; only `k₁` carries
//! information beyond the correlation function.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::ComplexSignal;
use crate::grid::{RealSignal, TimeGrid};
use crate::map::MarkovParams;
use crate::reservoir::{CorrelationFunction, LorentzianParams};
use crate::scalar::Real;
use crate::state::QubitState;
use crate::volterra::{
    convolve_trapezoid, cumulative_trapezoid, deconvolve_first_kind, propagate_scalar_volterra,
    ConditioningWarning, ConvolutionKernel,
};

/// Populations below `−POSITIVITY_TOLERANCE` mark a state invalid.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelProvenance {
    ExactDeconvolved,
    LorentzianAnalytic,
    Order2,
    Order4,
    Phenomenological,
}

impl KernelProvenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactDeconvolved => "exact-deconvolved",
            Self::LorentzianAnalytic => "lorentzian-analytic",
            Self::Order2 => "order2",
            Self::Order4 => "order4",
            Self::Phenomenological => "phenomenological",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel<T> {
    pub epsilon: RealSignal<T>,
    pub k1: RealSignal<T>,
    pub k2: RealSignal<T>,
    pub provenance: KernelProvenance,
    /// Set when the deconvolution ran through a long stretch of `|G|² ≈ 0`.
    pub warning: Option<ConditioningWarning<T>>,
}

impl<T: Real> MemoryKernel<T> {
    pub fn new(
        epsilon: RealSignal<T>,
        k1: RealSignal<T>,
        k2: RealSignal<T>,
        provenance: KernelProvenance,
    ) -> Result<Self> {
        k1.grid().ensure_same(epsilon.grid())?;
        k1.grid().ensure_same(k2.grid())?;
        Ok(Self {
            epsilon,
            k1,
            k2,
            provenance,
            warning: None,
        })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.k1.grid()
    }

    /// `max|k₁ + k₂ − 2f₁|` and `max|ε − f₂|` over the grid.
    pub fn constraint_residuals(&self, cf: &CorrelationFunction<T>) -> Result<(T, T)> {
        let f = cf.sample(self.grid())?;
        let mut sum = T::zero();
        let mut eps = T::zero();
        for i in 0..f.len() {
            sum = sum.max((self.k1.get(i) + self.k2.get(i) - T::two() * f.get(i).re).abs());
            eps = eps.max((self.epsilon.get(i) - f.get(i).im).abs());
        }
        Ok((sum, eps))
    }

    /// Coherence kernel `(k₁ + k₂)/2 + iε`.
    pub fn coherence_kernel(&self) -> ComplexSignal<T> {
        let values = (0..self.k1.len())
            .map(|i| {
                Complex::new(
                    (self.k1.get(i) + self.k2.get(i)) * T::half(),
                    self.epsilon.get(i),
                )
            })
            .collect();
        ComplexSignal::new(*self.grid(), values).expect("same grid")
    }
}

fn constrained<T: Real>(
    f: &ComplexSignal<T>,
    k1: Vec<T>,
    provenance: KernelProvenance,
) -> Result<MemoryKernel<T>> {
    let grid = *f.grid();
    let k2 = k1
        .iter()
        .zip(f.values())
        .map(|(k, fv)| T::two() * fv.re - *k)
        .collect();
    MemoryKernel::new(
        f.imag(),
        RealSignal::new(grid, k1)?,
        RealSignal::new(grid, k2)?,
        provenance,
    )
}

/// Exact kernel from the amplitude: `k₁` by first-kind deconvolution of
/// `z = |G|²`, the rest from the constraints.
///
/// `Ġ` is re-evaluated as `−∫f G` on the grid, so `G` from
/// [`solve_amplitude`](crate::volterra::solve_amplitude) gives the
/// derivative the solver itself used.
pub fn nz_kernel_exact<T: Real>(
    cf: &CorrelationFunction<T>,
    g: &ComplexSignal<T>,
    grid: &TimeGrid<T>,
) -> Result<MemoryKernel<T>> {
    g.grid().ensure_same(grid)?;
    let f = cf.sample(grid)?;
    let h = grid.step();
    let gdot: Vec<Complex<T>> = convolve_trapezoid(f.values(), g.values(), h)
        .into_iter()
        .map(|v| -v)
        .collect();
    let z = g.map(|v| v.norm_sqr());
    let zdot = RealSignal::new(
        *grid,
        g.values()
            .iter()
            .zip(&gdot)
            .map(|(a, b)| T::two() * (a.conj() * b).re)
            .collect(),
    )?;
    let anchor = T::two() * f.get(0).re;
    let dec = deconvolve_first_kind(&z, &zdot, grid, Some(anchor))?;
    let mut kernel = constrained(
        &f,
        dec.kernel.into_values(),
        KernelProvenance::ExactDeconvolved,
    )?;
    kernel.warning = dec.warning;
    Ok(kernel)
}

/// Closed-form Lorentzian kernel.
pub fn nz_kernel_lorentzian<T: Real>(
    p: &LorentzianParams<T>,
    grid: &TimeGrid<T>,
) -> Result<MemoryKernel<T>> {
    let f = CorrelationFunction::Lorentzian(*p).sample(grid)?;
    let k1 = grid.times().map(|t| p.memory_k1(t)).collect();
    constrained(&f, k1, KernelProvenance::LorentzianAnalytic)
}

/// Fourth-order term of `k₁`:
/// `k₁⁽⁴⁾(τ) = −2 Re ∫₀^τdt₂∫₀^{t₂}dt₃ [f(τ−t₃)f(−t₂) + f(τ)f(t₃−t₂)]`.
///
/// With `F(x) = ∫₀ˣ f`, the inner integrals close to `F(τ) − F(τ−t₂)` and
/// `F(t₂)*`, leaving one trapezoidal sum per output point.
pub fn k1_fourth_order<T: Real>(
    cf: &CorrelationFunction<T>,
    grid: &TimeGrid<T>,
) -> Result<RealSignal<T>> {
    let f = cf.sample(grid)?;
    let fv = f.values();
    let h = grid.step();
    let big_f = cumulative_trapezoid(fv, h);
    let conj_f: Vec<Complex<T>> = big_f.iter().map(|v| v.conj()).collect();
    let second = cumulative_trapezoid(&conj_f, h);
    let values = (0..grid.len())
        .map(|n| {
            let mut first = Complex::new(T::zero(), T::zero());
            for j in 0..=n {
                let w = if j == 0 || j == n {
                    T::half()
                } else {
                    T::one()
                };
                first += fv[j].conj() * (big_f[n] - big_f[n - j]) * w;
            }
            let total = first * h + fv[n] * second[n];
            -T::two() * total.re
        })
        .collect();
    RealSignal::new(*grid, values)
}

/// Kernel summed through `order` (2 or 4) of the coupling expansion.
pub fn nz_kernel_perturbative<T: Real>(
    cf: &CorrelationFunction<T>,
    grid: &TimeGrid<T>,
    order: usize,
) -> Result<MemoryKernel<T>> {
    let f = cf.sample(grid)?;
    let k1_2: Vec<T> = f.values().iter().map(|v| T::two() * v.re).collect();
    match order {
        2 => MemoryKernel::new(
            f.imag(),
            RealSignal::new(*grid, k1_2)?,
            RealSignal::zeros(*grid),
            KernelProvenance::Order2,
        ),
        4 => {
            let k4 = k1_fourth_order(cf, grid)?;
            let k1 = k1_2.iter().zip(k4.values()).map(|(a, b)| *a + *b).collect();
            MemoryKernel::new(
                f.imag(),
                RealSignal::new(*grid, k1)?,
                k4.map(|v| -*v),
                KernelProvenance::Order4,
            )
        }
        _ => Err(Error::InvalidArgument(format!(
            "NZ kernels are available at orders 2 and 4, got {order}"
        ))),
    }
}

/// States from an NZ propagation with a per-point positivity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct NzTrajectory<T> {
    pub states: Vec<QubitState<T>>,
    pub valid: Vec<bool>,
}

impl<T: Real> NzTrajectory<T> {
    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|v| *v)
    }

    pub fn min_population(&self) -> T {
        self.states
            .iter()
            .map(|s| s.rho11)
            .fold(T::infinity(), T::min)
    }
}

/// Integrates the NZ master equation. Negative populations are kept.
pub fn nz_propagate<T: Real>(
    kernel: &MemoryKernel<T>,
    rho0: &QubitState<T>,
    grid: &TimeGrid<T>,
) -> Result<NzTrajectory<T>> {
    kernel.grid().ensure_same(grid)?;
    let pop =
        propagate_scalar_volterra(&ConvolutionKernel::new(kernel.k1.clone()), rho0.rho11, grid)?;
    let coh = propagate_scalar_volterra(
        &ConvolutionKernel::new(kernel.coherence_kernel()),
        rho0.rho10,
        grid,
    )?;
    let tol = T::lit(POSITIVITY_TOLERANCE);
    let states: Vec<QubitState<T>> = pop
        .value
        .values()
        .iter()
        .zip(coh.value.values())
        .map(|(p, c)| QubitState::new(*p, *c))
        .collect();
    let valid = states.iter().map(|s| s.is_physical(tol)).collect();
    Ok(NzTrajectory { states, valid })
}

/// `h = 2f₁/γ_M`, normalized so that `γ_M h` is the order-2 population
/// kernel; plain `2f₁` when `γ_M = 0`.
pub fn default_ansatz_kernel<T: Real>(
    cf: &CorrelationFunction<T>,
    markov: &MarkovParams<T>,
    grid: &TimeGrid<T>,
) -> Result<RealSignal<T>> {
    let scale = if markov.gamma > T::zero() {
        T::two() / markov.gamma
    } else {
        T::two()
    };
    Ok(cf.sample(grid)?.real().map(|v| *v * scale))
}

/// Propagates `ρ̇ = ∫₀ᵗ h(t−s) L[ρ(s)] ds` with the Lindblad generator of
/// `markov`: kernel `γ_M h` on the population, `(γ_M + iS_M)h/2` on the
/// coherence.
pub fn ansatz_propagate<T: Real>(
    markov: &MarkovParams<T>,
    h_kernel: &RealSignal<T>,
    rho0: &QubitState<T>,
    grid: &TimeGrid<T>,
) -> Result<NzTrajectory<T>> {
    h_kernel.grid().ensure_same(grid)?;
    let kernel = MemoryKernel::new(
        h_kernel.map(|v| *v * markov.shift * T::half()),
        h_kernel.map(|v| *v * markov.gamma),
        RealSignal::zeros(*grid),
        KernelProvenance::Phenomenological,
    )?;
    nz_propagate(&kernel, rho0, grid)
}

/// Residual of the double-integral identity
/// `∫₀^τdt₂∫₀^{t₂}dt₃ [g(t₂−t₃)g(t₃) + g(τ−t₃)g(t₂)] = (∫₀^τ g)²`,
/// evaluated for `g = f₁` and `g = f₂` separately at every grid point.
/// Returns the largest absolute residual.
pub fn check_kernel_identity<T: Real>(
    cf: &CorrelationFunction<T>,
    grid: &TimeGrid<T>,
) -> Result<T> {
    let f = cf.sample(grid)?;
    let h = grid.step();
    let mut worst = T::zero();
    for g in [f.real(), f.imag()] {
        let gv = g.values();
        let big_g = cumulative_trapezoid(gv, h);
        let self_conv = cumulative_trapezoid(&convolve_trapezoid(gv, gv, h), h);
        for n in 0..grid.len() {
            let mut cross = T::zero();
            for j in 0..=n {
                let w = if j == 0 || j == n {
                    T::half()
                } else {
                    T::one()
                };
                cross += gv[j] * (big_g[n] - big_g[n - j]) * w;
            }
            let residual = self_conv[n] + cross * h - big_g[n] * big_g[n];
            worst = worst.max(residual.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::apply_map;
    use crate::map::DynamicalMapPoint;
    use crate::reservoir::Mode;
    use crate::reservoir::ModeSet;
    use crate::volterra::solve_amplitude;

    fn grid(h: f64, t_end: f64) -> TimeGrid<f64> {
        TimeGrid::<f64>::spanning(h, t_end).unwrap()
    }

    fn exact_kernel(g0: f64, g: &TimeGrid<f64>) -> MemoryKernel<f64> {
        let cf = CorrelationFunction::<f64>::lorentzian(g0, 1.0).unwrap();
        let sol = solve_amplitude(&cf, g).unwrap();
        nz_kernel_exact(&cf, &sol.g, g).unwrap()
    }

    #[test]
    fn provenance_names() {
        assert_eq!(
            KernelProvenance::ExactDeconvolved.as_str(),
            "exact-deconvolved"
        );
        assert_eq!(
            KernelProvenance::Phenomenological.as_str(),
            "phenomenological"
        );
    }

    #[test]
    fn exact_kernel_matches_closed_form() {
        let g = grid(1e-3, 10.0);
        for g0 in [0.2, 1.0] {
            let k = exact_kernel(g0, &g);
            let p = LorentzianParams::<f64>::new(g0, 1.0).unwrap();
            let analytic = nz_kernel_lorentzian(&p, &g).unwrap();
            assert!(k.k1.max_abs_diff(&analytic.k1).unwrap() < 1e-3);
            assert!(k.epsilon.values().iter().all(|v| *v == 0.0));
            assert_eq!(k.k1.get(0), g0);
            let (sum, eps) = k
                .constraint_residuals(&CorrelationFunction::Lorentzian(p))
                .unwrap();
            assert!(sum < 1e-12 && eps < 1e-12);
        }
    }

    #[test]
    fn zero_correlation_gives_zero_kernel() {
        let g = grid(0.01, 2.0);
        let cf = CorrelationFunction::zero(g);
        let sol = solve_amplitude(&cf, &g).unwrap();
        let k = nz_kernel_exact(&cf, &sol.g, &g).unwrap();
        for s in [&k.epsilon, &k.k1, &k.k2] {
            assert!(s.values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn analytic_kernel_values() {
        let g = grid(1e-3, 5.0);
        let p = LorentzianParams::<f64>::new(1.0, 1.0).unwrap();
        let k = nz_kernel_lorentzian(&p, &g).unwrap();
        assert_eq!(k.k1.get(0), 1.0);
        let s3 = 3f64.sqrt();
        let expected = (-1.5f64).exp() * ((s3 / 2.0).cos() + (s3 / 2.0).sin() / s3);
        assert!((k.k1.get(1000) - expected).abs() < 1e-12);
        assert!((expected - 0.2426).abs() < 1e-4);
        let (sum, eps) = k
            .constraint_residuals(&CorrelationFunction::Lorentzian(p))
            .unwrap();
        assert!(sum < 1e-12 && eps == 0.0);
        // structure divergence: k₂ does not vanish
        assert!(k.k2.max_modulus() > 1e-4);
    }

    #[test]
    fn weak_analytic_kernel_is_positive() {
        let g = grid(1e-2, 30.0);
        for g0 in [0.05, 0.1, 0.25] {
            let k =
                nz_kernel_lorentzian(&LorentzianParams::<f64>::new(g0, 1.0).unwrap(), &g).unwrap();
            assert!(k.k1.values().iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn fourth_order_kernel_closed_form() {
        let g = grid(1e-3, 5.0);
        let p = LorentzianParams::<f64>::new(1.0, 1.0).unwrap();
        let k4 = k1_fourth_order(&CorrelationFunction::Lorentzian(p), &g).unwrap();
        assert_eq!(k4.get(0), 0.0);
        for (t, v) in g.times().zip(k4.values()) {
            assert!((v - p.memory_k1_order4(t)).abs() < 1e-6, "{t}");
        }
        assert!((k4.get(1000) + (-2.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn perturbative_kernels() {
        let g = grid(1e-2, 3.0);
        let cf = CorrelationFunction::<f64>::lorentzian(0.5, 2.0).unwrap();
        let k2 = nz_kernel_perturbative(&cf, &g, 2).unwrap();
        assert!(k2.k2.values().iter().all(|v| *v == 0.0));
        let (sum, _) = k2.constraint_residuals(&cf).unwrap();
        assert!(sum == 0.0);
        let k4 = nz_kernel_perturbative(&cf, &g, 4).unwrap();
        let (sum, _) = k4.constraint_residuals(&cf).unwrap();
        assert!(sum < 1e-14);
        assert!(nz_kernel_perturbative(&cf, &g, 3).is_err());
    }

    #[test]
    fn exact_kernel_reproduces_map_past_breakdown() {
        let g = grid(1e-3, 10.0);
        let k = exact_kernel(1.0, &g);
        let p = LorentzianParams::<f64>::new(1.0, 1.0).unwrap();
        let rho0 = QubitState::new(0.8, Complex::new(0.3, -0.2));
        let traj = nz_propagate(&k, &rho0, &g).unwrap();
        for (t, s) in g.times().zip(&traj.states) {
            let exact = apply_map(DynamicalMapPoint::real(p.amplitude(t)), &rho0);
            assert!(s.max_entry_diff(&exact) < 1e-3, "{t}");
        }
    }

    #[test]
    fn order2_coherence_is_exact() {
        let g = grid(1e-3, 10.0);
        let cf = CorrelationFunction::<f64>::lorentzian(1.0, 1.0).unwrap();
        let sol = solve_amplitude(&cf, &g).unwrap();
        let rho0 = QubitState::new(0.5, Complex::new(0.5, 0.0));
        let traj = nz_propagate(&nz_kernel_perturbative(&cf, &g, 2).unwrap(), &rho0, &g).unwrap();
        for (s, gv) in traj.states.iter().zip(sol.g.values()) {
            assert!((s.rho10 - gv * rho0.rho10).norm() < 1e-12);
        }
    }

    #[test]
    fn order2_population_goes_negative_at_strong_coupling() {
        let g = grid(1e-3, 5.0);
        let cf = CorrelationFunction::<f64>::lorentzian(5.0, 1.0).unwrap();
        let traj = nz_propagate(
            &nz_kernel_perturbative(&cf, &g, 2).unwrap(),
            &QubitState::excited(),
            &g,
        )
        .unwrap();
        // ρ₁₁ = e^{−t/2}[cos(√19 t/2) + sin(√19 t/2)/√19]
        let s19 = 19f64.sqrt();
        let closed =
            |t: f64| (-t / 2.0).exp() * ((s19 * t / 2.0).cos() + (s19 * t / 2.0).sin() / s19);
        let (imin, min) = traj
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.rho11))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!(min < -0.1);
        assert!((min + 0.49).abs() < 0.01, "{min}");
        assert!((g.time(imin) - 1.45).abs() < 0.02);
        for (t, s) in g.times().zip(&traj.states) {
            assert!((s.rho11 - closed(t)).abs() < 1e-5);
        }
        assert!(!traj.all_valid());
        assert!(!traj.valid[imin]);
    }

    #[test]
    fn ansatz_with_twice_correlation_equals_order2_population() {
        let g = grid(1e-3, 10.0);
        let cf = CorrelationFunction::<f64>::lorentzian(1.0, 1.0).unwrap();
        let markov = MarkovParams::<f64>::new(1.0, 0.0).unwrap();
        let h = default_ansatz_kernel(&cf, &markov, &g).unwrap();
        let rho0 = QubitState::new(0.9, Complex::new(0.2, 0.1));
        let ansatz = ansatz_propagate(&markov, &h, &rho0, &g).unwrap();
        let nz = nz_propagate(&nz_kernel_perturbative(&cf, &g, 2).unwrap(), &rho0, &g).unwrap();
        for (a, b) in ansatz.states.iter().zip(&nz.states) {
            assert!((a.rho11 - b.rho11).abs() < 1e-14);
        }
    }

    #[test]
    fn ansatz_approaches_markov_for_narrow_kernels() {
        let g0 = 0.5;
        let grid = grid(1e-3, 5.0);
        let markov = MarkovParams::<f64>::new(g0, 0.0).unwrap();
        let rho0 = QubitState::excited();
        let reference = crate::map::markov_propagate(&markov, &rho0, &grid);
        let mut last = f64::INFINITY;
        for lambda in [5.0, 10.0, 20.0] {
            let h = RealSignal::from_fn(grid, |t| lambda * (-lambda * t).exp());
            let traj = ansatz_propagate(&markov, &h, &rho0, &grid).unwrap();
            let dev = traj
                .states
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a.rho11 - b.rho11).abs())
                .fold(0.0, f64::max);
            assert!(dev < last, "{lambda}: {dev} >= {last}");
            last = dev;
        }
    }

    #[test]
    fn ansatz_misses_exact_dynamics_at_strong_coupling() {
        let g = grid(1e-3, 10.0);
        let cf = CorrelationFunction::<f64>::lorentzian(1.0, 1.0).unwrap();
        let markov = MarkovParams::from_correlation(&cf, &g).unwrap();
        let h = default_ansatz_kernel(&cf, &markov, &g).unwrap();
        let traj = ansatz_propagate(&markov, &h, &QubitState::excited(), &g).unwrap();
        let p = cf.as_lorentzian().unwrap();
        let dev = g
            .times()
            .zip(&traj.states)
            .map(|(t, s)| (s.rho11 - p.amplitude(t).powi(2)).abs())
            .fold(0.0, f64::max);
        assert!(dev > 1e-2);
    }

    #[test]
    fn ansatz_grid_mismatch() {
        let markov = MarkovParams::<f64>::new(1.0, 0.0).unwrap();
        let h = RealSignal::zeros(grid(0.1, 1.0));
        assert!(ansatz_propagate(&markov, &h, &QubitState::excited(), &grid(0.1, 2.0)).is_err());
    }

    #[test]
    fn identity_residuals() {
        let g = grid(1e-3, 10.0);
        assert_eq!(
            check_kernel_identity(&CorrelationFunction::zero(g), &g).unwrap(),
            0.0
        );
        let lor = CorrelationFunction::<f64>::lorentzian(1.0, 1.0).unwrap();
        assert!(check_kernel_identity(&lor, &g).unwrap() < 1e-6);
        let single = ModeSet::<f64>::new(
            0.0,
            vec![Mode {
                coupling: Complex::new(0.8, 0.0),
                omega: 0.0,
            }],
        )
        .unwrap();
        assert!(
            check_kernel_identity(&CorrelationFunction::DiscreteModes(single), &g).unwrap() < 1e-8
        );
        let detuned = ModeSet::<f64>::new(
            0.0,
            vec![Mode {
                coupling: Complex::new(0.8, 0.0),
                omega: 1.3,
            }],
        )
        .unwrap();
        assert!(
            check_kernel_identity(
                &CorrelationFunction::DiscreteModes(detuned),
                &grid(1e-3, 3.0)
            )
            .unwrap()
                < 1e-6
        );
    }
}
