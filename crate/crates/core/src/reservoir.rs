//! Reservoir two-point correlation functions `f(τ) = f₁(τ) + i f₂(τ)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, TimeGrid};
use crate::scalar::{sinhc, Real};

/// Resonant Lorentzian spectral density with coupling `γ₀` and width `λ`,
/// `f(τ) = ½γ₀λ e^{-λ|τ|}`.
///
/// Besides the correlation function this carries the closed-form solution
/// of the model for this reservoir, which the numerical routes are checked
/// against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams<T> {
    gamma0: T,
    lambda: T,
}

impl<T: Real> LorentzianParams<T> {
    pub fn new(gamma0: T, lambda: T) -> Result<Self> {
        let ok = |x: T| x > T::zero() && x.is_finite();
        if !ok(gamma0) || !ok(lambda) {
            return Err(Error::InvalidArgument(format!(
                "Lorentzian needs gamma0 > 0 and lambda > 0, got ({gamma0}, {lambda})"
            )));
        }
        Ok(Self { gamma0, lambda })
    }

    pub fn gamma0(&self) -> T {
        self.gamma0
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    fn csqrt(x: T) -> Complex<T> {
        Complex::new(x, T::zero()).sqrt()
    }

    /// `δ = √(1 − 2γ₀/λ)`, real in weak coupling, imaginary in strong.
    pub fn delta(&self) -> Complex<T> {
        Self::csqrt(T::one() - T::two() * self.gamma0 / self.lambda)
    }

    /// `δ′ = √(1 − 4γ₀/λ)`.
    pub fn delta_prime(&self) -> Complex<T> {
        Self::csqrt(T::one() - T::lit(4.0) * self.gamma0 / self.lambda)
    }

    /// `δ̂ = √(2γ₀/λ − 1)`.
    pub fn delta_hat(&self) -> Complex<T> {
        Self::csqrt(T::two() * self.gamma0 / self.lambda - T::one())
    }

    pub fn correlation(&self, tau: T) -> T {
        T::half() * self.gamma0 * self.lambda * (-self.lambda * tau.abs()).exp()
    }

    /// `J(ω) = (1/2π) γ₀λ² / ((ω₀ − ω)² + λ²)`.
    pub fn spectral_density(&self, omega0: T, omega: T) -> T {
        let d = omega0 - omega;
        self.gamma0 * self.lambda * self.lambda
            / (T::two() * T::PI() * (d * d + self.lambda * self.lambda))
    }

    /// Exact amplitude `G(t) = e^{-λt/2}[cosh(λtδ/2) + sinh(λtδ/2)/δ]`.
    pub fn amplitude(&self, t: T) -> T {
        let x = self.lambda * t * T::half();
        let d = self.delta();
        ((d * x).cosh() + sinhc(x, d)).re * (-x).exp()
    }

    /// `dG/dt = −γ₀ e^{-λt/2} sinh(λtδ/2)/δ`.
    pub fn amplitude_derivative(&self, t: T) -> T {
        let x = self.lambda * t * T::half();
        -self.gamma0 * (-x).exp() * sinhc(x, self.delta()).re
    }

    /// Exact TCL decay rate `γ(t) = −2 Ġ/G`; diverges at zeros of `G`.
    pub fn decay_rate(&self, t: T) -> T {
        let x = self.lambda * t * T::half();
        let d = self.delta();
        let s = sinhc(x, d);
        (s * (self.gamma0 * T::two()) / ((d * x).cosh() + s)).re
    }

    /// Second-order TCL rate `γ₀(1 − e^{-λt})`.
    pub fn decay_rate_order2(&self, t: T) -> T {
        self.gamma0 * (T::one() - (-self.lambda * t).exp())
    }

    /// First zero of `G` for `γ₀ > λ/2`, `t* = 2(π − arctan δ̂)/(λδ̂)`.
    pub fn first_zero_time(&self) -> Option<T> {
        if self.gamma0 * T::two() <= self.lambda {
            return None;
        }
        let dh = self.delta_hat().re;
        Some(T::two() * (T::PI() - dh.atan()) / (self.lambda * dh))
    }

    /// Exact memory-kernel function
    /// `k₁(τ) = γ₀λ e^{-3λτ/2}[cosh(λτδ′/2) + sinh(λτδ′/2)/δ′]`.
    pub fn memory_k1(&self, tau: T) -> T {
        let x = self.lambda * tau * T::half();
        let d = self.delta_prime();
        self.gamma0 * self.lambda * (-x * T::lit(3.0)).exp() * ((d * x).cosh() + sinhc(x, d)).re
    }

    /// Fourth-order kernel term `γ₀²[e^{-λτ}(1 − λτ) − e^{-2λτ}]`.
    pub fn memory_k1_order4(&self, tau: T) -> T {
        let lt = self.lambda * tau;
        let e = (-lt).exp();
        self.gamma0 * self.gamma0 * (e * (T::one() - lt) - e * e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub coupling: Complex<T>,
    pub omega: T,
}

/// Discrete reservoir modes `{(g_k, ω_k)}` with qubit frequency `ω₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet<T> {
    omega0: T,
    modes: Vec<Mode<T>>,
}

impl<T: Real> ModeSet<T> {
    /// An empty mode list is the decoupled reservoir.
    pub fn new(omega0: T, modes: Vec<Mode<T>>) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::InvalidArgument("omega0 must be finite".into()));
        }
        if let Some(k) = modes.iter().position(|m| {
            !(m.omega.is_finite() && m.coupling.re.is_finite() && m.coupling.im.is_finite())
        }) {
            return Err(Error::InvalidArgument(format!(
                "mode {k} has a non-finite coupling or frequency"
            )));
        }
        Ok(Self { omega0, modes })
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `Σ_k |g_k|²`, the value `f(0)`.
    pub fn total_weight(&self) -> T {
        self.modes.iter().map(|m| m.coupling.norm_sqr()).sum()
    }

    pub fn max_detuning(&self) -> T {
        self.modes
            .iter()
            .map(|m| (self.omega0 - m.omega).abs())
            .fold(T::zero(), T::max)
    }

    pub fn correlation(&self, tau: T) -> Complex<T> {
        self.modes
            .iter()
            .map(|m| Complex::from_polar(m.coupling.norm_sqr(), (self.omega0 - m.omega) * tau))
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
    }
}

/// Discretizes the Lorentzian spectral density on `n_modes` midpoint cells
/// covering `[ω₀ − Wλ, ω₀ + Wλ]`, with `|g_k|² = J(ω_k)Δω`.
pub fn sample_lorentzian_modes<T: Real>(
    p: &LorentzianParams<T>,
    omega0: T,
    n_modes: usize,
    cutoff_width: T,
) -> Result<ModeSet<T>> {
    if n_modes < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 modes, got {n_modes}"
        )));
    }
    if !(cutoff_width > T::zero()) || !cutoff_width.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cutoff width must be positive, got {cutoff_width}"
        )));
    }
    let half_band = cutoff_width * p.lambda();
    let n = T::from_usize(n_modes).expect("mode count fits the scalar");
    let dw = T::two() * half_band / n;
    let modes = (0..n_modes)
        .map(|k| {
            let cell = T::from_usize(k).expect("index fits the scalar") + T::half();
            let omega = omega0 - half_band + cell * dw;
            let weight = p.spectral_density(omega0, omega) * dw;
            Mode {
                coupling: Complex::new(weight.sqrt(), T::zero()),
                omega,
            }
        })
        .collect();
    ModeSet::new(omega0, modes)
}

/// The reservoir correlation function in one of three representations.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationFunction<T> {
    Lorentzian(LorentzianParams<T>),
    DiscreteModes(ModeSet<T>),
    /// Samples of `f` on `τ ≥ 0`, linearly interpolated and extended to
    /// negative `τ` by `f(−τ) = f(τ)*`.
    Tabulated(ComplexSignal<T>),
}

impl<T: Real> CorrelationFunction<T> {
    pub fn lorentzian(gamma0: T, lambda: T) -> Result<Self> {
        LorentzianParams::new(gamma0, lambda).map(Self::Lorentzian)
    }

    /// Identically vanishing correlation on `grid`: the decoupled qubit.
    pub fn zero(grid: TimeGrid<T>) -> Self {
        Self::Tabulated(ComplexSignal::zeros(grid))
    }

    pub fn as_lorentzian(&self) -> Option<&LorentzianParams<T>> {
        match self {
            Self::Lorentzian(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, tau: T) -> Result<Complex<T>> {
        match self {
            Self::Lorentzian(p) => Ok(Complex::new(p.correlation(tau), T::zero())),
            Self::DiscreteModes(m) => Ok(m.correlation(tau)),
            Self::Tabulated(table) => {
                if tau < T::zero() {
                    return Ok(interpolate(table, -tau)?.conj());
                }
                interpolate(table, tau)
            }
        }
    }

    /// `f(tᵢ)` at every grid point.
    pub fn sample(&self, grid: &TimeGrid<T>) -> Result<ComplexSignal<T>> {
        let values = match self {
            Self::Tabulated(table) if table.grid().step() == grid.step() => {
                if table.grid().count() < grid.count() {
                    return Err(Error::OutOfRange {
                        tau: grid.end().to_f64().unwrap_or(f64::NAN),
                        max: table.grid().end().to_f64().unwrap_or(f64::NAN),
                    });
                }
                table.values()[..grid.len()].to_vec()
            }
            _ => grid
                .times()
                .map(|t| self.eval(t))
                .collect::<Result<Vec<_>>>()?,
        };
        if let Some(index) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite {
                what: "correlation sample",
                index,
            });
        }
        ComplexSignal::new(*grid, values)
    }

    /// Largest violation of `f(−τ) = f(τ)*` over the grid points, including
    /// `|Im f(0)|`. Structurally zero for the analytic variants.
    pub fn hermitian_defect(&self, grid: &TimeGrid<T>) -> Result<T> {
        let mut worst = self.eval(T::zero())?.im.abs();
        for t in grid.times() {
            let d = (self.eval(-t)? - self.eval(t)?.conj()).norm();
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

fn interpolate<T: Real>(table: &ComplexSignal<T>, tau: T) -> Result<Complex<T>> {
    let grid = table.grid();
    let end = grid.end();
    // Allow rounding slop at the right edge.
    if tau > end * (T::one() + T::lit(1e-12)) || tau.is_nan() {
        return Err(Error::OutOfRange {
            tau: tau.to_f64().unwrap_or(f64::NAN),
            max: end.to_f64().unwrap_or(f64::NAN),
        });
    }
    let pos = (tau / grid.step()).min(T::from_usize(grid.count()).expect("count fits the scalar"));
    let i = pos.floor().to_usize().unwrap_or(0).min(grid.count() - 1);
    let frac = pos - T::from_usize(i).expect("index fits the scalar");
    let v = table.values();
    Ok(v[i] * (T::one() - frac) + v[i + 1] * frac)
}
