//! Brute-force Schrödinger integration in the zero/one-excitation sector.
//!
//! With `|ψ(t)⟩ = c₀|0,0⟩ + c₁|1,0⟩ + Σ c_k|0,1_k⟩` the interaction-picture
//! amplitudes obey
//! `ċ₁ = −i Σ g_k e^{iΔ_k t} c_k`, `ċ_k = −i g_k* e^{−iΔ_k t} c₁`,
//! with `Δ_k = ω₀ − ω_k`. `c₀` is a spectator.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, TimeGrid};
use crate::reservoir::ModeSet;
use crate::scalar::Real;

/// Largest allowed `h · max|Δ_k|`.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct OneExcitationState<T> {
    pub c0: Complex<T>,
    pub c1: Complex<T>,
    pub ck: Vec<Complex<T>>,
}

impl<T: Real> OneExcitationState<T> {
    pub fn excitation(&self) -> T {
        self.c1.norm_sqr() + self.ck.iter().map(|c| c.norm_sqr()).sum::<T>()
    }

    pub fn norm_sqr(&self) -> T {
        self.c0.norm_sqr() + self.excitation()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun<T> {
    pub c1: ComplexSignal<T>,
    pub final_state: OneExcitationState<T>,
    /// Largest `| ‖ψ(t)‖² − ‖ψ(0)‖² |` over the output points.
    pub max_norm_drift: T,
    /// Largest change of `|c₁|² + Σ|c_k|²` over the output points.
    pub max_excitation_drift: T,
}

struct Rhs<'a, T> {
    coupling: &'a [Complex<T>],
    detuning: &'a [T],
}

impl<T: Real> Rhs<'_, T> {
    fn phases(&self, t: T) -> Vec<Complex<T>> {
        self.detuning
            .iter()
            .map(|d| Complex::from_polar(T::one(), *d * t))
            .collect()
    }

    fn eval(
        &self,
        phase: &[Complex<T>],
        c1: Complex<T>,
        ck: &[Complex<T>],
        dk: &mut [Complex<T>],
    ) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        let mut sum = Complex::new(T::zero(), T::zero());
        for (((g, e), c), d) in self.coupling.iter().zip(phase).zip(ck).zip(dk.iter_mut()) {
            sum += *g * *e * *c;
            *d = -i * (g.conj() * e.conj() * c1);
        }
        -i * sum
    }
}

/// Integrates from `c₁(0) = c1_0`, `c_k(0) = 0`, `c₀ = √(1 − |c1_0|²)` with
/// classical RK4 at the grid step and returns `c₁` at every grid point.
pub fn evolve_one_excitation<T: Real>(
    modes: &ModeSet<T>,
    c1_0: Complex<T>,
    grid: &TimeGrid<T>,
) -> Result<OracleRun<T>> {
    let weight = c1_0.norm_sqr();
    if !(weight <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "|c1(0)| must not exceed 1, got {}",
            c1_0.norm()
        )));
    }
    let h = grid.step();
    let max_detuning = modes.max_detuning();
    if h * max_detuning > T::lit(MAX_PHASE_PER_STEP) {
        return Err(Error::Resolution {
            step: h.to_f64().unwrap_or(f64::NAN),
            detuning: max_detuning.to_f64().unwrap_or(f64::NAN),
            product: (h * max_detuning).to_f64().unwrap_or(f64::NAN),
        });
    }
    let coupling: Vec<Complex<T>> = modes.modes().iter().map(|m| m.coupling).collect();
    let detuning: Vec<T> = modes
        .modes()
        .iter()
        .map(|m| modes.omega0() - m.omega)
        .collect();
    let rhs = Rhs {
        coupling: &coupling,
        detuning: &detuning,
    };
    let n = coupling.len();
    let zero = Complex::new(T::zero(), T::zero());

    let c0 = Complex::new((T::one() - weight).sqrt(), T::zero());
    let mut c1 = c1_0;
    let mut ck = vec![zero; n];
    let mut out = Vec::with_capacity(grid.len());
    out.push(c1);
    let (norm0, exc0) = (c0.norm_sqr() + weight, weight);
    let (mut norm_drift, mut exc_drift) = (T::zero(), T::zero());

    let (mut d1, mut d2, mut d3, mut d4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    let half_h = h * T::half();
    let sixth = h / T::lit(6.0);
    for step in 0..grid.count() {
        let t = grid.time(step);
        let (p0, p_mid, p1) = (rhs.phases(t), rhs.phases(t + half_h), rhs.phases(t + h));
        let a1 = rhs.eval(&p0, c1, &ck, &mut d1);
        axpy(&mut stage, &ck, &d1, half_h);
        let a2 = rhs.eval(&p_mid, c1 + a1 * half_h, &stage, &mut d2);
        axpy(&mut stage, &ck, &d2, half_h);
        let a3 = rhs.eval(&p_mid, c1 + a2 * half_h, &stage, &mut d3);
        axpy(&mut stage, &ck, &d3, h);
        let a4 = rhs.eval(&p1, c1 + a3 * h, &stage, &mut d4);
        c1 += (a1 + (a2 + a3) * T::two() + a4) * sixth;
        for j in 0..n {
            ck[j] += (d1[j] + (d2[j] + d3[j]) * T::two() + d4[j]) * sixth;
        }
        if !(c1.re.is_finite() && c1.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "oracle amplitude",
                index: step + 1,
            });
        }
        let exc = c1.norm_sqr() + ck.iter().map(|c| c.norm_sqr()).sum::<T>();
        exc_drift = exc_drift.max((exc - exc0).abs());
        norm_drift = norm_drift.max((c0.norm_sqr() + exc - norm0).abs());
        out.push(c1);
    }
    Ok(OracleRun {
        c1: ComplexSignal::new(*grid, out)?,
        final_state: OneExcitationState { c0, c1, ck },
        max_norm_drift: norm_drift,
        max_excitation_drift: exc_drift,
    })
}

fn axpy<T: Real>(out: &mut [Complex<T>], x: &[Complex<T>], d: &[Complex<T>], a: T) {
    for ((o, x), d) in out.iter_mut().zip(x).zip(d) {
        *o = *x + *d * a;
    }
}
