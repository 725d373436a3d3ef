//! Time-convolutionless (time-local) master equation.
//!
//! The exact generator has rate `γ(t) = −2 Re(Ġ/G)` and shift
//! `S(t) = −2 Im(Ġ/G)`; it exists only while `G ≠ 0`. Perturbative rates
//! come either from the integral formulas at orders 2 and 4, or at any even
//! order from the series ratio `Ġ/G` of the expanded amplitude.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, RealSignal, TimeGrid};
use crate::reservoir::CorrelationFunction;
use crate::scalar::Real;
use crate::state::QubitState;
use crate::volterra::{convolve_trapezoid, cumulative_trapezoid};

/// Relative drop of `|G|` within one step that counts as hitting zero.
pub const DEFAULT_BREAKDOWN_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TclCoefficients<T> {
    pub gamma: RealSignal<T>,
    pub shift: RealSignal<T>,
    /// First grid index where the generator is undefined. Samples from
    /// here on are NaN.
    pub breakdown: Option<usize>,
}

impl<T: Real> TclCoefficients<T> {
    pub fn from_rates(gamma: RealSignal<T>, shift: RealSignal<T>) -> Result<Self> {
        gamma.grid().ensure_same(shift.grid())?;
        Ok(Self {
            gamma,
            shift,
            breakdown: None,
        })
    }

    pub fn constant(gamma: T, shift: T, grid: TimeGrid<T>) -> Self {
        Self {
            gamma: RealSignal::from_fn(grid, |_| gamma),
            shift: RealSignal::from_fn(grid, |_| shift),
            breakdown: None,
        }
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.gamma.grid()
    }

    /// Number of leading samples where the generator is defined.
    pub fn valid_len(&self) -> usize {
        self.breakdown.unwrap_or(self.grid().len())
    }

    pub fn breakdown_time(&self) -> Option<T> {
        self.breakdown.map(|i| self.grid().time(i))
    }
}

/// Exact TCL coefficients from the amplitude and its derivative.
///
/// Breakdown is flagged at the first index where `|G|` collapses below
/// `threshold` times its previous value, or where `G` turns by more than a
/// right angle within one step, which on a resolved grid only happens when
/// it passes through (or next to) zero between two samples. The threshold
/// is relative so that an amplitude decaying exponentially towards zero,
/// which keeps a well-defined generator, is never flagged.
pub fn tcl_coefficients<T: Real>(
    g: &ComplexSignal<T>,
    gdot: &ComplexSignal<T>,
    threshold: T,
) -> Result<TclCoefficients<T>> {
    g.grid().ensure_same(gdot.grid())?;
    let gv = g.values();
    if (gv[0] - Complex::new(T::one(), T::zero())).norm() > T::lit(1e-12) {
        return Err(Error::InvalidArgument(format!(
            "G(0) must be 1, got {}",
            gv[0]
        )));
    }
    let breakdown = (0..gv.len()).find(|&n| {
        let prev = if n == 0 { T::one() } else { gv[n - 1].norm() };
        gv[n].norm() < threshold * prev || (n > 0 && (gv[n] * gv[n - 1].conj()).re < T::zero())
    });
    let valid = breakdown.unwrap_or(gv.len());
    let (gamma, shift): (Vec<T>, Vec<T>) = (0..gv.len())
        .map(|n| {
            if n < valid {
                let r = gdot.get(n) / gv[n] * (-T::two());
                (r.re, r.im)
            } else {
                (T::nan(), T::nan())
            }
        })
        .unzip();
    Ok(TclCoefficients {
        gamma: RealSignal::new(*g.grid(), gamma)?,
        shift: RealSignal::new(*g.grid(), shift)?,
        breakdown,
    })
}

/// One perturbative contribution `γ^(order) + i S^(order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeRates<T> {
    pub order: usize,
    pub gamma: RealSignal<T>,
    pub shift: RealSignal<T>,
}

impl<T: Real> PerturbativeRates<T> {
    fn from_complex(order: usize, c: &ComplexSignal<T>) -> Self {
        Self {
            order,
            gamma: c.real(),
            shift: c.imag(),
        }
    }

    /// Sum of contributions as TCL coefficients.
    pub fn accumulate(terms: &[Self]) -> Result<TclCoefficients<T>> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("no rate terms to accumulate".into()))?;
        let grid = *first.gamma.grid();
        let mut gamma = vec![T::zero(); grid.len()];
        let mut shift = vec![T::zero(); grid.len()];
        for term in terms {
            term.gamma.grid().ensure_same(&grid)?;
            for (acc, v) in gamma.iter_mut().zip(term.gamma.values()) {
                *acc += *v;
            }
            for (acc, v) in shift.iter_mut().zip(term.shift.values()) {
                *acc += *v;
            }
        }
        TclCoefficients::from_rates(RealSignal::new(grid, gamma)?, RealSignal::new(grid, shift)?)
    }
}

/// Perturbative expansion of the amplitude in powers of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerms<T> {
    pub order: usize,
    /// `G^(2)`, `G^(4)`, …; `G^(0) ≡ 1` is implied.
    pub g_terms: Vec<ComplexSignal<T>>,
    pub gdot_terms: Vec<ComplexSignal<T>>,
    /// TCL rates order by order from the series of `Ġ/G`.
    pub rate_terms: Vec<PerturbativeRates<T>>,
}

impl<T: Real> ExpansionTerms<T> {
    /// `1 + G^(2) + … + G^(order)`.
    pub fn partial_sum(&self, order: usize) -> ComplexSignal<T> {
        let grid = *self.g_terms[0].grid();
        let mut acc = vec![Complex::new(T::one(), T::zero()); grid.len()];
        for term in self.g_terms.iter().take(order / 2) {
            for (a, v) in acc.iter_mut().zip(term.values()) {
                *a += *v;
            }
        }
        ComplexSignal::new(grid, acc).expect("same grid")
    }
}

fn check_even_order(order: usize) -> Result<()> {
    if order == 0 || order % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "expansion order must be even and positive, got {order}"
        )));
    }
    Ok(())
}

/// `G^(2n)(t) = −∫₀ᵗ dt₁ ∫₀^{t₁} dt₂ f(t₁−t₂) G^(2n−2)(t₂)` by nested
/// trapezoid, up to `max_order`.
pub fn expand_g<T: Real>(
    cf: &CorrelationFunction<T>,
    grid: &TimeGrid<T>,
    max_order: usize,
) -> Result<ExpansionTerms<T>> {
    check_even_order(max_order)?;
    let h = grid.step();
    let f = cf.sample(grid)?;
    let mut prev = vec![Complex::new(T::one(), T::zero()); grid.len()];
    let mut g_terms = Vec::new();
    let mut gdot_terms = Vec::new();
    for _ in 0..max_order / 2 {
        let gdot: Vec<Complex<T>> = convolve_trapezoid(f.values(), &prev, h)
            .into_iter()
            .map(|v| -v)
            .collect();
        let g = cumulative_trapezoid(&gdot, h);
        gdot_terms.push(ComplexSignal::new(*grid, gdot)?);
        g_terms.push(ComplexSignal::new(*grid, g.clone())?);
        prev = g;
    }
    // Ġ/G = Σ rₙ with rₙ = aₙ − Σ_{j=1}^{n−1} bⱼ r_{n−j}; γ + iS = −2 Σ rₙ.
    let m = max_order / 2;
    let mut ratio: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    for n in 0..m {
        let mut r = gdot_terms[n].values().to_vec();
        for j in 0..n {
            let b = g_terms[j].values();
            let prev_r = &ratio[n - 1 - j];
            for i in 0..r.len() {
                r[i] -= b[i] * prev_r[i];
            }
        }
        ratio.push(r);
    }
    let rate_terms = ratio
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let c = ComplexSignal::new(*grid, r.iter().map(|v| v * (-T::two())).collect())?;
            Ok(PerturbativeRates::from_complex(2 * (n + 1), &c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionTerms {
        order: max_order,
        g_terms,
        gdot_terms,
        rate_terms,
    })
}

/// Order-2 or order-4 contribution to the TCL rates from their integral
/// formulas:
///
/// `γ^(2) + iS^(2) = 2∫₀ᵗ f(t−t₁) dt₁`,
/// `γ^(4) + iS^(4) = 2∫₀ᵗdt₁∫₀^{t₁}dt₂∫₀^{t₂}dt₃ [f(t−t₂)f(t₁−t₃) + f(t−t₃)f(t₁−t₂)]`.
///
/// The triple integral is reduced with running integrals `F = ∫f`,
/// `𝔽 = ∫F` to
/// `2[∫₀ᵗ f(t−s)(𝔽(t) − 𝔽(s) − 𝔽(t−s)) ds + ∫₀ᵗ f(u)𝔽(u) du]`,
/// so each output point costs one trapezoidal sum.
pub fn tcl_rates_perturbative<T: Real>(
    cf: &CorrelationFunction<T>,
    grid: &TimeGrid<T>,
    order: usize,
) -> Result<PerturbativeRates<T>> {
    let h = grid.step();
    let f = cf.sample(grid)?;
    let fv = f.values();
    let two = T::two();
    let values: Vec<Complex<T>> = match order {
        2 => cumulative_trapezoid(fv, h)
            .into_iter()
            .map(|v| v * two)
            .collect(),
        4 => {
            let big_f = cumulative_trapezoid(fv, h);
            let ff = cumulative_trapezoid(&big_f, h);
            let weighted: Vec<Complex<T>> = fv.iter().zip(&ff).map(|(a, b)| a * b).collect();
            let tail = cumulative_trapezoid(&weighted, h);
            (0..grid.len())
                .map(|n| {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for s in 0..=n {
                        let w = if s == 0 || s == n {
                            T::half()
                        } else {
                            T::one()
                        };
                        acc += fv[n - s] * (ff[n] - ff[s] - ff[n - s]) * w;
                    }
                    if n == 0 {
                        acc = Complex::new(T::zero(), T::zero());
                    }
                    (acc * h + tail[n]) * two
                })
                .collect()
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "TCL rates are available at orders 2 and 4, got {order}"
            )));
        }
    };
    Ok(PerturbativeRates::from_complex(
        order,
        &ComplexSignal::new(*grid, values)?,
    ))
}

/// States from a TCL propagation, cut at breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct TclTrajectory<T> {
    pub states: Vec<QubitState<T>>,
    pub breakdown: Option<usize>,
}

/// `ρ₁₁(t) = ρ₁₁(0) e^{−∫γ}`, `ρ₁₀(t) = ρ₁₀(0) e^{−∫(γ + iS)/2}` over the
/// valid part of the coefficients.
///
/// Each step integrates the rate `r = (γ + iS)/2` with the trapezoid, or,
/// where `1/r` is locally closer to linear than `r` (approaching a zero of
/// `G`, where `r` has a simple pole), with the rule that is exact for linear
/// `1/r`. The choice compares second differences over the preceding points.
pub fn tcl_propagate<T: Real>(
    coeffs: &TclCoefficients<T>,
    rho0: &QubitState<T>,
    grid: &TimeGrid<T>,
) -> Result<TclTrajectory<T>> {
    coeffs.grid().ensure_same(grid)?;
    let valid = coeffs.valid_len();
    let r: Vec<Complex<T>> = coeffs.gamma.values()[..valid]
        .iter()
        .zip(&coeffs.shift.values()[..valid])
        .map(|(g, s)| Complex::new(*g, *s) * T::half())
        .collect();
    let h = grid.step();
    let mut integral = Complex::new(T::zero(), T::zero());
    let mut states = Vec::with_capacity(valid);
    for n in 0..valid {
        if n > 0 {
            integral += if n >= 2 && prefers_pole_rule(r[n - 2], r[n - 1], r[n]) {
                pole_step(r[n - 1], r[n], h)
            } else {
                (r[n - 1] + r[n]) * (h * T::half())
            };
        }
        states.push(QubitState::new(
            rho0.rho11 * (-integral.re * T::two()).exp(),
            rho0.rho10 * (-integral).exp(),
        ));
    }
    Ok(TclTrajectory {
        states,
        breakdown: coeffs.breakdown,
    })
}

fn prefers_pole_rule<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>) -> bool {
    let zero = T::zero();
    if a.norm() == zero || b.norm() == zero || c.norm() == zero {
        return false;
    }
    let linear = (a - b * T::two() + c).norm();
    let reciprocal = (a.inv() - b.inv() * T::two() + c.inv()).norm() * b.norm_sqr();
    reciprocal < linear
}

/// `∫ r` over one step of length `h` for `1/r` linear between `a` and `b`:
/// `h a ln(1+x)/x` with `x = a/b − 1`. Falls back to the trapezoid when an
/// endpoint vanishes or `1/r` would pass through zero.
fn pole_step<T: Real>(a: Complex<T>, b: Complex<T>, h: T) -> Complex<T> {
    let trapezoid = (a + b) * (h * T::half());
    if a.norm() == T::zero() || b.norm() == T::zero() {
        return trapezoid;
    }
    let x = a / b - T::one();
    if (x + T::one()).re <= T::zero() {
        return trapezoid;
    }
    let log_ratio = if x.norm() < T::lit(1e-4) {
        // ln(1+x)/x
        Complex::new(T::one(), T::zero()) - x * T::half() + x * x / T::lit(3.0)
            - x * x * x * T::lit(0.25)
    } else {
        (x + T::one()).ln() / x
    };
    a * log_ratio * h
}
