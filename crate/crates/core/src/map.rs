//! The exact dynamical map, its Choi matrix, and the Markovian semigroup.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::reservoir::CorrelationFunction;
use crate::scalar::Real;
use crate::state::QubitState;
use crate::volterra::trapezoid;

/// The value `G(t)` of the amplitude at one instant; it fixes `Φ(t)`
/// completely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalMapPoint<T> {
    pub g: Complex<T>,
}

impl<T: Real> DynamicalMapPoint<T> {
    pub fn new(g: Complex<T>) -> Self {
        Self { g }
    }

    pub fn real(g: T) -> Self {
        Self {
            g: Complex::new(g, T::zero()),
        }
    }

    pub fn identity() -> Self {
        Self::real(T::one())
    }
}

/// `ρ₁₁ ↦ |G|²ρ₁₁`, `ρ₁₀ ↦ Gρ₁₀`; the ground population absorbs the rest.
pub fn apply_map<T: Real>(point: DynamicalMapPoint<T>, rho0: &QubitState<T>) -> QubitState<T> {
    QubitState::new(point.g.norm_sqr() * rho0.rho11, point.g * rho0.rho10)
}

/// Unnormalized Choi matrix `Σᵢⱼ Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, trace 2.
///
/// Basis index 0 is `|1⟩`, index 1 is `|0⟩`; row `2a + i` pairs output
/// index `a` with input index `i`.
pub type ChoiMatrix<T> = [[Complex<T>; 4]; 4];

pub fn choi_matrix<T: Real>(point: DynamicalMapPoint<T>) -> ChoiMatrix<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let p = point.g.norm_sqr();
    // Φ(|i⟩⟨j|) as a 2×2 matrix in the output basis.
    let image = |i: usize, j: usize| -> [[Complex<T>; 2]; 2] {
        match (i, j) {
            (0, 0) => [
                [Complex::from(p), zero],
                [zero, Complex::from(T::one() - p)],
            ],
            (1, 1) => [[zero, zero], [zero, Complex::from(T::one())]],
            (0, 1) => [[zero, point.g], [zero, zero]],
            _ => [[zero, zero], [point.g.conj(), zero]],
        }
    };
    let mut c = [[zero; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let block = image(i, j);
            for a in 0..2 {
                for b in 0..2 {
                    c[2 * a + i][2 * b + j] = block[a][b];
                }
            }
        }
    }
    c
}

/// Eigenvalues of the Choi matrix in ascending order.
///
/// The matrix splits into the blocks `{|1,0⟩}`, `{|0,1⟩}` and the pair
/// `{|1,1⟩, |0,0⟩}`; the pair's determinant `|G|² − |G|²` vanishes exactly,
/// so one eigenvalue there is zero and the other is the trace `1 + |G|²`.
pub fn choi_eigenvalues<T: Real>(point: DynamicalMapPoint<T>) -> [T; 4] {
    let p = point.g.norm_sqr();
    let mut out = [T::zero(), T::zero(), T::one() - p, T::one() + p];
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    out
}

/// Complete-positivity monitor: negative iff `Φ` is not CP.
pub fn min_choi_eigenvalue<T: Real>(point: DynamicalMapPoint<T>) -> T {
    choi_eigenvalues(point)[0]
}

/// Rates of the Markovian (Lindblad) generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams<T> {
    pub gamma: T,
    pub shift: T,
}

impl<T: Real> MarkovParams<T> {
    pub fn new(gamma: T, shift: T) -> Result<Self> {
        if !(gamma >= T::zero()) || !gamma.is_finite() || !shift.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Markov rates need gamma >= 0 and finite shift, got ({gamma}, {shift})"
            )));
        }
        Ok(Self { gamma, shift })
    }

    /// Born-Markov limit `γ_M + iS_M = 2∫₀^T f(τ)dτ` by trapezoid over the
    /// grid, i.e. the late-time value of the order-2 TCL rates.
    pub fn from_correlation(cf: &CorrelationFunction<T>, grid: &TimeGrid<T>) -> Result<Self> {
        let f = cf.sample(grid)?;
        let integral = trapezoid(f.values(), grid.step()) * T::two();
        // f₁ of positive type gives γ_M ≥ 0; clip rounding noise only.
        Self::new(integral.re.max(T::zero()), integral.im)
    }
}

/// Closed-form semigroup solution in the interaction picture.
pub fn markov_propagate<T: Real>(
    params: &MarkovParams<T>,
    rho0: &QubitState<T>,
    grid: &TimeGrid<T>,
) -> Vec<QubitState<T>> {
    let rate = Complex::new(params.gamma, params.shift) * T::half();
    grid.times()
        .map(|t| {
            QubitState::new(
                (-params.gamma * t).exp() * rho0.rho11,
                (-rate * t).exp() * rho0.rho10,
            )
        })
        .collect()
}
