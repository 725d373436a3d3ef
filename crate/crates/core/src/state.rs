//! Qubit density matrices in the `{|1⟩, |0⟩}` basis.

use num_complex::Complex;

use crate::scalar::Real;

/// `ρ = [[ρ₁₁, ρ₁₀], [ρ₁₀*, 1 − ρ₁₁]]`.
///
/// Only the excited population and the coherence are stored, so trace and
/// Hermiticity hold structurally. Populations are never clamped: outputs of
/// truncated master equations may leave the physical region and that is
/// reported, not hidden. Use [`QubitState::is_physical`] to check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState<T> {
    pub rho11: T,
    pub rho10: Complex<T>,
}

impl<T: Real> QubitState<T> {
    pub fn new(rho11: T, rho10: Complex<T>) -> Self {
        Self { rho11, rho10 }
    }

    pub fn excited() -> Self {
        Self::new(T::one(), Complex::new(T::zero(), T::zero()))
    }

    pub fn ground() -> Self {
        Self::new(T::zero(), Complex::new(T::zero(), T::zero()))
    }

    /// Pure state `cos θ |1⟩ + e^{iφ} sin θ |0⟩`.
    pub fn pure(theta: T, phi: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * c, Complex::from_polar(c * s, -phi))
    }

    #[inline]
    pub fn rho00(&self) -> T {
        T::one() - self.rho11
    }

    #[inline]
    pub fn rho01(&self) -> Complex<T> {
        self.rho10.conj()
    }

    pub fn trace(&self) -> T {
        self.rho11 + self.rho00()
    }

    /// Smallest eigenvalue of the 2×2 density matrix.
    pub fn min_eigenvalue(&self) -> T {
        let diff = self.rho11 - self.rho00();
        let disc = (diff * diff + T::lit(4.0) * self.rho10.norm_sqr()).sqrt();
        (T::one() - disc) * T::half()
    }

    /// Positivity within `tol`: `0 ≤ ρ₁₁ ≤ 1` and `|ρ₁₀|² ≤ ρ₁₁ρ₀₀`.
    pub fn is_physical(&self, tol: T) -> bool {
        self.rho11 >= -tol && self.rho11 <= T::one() + tol && self.min_eigenvalue() >= -tol
    }

    /// Largest entrywise deviation over `ρ₁₁`, `ρ₀₀` and `ρ₁₀`.
    pub fn max_entry_diff(&self, other: &Self) -> T {
        let d11 = (self.rho11 - other.rho11).abs();
        let d00 = (self.rho00() - other.rho00()).abs();
        let d10 = (self.rho10 - other.rho10).norm();
        d11.max(d00).max(d10)
    }
}
