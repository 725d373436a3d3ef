//! Uniform time grids and sampled signals.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Real, Value};

/// Uniform grid `tᵢ = i·h`, `i = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    step: T,
    count: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(step: T, count: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one interval".into(),
            ));
        }
        Ok(Self { step, count })
    }

    /// Grid with step `h` covering `[0, t_end]`; the interval count is
    /// `t_end / h` rounded to the nearest integer.
    pub fn spanning(step: T, t_end: T) -> Result<Self> {
        if !(t_end > T::zero()) || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        if !(step > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let count = (t_end / step)
            .round()
            .to_usize()
            .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
        Self::new(step, count)
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    /// Number of intervals `N`.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    /// Number of sample points `N + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.count + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn time(&self, i: usize) -> T {
        T::from_usize(i).expect("index fits the scalar") * self.step
    }

    pub fn end(&self) -> T {
        self.time(self.count)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    /// Grid with the same step truncated to `count` intervals.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        Self::new(self.step, count.min(self.count))
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Uniformly sampled function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T, V> {
    grid: TimeGrid<T>,
    values: Vec<V>,
}

pub type RealSignal<T> = Signal<T, T>;
pub type ComplexSignal<T> = Signal<T, Complex<T>>;

impl<T: Real, V: Value<T>> Signal<T, V> {
    pub fn new(grid: TimeGrid<T>, values: Vec<V>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "signal has {} samples, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid<T>, mut f: impl FnMut(T) -> V) -> Self {
        let values = grid.times().map(&mut f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: TimeGrid<T>) -> Self {
        Self {
            grid,
            values: vec![V::zero(); grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn into_values(self) -> Vec<V> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> V {
        self.values[i]
    }

    pub fn map<W: Value<T>>(&self, f: impl FnMut(&V) -> W) -> Signal<T, W> {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn real(&self) -> RealSignal<T> {
        self.map(|v| v.real_part())
    }

    pub fn imag(&self) -> RealSignal<T> {
        self.map(|v| v.imag_part())
    }

    /// `max |a - b|` over all samples.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).modulus())
            .fold(T::zero(), T::max))
    }

    pub fn max_modulus(&self) -> T {
        self.values
            .iter()
            .map(|v| v.modulus())
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> RealSignal<T> {
    pub fn to_complex(&self) -> ComplexSignal<T> {
        self.map(|&v| Complex::new(v, T::zero()))
    }
}
