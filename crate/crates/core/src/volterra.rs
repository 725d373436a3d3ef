//! Product-integration solvers for convolution integrodifferential
//! equations `x′(t) = −∫₀ᵗ k(t−s) x(s) ds`, and the inverse problem of
//! recovering `k` from a known solution.
//!
//! Both directions use the trapezoidal rule on the uniform grid, for the
//! convolution integral and for the time stepping. The unknown enters the
//! newest convolution sample linearly, so each implicit step is a scalar
//! division. Global error is `O(h²)`, total cost `O(N²)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, RealSignal, Signal, TimeGrid};
use crate::reservoir::CorrelationFunction;
use crate::scalar::{Real, Value};

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid<T: Real, V: Value<T>>(values: &[V], h: T) -> V {
    match values.len() {
        0 | 1 => V::zero(),
        n => {
            let mut acc = (values[0] + values[n - 1]) * T::half();
            for v in &values[1..n - 1] {
                acc += *v;
            }
            acc * h
        }
    }
}

/// Running trapezoidal integral, `out[i] = ∫₀^{tᵢ}`.
pub fn cumulative_trapezoid<T: Real, V: Value<T>>(values: &[V], h: T) -> Vec<V> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = V::zero();
    out.push(acc);
    for w in values.windows(2) {
        acc += (w[0] + w[1]) * (h * T::half());
        out.push(acc);
    }
    out
}

/// Trapezoidal convolution `out[n] ≈ ∫₀^{tₙ} a(tₙ − s) b(s) ds`.
pub fn convolve_trapezoid<T: Real, V: Value<T>>(a: &[V], b: &[V], h: T) -> Vec<V> {
    debug_assert_eq!(a.len(), b.len());
    (0..a.len())
        .map(|n| {
            if n == 0 {
                return V::zero();
            }
            let mut acc = (a[n] * b[0] + a[0] * b[n]) * T::half();
            acc += interior_sum(a, b, n);
            acc * h
        })
        .collect()
}

/// `Σ_{j=1}^{n−1} a[n−j] b[j]`.
#[inline]
fn interior_sum<T: Real, V: Value<T>>(a: &[V], b: &[V], n: usize) -> V {
    let mut acc = V::zero();
    for (x, y) in a[1..n].iter().rev().zip(&b[1..n]) {
        acc += *x * *y;
    }
    acc
}

/// Convolution kernel sampled on the grid of the equation it drives.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionKernel<T, V> {
    samples: Signal<T, V>,
}

impl<T: Real, V: Value<T>> ConvolutionKernel<T, V> {
    pub fn new(samples: Signal<T, V>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &Signal<T, V> {
        &self.samples
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.samples.grid()
    }
}

/// Solution `x` and its right-hand side `x′ = −∫k x` at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution<T, V> {
    pub value: Signal<T, V>,
    pub derivative: Signal<T, V>,
}

/// Solves `x′(t) = −∫₀ᵗ k(t−s) x(s) ds`, `x(0) = x0`.
///
/// The returned derivative is the evaluated right-hand side, not a finite
/// difference of `x`.
pub fn propagate_scalar_volterra<T: Real, V: Value<T>>(
    kernel: &ConvolutionKernel<T, V>,
    x0: V,
    grid: &TimeGrid<T>,
) -> Result<VolterraSolution<T, V>> {
    kernel.grid().ensure_same(grid)?;
    let k = kernel.samples().values();
    if let Some(index) = kernel.samples().first_non_finite() {
        return Err(Error::NonFinite {
            what: "kernel sample",
            index,
        });
    }
    let h = grid.step();
    let half_h = h * T::half();
    let len = grid.len();
    let mut x = Vec::with_capacity(len);
    let mut dx = Vec::with_capacity(len);
    x.push(x0);
    dx.push(V::zero());
    // x_n (1 + h²k₀/4) = x_{n−1} + (h/2)(x′_{n−1} − I′_n), where I′_n is the
    // trapezoidal convolution without its x_n term.
    let denom = V::one() + k[0] * (half_h * half_h);
    for n in 1..len {
        let partial = (k[n] * x[0] * T::half() + interior_sum(k, &x, n)) * h;
        let xn = (x[n - 1] + (dx[n - 1] - partial) * half_h) / denom;
        if !xn.is_finite() {
            return Err(Error::NonFinite {
                what: "solution",
                index: n,
            });
        }
        x.push(xn);
        dx.push(-(partial + k[0] * xn * half_h));
    }
    Ok(VolterraSolution {
        value: Signal::new(*grid, x)?,
        derivative: Signal::new(*grid, dx)?,
    })
}

/// The amplitude `G(t)` and `Ġ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSolution<T> {
    pub g: ComplexSignal<T>,
    pub gdot: ComplexSignal<T>,
}

impl<T: Real> AmplitudeSolution<T> {
    /// `z = |G|²`.
    pub fn population(&self) -> RealSignal<T> {
        self.g.map(|g| g.norm_sqr())
    }

    /// `ż = 2 Re(G* Ġ)`.
    pub fn population_derivative(&self) -> RealSignal<T> {
        let values = self
            .g
            .values()
            .iter()
            .zip(self.gdot.values())
            .map(|(g, gd)| T::two() * (g.conj() * gd).re)
            .collect();
        RealSignal::new(*self.g.grid(), values).expect("same grid")
    }
}

/// Solves `Ġ = −∫₀ᵗ f(t−s) G(s) ds`, `G(0) = 1`.
pub fn solve_amplitude<T: Real>(
    cf: &CorrelationFunction<T>,
    grid: &TimeGrid<T>,
) -> Result<AmplitudeSolution<T>> {
    let f = cf.sample(grid)?;
    let sol = propagate_scalar_volterra(
        &ConvolutionKernel::new(f),
        Complex::new(T::one(), T::zero()),
        grid,
    )?;
    Ok(AmplitudeSolution {
        g: sol.value,
        gdot: sol.derivative,
    })
}

/// Values of `|z|` below this count as "near zero" for conditioning.
pub const CONDITIONING_THRESHOLD: f64 = 1e-6;

/// Consecutive near-zero points tolerated before a warning is attached.
pub const CONDITIONING_RUN: usize = 10;

/// `z` stayed near zero over a stretch of the grid; the recovered kernel
/// there is only as good as the relative accuracy of `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningWarning<T> {
    /// Start of the longest run of near-zero samples.
    pub first_index: usize,
    pub run_length: usize,
    pub min_value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deconvolution<T> {
    pub kernel: RealSignal<T>,
    pub warning: Option<ConditioningWarning<T>>,
}

/// Recovers `k` from `ż(t) = −∫₀ᵗ k(t−s) z(s) ds` with `z(0) = 1`.
///
/// The trapezoidal discretization is lower triangular in `k`; its diagonal
/// is `h z(0)/2`. `k(0)` cannot be resolved by the triangular solve and is
/// taken from `anchor` when given (`2 f₁(0)` for `z = |G|²`), otherwise
/// from a one-sided second difference of `z`, since `z″(0) = −k(0)`.
pub fn deconvolve_first_kind<T: Real>(
    z: &RealSignal<T>,
    zdot: &RealSignal<T>,
    grid: &TimeGrid<T>,
    anchor: Option<T>,
) -> Result<Deconvolution<T>> {
    z.grid().ensure_same(grid)?;
    zdot.grid().ensure_same(grid)?;
    let zv = z.values();
    let dz = zdot.values();
    if (zv[0] - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::InvalidArgument(format!(
            "deconvolution needs z(0) = 1, got {}",
            zv[0]
        )));
    }
    if let Some(index) = z.first_non_finite().or_else(|| zdot.first_non_finite()) {
        return Err(Error::NonFinite {
            what: "deconvolution input",
            index,
        });
    }
    let h = grid.step();
    let k0 = match anchor {
        Some(a) => a,
        None if grid.count() >= 3 => {
            // second-order one-sided z″(0)
            let d2 =
                (T::two() * zv[0] - T::lit(5.0) * zv[1] + T::lit(4.0) * zv[2] - zv[3]) / (h * h);
            -d2 / zv[0]
        }
        None => {
            return Err(Error::InvalidArgument(
                "need at least 3 intervals to anchor k(0)".into(),
            ));
        }
    };
    let mut k = Vec::with_capacity(grid.len());
    k.push(k0);
    let diag = zv[0] * T::half();
    for n in 1..grid.len() {
        let known = k[0] * zv[n] * T::half() + interior_sum(&k, zv, n);
        k.push(-(dz[n] / h + known) / diag);
    }
    if let Some(index) = k.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "deconvolved kernel",
            index,
        });
    }
    Ok(Deconvolution {
        kernel: RealSignal::new(*grid, k)?,
        warning: conditioning(zv),
    })
}

fn conditioning<T: Real>(z: &[T]) -> Option<ConditioningWarning<T>> {
    let threshold = T::lit(CONDITIONING_THRESHOLD);
    let mut best: Option<(usize, usize)> = None;
    let mut run_start = None;
    for (i, v) in z.iter().chain(std::iter::once(&T::infinity())).enumerate() {
        if v.abs() < threshold {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            if best.is_none_or(|(_, len)| i - s > len) {
                best = Some((s, i - s));
            }
        }
    }
    let (first_index, run_length) = best?;
    if run_length < CONDITIONING_RUN {
        return None;
    }
    let min_value = z.iter().map(|v| v.abs()).fold(T::infinity(), T::min);
    Some(ConditioningWarning {
        first_index,
        run_length,
        min_value,
    })
}
