//! Exact and perturbative reduced dynamics of a qubit decaying into a
//! bosonic reservoir in the zero/one-excitation sector.
//!
//! The amplitude `G(t)` of the excited state obeys
//! `dG/dt = -∫₀ᵗ f(t-s) G(s) ds` with `G(0) = 1`, where `f` is the reservoir
//! two-point correlation function. Everything else is derived from it:
//!
//! * [`map`]: the exact dynamical map, its Choi matrix and the Markovian
//!   semigroup baseline,
//! * [`reservoir`]: correlation functions (Lorentzian, discrete modes,
//!   tabulated) and spectral sampling,
//! * [`volterra`]: product-integration solvers and first-kind deconvolution,
//! * [`tcl`]: the time-local (TCL) generator, its breakdown, and the
//!   order-2/4 expansions,
//! * [`nz`]: the Nakajima-Zwanzig memory kernel, its expansions,
//!   integrodifferential propagation and the phenomenological ansatz,
//! * [`oracle`]: brute-force Schrödinger integration over a finite mode set.
//!
//! All numerics are generic over the scalar type (see [`Real`]); the `*64`
//! aliases below fix it to `f64`, which is what every tolerance in the test
//! suites is calibrated for.

// `!(x > 0)` is used deliberately so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod map;
pub mod nz;
pub mod oracle;
pub mod reservoir;
pub mod scalar;
pub mod state;
pub mod tcl;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::{ComplexSignal, RealSignal, Signal, TimeGrid};
pub use map::{
    apply_map, choi_eigenvalues, choi_matrix, markov_propagate, min_choi_eigenvalue, ChoiMatrix,
    DynamicalMapPoint, MarkovParams,
};
pub use nz::{
    ansatz_propagate, check_kernel_identity, default_ansatz_kernel, k1_fourth_order,
    nz_kernel_exact, nz_kernel_lorentzian, nz_kernel_perturbative, nz_propagate, KernelProvenance,
    MemoryKernel, NzTrajectory,
};
pub use oracle::{evolve_one_excitation, OneExcitationState, OracleRun, MAX_PHASE_PER_STEP};
pub use reservoir::{
    sample_lorentzian_modes, CorrelationFunction, LorentzianParams, Mode, ModeSet,
};
pub use scalar::{Real, Value};
pub use state::QubitState;
pub use tcl::{
    expand_g, tcl_coefficients, tcl_propagate, tcl_rates_perturbative, ExpansionTerms,
    PerturbativeRates, TclCoefficients, TclTrajectory, DEFAULT_BREAKDOWN_THRESHOLD,
};
pub use volterra::{
    deconvolve_first_kind, propagate_scalar_volterra, solve_amplitude, AmplitudeSolution,
    ConditioningWarning, ConvolutionKernel, Deconvolution, VolterraSolution,
};

pub use num_complex::Complex;

/// `f64` complex number.
pub type C64 = Complex<f64>;

pub type TimeGrid64 = TimeGrid<f64>;
pub type RealSignal64 = RealSignal<f64>;
pub type ComplexSignal64 = ComplexSignal<f64>;
pub type QubitState64 = QubitState<f64>;
pub type DynamicalMapPoint64 = DynamicalMapPoint<f64>;
pub type MarkovParams64 = MarkovParams<f64>;
pub type LorentzianParams64 = LorentzianParams<f64>;
pub type ModeSet64 = ModeSet<f64>;
pub type CorrelationFunction64 = CorrelationFunction<f64>;
pub type AmplitudeSolution64 = AmplitudeSolution<f64>;
pub type TclCoefficients64 = TclCoefficients<f64>;
pub type MemoryKernel64 = MemoryKernel<f64>;
