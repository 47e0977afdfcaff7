//! Numerical engines for experiments in additive prime number theory.
//!
//! The crate bundles four loosely coupled toolkits plus the arithmetic
//! plumbing they share:
//!
//! * [`sieve`] — a linear smallest-prime-factor sieve serving Λ, μ, φ, τ and
//!   the truncated divisor sums Λ_{k,R} used as sieve weights, including a
//!   batched divisor-sieving kernel for polynomial arguments.
//! * [`gpy`] — admissible prime tuples, the weighted densities Q₁, Q₂⁽ⁱ⁾ and
//!   their ratios ρ⁽ⁱ⁾ for the small-gaps experiment, the main-term double
//!   sum over odd moduli, a Brun–Titchmarsh-style majorant density, and the
//!   Bombieri–Vinogradov discrepancy sum.
//! * [`dickson`] — local factors β_p, archimedean densities β_∞, singular
//!   series, weighted counts of prime patterns, and the exact complexity
//!   classifier for systems of affine-linear forms.
//! * [`digits`] — binary digit sums, the Fourier spectrum of (−1)^{digit sum}
//!   on Z/2^kZ, its L¹ sums along progressions, the headline correlation of
//!   Λ with (−1)^{digit sum}, and the ω_{r,s} exponential-sum weights.
//! * [`bilinear`] — Vaughan's identity, Type I/II sum evaluators, van der
//!   Corput's inequality, Dirichlet approximation and an equidistribution
//!   lemma witness search.
//! * [`gowers`] — Gowers U^k norms (k ≤ 4), the U² inverse theorem, a
//!   generalized von Neumann check, W-tricked von Mangoldt sequences, and the
//!   Heisenberg orbit with fundamental-domain reduction.
//!
//! Numeric kernels that are scalar-generic take any [`Scalar`] (effectively
//! `f32` or `f64`); everything else uses the crate-wide [`Real`] alias.
//! Exact rational arithmetic (arbitrary precision) backs the affine-span
//! membership tests of the complexity classifier.

pub mod affine;
pub mod bilinear;
pub mod dickson;
pub mod digits;
mod error;
pub mod gowers;
pub mod gpy;
pub mod sieve;

pub use error::{Error, Result};
pub use num_complex::Complex;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating scalar usable by the generic numeric kernels. Implemented by
/// `f32` and `f64`; the FFT bound restricts it to machine floats on purpose.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + std::iter::Sum + std::fmt::Display + rustfft::FftNum
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + std::iter::Sum
        + std::fmt::Display
        + rustfft::FftNum
{
}

/// Default concrete scalar for the non-generic API surface.
pub type Real = f64;

/// Complex value over [`Real`].
pub type Cplx = Complex<Real>;

/// The standard additive character e(x) = exp(2πix).
pub fn e<S: Scalar>(x: S) -> Complex<S> {
    Complex::cis(S::TAU() * x)
}
