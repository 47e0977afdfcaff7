//! Gowers uniformity norms U² – U⁴ on ℤ/N, the U² inverse correlation, the
//! generalized von Neumann inequality for systems of affine-linear forms,
//! W-tricked von Mangoldt values, and orbits on the Heisenberg nilmanifold.

use crate::dickson::{complexity, Complexity, LinearFormSystem};
use crate::error::{Error, Result};
use crate::sieve::FactorSieve;
use crate::{e, Real, Scalar};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

fn slack<S: Scalar>() -> S {
    S::from_f64(1e-12).unwrap()
}

/// A function on ℤ/N stored as its value vector; `bounded` records whether
/// every value has modulus at most 1 (required by the correlation and von
/// Neumann statements).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFunction<S: Scalar = Real> {
    values: Vec<Complex<S>>,
    bounded: bool,
}

impl<S: Scalar> FiniteFunction<S> {
    pub fn new(values: Vec<Complex<S>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("function needs at least one value"));
        }
        let cap = S::one() + slack::<S>();
        let bounded = values.iter().all(|v| v.norm() <= cap);
        Ok(FiniteFunction { values, bounded })
    }

    /// Like `new` but rejects values of modulus above 1.
    pub fn bounded(values: Vec<Complex<S>>) -> Result<Self> {
        let f = Self::new(values)?;
        if !f.bounded {
            return Err(Error::domain("values must be bounded by 1"));
        }
        Ok(f)
    }

    pub fn constant(n: usize, value: Complex<S>) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// x ↦ e(rx/N).
    pub fn phase(n: usize, r: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("function needs at least one value"));
        }
        let m = n as u128;
        let r = r as u128 % m;
        let values = (0..n as u128)
            .map(|x| e(S::from_u128(r * x % m).unwrap() / S::from_usize(n).unwrap()))
            .collect();
        Self::new(values)
    }

    /// x ↦ e(x²/N).
    pub fn quadratic_phase(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("function needs at least one value"));
        }
        let m = n as u128;
        let values = (0..n as u128)
            .map(|x| e(S::from_u128(x * x % m).unwrap() / S::from_usize(n).unwrap()))
            .collect();
        Self::new(values)
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex<S>] {
        &self.values
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }
}

/// Normalized Fourier transform f̂(r) = (1/N) Σ_x f(x) e(−xr/N).
pub fn transform<S: Scalar>(f: &FiniteFunction<S>) -> FiniteFunction<S> {
    let mut buf = f.values.clone();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    let n = S::from_usize(buf.len()).unwrap();
    for v in &mut buf {
        *v /= n;
    }
    // |f̂| ≤ max |f|, so boundedness carries over
    FiniteFunction {
        values: buf,
        bounded: f.bounded,
    }
}

/// Σ_r |f̂(r)|⁴ computed through an unnormalized FFT of `values`.
fn l4_of_transform<S: Scalar>(values: &[Complex<S>], fft: &Arc<dyn Fft<S>>) -> S {
    let mut buf = values.to_vec();
    fft.process(&mut buf);
    let n = S::from_usize(values.len()).unwrap();
    let n4 = n * n * n * n;
    buf.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum::<S>() / n4
}

/// Multiplicative derivative Δ_h f(x) = f(x) conj(f(x+h)).
fn derivative<S: Scalar>(values: &[Complex<S>], h: usize) -> Vec<Complex<S>> {
    let n = values.len();
    (0..n).map(|x| values[x] * values[(x + h) % n].conj()).collect()
}

/// E_h ‖Δ_h f‖⁴_{U²}, the eighth power of the U³ norm.
fn u3_eighth<S: Scalar>(values: &[Complex<S>], fft: &Arc<dyn Fft<S>>) -> S {
    let n = values.len();
    let sum = (0..n)
        .map(|h| l4_of_transform(&derivative(values, h), fft))
        .sum::<S>();
    sum / S::from_usize(n).unwrap()
}

/// The Gowers norm ‖f‖_{U^k} for k ∈ {2, 3, 4}.
///
/// For k = 2 the norm is evaluated from its defining correlation average up
/// to N = 4096 and through the Fourier ℓ⁴ identity up to N = 2²⁰; U³ is
/// limited to N ≤ 512 and U⁴ to N ≤ 128.
pub fn u_norm<S: Scalar>(f: &FiniteFunction<S>, k: u32) -> Result<S> {
    let n = f.values.len();
    let nf = S::from_usize(n).unwrap();
    match k {
        2 => {
            if n <= 4096 {
                // (E_h |E_x f(x) conj f(x+h)|²)^{1/4}
                let mut total = S::zero();
                for h in 0..n {
                    let mut c = Complex::new(S::zero(), S::zero());
                    for x in 0..n {
                        c += f.values[x] * f.values[(x + h) % n].conj();
                    }
                    total += (c / nf).norm_sqr();
                }
                Ok((total / nf).powf(S::from_f64(0.25).unwrap()))
            } else if n <= 1 << 20 {
                let fft = FftPlanner::new().plan_fft_forward(n);
                Ok(l4_of_transform(&f.values, &fft).powf(S::from_f64(0.25).unwrap()))
            } else {
                Err(Error::domain("U² norm limited to N ≤ 2^20"))
            }
        }
        3 => {
            if n > 512 {
                return Err(Error::domain("U³ norm limited to N ≤ 512"));
            }
            let fft = FftPlanner::new().plan_fft_forward(n);
            Ok(u3_eighth(&f.values, &fft).powf(S::from_f64(0.125).unwrap()))
        }
        4 => {
            if n > 128 {
                return Err(Error::domain("U⁴ norm limited to N ≤ 128"));
            }
            let fft = FftPlanner::new().plan_fft_forward(n);
            let sum = (0..n)
                .map(|h| u3_eighth(&derivative(&f.values, h), &fft))
                .sum::<S>();
            Ok((sum / nf).powf(S::from_f64(0.0625).unwrap()))
        }
        _ => Err(Error::domain("only U², U³ and U⁴ are supported")),
    }
}

/// The frequency correlating best with a bounded f: returns (r, |f̂(r)|) with
/// the largest coefficient modulus, ties resolved toward the smallest r.
/// ‖f‖_{U²} ≥ δ guarantees the returned modulus is at least δ².
pub fn u2_inverse<S: Scalar>(f: &FiniteFunction<S>) -> Result<(u64, S)> {
    if !f.bounded {
        return Err(Error::domain("inverse correlation needs |f| ≤ 1"));
    }
    if f.values.len() > 1 << 20 {
        return Err(Error::domain("inverse search limited to N ≤ 2^20"));
    }
    let hat = transform(f);
    let mut best = (0u64, S::zero());
    for (r, v) in hat.values.iter().enumerate() {
        let m = v.norm();
        if m > best.1 {
            best = (r as u64, m);
        }
    }
    Ok(best)
}

/// Both sides of the generalized von Neumann inequality
/// |E_{x∈(ℤ/N)^d} ∏_i f_i(ψ_i(x))| ≤ min_i ‖f_i‖_{U^{s+1}}.
#[derive(Debug, Clone, Copy)]
pub struct GvnCheck<S: Scalar = Real> {
    pub lhs: S,
    pub rhs: S,
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Evaluates the inequality for 1-bounded functions on ℤ/N (N prime) against
/// a form system of complexity at most s, erroring if it fails numerically.
pub fn gvn_check<S: Scalar>(
    system: &LinearFormSystem,
    fs: &[FiniteFunction<S>],
    s: u32,
) -> Result<GvnCheck<S>> {
    let t = system.num_forms();
    let d = system.num_vars();
    if fs.len() != t {
        return Err(Error::domain("need one function per form"));
    }
    let n = fs[0].modulus();
    if fs.iter().any(|f| f.modulus() != n) {
        return Err(Error::domain("functions must share one modulus"));
    }
    if fs.iter().any(|f| !f.is_bounded()) {
        return Err(Error::domain("functions must be bounded by 1"));
    }
    if !is_prime_u64(n as u64) {
        return Err(Error::domain("modulus must be prime"));
    }
    if !(1..=3).contains(&s) {
        return Err(Error::domain("complexity parameter s must lie in {1, 2, 3}"));
    }
    match complexity(system)? {
        Complexity::Infinite => {
            return Err(Error::domain("system has infinite complexity"))
        }
        Complexity::Finite(c) => {
            if c > s {
                return Err(Error::domain(format!(
                    "system complexity {c} exceeds s = {s}"
                )));
            }
        }
    }
    // distinct forms must stay non-parallel after reduction mod N
    let nn = n as i128;
    let reduced: Vec<Vec<i128>> = (0..t)
        .map(|i| {
            system
                .coefficients(i)
                .iter()
                .map(|&c| (c as i128).rem_euclid(nn))
                .collect()
        })
        .collect();
    for i in 0..t {
        if reduced[i].iter().all(|&c| c == 0) {
            return Err(Error::domain("a form vanishes modulo N"));
        }
        for j in 0..i {
            let parallel = (0..d).all(|u| {
                (0..d).all(|v| {
                    (reduced[i][u] * reduced[j][v] - reduced[i][v] * reduced[j][u]) % nn
                        == 0
                })
            });
            if parallel {
                return Err(Error::domain("two forms become parallel modulo N"));
            }
        }
    }
    let points = (n as u128).checked_pow(d as u32).filter(|&p| p <= 100_000_000);
    let points = points.ok_or_else(|| Error::budget("N^d exceeds 10^8 points"))? as u64;

    let coeff: Vec<Vec<u64>> = reduced
        .iter()
        .map(|row| row.iter().map(|&c| c as u64).collect())
        .collect();
    // when axis c carries, every lower axis wraps N−1 → 0, which shifts ψ_i
    // by coeff[c] + Σ_{c′>c} coeff[c′] mod N
    let delta: Vec<Vec<u64>> = (0..d)
        .map(|c| {
            (0..t)
                .map(|i| coeff[i][c..].iter().fold(0u64, |a, &b| (a + b) % n as u64))
                .collect()
        })
        .collect();
    let mut psi: Vec<u64> = (0..t)
        .map(|i| (system.offset(i) as i128).rem_euclid(nn) as u64)
        .collect();
    let mut x = vec![0u64; d];
    let mut acc = Complex::new(S::zero(), S::zero());
    'outer: loop {
        let mut prod = Complex::new(S::one(), S::zero());
        for (i, f) in fs.iter().enumerate() {
            prod *= f.values[psi[i] as usize];
        }
        acc += prod;
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            if x[axis] + 1 < n as u64 {
                x[axis] += 1;
                for lower in x.iter_mut().skip(axis + 1) {
                    *lower = 0;
                }
                for (value, step) in psi.iter_mut().zip(&delta[axis]) {
                    *value = (*value + step) % n as u64;
                }
                break;
            }
        }
    }
    let lhs = (acc / S::from_u64(points).unwrap()).norm();
    let mut rhs = S::infinity();
    for f in fs {
        let v = u_norm(f, s + 1)?;
        if v < rhs {
            rhs = v;
        }
    }
    if lhs > rhs + S::from_f64(1e-9).unwrap() {
        return Err(Error::inconsistency(format!(
            "product average {lhs} exceeds the norm bound {rhs}"
        )));
    }
    Ok(GvnCheck { lhs, rhs })
}

/// (φ(W)/W) Λ(Wn + b) for n = 1..=M together with its mean, which tends to 1
/// when gcd(b, W) = 1.
#[derive(Debug, Clone)]
pub struct WTrickedLambda {
    pub values: Vec<Real>,
    pub mean: Real,
}

pub fn w_tricked_lambda(
    sieve: &FactorSieve,
    b: u64,
    w: u64,
    m: u64,
) -> Result<WTrickedLambda> {
    if w < 1 || m < 1 {
        return Err(Error::domain("need W ≥ 1 and M ≥ 1"));
    }
    if num_integer::gcd(b, w) != 1 {
        return Err(Error::domain("need gcd(b, W) = 1"));
    }
    let top = w
        .checked_mul(m)
        .and_then(|v| v.checked_add(b))
        .ok_or_else(|| Error::domain("WM + b overflows"))?;
    if top > sieve.limit() {
        return Err(Error::domain("need WM + b within the sieve limit"));
    }
    let scale = sieve.phi(w)? as Real / w as Real;
    let mut values = Vec::with_capacity(m as usize);
    for n in 1..=m {
        values.push(scale * sieve.von_mangoldt(w * n + b, false)?);
    }
    let mean = values.iter().sum::<Real>() / m as Real;
    Ok(WTrickedLambda { values, mean })
}

/// Heisenberg group law on coordinates (a, b, c) ↔ upper unitriangular
/// [[1, a, b], [0, 1, c], [0, 0, 1]].
pub fn heisenberg_mul(g: [Real; 3], h: [Real; 3]) -> [Real; 3] {
    [g[0] + h[0], g[1] + h[1] + g[0] * h[2], g[2] + h[2]]
}

/// The n-th orbit point g^n, its representative in the fundamental cube
/// [−1/2, 1/2)³, and the integer lattice element carrying one to the other.
#[derive(Debug, Clone, Copy)]
pub struct HeisenbergOrbit {
    pub raw: [Real; 3],
    pub reduced: [Real; 3],
    pub lattice: [i64; 3],
}

/// g^n for g = (α, β, γ) in closed form: (nα, nβ + C(n,2)αγ, nγ), reduced by
/// right multiplication with an integer group element.
pub fn heisenberg_orbit(alpha: Real, beta: Real, gamma: Real, n: u64) -> Result<HeisenbergOrbit> {
    let k2 = (n as u128 * n.saturating_sub(1) as u128 / 2) as Real;
    let nf = n as Real;
    let raw = [
        nf * alpha,
        nf * beta + k2 * alpha * gamma,
        nf * gamma,
    ];
    if raw.iter().any(|v| !v.is_finite() || v.abs() > 1e15) {
        return Err(Error::domain("orbit coordinate exceeds the reducible range"));
    }
    let j = -(raw[2] + 0.5).floor();
    let m = -(raw[0] + 0.5).floor();
    let l = -(raw[1] + raw[0] * j + 0.5).floor();
    let reduced = [raw[0] + m, raw[1] + l + raw[0] * j, raw[2] + j];
    Ok(HeisenbergOrbit {
        raw,
        reduced,
        lattice: [m as i64, l as i64, j as i64],
    })
}
