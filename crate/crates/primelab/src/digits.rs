//! Binary digit sums, the Fourier spectrum of n ↦ (−1)^{s(n)} on Z/2^kZ,
//! progression-restricted L¹ masses of that spectrum, the ω_{r,s} weights of
//! the Type-II analysis, and the Λ-twisted digit correlation.

use crate::error::{Error, Result};
use crate::sieve::FactorSieve;
use crate::{e, Real, Scalar};
use num_complex::Complex;
use num_traits::Zero;

/// Binary digit sum s(n), or the truncated sum s_k(n) over the low k bits
/// when `k` is supplied.
pub fn digit_sum(n: u64, k: Option<u32>) -> u32 {
    match k {
        None => n.count_ones(),
        Some(k) if k >= 64 => n.count_ones(),
        Some(k) => (n & ((1u64 << k) - 1)).count_ones(),
    }
}

/// (−1)^{s(n)}.
pub fn digit_sign(n: u64) -> i32 {
    if digit_sum(n, None).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// (−1)^{s_k(n)}.
pub fn digit_sign_truncated(n: u64, k: u32) -> i32 {
    if digit_sum(n, Some(k)).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Level-by-level evaluation of the closed product
    /// f̂_k(r) = ∏_{j=1}^{k} ½(1 − e(−2^{k−j} r/2^k)).
    ProductFormula,
    /// The defining expectation E_{x∈Z/2^kZ} (−1)^{s_k(x)} e(−rx/2^k) via a
    /// radix-2 fast transform.
    DirectTransform,
}

/// Fourier coefficients f̂_k(r) = E_x (−1)^{s_k(x)} e(−rx/2^k), r ∈ Z/2^kZ.
///
/// Invariants (verified in tests): |values[r]| ≤ 1 everywhere, values[0] = 0
/// (flipping the top bit pairs each x with a sign-reversed partner), and
/// conjugate symmetry |values[r]| = |values[2^k − r]|.
#[derive(Debug, Clone)]
pub struct DigitSpectrum<S: Scalar = Real> {
    k: u32,
    values: Vec<Complex<S>>,
    method: SpectrumMethod,
}

impl<S: Scalar> DigitSpectrum<S> {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn values(&self) -> &[Complex<S>] {
        &self.values
    }

    pub fn method(&self) -> SpectrumMethod {
        self.method
    }

    pub fn max_abs(&self) -> S {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn l1(&self) -> S {
        self.values.iter().map(|v| v.norm()).sum()
    }

    /// Σ_r |f̂_k(r)|², which Parseval pins to E|f_k|² = 1.
    pub fn parseval(&self) -> S {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// S(a, k) = Σ_{r ≡ a (mod 2^{k′})} |f̂_k(r)|.
    pub fn progression_l1(&self, k_prime: u32, a: u64) -> Result<S> {
        if k_prime > self.k {
            return Err(Error::domain("progression modulus exponent exceeds k"));
        }
        let step = 1usize << k_prime;
        if a >= step as u64 {
            return Err(Error::domain("residue a must lie below 2^k'"));
        }
        Ok(self
            .values
            .iter()
            .skip(a as usize)
            .step_by(step)
            .map(|v| v.norm())
            .sum())
    }
}

/// Computes the spectrum for 1 ≤ k ≤ 26 by the requested method.
pub fn spectrum<S: Scalar>(k: u32, method: SpectrumMethod) -> Result<DigitSpectrum<S>> {
    if !(1..=26).contains(&k) {
        return Err(Error::domain("bit count k must lie in [1, 26]"));
    }
    let values = match method {
        SpectrumMethod::ProductFormula => {
            // one level doubles the table: f̂_j(r) = ½(1 − e(−r/2^j)) f̂_{j−1}(r mod 2^{j−1});
            // the top half must be written first since it reads the old bottom half
            let mut v: Vec<Complex<S>> = vec![Complex::new(S::one(), S::zero())];
            for j in 1..=k {
                let len = 1usize << j;
                let half = len >> 1;
                v.resize(len, Complex::zero());
                let scale = S::from_usize(len).unwrap();
                let half_c = S::from_f64(0.5).unwrap();
                for r in (0..len).rev() {
                    let factor = (Complex::new(S::one(), S::zero())
                        - e(-S::from_usize(r).unwrap() / scale))
                        * half_c;
                    v[r] = factor * v[r & (half - 1)];
                }
            }
            v
        }
        SpectrumMethod::DirectTransform => {
            let len = 1usize << k;
            let mut buf: Vec<Complex<S>> = (0..len as u64)
                .map(|n| Complex::new(S::from_i32(digit_sign(n)).unwrap(), S::zero()))
                .collect();
            rustfft::FftPlanner::<S>::new()
                .plan_fft_forward(len)
                .process(&mut buf);
            let scale = S::from_usize(len).unwrap();
            for v in buf.iter_mut() {
                *v = v.unscale(scale);
            }
            buf
        }
    };
    Ok(DigitSpectrum { k, values, method })
}

/// (1/X) Σ_{n≤X} Λ(n)(−1)^{s(n)}, evaluated exactly over the prime powers.
pub fn prime_digit_correlation(sieve: &FactorSieve, x: u64) -> Result<Real> {
    if x < 1 || x > sieve.limit() {
        return Err(Error::domain("need 1 ≤ X ≤ sieve limit"));
    }
    let mut sum = 0.0 as Real;
    for p in sieve.primes().take_while(|&p| p <= x) {
        let w = (p as Real).ln();
        let mut pe = p;
        loop {
            sum += digit_sign(pe) as Real * w;
            match pe.checked_mul(p) {
                Some(next) if next <= x => pe = next,
                _ => break,
            }
        }
    }
    Ok(sum / x as Real)
}

/// Output of [`omega_weight`]: the exact double sum and the unnormalized
/// size bound 2^{−μ} + 2^{k−t−μ−ν} + 2^{t−k} it should track up to
/// logarithmic factors.
#[derive(Debug, Clone, Copy)]
pub struct OmegaWeight {
    pub value: Real,
    pub bound: Real,
}

/// ω_{r,s} = 2^{−μ−ν−ρ} Σ_{n∼2^ν} Σ_{1≤|h|≤2^ρ} min(2^μ, ‖(r(n+h)+sn)/2^k‖^{−1}),
/// with min(2^μ, ‖0‖^{−1}) = 2^μ. The companion bound uses t = ν₂((r+s) mod 2^k),
/// reading t = k when r + s ≡ 0.
pub fn omega_weight(mu: u32, nu: u32, rho: u32, k: u32, r: i64, s: i64) -> Result<OmegaWeight> {
    if !(1..=62).contains(&k) || nu < 1 {
        return Err(Error::domain("need 1 ≤ k ≤ 62 and ν ≥ 1"));
    }
    if nu + rho > 28 {
        return Err(Error::domain(
            "enumeration size 2^{ν+ρ} exceeds the 2^28 budget",
        ));
    }
    let modulus: i128 = 1i128 << k;
    let cap = (2.0 as Real).powi(mu as i32);
    let mod_f = modulus as Real;
    let mut total = 0.0 as Real;
    let h_top = 1i64 << rho;
    for n in (1i64 << (nu - 1))..(1i64 << nu) {
        for h in (-h_top..0).chain(1..=h_top) {
            let num = (i128::from(r) * i128::from(n + h) + i128::from(s) * i128::from(n))
                .rem_euclid(modulus);
            let dist = num.min(modulus - num);
            total += if dist == 0 {
                cap
            } else {
                cap.min(mod_f / dist as Real)
            };
        }
    }
    let value = total / (2.0 as Real).powi((mu + nu + rho) as i32);

    let t = {
        let rs = (i128::from(r) + i128::from(s)).rem_euclid(modulus);
        if rs == 0 {
            k
        } else {
            rs.trailing_zeros()
        }
    };
    let bound = (2.0 as Real).powi(-(mu as i32))
        + (2.0 as Real).powi(k as i32 - t as i32 - mu as i32 - nu as i32)
        + (2.0 as Real).powi(t as i32 - k as i32);
    Ok(OmegaWeight { value, bound })
}
