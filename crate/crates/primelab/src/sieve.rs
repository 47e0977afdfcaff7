//! Smallest-prime-factor sieve and the arithmetic functions built on it:
//! μ, φ, τ, the von Mangoldt function Λ (plus its restriction Λ′ to primes),
//! the generalized Λ_k, the divisor-truncated Λ_{k,R}, and a batched
//! divisor-sieving kernel that evaluates Λ_{k,R}(∏(n+hᵢ))² over a whole range
//! at once.

use crate::error::{Error, Result};
use crate::gpy::PrimeTuple;
use crate::Real;

/// Default upper bound accepted by [`FactorSieve::build`]. A table of this
/// size occupies 400 MB (one `u32` per integer).
pub const DEFAULT_SIEVE_CEILING: u64 = 100_000_000;

/// Hard cap on batch lengths accepted by
/// [`FactorSieve::batch_polynomial_weights`].
const BATCH_LEN_CEILING: u64 = 50_000_000;

/// Truncation parameters (k, R) of the weight kernel Λ_{k,R}(n) =
/// Σ_{d|n, d≤R} μ(d) log^k(R/d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    k: u32,
    r: Real,
}

impl TruncationParams {
    pub fn new(k: u32, r: Real) -> Result<Self> {
        if k < 1 {
            return Err(Error::domain("truncation power k must be at least 1"));
        }
        if !r.is_finite() || r < 1.0 {
            return Err(Error::domain("truncation cutoff R must be finite and at least 1"));
        }
        Ok(TruncationParams { k, r })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> Real {
        self.r
    }
}

/// Immutable table of smallest prime factors over [2, X], together with the
/// list of primes up to X. Construction is linear in X; all queries are pure
/// and safe to share across threads.
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl FactorSieve {
    /// Builds the table for [2, limit] under the default memory ceiling.
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_ceiling(limit, DEFAULT_SIEVE_CEILING)
    }

    /// Builds the table with a caller-chosen ceiling (still capped at
    /// `u32::MAX`, the largest value the entry type can index).
    pub fn build_with_ceiling(limit: u64, ceiling: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::domain("sieve limit must be at least 2"));
        }
        if limit > ceiling || limit > u64::from(u32::MAX) {
            return Err(Error::budget(format!(
                "sieve limit {limit} exceeds ceiling {}",
                ceiling.min(u64::from(u32::MAX))
            )));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si {
                    break;
                }
                let ip = i as u64 * u64::from(p);
                if ip > limit {
                    break;
                }
                spf[ip as usize] = p;
            }
        }
        Ok(FactorSieve { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check_range(&self, n: u64) -> Result<()> {
        if n < 1 || n > self.limit {
            return Err(Error::domain(format!(
                "argument {n} outside sieve range [1, {}]",
                self.limit
            )));
        }
        Ok(())
    }

    /// Least prime divisor of n (n ≥ 2).
    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check_range(n)?;
        if n < 2 {
            return Err(Error::domain("1 has no prime factor"));
        }
        Ok(u64::from(self.spf[n as usize]))
    }

    /// True iff n is prime. Out-of-range or n < 2 simply yields false.
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && u64::from(self.spf[n as usize]) == n
    }

    /// Ascending primes up to the sieve limit.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().map(|&p| u64::from(p))
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    /// Prime factorization as ascending (p, exponent) pairs; n = 1 gives [].
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check_range(n)?;
        let mut m = n;
        let mut out = Vec::new();
        while m > 1 {
            let p = u64::from(self.spf[m as usize]);
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        Ok(out)
    }

    /// Möbius function μ(n).
    pub fn mu(&self, n: u64) -> Result<i32> {
        self.check_range(n)?;
        let mut m = n;
        let mut sign = 1;
        while m > 1 {
            let p = u64::from(self.spf[m as usize]);
            m /= p;
            if m.is_multiple_of(p) {
                return Ok(0);
            }
            sign = -sign;
        }
        Ok(sign)
    }

    /// Euler totient φ(n).
    pub fn phi(&self, n: u64) -> Result<u64> {
        self.check_range(n)?;
        let mut m = n;
        let mut out = 1u64;
        while m > 1 {
            let p = u64::from(self.spf[m as usize]);
            let mut pe = 1u64;
            while m.is_multiple_of(p) {
                m /= p;
                pe *= p;
            }
            out *= pe - pe / p;
        }
        Ok(out)
    }

    /// Divisor count τ(n).
    pub fn tau(&self, n: u64) -> Result<u64> {
        Ok(self
            .factorize(n)?
            .iter()
            .map(|&(_, e)| u64::from(e) + 1)
            .product())
    }

    /// Von Mangoldt function: log p when n = p^m, else 0. With
    /// `restricted`, the support shrinks to the primes themselves and the
    /// value becomes log n.
    pub fn von_mangoldt(&self, n: u64, restricted: bool) -> Result<Real> {
        self.check_range(n)?;
        if n == 1 {
            return Ok(0.0);
        }
        let p = u64::from(self.spf[n as usize]);
        if restricted {
            return Ok(if p == n { (n as Real).ln() } else { 0.0 });
        }
        let mut m = n;
        while m.is_multiple_of(p) {
            m /= p;
        }
        Ok(if m == 1 { (p as Real).ln() } else { 0.0 })
    }

    /// Distinct prime divisors of n, ascending.
    fn distinct_primes(&self, n: u64) -> Vec<u64> {
        let mut m = n;
        let mut out = Vec::new();
        while m > 1 {
            let p = u64::from(self.spf[m as usize]);
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        out
    }

    /// Generalized von Mangoldt function Λ_k(n) = Σ_{d|n} μ(d) log^k(n/d).
    /// Only squarefree d contribute, so the sum runs over the 2^ω(n) subsets
    /// of the distinct prime divisors. Λ₁ = Λ, and Λ_k vanishes whenever n
    /// has more than k distinct prime factors.
    pub fn generalized_von_mangoldt(&self, n: u64, k: u32) -> Result<Real> {
        self.check_range(n)?;
        if k < 1 {
            return Err(Error::domain("power k must be at least 1"));
        }
        let primes = self.distinct_primes(n);
        let nf = n as Real;
        let mut sum = 0.0;
        for mask in 0u32..(1 << primes.len()) {
            let mut d = 1u64;
            for (j, &p) in primes.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    d *= p;
                }
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (nf / d as Real).ln().powi(k as i32);
        }
        Ok(sum)
    }

    /// Truncated kernel Λ_{k,R}(n) = Σ_{d|n, d≤R} μ(d) log^k(R/d). As with
    /// Λ_k, only divisors of the squarefree kernel of n contribute.
    pub fn truncated_von_mangoldt(&self, n: u64, params: &TruncationParams) -> Result<Real> {
        self.check_range(n)?;
        let primes = self.distinct_primes(n);
        let mut sum = 0.0;
        for mask in 0u32..(1 << primes.len()) {
            let mut d = 1u64;
            for (j, &p) in primes.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    d *= p;
                }
            }
            if (d as Real) > params.r {
                continue;
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (params.r / d as Real).ln().powi(params.k as i32);
        }
        Ok(sum)
    }

    /// Sum of the normalized sieve weights λ_d = μ(d) log(R/d) / log R over
    /// the divisors d ≤ R of n. Squaring the result majorizes the prime
    /// indicator for n > R, since a prime keeps only the d = 1 term (λ₁ = 1).
    pub fn gy_weight_sum(&self, n: u64, r: Real) -> Result<Real> {
        self.check_range(n)?;
        if !r.is_finite() || r <= 1.0 {
            return Err(Error::domain("weight cutoff R must exceed 1"));
        }
        let primes = self.distinct_primes(n);
        let log_r = r.ln();
        let mut sum = 0.0;
        for mask in 0u32..(1 << primes.len()) {
            let mut d = 1u64;
            for (j, &p) in primes.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    d *= p;
                }
            }
            if (d as Real) > r {
                continue;
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (r / d as Real).ln() / log_r;
        }
        Ok(sum)
    }

    /// Evaluates Λ_{k,R}(F(n))² for every n in [start, end), where
    /// F(n) = ∏ᵢ (n + hᵢ) over the tuple offsets.
    ///
    /// Instead of factoring F(n) per n, the kernel sieves by divisors: every
    /// squarefree d ≤ R contributes μ(d) log^k(R/d) to exactly those n with
    /// n mod d in the root set of F mod d, which CRT assembles from the
    /// per-prime residues {−hᵢ mod p}. Repeated residues count once — the
    /// divisibility condition d | F(n) depends only on the residue set.
    /// Accumulation order (ascending d, ascending roots, ascending n) is
    /// fixed, so results are reproducible bit for bit.
    pub fn batch_polynomial_weights(
        &self,
        start: u64,
        end: u64,
        tuple: &PrimeTuple,
        params: &TruncationParams,
    ) -> Result<Vec<Real>> {
        if end <= start {
            return Err(Error::domain("empty batch range"));
        }
        if params.r > start as Real {
            return Err(Error::domain(
                "truncation cutoff exceeds range start (need R ≤ N)",
            ));
        }
        let len = end - start;
        if len > BATCH_LEN_CEILING {
            return Err(Error::budget(format!(
                "batch length {len} exceeds ceiling {BATCH_LEN_CEILING}"
            )));
        }
        let r_int = params.r.floor() as u64;
        if r_int > self.limit {
            return Err(Error::domain("truncation cutoff exceeds sieve limit"));
        }

        let mut acc = vec![0.0 as Real; len as usize];
        let mut roots: Vec<u64> = Vec::new();
        let mut next: Vec<u64> = Vec::new();
        for d in 1..=r_int {
            let mu_d = self.mu(d)?;
            if mu_d == 0 {
                continue;
            }
            let w = (mu_d as Real) * (params.r / d as Real).ln().powi(params.k as i32);

            // CRT assembly of the roots of F mod d from the per-prime sets.
            roots.clear();
            roots.push(0);
            let mut modulus = 1u64;
            for p in self.distinct_primes(d) {
                let mut residues: Vec<u64> = tuple
                    .offsets()
                    .iter()
                    .map(|&h| (p - h % p) % p)
                    .collect();
                residues.sort_unstable();
                residues.dedup();
                next.clear();
                let inv = mod_inverse(modulus % p, p);
                for &r0 in &roots {
                    for &s in &residues {
                        let diff = (s + p - r0 % p) % p;
                        let t = diff * inv % p;
                        next.push(r0 + modulus * t);
                    }
                }
                std::mem::swap(&mut roots, &mut next);
                modulus *= p;
            }
            roots.sort_unstable();

            for &root in &roots {
                let offset = (root + d - start % d) % d;
                let mut n = start + offset;
                while n < end {
                    acc[(n - start) as usize] += w;
                    n += d;
                }
            }
        }
        for v in acc.iter_mut() {
            *v *= *v;
        }
        Ok(acc)
    }
}

/// 2-adic valuation of n ≥ 1.
pub fn nu2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    n.trailing_zeros()
}

/// Inverse of a modulo prime p (a not divisible by p).
fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p); p prime and a ≢ 0 guarantee existence
    let (mut r0, mut r1) = (a as i128, p as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(p as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpy::PrimeTuple;

    fn close(a: Real, b: Real) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 as Real).max(b.abs())
    }

    #[test]
    fn spf_small_table() {
        let s = FactorSieve::build(10).unwrap();
        let expect = [2u64, 3, 2, 5, 2, 7, 2, 3, 2];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(s.smallest_prime_factor(i as u64 + 2).unwrap(), e);
        }
        let s2 = FactorSieve::build(2).unwrap();
        assert_eq!(s2.smallest_prime_factor(2).unwrap(), 2);
    }

    #[test]
    fn build_rejects_bad_limits() {
        assert!(matches!(FactorSieve::build(1), Err(Error::Domain(_))));
        assert!(matches!(
            FactorSieve::build_with_ceiling(100, 50),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn prime_count_to_a_million() {
        let s = FactorSieve::build(1_000_000).unwrap();
        assert_eq!(s.prime_count(), 78_498);
        // spot-check the table against trial division on a fixed sample
        for n in (1000u64..1_000_000).step_by(7919) {
            let p = s.smallest_prime_factor(n).unwrap();
            assert_eq!(n % p, 0);
            let mut q = 2;
            while n % q != 0 {
                q += 1;
            }
            assert_eq!(p, q);
        }
    }

    #[test]
    fn von_mangoldt_values() {
        let s = FactorSieve::build(100).unwrap();
        assert!(close(s.von_mangoldt(8, false).unwrap(), (2.0 as Real).ln()));
        assert_eq!(s.von_mangoldt(8, true).unwrap(), 0.0);
        assert_eq!(s.von_mangoldt(6, false).unwrap(), 0.0);
        assert_eq!(s.von_mangoldt(6, true).unwrap(), 0.0);
        assert!(close(s.von_mangoldt(97, true).unwrap(), (97.0 as Real).ln()));
        assert!(matches!(s.von_mangoldt(101, false), Err(Error::Domain(_))));
    }

    #[test]
    fn generalized_von_mangoldt_values() {
        let s = FactorSieve::build(100).unwrap();
        let ln2 = (2.0 as Real).ln();
        let ln3 = (3.0 as Real).ln();
        assert!(close(
            s.generalized_von_mangoldt(7, 1).unwrap(),
            (7.0 as Real).ln()
        ));
        assert!(close(s.generalized_von_mangoldt(6, 2).unwrap(), 2.0 * ln2 * ln3));
        assert!(close(s.generalized_von_mangoldt(30, 2).unwrap(), 0.0));
    }

    #[test]
    fn generalized_convolution_identity() {
        // Λ_k = log · Λ_{k−1} + Λ ∗ Λ_{k−1}
        let s = FactorSieve::build(2000).unwrap();
        for k in 2u32..=3 {
            for n in 1u64..=2000 {
                let lhs = s.generalized_von_mangoldt(n, k).unwrap();
                let mut conv = 0.0;
                for d in 1..=n {
                    if n % d == 0 {
                        conv += s.von_mangoldt(d, false).unwrap()
                            * s.generalized_von_mangoldt(n / d, k - 1).unwrap();
                    }
                }
                let rhs = (n as Real).ln() * s.generalized_von_mangoldt(n, k - 1).unwrap() + conv;
                assert!(close(lhs, rhs), "n={n} k={k}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn generalized_vanishes_beyond_k_primes() {
        let s = FactorSieve::build(100_000).unwrap();
        for k in 1u32..=3 {
            for n in (1u64..=100_000).step_by(37) {
                if s.distinct_primes(n).len() > k as usize {
                    assert!(
                        s.generalized_von_mangoldt(n, k).unwrap().abs() < 1e-7,
                        "Λ_{k}({n}) should vanish"
                    );
                }
            }
        }
    }

    #[test]
    fn truncated_values() {
        let s = FactorSieve::build(100).unwrap();
        let p21 = TruncationParams::new(2, 9.0).unwrap();
        assert!(close(
            s.truncated_von_mangoldt(1, &p21).unwrap(),
            (9.0 as Real).ln().powi(2)
        ));
        // prime above the cutoff: only d = 1 survives
        let p1 = TruncationParams::new(1, 10.0).unwrap();
        assert!(close(
            s.truncated_von_mangoldt(13, &p1).unwrap(),
            (10.0 as Real).ln()
        ));
        // n = 6, k = 1, R = 4: divisors 1, 2, 3 give
        // log 4 − log 2 − log(4/3) = log(3/2)
        let p14 = TruncationParams::new(1, 4.0).unwrap();
        assert!(close(
            s.truncated_von_mangoldt(6, &p14).unwrap(),
            (1.5 as Real).ln()
        ));
    }

    #[test]
    fn truncation_params_validate() {
        assert!(TruncationParams::new(0, 5.0).is_err());
        assert!(TruncationParams::new(1, 0.5).is_err());
    }

    /// Literal per-n oracle: trial-divide F(n) by every d ≤ R.
    fn weight_oracle(s: &FactorSieve, n: u64, tuple: &PrimeTuple, params: &TruncationParams) -> Real {
        let f: u128 = tuple.offsets().iter().map(|&h| (n + h) as u128).product();
        let mut sum = 0.0;
        let r_int = params.r.floor() as u64;
        for d in 1..=r_int {
            let mu_d = s.mu(d).unwrap();
            if mu_d != 0 && f.is_multiple_of(d as u128) {
                sum += mu_d as Real * (params.r / d as Real).ln().powi(params.k as i32);
            }
        }
        sum * sum
    }

    #[test]
    fn batch_weights_match_oracle() {
        let s = FactorSieve::build(10_000).unwrap();
        let tuple = PrimeTuple::new(vec![0]).unwrap();
        let params = TruncationParams::new(1, 2.0).unwrap();
        let vals = s.batch_polynomial_weights(3, 6, &tuple, &params).unwrap();
        let ln2sq = (2.0 as Real).ln().powi(2);
        assert!(close(vals[0], ln2sq));
        assert!(close(vals[1], ln2sq));
        assert!(close(vals[2], ln2sq));

        let tuple2 = PrimeTuple::new(vec![0, 2, 6]).unwrap();
        let params2 = TruncationParams::new(4, 25.0).unwrap();
        let vals2 = s.batch_polynomial_weights(100, 400, &tuple2, &params2).unwrap();
        for (i, &v) in vals2.iter().enumerate() {
            let n = 100 + i as u64;
            assert!(
                close(v, weight_oracle(&s, n, &tuple2, &params2)),
                "mismatch at n={n}"
            );
        }
    }

    #[test]
    fn batch_weights_r1_all_zero() {
        let s = FactorSieve::build(100).unwrap();
        let tuple = PrimeTuple::new(vec![0, 2]).unwrap();
        let params = TruncationParams::new(2, 1.0).unwrap();
        let vals = s.batch_polynomial_weights(10, 30, &tuple, &params).unwrap();
        assert!(vals.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_weights_reject_r_above_start() {
        let s = FactorSieve::build(100).unwrap();
        let tuple = PrimeTuple::new(vec![0]).unwrap();
        let params = TruncationParams::new(1, 50.0).unwrap();
        assert!(matches!(
            s.batch_polynomial_weights(10, 20, &tuple, &params),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn majorant_property_small() {
        let s = FactorSieve::build(2000).unwrap();
        let r = 30.0;
        for n in 31u64..=2000 {
            let w = s.gy_weight_sum(n, r).unwrap();
            let indicator = if s.is_prime(n) { 1.0 } else { 0.0 };
            assert!(
                w * w >= indicator - 1e-9,
                "majorant fails at n={n}: {w}"
            );
        }
    }

    #[test]
    fn misc_arithmetic_functions() {
        let s = FactorSieve::build(1000).unwrap();
        assert_eq!(s.mu(1).unwrap(), 1);
        assert_eq!(s.mu(6).unwrap(), 1);
        assert_eq!(s.mu(30).unwrap(), -1);
        assert_eq!(s.mu(12).unwrap(), 0);
        assert_eq!(s.phi(1).unwrap(), 1);
        assert_eq!(s.phi(12).unwrap(), 4);
        assert_eq!(s.phi(97).unwrap(), 96);
        assert_eq!(s.tau(12).unwrap(), 6);
        assert_eq!(s.tau(1).unwrap(), 1);
        assert_eq!(nu2(12), 2);
        assert_eq!(nu2(7), 0);
    }
}
