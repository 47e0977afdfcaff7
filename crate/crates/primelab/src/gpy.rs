//! Sieve-weight density experiments: admissible tuples, the weighted prime
//! densities ρ⁽ⁱ⁾ attached to the weights μ_n = Λ_{k+l,R}(∏(n+hᵢ))², the
//! truncated main-term double sum with its asymptotic normalization, a
//! Bombieri–Vinogradov-style discrepancy sum, and a majorant density for
//! primes in short windows.

use crate::error::{Error, Result};
use crate::sieve::{FactorSieve, TruncationParams};
use crate::Real;
use num_integer::Integer;

/// Euler products over odd primes are truncated here; the neglected tail is
/// below 1e-9.
pub const EULER_PRODUCT_CUTOFF: u64 = 100_000;

/// Sorted tuple of distinct non-negative offsets h₁ < … < h_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTuple {
    offsets: Vec<u64>,
}

impl PrimeTuple {
    pub fn new(mut offsets: Vec<u64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::domain("tuple must contain at least one offset"));
        }
        offsets.sort_unstable();
        if offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("tuple offsets must be distinct"));
        }
        Ok(PrimeTuple { offsets })
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_offset(&self) -> u64 {
        *self.offsets.last().unwrap()
    }

    pub fn diameter(&self) -> u64 {
        self.offsets.last().unwrap() - self.offsets[0]
    }

    /// True iff for every prime p the offsets miss at least one residue
    /// class mod p. Only p ≤ k can be covered by k offsets, so the check is
    /// finite.
    pub fn is_admissible(&self) -> bool {
        let k = self.offsets.len() as u64;
        let mut seen = Vec::new();
        for p in 2..=k {
            if (2..p).any(|d| p % d == 0) {
                continue;
            }
            seen.clear();
            seen.resize(p as usize, false);
            for &h in &self.offsets {
                seen[(h % p) as usize] = true;
            }
            if seen.iter().all(|&b| b) {
                return false;
            }
        }
        true
    }
}

/// See [`PrimeTuple::is_admissible`].
pub fn is_admissible(tuple: &PrimeTuple) -> bool {
    tuple.is_admissible()
}

/// Parameters of a density run: the range [N, 2N), the tuple size k, the
/// extra weight power l, and the cutoff exponent γ with R = ⌊N^γ⌋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpyConfig {
    n: u64,
    k: u32,
    l: u32,
    gamma: Real,
}

impl GpyConfig {
    pub fn new(n: u64, k: u32, l: u32, gamma: Real) -> Result<Self> {
        if k < 1 {
            return Err(Error::domain("tuple size k must be at least 1"));
        }
        if n < 2 {
            return Err(Error::domain("range start N must be at least 2"));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::domain("cutoff exponent gamma must lie in (0, 1/2)"));
        }
        Ok(GpyConfig { n, k, l, gamma })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn gamma(&self) -> Real {
        self.gamma
    }

    /// Integer divisor cutoff R = ⌊N^γ⌋.
    pub fn r_cutoff(&self) -> u64 {
        (self.n as Real).powf(self.gamma).floor() as u64
    }
}

/// Output of [`gpy_densities`]: Q₁ is the mean weight, Q₂⁽ⁱ⁾ the weighted
/// density of primes at offset hᵢ, and ρ⁽ⁱ⁾ = Q₂⁽ⁱ⁾ / Q₁.
#[derive(Debug, Clone)]
pub struct GpyDensities {
    pub q1: Real,
    pub q2: Vec<Real>,
    pub rho: Vec<Real>,
}

/// Computes Q₁ = E_{N≤n<2N} μ_n and Q₂⁽ⁱ⁾ = (1/log 3N) E μ_n Λ′(n+hᵢ),
/// where μ_n = Λ_{k+l,R}(∏(n+hᵢ))² and Λ′ is supported on primes only.
pub fn gpy_densities(
    sieve: &FactorSieve,
    config: &GpyConfig,
    tuple: &PrimeTuple,
) -> Result<GpyDensities> {
    if tuple.len() != config.k as usize {
        return Err(Error::domain(format!(
            "config k = {} does not match tuple size {}",
            config.k,
            tuple.len()
        )));
    }
    if !tuple.is_admissible() {
        return Err(Error::domain("tuple is not admissible"));
    }
    let n = config.n;
    if 2 * n + tuple.max_offset() > sieve.limit() {
        return Err(Error::domain(
            "sieve limit too small: need 2N + max offset within range",
        ));
    }
    let r = config.r_cutoff();
    let params = TruncationParams::new(config.k + config.l, r as Real)?;
    let weights = sieve.batch_polynomial_weights(n, 2 * n, tuple, &params)?;

    let count = weights.len() as Real;
    let q1 = weights.iter().sum::<Real>() / count;
    if q1 <= 0.0 {
        return Err(Error::degenerate(
            "mean weight Q1 vanished (R or N too small)",
        ));
    }
    let log3n = (3.0 * n as Real).ln();
    let mut q2 = Vec::with_capacity(tuple.len());
    for &h in tuple.offsets() {
        let mut s = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            let m = n + i as u64 + h;
            if sieve.is_prime(m) {
                s += w * (m as Real).ln();
            }
        }
        q2.push(s / count / log3n);
    }
    let rho = q2.iter().map(|&q| q / q1).collect();
    Ok(GpyDensities { q1, q2, rho })
}

/// First-order prediction for each ρ⁽ⁱ⁾:
/// (2(2l+1)) / ((l+1)(k+2l+1)) · γ.
///
/// The per-offset constant follows the l = 0 specialization 2/(k+1) and the
/// large-k limit 4 log R/(k log N); summing over the k offsets recovers the
/// aggregate with the extra factor k.
pub fn rho_predicted(config: &GpyConfig) -> Real {
    let k = config.k as Real;
    let l = config.l as Real;
    2.0 * (2.0 * l + 1.0) / ((l + 1.0) * (k + 2.0 * l + 1.0)) * config.gamma
}

/// Same constant as [`rho_predicted`] but with the exponent γ replaced by
/// the ratio log⌊N^γ⌋ / log 3N that a finite run actually realizes; the
/// empirical ρ⁽ⁱ⁾ converge to the prediction in this form.
pub fn rho_predicted_finite(config: &GpyConfig) -> Real {
    let k = config.k as Real;
    let l = config.l as Real;
    let constant = 2.0 * (2.0 * l + 1.0) / ((l + 1.0) * (k + 2.0 * l + 1.0));
    constant * (config.r_cutoff() as Real).ln() / (3.0 * config.n as Real).ln()
}

/// Output of [`main_term_sum`]. `asymptotic_ratio` divides the sum by its
/// predicted main term 2 log R ∏_{3≤p≤p_max}(1 − 1/(p−1)²) and should drift
/// toward 1 as R grows; it is NaN at R = 1 where both sides vanish.
#[derive(Debug, Clone, Copy)]
pub struct MainTermSum {
    pub sum: Real,
    pub asymptotic_ratio: Real,
    pub p_max: u64,
}

/// The double sum Σ_{d,d′ odd squarefree ≤ R} μ(d)μ(d′)/φ([d,d′])
/// · log(R/d) log(R/d′), evaluated exactly by d ≤ d′ enumeration with
/// symmetry doubling and φ([d,d′]) = φ(d)φ(d′)/φ((d,d′)).
pub fn main_term_sum(sieve: &FactorSieve, r: Real) -> Result<MainTermSum> {
    if !r.is_finite() || r < 1.0 {
        return Err(Error::domain("cutoff R must be finite and at least 1"));
    }
    if r > 1e4 {
        return Err(Error::budget("pair enumeration needs R ≤ 10^4"));
    }
    if sieve.limit() < EULER_PRODUCT_CUTOFF {
        return Err(Error::domain(
            "sieve limit below the Euler product cutoff 10^5",
        ));
    }
    let r_int = r.floor() as u64;

    // odd squarefree d ≤ R with their weights and totients
    let mut ds: Vec<(u64, Real, u64)> = Vec::new();
    let mut phi_table = vec![0u64; r_int as usize + 1];
    for d in (1..=r_int).step_by(2) {
        phi_table[d as usize] = sieve.phi(d)?;
        let mu = sieve.mu(d)?;
        if mu != 0 {
            ds.push((d, mu as Real * (r / d as Real).ln(), phi_table[d as usize]));
        }
    }

    let mut sum = 0.0;
    for i in 0..ds.len() {
        let (d1, w1, phi1) = ds[i];
        for &(d2, w2, phi2) in &ds[i..] {
            let g = d1.gcd(&d2);
            let phi_lcm = (phi1 / phi_table[g as usize]) * phi2;
            let term = w1 * w2 / phi_lcm as Real;
            sum += if d1 == d2 { term } else { 2.0 * term };
        }
    }

    let mut product = 1.0;
    for p in sieve.primes().skip(1).take_while(|&p| p <= EULER_PRODUCT_CUTOFF) {
        let q = (p - 1) as Real;
        product *= 1.0 - 1.0 / (q * q);
    }
    let asymptotic_ratio = sum / (r.ln() * 2.0 * product);
    Ok(MainTermSum {
        sum,
        asymptotic_ratio,
        p_max: EULER_PRODUCT_CUTOFF,
    })
}

/// Output of [`bv_discrepancy`]: the discrepancy sum and the trivial
/// comparator Σ_{q≤Q} 1/φ(q) it must sit below.
#[derive(Debug, Clone, Copy)]
pub struct BvDiscrepancy {
    pub value: Real,
    pub trivial_bound: Real,
}

/// Σ_{q≤Q} max_{(a,q)=1} |ψ(N;q,a) − 1/φ(q)| with
/// ψ(N;q,a) = (1/N) Σ_{n≤N, n≡a (q)} Λ(n).
pub fn bv_discrepancy(sieve: &FactorSieve, n: u64, q_max: u64) -> Result<BvDiscrepancy> {
    if q_max < 1 || q_max > n {
        return Err(Error::domain("need 1 ≤ Q ≤ N"));
    }
    if n > sieve.limit() {
        return Err(Error::domain("N exceeds sieve limit"));
    }
    // every prime power ≤ N with its Λ value
    let mut pps: Vec<(u64, Real)> = Vec::new();
    for p in sieve.primes().take_while(|&p| p <= n) {
        let w = (p as Real).ln();
        let mut pe = p;
        loop {
            pps.push((pe, w));
            match pe.checked_mul(p) {
                Some(next) if next <= n => pe = next,
                _ => break,
            }
        }
    }
    let scale = 1.0 / n as Real;
    let mut value = 0.0;
    let mut trivial = 0.0;
    let mut residue = Vec::new();
    for q in 1..=q_max {
        residue.clear();
        residue.resize(q as usize, 0.0 as Real);
        for &(m, w) in &pps {
            residue[(m % q) as usize] += w;
        }
        let target = 1.0 / sieve.phi(q)? as Real;
        let mut worst = 0.0 as Real;
        for a in 0..q {
            if a.gcd(&q) == 1 {
                worst = worst.max((residue[a as usize] * scale - target).abs());
            }
        }
        value += worst;
        trivial += target;
    }
    Ok(BvDiscrepancy {
        value,
        trivial_bound: trivial,
    })
}

/// Mean of (Σ_{d|n, d≤R} μ(d) log(R/d)/log R)² over the window x < n ≤ x+y.
/// The square majorizes the prime indicator beyond R, so the result is an
/// upper bound for the prime density of the window up to a π(R)/y defect.
pub fn brun_titchmarsh_density(sieve: &FactorSieve, x: u64, y: u64, r: Real) -> Result<Real> {
    if !r.is_finite() || r <= 1.0 {
        return Err(Error::domain("cutoff R must exceed 1"));
    }
    if y < 1 {
        return Err(Error::domain("window length y must be positive"));
    }
    if r >= y as Real {
        return Err(Error::domain("need R < y"));
    }
    if x.checked_add(y).is_none_or(|top| top > sieve.limit()) {
        return Err(Error::domain("window end exceeds sieve limit"));
    }
    let r_int = r.floor() as u64;
    let log_r = r.ln();
    let mut acc = vec![0.0 as Real; y as usize];
    for d in 1..=r_int {
        let mu = sieve.mu(d)?;
        if mu == 0 {
            continue;
        }
        let w = mu as Real * (r / d as Real).ln() / log_r;
        // multiples of d in (x, x+y]
        let mut m = (x / d + 1) * d;
        while m <= x + y {
            acc[(m - x - 1) as usize] += w;
            m += d;
        }
    }
    Ok(acc.iter().map(|&v| v * v).sum::<Real>() / y as Real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::FactorSieve;

    fn close(a: Real, b: Real) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 as Real).max(b.abs())
    }

    #[test]
    fn tuple_construction() {
        let t = PrimeTuple::new(vec![6, 0, 2]).unwrap();
        assert_eq!(t.offsets(), &[0, 2, 6]);
        assert_eq!(t.diameter(), 6);
        assert!(PrimeTuple::new(vec![]).is_err());
        assert!(PrimeTuple::new(vec![1, 1]).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(PrimeTuple::new(vec![0, 2]).unwrap().is_admissible());
        assert!(!PrimeTuple::new(vec![0, 1]).unwrap().is_admissible());
        assert!(PrimeTuple::new(vec![0, 4, 6, 10, 12, 16])
            .unwrap()
            .is_admissible());
        assert!(!PrimeTuple::new(vec![0, 2, 4]).unwrap().is_admissible());
        // translation invariance
        for shift in [1u64, 5, 30] {
            let t = PrimeTuple::new(vec![shift, 4 + shift, 6 + shift]).unwrap();
            assert_eq!(
                t.is_admissible(),
                PrimeTuple::new(vec![0, 4, 6]).unwrap().is_admissible()
            );
        }
    }

    #[test]
    fn config_validation() {
        assert!(GpyConfig::new(1000, 3, 1, 0.25).is_ok());
        assert!(GpyConfig::new(1000, 0, 1, 0.25).is_err());
        assert!(GpyConfig::new(1000, 3, 1, 0.5).is_err());
        assert!(GpyConfig::new(1000, 3, 1, 0.0).is_err());
        assert_eq!(GpyConfig::new(10_000, 3, 1, 0.25).unwrap().r_cutoff(), 10);
    }

    #[test]
    fn predicted_density_values() {
        let c = GpyConfig::new(10_000_000, 3, 1, 0.25).unwrap();
        assert!(close(rho_predicted(&c), 0.125));
        let c2 = GpyConfig::new(1000, 1, 0, 0.3).unwrap();
        assert!(close(rho_predicted(&c2), 0.3));
        // large k with l ≈ √k approaches 1/k at γ = 1/4
        let k = 10_000u32;
        let c3 = GpyConfig::new(1000, k, 100, 0.25).unwrap();
        let expect = 1.0 / k as Real;
        assert!((rho_predicted(&c3) - expect).abs() < 0.05 * expect);
    }

    #[test]
    fn densities_match_direct_recomputation() {
        let sieve = FactorSieve::build(3000).unwrap();
        let tuple = PrimeTuple::new(vec![0, 2, 6]).unwrap();
        let config = GpyConfig::new(1000, 3, 1, 0.25).unwrap();
        let out = gpy_densities(&sieve, &config, &tuple).unwrap();

        // independent route: trial-divide the product by every d ≤ R
        let r_int = config.r_cutoff();
        let rf = r_int as Real;
        let mut q1 = 0.0;
        let mut q2 = [0.0 as Real; 3];
        for n in 1000u64..2000 {
            let f = n as u128 * (n + 2) as u128 * (n + 6) as u128;
            let mut w = 0.0 as Real;
            for d in 1..=r_int {
                let mu = sieve.mu(d).unwrap();
                if mu != 0 && f.is_multiple_of(d as u128) {
                    w += mu as Real * (rf / d as Real).ln().powi(4);
                }
            }
            let w2 = w * w;
            q1 += w2;
            for (i, &h) in tuple.offsets().iter().enumerate() {
                if sieve.is_prime(n + h) {
                    q2[i] += w2 * ((n + h) as Real).ln();
                }
            }
        }
        q1 /= 1000.0;
        let log3n = (3000.0 as Real).ln();
        for v in q2.iter_mut() {
            *v /= 1000.0 * log3n;
        }
        assert!(close(out.q1, q1));
        for (i, &want) in q2.iter().enumerate() {
            assert!(close(out.q2[i], want));
            assert!(close(out.rho[i], want / q1));
            assert!(out.rho[i] > 0.0 && out.rho[i] < 1.0);
        }
    }

    #[test]
    fn single_offset_density_positive() {
        let sieve = FactorSieve::build(3000).unwrap();
        let tuple = PrimeTuple::new(vec![0]).unwrap();
        let config = GpyConfig::new(1000, 1, 0, 0.25).unwrap();
        let out = gpy_densities(&sieve, &config, &tuple).unwrap();
        assert!(out.rho[0] > 0.0);
        assert!(out.rho[0] <= 1.0 + 1e-9);
    }

    #[test]
    fn densities_reject_bad_inputs() {
        let sieve = FactorSieve::build(3000).unwrap();
        let tuple = PrimeTuple::new(vec![0, 1]).unwrap();
        let config = GpyConfig::new(1000, 2, 1, 0.25).unwrap();
        assert!(matches!(
            gpy_densities(&sieve, &config, &tuple),
            Err(Error::Domain(_))
        ));
        // R = ⌊16^0.25⌋ = 2 is fine but ⌊15^0.25⌋ = 1 degenerates
        let t0 = PrimeTuple::new(vec![0]).unwrap();
        let c0 = GpyConfig::new(15, 1, 0, 0.25).unwrap();
        assert!(matches!(
            gpy_densities(&sieve, &c0, &t0),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn main_term_values() {
        let sieve = FactorSieve::build(100_000).unwrap();
        let out = main_term_sum(&sieve, 2.0).unwrap();
        assert!(close(out.sum, (2.0 as Real).ln().powi(2)));
        assert_eq!(out.p_max, 100_000);
        let out1 = main_term_sum(&sieve, 1.0).unwrap();
        assert_eq!(out1.sum, 0.0);
        assert!(out1.asymptotic_ratio.is_nan());
        assert!(matches!(
            main_term_sum(&sieve, 2e4),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn main_term_doubling_matches_full_enumeration() {
        let sieve = FactorSieve::build(100_000).unwrap();
        let r = 100.0 as Real;
        let out = main_term_sum(&sieve, r).unwrap();
        let mut full = 0.0;
        for d1 in (1u64..=100).step_by(2) {
            if sieve.mu(d1).unwrap() == 0 {
                continue;
            }
            for d2 in (1u64..=100).step_by(2) {
                let m1 = sieve.mu(d1).unwrap();
                let m2 = sieve.mu(d2).unwrap();
                if m2 == 0 {
                    continue;
                }
                let g = d1.gcd(&d2);
                let lcm = d1 / g * d2;
                full += (m1 * m2) as Real / sieve.phi(lcm).unwrap() as Real
                    * (r / d1 as Real).ln()
                    * (r / d2 as Real).ln();
            }
        }
        assert!(close(out.sum, full));
    }

    #[test]
    fn bv_single_modulus() {
        let sieve = FactorSieve::build(100_000).unwrap();
        let out = bv_discrepancy(&sieve, 100_000, 1).unwrap();
        assert!(out.value < 0.01, "psi(N)/N far from 1: {}", out.value);
        assert!(close(out.trivial_bound, 1.0));
    }

    #[test]
    fn bv_decreases_with_n() {
        let sieve = FactorSieve::build(1_000_000).unwrap();
        let a = bv_discrepancy(&sieve, 10_000, 50).unwrap();
        let b = bv_discrepancy(&sieve, 1_000_000, 50).unwrap();
        assert!(a.value < a.trivial_bound);
        assert!(b.value < b.trivial_bound);
        assert!(b.value < a.value);
    }

    #[test]
    fn window_majorant_bounds_prime_density() {
        let sieve = FactorSieve::build(120_000).unwrap();
        let (x, y, r) = (100_000u64, 10_000u64, 90.0 as Real);
        let maj = brun_titchmarsh_density(&sieve, x, y, r).unwrap();
        let primes = (x + 1..=x + y).filter(|&n| sieve.is_prime(n)).count() as Real;
        let pi_r = sieve.primes().take_while(|&p| p as Real <= r).count() as Real;
        assert!(maj >= (primes - pi_r) / y as Real);
        assert!(maj >= primes / y as Real * 0.9);
        assert!(matches!(
            brun_titchmarsh_density(&sieve, x, y, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            brun_titchmarsh_density(&sieve, x, y, 2e4),
            Err(Error::Domain(_))
        ));
    }
}
