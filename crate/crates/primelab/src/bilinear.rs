//! Vaughan's identity and its four-piece split of Σ Λ(n)f(n), Type I and
//! Type II bilinear sum evaluators over dyadic ranges, van der Corput's
//! inequality, and the two diophantine lemmas (Dirichlet approximation and
//! the equidistribution pigeonhole).

use crate::error::{Error, Result};
use crate::sieve::FactorSieve;
use crate::{Cplx, Real};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Ceiling on Σ Λ(n)f(n) split ranges (the split holds an X-length value
/// cache).
const SPLIT_X_CEILING: u64 = 4_000_000;

/// Ceiling on points touched by the Type I / Type II evaluators.
const BILINEAR_POINT_CEILING: u64 = 1 << 26;

/// The dyadic interval [2^{ν−1}, 2^ν), ν ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicRange {
    exponent: u32,
}

impl DyadicRange {
    pub fn new(exponent: u32) -> Result<Self> {
        if !(1..=63).contains(&exponent) {
            return Err(Error::domain("dyadic exponent must lie in [1, 63]"));
        }
        Ok(DyadicRange { exponent })
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Half-open endpoints (2^{ν−1}, 2^ν).
    pub fn interval(&self) -> (u64, u64) {
        (1u64 << (self.exponent - 1), 1u64 << self.exponent)
    }

    pub fn len(&self) -> u64 {
        1u64 << (self.exponent - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        let (lo, hi) = self.interval();
        lo..hi
    }
}

/// Ascending prime powers ≤ limit with their Λ values.
fn prime_powers(sieve: &FactorSieve, limit: u64) -> Vec<(u64, Real)> {
    let mut out = Vec::new();
    for p in sieve.primes().take_while(|&p| p <= limit) {
        let w = (p as Real).ln();
        let mut pe = p;
        loop {
            out.push((pe, w));
            match pe.checked_mul(p) {
                Some(next) if next <= limit => pe = next,
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|&(n, _)| n);
    out
}

/// Squarefree divisors of n as (d, μ(d)) pairs.
fn squarefree_divisors(sieve: &FactorSieve, n: u64) -> Result<Vec<(u64, i32)>> {
    let primes: Vec<u64> = sieve.factorize(n)?.into_iter().map(|(p, _)| p).collect();
    let mut out = Vec::with_capacity(1 << primes.len());
    out.push((1u64, 1i32));
    for p in primes {
        for i in 0..out.len() {
            let (d, mu) = out[i];
            out.push((d * p, -mu));
        }
    }
    Ok(out)
}

/// The four pieces of the identity
/// Λ(n) = −Λ_♯♯(n) + Λ_♭♭(n) + 1_{n<U}Λ(n) + Σ_{c<U, c|n} μ(c) log(n/c),
/// where Λ_♯♯ sums Λ(b)μ(c) over pairs with bc | n and both b, c < U, and
/// Λ_♭♭ over pairs with both ≥ U. Returned in displayed order with the minus
/// sign applied, so the four entries sum to Λ(n).
pub fn vaughan_identity_check(sieve: &FactorSieve, n: u64, u: Real) -> Result<[Real; 4]> {
    if !u.is_finite() || u < 1.0 {
        return Err(Error::domain("cutoff U must be finite and at least 1"));
    }
    let mut t1 = 0.0 as Real;
    let mut t2 = 0.0 as Real;
    // b runs over prime-power divisors of n, c over squarefree divisors of n/b
    for (p, e) in sieve.factorize(n)? {
        let lam = (p as Real).ln();
        let mut b = 1u64;
        for _ in 0..e {
            b *= p;
            for (c, mu) in squarefree_divisors(sieve, n / b)? {
                let term = lam * mu as Real;
                let (bf, cf) = (b as Real, c as Real);
                if bf < u && cf < u {
                    t1 -= term;
                } else if bf >= u && cf >= u {
                    t2 += term;
                }
            }
        }
    }
    let t3 = if (n as Real) < u {
        sieve.von_mangoldt(n, false)?
    } else {
        0.0
    };
    let mut t4 = 0.0 as Real;
    for (c, mu) in squarefree_divisors(sieve, n)? {
        if (c as Real) < u {
            t4 += mu as Real * (n as Real / c as Real).ln();
        }
    }
    Ok([t1, t2, t3, t4])
}

/// The four weighted sums S₁–S₄ with Σ Λ(n)f(n) = S₁+S₂+S₃+S₄, plus the
/// cutoff actually used and the directly-evaluated left side.
#[derive(Debug, Clone, Copy)]
pub struct VaughanSplit {
    pub s1: Cplx,
    pub s2: Cplx,
    pub s3: Cplx,
    pub s4: Cplx,
    pub u: Real,
    pub direct: Cplx,
}

/// Splits Σ_{n≤X} Λ(n)f(n) by Vaughan's identity at cutoff U (default
/// X^{1/3}) and verifies the identity against direct evaluation.
pub fn vaughan_split(
    sieve: &FactorSieve,
    f: impl Fn(u64) -> Cplx,
    x: u64,
    u: Option<Real>,
) -> Result<VaughanSplit> {
    if x < 1 || x > sieve.limit() {
        return Err(Error::domain("need 1 ≤ X ≤ sieve limit"));
    }
    if x > SPLIT_X_CEILING {
        return Err(Error::budget(format!("split range X ≤ {SPLIT_X_CEILING}")));
    }
    let u = u.unwrap_or((x as Real).powf(1.0 / 3.0));
    if !(1.0..=x as Real).contains(&u) {
        return Err(Error::domain("cutoff U must lie in [1, X]"));
    }

    // cache f and enforce boundedness once
    let fv: Vec<Cplx> = (0..=x).map(&f).collect();
    if fv.iter().any(|v| v.norm() > 1.0 + 1e-12) {
        return Err(Error::domain("|f| must be bounded by 1"));
    }

    let pps = prime_powers(sieve, x);
    let u_int = if u.floor() == u { u as u64 - 1 } else { u.floor() as u64 };
    // squarefree c < U as (c, μ(c))
    let mut small_squarefree: Vec<(u64, i32)> = Vec::new();
    for c in 1..=u_int.min(x) {
        let mu = sieve.mu(c)?;
        if mu != 0 {
            small_squarefree.push((c, mu));
        }
    }

    let mut s1 = Cplx::new(0.0, 0.0);
    let mut s2 = Cplx::new(0.0, 0.0);
    let mut s3 = Cplx::new(0.0, 0.0);
    let mut s4 = Cplx::new(0.0, 0.0);
    let mut direct = Cplx::new(0.0, 0.0);

    for &(b, lam) in &pps {
        if (b as Real) < u {
            // S₁ = −Σ_{b<U} Σ_{c<U} Λ(b)μ(c) Σ_{bcm ≤ X} f(bcm)
            for &(c, mu) in &small_squarefree {
                let step = b * c;
                if step > x {
                    break;
                }
                let mut inner = Cplx::new(0.0, 0.0);
                let mut m = step;
                while m <= x {
                    inner += fv[m as usize];
                    m += step;
                }
                s1 -= inner * (lam * mu as Real);
            }
            s3 += fv[b as usize] * lam;
        } else {
            // S₂ = Σ_{b≥U} Σ_{c≥U, bc≤X} Λ(b)μ(c) Σ_m f(bcm)
            let mut c = u_int + 1;
            while b * c <= x {
                let mu = sieve.mu(c)?;
                if mu != 0 {
                    let step = b * c;
                    let mut inner = Cplx::new(0.0, 0.0);
                    let mut m = step;
                    while m <= x {
                        inner += fv[m as usize];
                        m += step;
                    }
                    s2 += inner * (lam * mu as Real);
                }
                c += 1;
            }
        }
        direct += fv[b as usize] * lam;
    }
    // S₄ = Σ_{c<U} μ(c) Σ_{cm ≤ X} f(cm) log m
    for &(c, mu) in &small_squarefree {
        let mut inner = Cplx::new(0.0, 0.0);
        let mut m = 1u64;
        while c * m <= x {
            inner += fv[(c * m) as usize] * (m as Real).ln();
            m += 1;
        }
        s4 += inner * mu as Real;
    }

    let total = s1 + s2 + s3 + s4;
    if (total - direct).norm() > 1e-6 * (1.0 + direct.norm()) {
        return Err(Error::inconsistency(format!(
            "split pieces sum to {total} but the direct sum is {direct}"
        )));
    }
    Ok(VaughanSplit {
        s1,
        s2,
        s3,
        s4,
        u,
        direct,
    })
}

/// Σ_{m∼2^μ} |Σ_{n∈I_m} f(mn)| with one half-open interval I_m per m.
pub fn type_i_sum(
    f: impl Fn(u64) -> Cplx,
    mu_exp: u32,
    intervals: &[(u64, u64)],
) -> Result<Real> {
    let range = DyadicRange::new(mu_exp)?;
    if intervals.len() as u64 != range.len() {
        return Err(Error::domain(format!(
            "need one interval per m: expected {}, got {}",
            range.len(),
            intervals.len()
        )));
    }
    if intervals.iter().any(|&(lo, hi)| lo > hi) {
        return Err(Error::domain("interval has lo > hi"));
    }
    let points: u64 = intervals.iter().map(|&(lo, hi)| hi - lo).sum();
    if points > BILINEAR_POINT_CEILING {
        return Err(Error::budget(format!(
            "interval lengths sum to {points}, ceiling is {BILINEAR_POINT_CEILING}"
        )));
    }
    let mut total = 0.0 as Real;
    for (m, &(lo, hi)) in range.iter().zip(intervals) {
        let mut inner = Cplx::new(0.0, 0.0);
        for n in lo..hi {
            inner += f(m * n);
        }
        total += inner.norm();
    }
    Ok(total)
}

/// Convenience: every I_m equal to the full dyadic range [2^{ν−1}, 2^ν).
pub fn full_dyadic_intervals(mu_exp: u32, nu_exp: u32) -> Result<Vec<(u64, u64)>> {
    let m_range = DyadicRange::new(mu_exp)?;
    let n_range = DyadicRange::new(nu_exp)?;
    Ok(vec![n_range.interval(); m_range.len() as usize])
}

/// Σ_{m∼2^μ} Σ_{n∼2^ν} a_m b_n f(mn). Coefficient slices are indexed along
/// their dyadic ranges and must be bounded by 1.
pub fn type_ii_sum(
    f: impl Fn(u64) -> Cplx,
    a: &[Cplx],
    b: &[Cplx],
    mu_exp: u32,
    nu_exp: u32,
) -> Result<Cplx> {
    let m_range = DyadicRange::new(mu_exp)?;
    let n_range = DyadicRange::new(nu_exp)?;
    if a.len() as u64 != m_range.len() || b.len() as u64 != n_range.len() {
        return Err(Error::domain("coefficient lengths must match the dyadic ranges"));
    }
    if a.iter().chain(b).any(|v| v.norm() > 1.0 + 1e-12) {
        return Err(Error::domain("coefficients must be bounded by 1"));
    }
    if mu_exp + nu_exp > 26 {
        return Err(Error::budget("need 2^{μ+ν} ≤ 2^26"));
    }
    let mut sum = Cplx::new(0.0, 0.0);
    for (m, am) in m_range.iter().zip(a) {
        let mut inner = Cplx::new(0.0, 0.0);
        for (n, bn) in n_range.iter().zip(b) {
            inner += *bn * f(m * n);
        }
        sum += *am * inner;
    }
    Ok(sum)
}

/// Both sides of van der Corput's inequality
/// |Σ_n a_n|² ≤ ((N+H)/H) Σ_{|h|≤H} (1 − |h|/H) Σ_n a_n conj(a_{n+h}),
/// with the sequence zero-extended outside [0, N).
#[derive(Debug, Clone, Copy)]
pub struct VdcCheck {
    pub lhs: Real,
    pub rhs: Real,
}

pub fn vdc_check(a: &[Cplx], h: u64) -> Result<VdcCheck> {
    if h < 1 {
        return Err(Error::domain("shift cap H must be at least 1"));
    }
    let n = a.len() as u64;
    if n.saturating_mul(h) > 100_000_000 {
        return Err(Error::budget("autocorrelation workload N·H too large"));
    }
    let lhs = a.iter().sum::<Cplx>().norm_sqr();
    // C(0) plus twice the real part of the positive shifts
    let mut weighted = a.iter().map(|v| v.norm_sqr()).sum::<Real>();
    for shift in 1..h.min(n.max(1)) {
        let c: Cplx = a[shift as usize..]
            .iter()
            .zip(a)
            .map(|(x, y)| *y * x.conj())
            .sum();
        weighted += 2.0 * (1.0 - shift as Real / h as Real) * c.re;
    }
    let rhs = (n + h) as Real / h as Real * weighted;
    Ok(VdcCheck { lhs, rhs })
}

/// Value and predicted shape of Σ_{x=0}^{R} min(Q, ‖ax/q + β‖^{−1}).
#[derive(Debug, Clone, Copy)]
pub struct MinQSum {
    pub value: Real,
    pub shape: Real,
}

/// Exact evaluation of the Vinogradov-style diophantine sum; `shape` is the
/// envelope Q + q + R + QR/q the sum tracks up to logarithmic factors.
pub fn min_q_sum(a: i64, q: u64, beta: Real, big_q: u64, r: u64) -> Result<MinQSum> {
    if q < 1 {
        return Err(Error::domain("modulus q must be positive"));
    }
    let a_mod = a.rem_euclid(q as i64) as u64;
    if a_mod.gcd(&q) != 1 {
        return Err(Error::domain("need gcd(a, q) = 1"));
    }
    if r > 100_000_000 {
        return Err(Error::budget("summation range R too large"));
    }
    let cap = big_q as Real;
    let mut value = 0.0 as Real;
    let mut num = 0u64;
    for _ in 0..=r {
        let y = num as Real / q as Real + beta;
        let dist = (y - y.round()).abs();
        value += cap.min(1.0 / dist);
        num += a_mod;
        if num >= q {
            num -= q;
        }
    }
    let shape =
        cap + q as Real + r as Real + cap * r as Real / q as Real;
    Ok(MinQSum { value, shape })
}

/// Best rational approximation a/q with q ≤ N, gcd(a,q) = 1 and
/// |α − a/q| ≤ 1/(qN), by continued fractions run in exact arithmetic on the
/// binary value of α.
pub fn dirichlet_approx(alpha: Real, n: u64) -> Result<(i64, u64)> {
    if n < 1 {
        return Err(Error::domain("need N ≥ 1"));
    }
    if !alpha.is_finite() || alpha.abs() > 1e15 {
        return Err(Error::domain("alpha out of range"));
    }
    let exact = BigRational::from_float(alpha).expect("finite alpha");
    let a0 = exact.numer().div_floor(exact.denom());
    let mut rem = exact.numer() - &a0 * exact.denom();
    let mut den = exact.denom().clone();
    let big_n = BigInt::from(n);

    let (mut p_prev, mut q_prev) = (BigInt::from(1), BigInt::from(0));
    let (mut p, mut q) = (a0, BigInt::from(1));
    while !rem.is_zero() {
        let a_k = den.div_floor(&rem);
        let next_rem = &den - &a_k * &rem;
        let q_next = &a_k * &q + &q_prev;
        if q_next > big_n {
            break;
        }
        let p_next = &a_k * &p + &p_prev;
        (p_prev, q_prev) = (p, q);
        (p, q) = (p_next, q_next);
        den = rem;
        rem = next_rem;
    }
    let a_out = p
        .to_i64()
        .ok_or_else(|| Error::domain("numerator exceeds i64 range"))?;
    let q_out = q.to_u64().expect("q ≤ N fits u64");
    Ok((a_out, q_out))
}

/// Searches for the small modulus promised by the equidistribution lemma:
/// if at least δ₂N of the n ≤ N have ‖αn‖ ≤ δ₁, some q ≤ 8/δ₂ satisfies
/// ‖αq‖ ≤ 4δ₁/(δ₂N). Returns `None` when the density hypothesis fails.
pub fn equidist_find_q(
    alpha: Real,
    n: u64,
    delta1: Real,
    delta2: Real,
) -> Result<Option<u64>> {
    if !(delta1 > 0.0 && delta2 > 0.0 && delta1 < delta2 / 16.0) {
        return Err(Error::domain("need 0 < δ₁ < δ₂/16"));
    }
    if (n as Real) < 8.0 / delta2 {
        return Err(Error::domain("need N ≥ 8/δ₂"));
    }
    if n > 1_000_000_000 {
        return Err(Error::budget("count range N too large"));
    }
    let dist = |y: Real| (y - y.round()).abs();
    let count = (1..=n)
        .filter(|&m| dist(alpha * m as Real) <= delta1)
        .count() as Real;
    if count < delta2 * n as Real {
        return Ok(None);
    }
    let q_max = (8.0 / delta2).floor() as u64;
    let threshold = 4.0 * delta1 / (delta2 * n as Real);
    for q in 1..=q_max {
        if dist(alpha * q as Real) <= threshold {
            return Ok(Some(q));
        }
    }
    Err(Error::inconsistency(
        "density hypothesis held but no small modulus was found",
    ))
}
