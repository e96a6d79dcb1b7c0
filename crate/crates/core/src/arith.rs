//! Exact integer primitives.
//!
//! Everything here works on machine integers. Magnitudes up to `i64::MAX`
//! are accepted; intermediate products go through `u128` and any result that
//! would not fit is reported as [`Error::Overflow`].

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Primes below this bound are sieved once and shared.
const PRIME_CACHE_LIMIT: u64 = 1 << 20;

static PRIME_CACHE: OnceLock<Vec<u64>> = OnceLock::new();

fn cached_primes() -> &'static [u64] {
    PRIME_CACHE.get_or_init(|| sieve(PRIME_CACHE_LIMIT))
}

fn sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// All primes `p <= n` in increasing order. Empty for `n < 2`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n <= PRIME_CACHE_LIMIT {
        let cache = cached_primes();
        let end = cache.partition_point(|&p| p <= n);
        cache[..end].to_vec()
    } else {
        sieve(n)
    }
}

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0).
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] != 0 {
            continue;
        }
        spf[i] = i as u32;
        let mut j = i.saturating_mul(i);
        while j <= n {
            if spf[j] == 0 {
                spf[j] = i as u32;
            }
            j += i;
        }
    }
    spf
}

/// Prime factorization of a nonzero integer's absolute value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn is_squareful(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e >= 2)
    }

    /// The factored value, or `None` if it exceeds `u128`.
    pub fn value(&self) -> Option<u128> {
        self.factors.iter().try_fold(1u128, |acc, &(p, e)| {
            (p as u128)
                .checked_pow(e)
                .and_then(|pe| acc.checked_mul(pe))
        })
    }
}

/// Factor `n` by trial division over the cached primes.
///
/// Beyond the cache the divisor continues over odd integers, which is slow for
/// inputs with two large prime factors above 2^40 but stays exact.
pub fn factorize_u64(mut n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Zero("factorize"));
    }
    let mut factors = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while *n % p == 0 {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    let mut last = 1;
    let mut exhausted = true;
    for &p in cached_primes() {
        if (p as u128) * (p as u128) > n as u128 {
            exhausted = false;
            break;
        }
        push(p, &mut n);
        last = p;
    }
    if exhausted {
        let mut d = last + 2;
        while (d as u128) * (d as u128) <= n as u128 {
            push(d, &mut n);
            d += 2;
        }
    }
    if n > 1 {
        factors.push((n, 1));
    }
    Ok(Factorization { factors })
}

/// Factorization of `|n|`.
pub fn factorize(n: i64) -> Result<Factorization> {
    factorize_u64(n.unsigned_abs())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n <= PRIME_CACHE_LIMIT {
        return cached_primes().binary_search(&n).is_ok();
    }
    matches!(factorize_u64(n), Ok(f) if f.factors == [(n, 1)])
}

/// Möbius function. `mobius(0)` is 0.
pub fn mobius(n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    let f = factorize_u64(n).expect("nonzero");
    if !f.is_squarefree() {
        0
    } else if f.omega() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `false` for 0.
pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize_u64(n).expect("nonzero").is_squarefree()
}

/// Whether every prime dividing `z` divides it at least twice. `±1` are squareful.
pub fn is_squareful(z: i64) -> Result<bool> {
    if z == 0 {
        return Err(Error::Zero("is_squareful"));
    }
    Ok(factorize(z)?.is_squareful())
}

/// The unique representation `z = x^2 y^3` with `x > 0` and `y` squarefree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SquarefulDecomposition {
    pub x: u64,
    /// Carries the sign of `z`.
    pub y: i64,
    pub z: i64,
}

impl SquarefulDecomposition {
    pub fn reconstruct(&self) -> Option<i64> {
        let x2 = (self.x as i128).checked_mul(self.x as i128)?;
        let y3 = (self.y as i128).checked_pow(3)?;
        i64::try_from(x2.checked_mul(y3)?).ok()
    }
}

pub fn squareful_decompose(z: i64) -> Result<SquarefulDecomposition> {
    if z == 0 {
        return Err(Error::Zero("squareful_decompose"));
    }
    let f = factorize(z)?;
    if !f.is_squareful() {
        return Err(Error::NotSquareful(z));
    }
    let mut x: u64 = 1;
    let mut y: u64 = 1;
    for &(p, e) in f.factors() {
        // odd e = 3 + 2k, even e = 2k
        let (yp, xe) = if e % 2 == 1 { (p, (e - 3) / 2) } else { (1, e / 2) };
        y *= yp;
        x *= p.pow(xe);
    }
    let y = y as i64 * z.signum();
    Ok(SquarefulDecomposition { x, y, z })
}

/// Jacobi symbol `(a|n)` for unsigned arguments, `n` odd.
pub(crate) fn jacobi_u64(a: u64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Jacobi symbol `(a|n)`; `n` must be odd and positive.
pub fn jacobi(a: i64, n: i64) -> Result<i8> {
    if n <= 0 || n % 2 == 0 {
        return Err(Error::BadJacobiModulus(n));
    }
    let r = a.rem_euclid(n) as u64;
    Ok(jacobi_u64(r, n as u64))
}

/// Jacobi symbol with an `i128` top argument.
pub(crate) fn jacobi_i128(a: i128, n: u64) -> i8 {
    jacobi_u64(a.rem_euclid(n as i128) as u64, n)
}

/// Largest `e` with `p^e | n`.
pub fn padic_val(p: u64, n: i64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Zero("padic_val"));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(val_u64(p, n.unsigned_abs()))
}

pub(crate) fn val_u64(p: u64, mut n: u64) -> u32 {
    debug_assert!(n != 0);
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

pub(crate) fn is_perfect_square(n: u64) -> Option<u64> {
    let r = n.isqrt();
    (r * r == n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert_eq!(primes_up_to(2), vec![2]);
        assert!(primes_up_to(1).is_empty());
        let big = primes_up_to(PRIME_CACHE_LIMIT + 100);
        assert_eq!(&big[..cached_primes().len()], cached_primes());
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factorize(72).unwrap().factors(), &[(2, 3), (3, 2)]);
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(-37 * 109).unwrap().factors(), &[(37, 1), (109, 1)]);
        assert_eq!(factorize(0), Err(Error::Zero("factorize")));
        assert_eq!(factorize(i64::MIN).unwrap().factors(), &[(2, 63)]);
        // two primes just above the cached range
        let (p, q) = (1_048_583u64, 1_048_589u64);
        assert!(is_prime(p) && is_prime(q));
        assert_eq!(factorize_u64(p * q).unwrap().factors(), &[(p, 1), (q, 1)]);
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(0), 0);
    }

    #[test]
    fn squareful_examples() {
        assert_eq!(is_squareful(72), Ok(true));
        assert_eq!(is_squareful(12), Ok(false));
        assert_eq!(is_squareful(1), Ok(true));
        assert_eq!(is_squareful(-1), Ok(true));
        assert!(is_squareful(0).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let d = squareful_decompose(72).unwrap();
        assert_eq!((d.x, d.y), (3, 2));
        let d = squareful_decompose(108).unwrap();
        assert_eq!((d.x, d.y), (2, 3));
        let d = squareful_decompose(-8).unwrap();
        assert_eq!((d.x, d.y), (1, -2));
        let d = squareful_decompose(-1).unwrap();
        assert_eq!((d.x, d.y), (1, -1));
        assert_eq!(squareful_decompose(12), Err(Error::NotSquareful(12)));
        // p^5 = p^2 * p^3
        let d = squareful_decompose(32).unwrap();
        assert_eq!((d.x, d.y), (2, 2));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(1, 15), Ok(1));
        assert_eq!(jacobi(5, 3), Ok(-1));
        assert_eq!(jacobi(2, 15), Ok(1));
        assert_eq!(jacobi(-1, 7), Ok(-1));
        assert_eq!(jacobi(3, 9), Ok(0));
        assert_eq!(jacobi(3, 1), Ok(1));
        assert!(jacobi(3, 8).is_err());
        assert!(jacobi(3, -3).is_err());
        assert!(jacobi(3, 0).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_val(2, 72), Ok(3));
        assert_eq!(padic_val(5, 72), Ok(0));
        assert_eq!(padic_val(3, -27), Ok(3));
        assert!(padic_val(3, 0).is_err());
        assert_eq!(padic_val(4, 8), Err(Error::NotPrime(4)));
    }

    #[test]
    fn spf_matches_factorization() {
        let spf = spf_table(1000);
        for n in 2..=1000u64 {
            let f = factorize_u64(n).unwrap();
            assert_eq!(spf[n as usize] as u64, f.factors()[0].0);
        }
    }
}
