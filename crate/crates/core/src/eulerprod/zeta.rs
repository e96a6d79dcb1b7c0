use crate::error::{Error, Result};
use crate::eulerprod::character::Character;

/// `B_2, B_4, ..., B_16`.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

pub const DEFAULT_DIRECT_TERMS: u64 = 10_000;
pub const DEFAULT_CORRECTIONS: usize = 8;

/// `sum_{m >= n} (m + alpha)^{-s}` by Euler-Maclaurin at `w = n + alpha`.
fn em_tail(s: f64, w: f64, corrections: usize) -> f64 {
    let mut acc = w.powf(1.0 - s) / (s - 1.0) + 0.5 * w.powf(-s);
    // rising factorial (s)_{2j-1} / (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut wpow = w.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().take(corrections).enumerate() {
        acc += b / fact * rising * wpow;
        let k = 2 * j + 1;
        rising *= (s + k as f64) * (s + k as f64 + 1.0);
        fact *= ((k + 2) * (k + 3)) as f64;
        wpow /= w * w;
    }
    acc
}

/// Riemann zeta for real `s > 1` with explicit term counts.
pub fn zeta_with(s: f64, direct_terms: u64, corrections: usize) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::ZetaDomain(s));
    }
    if direct_terms < 2 || corrections > BERNOULLI.len() {
        return Err(Error::InvalidProduct(format!(
            "zeta needs at least 2 direct terms and at most {} corrections",
            BERNOULLI.len()
        )));
    }
    let n = direct_terms;
    let head: f64 = (1..n).rev().map(|k| (k as f64).powf(-s)).sum();
    Ok(head + em_tail(s, n as f64, corrections))
}

/// Riemann zeta for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    zeta_with(s, DEFAULT_DIRECT_TERMS, DEFAULT_CORRECTIONS)
}

/// Hurwitz zeta `sum_{m >= 0} (m + alpha)^{-s}` for `0 < alpha <= 1`.
pub fn hurwitz_zeta(s: f64, alpha: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::ZetaDomain(s));
    }
    const N: u64 = 16;
    let head: f64 = (0..N).rev().map(|m| (m as f64 + alpha).powf(-s)).sum();
    Ok(head + em_tail(s, N as f64 + alpha, DEFAULT_CORRECTIONS))
}

/// `L(s, chi)` for a real character; the principal character gives `zeta(s)`.
pub fn dirichlet_l(s: f64, chi: &Character) -> Result<f64> {
    match chi {
        Character::Principal => zeta(s),
        Character::Table(c) => {
            let q = c.modulus();
            let qf = q as f64;
            let mut acc = 0.0;
            for r in 1..q {
                let v = c.value(r);
                if v != 0 {
                    acc += v as f64 * hurwitz_zeta(s, r as f64 / qf)?;
                }
            }
            Ok(acc * qf.powf(-s))
        }
    }
}
