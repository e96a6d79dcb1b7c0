//! Local densities of the two orbifolds.
//!
//! Closed forms come with residue-counting oracles that evaluate the defining
//! p-adic integrals directly, together with an explicit bound on the part of
//! the integral the finite enumeration cannot see.

use std::f64::consts::PI;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize_u64, is_prime, is_squarefree, jacobi_i128, val_u64};
use crate::error::{Error, Result};

/// Index `y = (y0, y1, y2)` of the conic `y0^3 x0^2 + y1^3 x1^2 = y2^3 x2^2`.
///
/// Entries are nonzero, squarefree and pairwise coprime, so at most one of
/// them is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiberIndex {
    y: [i64; 3],
}

impl FiberIndex {
    pub fn new(y0: i64, y1: i64, y2: i64) -> Result<Self> {
        let y = [y0, y1, y2];
        if y.contains(&0) {
            return Err(Error::InvalidFiber(y0, y1, y2, "entries must be nonzero"));
        }
        if !y.iter().all(|v| is_squarefree(v.unsigned_abs())) {
            return Err(Error::InvalidFiber(y0, y1, y2, "entries must be squarefree"));
        }
        let a = y.map(|v| v.unsigned_abs());
        if a[0].gcd(&a[1]) != 1 || a[0].gcd(&a[2]) != 1 || a[1].gcd(&a[2]) != 1 {
            return Err(Error::InvalidFiber(y0, y1, y2, "entries must be pairwise coprime"));
        }
        Ok(FiberIndex { y })
    }

    pub fn entries(&self) -> [i64; 3] {
        self.y
    }

    pub fn abs(&self) -> [u64; 3] {
        self.y.map(|v| v.unsigned_abs())
    }

    pub fn is_positive(&self) -> bool {
        self.y.iter().all(|&v| v > 0)
    }

    /// `|y0 y1 y2|`.
    pub fn product_abs(&self) -> Result<u64> {
        let [a, b, c] = self.abs();
        a.checked_mul(b)
            .and_then(|ab| ab.checked_mul(c))
            .ok_or(Error::Overflow("FiberIndex::product_abs"))
    }
}

/// Coefficients of the binary form `a x^2 + b y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryFormParams {
    a: u64,
    b: u64,
}

impl BinaryFormParams {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if a == 0 {
            return bad("a must be positive");
        }
        if b == 0 {
            return bad("b must be positive");
        }
        if !is_squarefree(a) {
            return bad("a must be squarefree");
        }
        if !is_squarefree(b) {
            return bad("b must be squarefree");
        }
        if a.gcd(&b) != 1 {
            return bad("a and b must be coprime");
        }
        if a % 4 != 1 {
            return bad("a must be 1 mod 4");
        }
        if b % 4 != 1 {
            return bad("b must be 1 mod 4");
        }
        if a.checked_mul(b).is_none_or(|ab| ab > i64::MAX as u64 / 4) {
            return Err(Error::Overflow("BinaryFormParams::new"));
        }
        Ok(BinaryFormParams { a, b })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn ab(&self) -> u64 {
        self.a * self.b
    }

    /// The fiber `(a, b, v)` whose conic density reappears in the binary-form sum.
    pub fn fiber(&self, v: u64) -> Result<FiberIndex> {
        let v = i64::try_from(v).map_err(|_| Error::Overflow("BinaryFormParams::fiber"))?;
        FiberIndex::new(self.a as i64, self.b as i64, v)
    }
}

/// A density value; `tail_bound` is zero for closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `prod_{p | d, p > 2} (1 + 1/p)^{-1}`.
pub fn gamma_factor(d: u64) -> Ratio<u64> {
    assert!(d >= 1, "gamma_factor needs d >= 1");
    let f = factorize_u64(d).expect("nonzero");
    let (num, den) = f
        .primes()
        .filter(|&p| p > 2)
        .fold((1u64, 1u64), |(n, m), p| (n * p, m * (p + 1)));
    Ratio::new(num, den)
}

pub fn gamma_f64(d: u64) -> f64 {
    let f = factorize_u64(d).expect("nonzero");
    f.primes()
        .filter(|&p| p > 2)
        .map(|p| p as f64 / (p as f64 + 1.0))
        .product()
}

fn residue_product(a: i64, b: i64, p: u64) -> i8 {
    jacobi_i128(a as i128 * b as i128, p)
}

/// `prod_{p | y0} (1 + (y1 y2|p)) prod_{p | y1} (1 + (y0 y2|p)) prod_{p | y2} (1 + (-y0 y1|p))`
/// over odd primes.
pub fn rho_y(y: &FiberIndex) -> u64 {
    let [y0, y1, y2] = y.entries();
    let others = [(y1, y2), (y0, y2), (-y0, y1)];
    let mut rho = 1u64;
    for (j, &(s, t)) in others.iter().enumerate() {
        let f = factorize_u64(y.abs()[j]).expect("nonzero");
        for p in f.primes().filter(|&p| p > 2) {
            rho *= (1 + residue_product(s, t, p)) as u64;
            if rho == 0 {
                return 0;
            }
        }
    }
    rho
}

/// Closed form of the 2-adic density of the conic `y`.
pub fn sigma_2y_closed(y: &FiberIndex) -> u8 {
    let [y0, y1, y2] = y.entries();
    let m4 = |v: i64| v.rem_euclid(4);
    let m8 = |v: i64| v.rem_euclid(8);
    if y0 % 2 != 0 && y1 % 2 != 0 && y2 % 2 != 0 {
        if m4(y0) == m4(y1) && m4(y1) == m4(-y2) {
            0
        } else {
            1
        }
    } else if y0 % 2 == 0 {
        if m8(y1) == m8(y2) {
            2
        } else {
            0
        }
    } else if y1 % 2 == 0 {
        if m8(y0) == m8(y2) {
            2
        } else {
            0
        }
    } else if m8(y0) == m8(-y1) {
        2
    } else {
        0
    }
}

pub const SIGMA_2Y_MAX_R: u32 = 14;

/// The finite-level 2-adic density: `2^{-2r}` times the number of
/// `x mod 2^r` with `y0^3 x0^2 + y1^3 x1^2 = y2^3 x2^2 (mod 2^r)` and some
/// `x_i y_i` odd.
pub fn sigma_2y_limit(y: &FiberIndex, r: u32) -> Result<Ratio<u64>> {
    if r == 0 || r > SIGMA_2Y_MAX_R {
        return Err(Error::OutOfRange {
            what: "r",
            value: r as u64,
            range: "1..=14",
        });
    }
    let m = 1u64 << r;
    let mask = m - 1;
    // all[i][s]: #{x : y_i^3 x^2 = s}; even[i][s]: same with x y_i even
    let mut all = vec![vec![0u64; m as usize]; 3];
    let mut even = vec![vec![0u64; m as usize]; 3];
    for (i, &yi) in y.entries().iter().enumerate() {
        let c = ((yi as i128).pow(3)).rem_euclid(m as i128) as u64;
        for x in 0..m {
            let s = (c * ((x * x) & mask)) & mask;
            all[i][s as usize] += 1;
            if x % 2 == 0 || yi % 2 == 0 {
                even[i][s as usize] += 1;
            }
        }
    }
    let count = |h: &[Vec<u64>]| -> u64 {
        let s0: Vec<(usize, u64)> = h[0].iter().copied().enumerate().filter(|e| e.1 > 0).collect();
        let s1: Vec<(usize, u64)> = h[1].iter().copied().enumerate().filter(|e| e.1 > 0).collect();
        let mut total = 0u64;
        for &(a, ca) in &s0 {
            for &(b, cb) in &s1 {
                total += ca * cb * h[2][(a + b) & mask as usize];
            }
        }
        total
    };
    let good = count(&all) - count(&even);
    Ok(Ratio::new(good, m * m))
}

/// `1 + 1/p + 3 p^{-3/2}`, valid for every prime including 2.
pub fn sigma_p_three(p: u64) -> f64 {
    let p = p as f64;
    1.0 + 1.0 / p + 3.0 * p.powf(-1.5)
}

/// `3 pi`.
pub fn sigma_inf_three() -> f64 {
    3.0 * PI
}

pub fn sigma_p_binary(p: u64, params: &BinaryFormParams) -> f64 {
    if p == 2 || params.a % p == 0 || params.b % p == 0 {
        return 1.0;
    }
    let ab = params.ab() as i128;
    let chi = jacobi_i128(-ab, p) as f64;
    let pf = p as f64;
    1.0 + 1.0 / pf + (1.0 + chi) * pf.powf(-1.5)
}

pub fn sigma_inf_binary(params: &BinaryFormParams) -> f64 {
    let a = params.a as f64;
    let b = params.b as f64;
    2.0 * ((a / b).sqrt().asinh() / a.sqrt() + (b / a).sqrt().asinh() / b.sqrt())
}

pub const ORACLE_MAX_DEPTH: u32 = 8;
/// Largest `p^depth` the oracles will enumerate.
pub const ORACLE_MAX_RESIDUES: u64 = 1_000_000_000;
/// Added to every oracle tail bound to cover floating-point evaluation.
const ORACLE_ROUNDING: f64 = 1e-12;

fn oracle_modulus(p: u64, depth: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !(2..=ORACLE_MAX_DEPTH).contains(&depth) {
        return Err(Error::OutOfRange {
            what: "depth",
            value: depth as u64,
            range: "2..=8",
        });
    }
    match p.checked_pow(depth) {
        Some(m) if m <= ORACLE_MAX_RESIDUES => Ok(m),
        _ => Err(Error::OutOfRange {
            what: "p^depth",
            value: p.saturating_pow(depth),
            range: "at most 1e9",
        }),
    }
}

/// `int_{nu(t) >= D} |t|^{-1/2} dt` over `Z_p`.
fn singular_class_mass(p: f64, depth: u32) -> f64 {
    (1.0 - 1.0 / p) * p.powf(-(depth as f64) / 2.0) / (1.0 - p.powf(-0.5))
}

/// Sum of `counts[v] p^{v/2} / M`.
fn weighted(counts: &[u64], p: f64, m: f64) -> f64 {
    counts
        .iter()
        .enumerate()
        .map(|(v, &c)| c as f64 * p.powf(v as f64 / 2.0))
        .sum::<f64>()
        / m
}

/// Residue-counting evaluation of the p-adic density of the three-point
/// orbifold, integrating `|t (1+t)|^{-1/2} max(1, |t|, |1+t|)^{-1/2}` over
/// `t` with `nu(t), nu(1+t)` both different from `1` and `-1`.
///
/// The classes `t = 0`, `t = -1` and `t = infinity` mod `p^depth` are left out;
/// `tail_bound` is their total mass.
pub fn sigma_p_three_oracle(p: u64, depth: u32) -> Result<DensityValue> {
    let m = oracle_modulus(p, depth)?;
    let d = depth as usize;
    // counts[v_t][v_1t] over t in Z_p
    let mut finite = vec![vec![0u64; d]; d];
    for t in 1..m - 1 {
        let vt = val_u64(p, t) as usize;
        let v1 = val_u64(p, t + 1) as usize;
        if vt != 1 && v1 != 1 {
            finite[vt][v1] += 1;
        }
    }
    // t = 1/s with p | s, s != 0: integrand |s|^{-1/2}, needs nu(s) != 1
    let mut inverted = vec![0u64; d];
    for s in (p..m).step_by(p as usize) {
        let vs = val_u64(p, s) as usize;
        if vs != 1 {
            inverted[vs] += 1;
        }
    }
    let pf = p as f64;
    let mf = m as f64;
    let mut value = weighted(&inverted, pf, mf);
    for (vt, row) in finite.iter().enumerate() {
        for (v1, &c) in row.iter().enumerate() {
            value += c as f64 * pf.powf((vt + v1) as f64 / 2.0) / mf;
        }
    }
    Ok(DensityValue {
        value,
        tail_bound: 3.0 * singular_class_mass(pf, depth) + ORACLE_ROUNDING,
    })
}

fn campana_ok(v: i64) -> bool {
    v != 1 && !(v < 0 && v % 2 != 0)
}

/// Residue-counting evaluation of the p-adic density of `a x^2 + b y^2`,
/// integrating `|a z^2 + b|^{-1/2} / max(1, |z|)` over `z` with
/// `nu(a z^2 + b)` neither 1 nor a negative odd integer.
///
/// Classes where `a z^2 + b = 0 mod p^depth` are left out. They only occur
/// when `p` does not divide `2ab`, where each carries the mass of a simple
/// root and `tail_bound` is their total.
pub fn sigma_p_binary_oracle(p: u64, params: &BinaryFormParams, depth: u32) -> Result<DensityValue> {
    let m = oracle_modulus(p, depth)?;
    let d = depth as usize;
    let (a, b) = ((params.a % m) as u128, (params.b % m) as u128);
    let mm = m as u128;
    let mut finite = vec![0u64; d];
    let mut singular = 0u64;
    for z in 0..m {
        let z = z as u128;
        let f = ((a * ((z * z) % mm)) % mm + b) % mm;
        if f == 0 {
            singular += 1;
            continue;
        }
        let v = val_u64(p, f as u64);
        if campana_ok(v as i64) {
            finite[v as usize] += 1;
        }
    }
    // z = 1/s, p | s: nu(f) = nu(a + b s^2) - 2 nu(s), integrand |a + b s^2|^{-1/2}
    let mut inverted = vec![0u64; d];
    for s in (p..m).step_by(p as usize) {
        let vs = val_u64(p, s) as i64;
        let s = s as u128;
        let g = (a + (b * ((s * s) % mm)) % mm) % mm;
        if g == 0 {
            return Err(Error::InvalidParams(format!(
                "unexpected singular class at infinity for p = {p}"
            )));
        }
        let vg = val_u64(p, g as u64) as i64;
        if campana_ok(vg - 2 * vs) {
            inverted[vg as usize] += 1;
        }
    }
    // s = 0 mod p^depth: nu(f) = nu(a) - 2 nu(s) is negative, odd iff nu(a) is
    let va = val_u64(p, params.a) as usize;
    if va % 2 == 0 {
        inverted[va] += 1;
    }
    if singular > 0 && (p == 2 || params.a % p == 0 || params.b % p == 0) {
        return Err(Error::InvalidParams(format!(
            "unexpected singular residue class for p = {p}"
        )));
    }
    let pf = p as f64;
    let mf = m as f64;
    let value = weighted(&finite, pf, mf) + weighted(&inverted, pf, mf);
    Ok(DensityValue {
        value,
        tail_bound: singular as f64 * singular_class_mass(pf, depth) + ORACLE_ROUNDING,
    })
}
