//! Exact point counts.
//!
//! Counts that carry a factor 1/2 are stored as a raw integer and a divisor so
//! every number handled here is an exact integer.

mod cache;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use bitvec::prelude::*;
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize_u64, is_perfect_square, is_squarefree, primes_up_to};
use crate::error::{Error, Result};
use crate::localdensity::{BinaryFormParams, FiberIndex};

pub use cache::{cache_key_binary, cache_key_conic, CountCache, CACHE_DIR_ENV};

/// An exact count at height bound `B`; the count is `raw_count / divisor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    #[serde(rename = "B")]
    pub bound: u64,
    pub raw_count: u64,
    pub divisor: u64,
}

impl CountRecord {
    pub fn new(bound: u64, raw_count: u64, divisor: u64) -> Self {
        assert!(divisor > 0);
        CountRecord {
            bound,
            raw_count,
            divisor,
        }
    }

    pub fn value(&self) -> f64 {
        self.raw_count as f64 / self.divisor as f64
    }

    pub fn exact(&self) -> Ratio<u64> {
        Ratio::new(self.raw_count, self.divisor)
    }
}

/// Squareful numbers in `[1, b]` paired with the squarefree `y` of `z = x^2 y^3`,
/// sorted by `z`.
pub fn squareful_entries(b: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut y = 1u64;
    while y.saturating_pow(3) <= b {
        if is_squarefree(y) {
            let y3 = y.pow(3);
            let mut x = 1u64;
            while x * x <= b / y3 {
                out.push((x * x * y3, y));
                x += 1;
            }
        }
        y += 1;
    }
    out.sort_unstable();
    out
}

/// The squareful integers in `[1, b]`, ascending.
pub fn squareful_list(b: u64) -> Vec<u64> {
    squareful_entries(b).into_iter().map(|e| e.0).collect()
}

fn membership(list: &[u64], b: u64) -> BitVec {
    let mut bits = bitvec![0; b as usize + 1];
    for &z in list {
        bits.set(z as usize, true);
    }
    bits
}

/// Visit every primitive `(z0, z1, z2)` with `z0 + z1 = z2`, all nonzero,
/// squareful and at most `b` in absolute value.
fn for_each_signed_triple(b: u64, mut visit: impl FnMut(i64, i64, i64)) {
    let list = squareful_list(b);
    let member = membership(&list, b);
    let is_member = |z: i64| {
        let m = z.unsigned_abs();
        z != 0 && m <= b && member[m as usize]
    };
    for &u in &list {
        for &v in &list {
            let (u, v) = (u as i64, v as i64);
            for (z0, z1) in [(u, v), (u, -v), (-u, v), (-u, -v)] {
                let z2 = z0 + z1;
                if is_member(z2) && u.gcd(&v) == 1 {
                    visit(z0, z1, z2);
                }
            }
        }
    }
}

/// `N_1(B)`: half the number of primitive squareful triples `z0 + z1 = z2` in
/// nonzero integers of absolute value at most `B`.
pub fn count_n1(b: u64) -> CountRecord {
    let mut raw = 0u64;
    for_each_signed_triple(b, |_, _, _| raw += 1);
    CountRecord::new(b, raw, 2)
}

/// The same count restricted to positive triples, without the factor 1/2.
pub fn count_n1_tilde(b: u64) -> CountRecord {
    let list = squareful_list(b);
    let member = membership(&list, b);
    let mut raw = 0u64;
    for &u in &list {
        for &v in &list {
            let w = u + v;
            if w > b {
                break;
            }
            if member[w as usize] && u.gcd(&v) == 1 {
                raw += 1;
            }
        }
    }
    CountRecord::new(b, raw, 1)
}

/// Raw counts of signed triples with `z0 > 0`, `z1 > 0`, `z2 < 0`.
pub fn count_impossible_sign_pattern(b: u64) -> u64 {
    let mut raw = 0;
    for_each_signed_triple(b, |z0, z1, z2| {
        if z0 > 0 && z1 > 0 && z2 < 0 {
            raw += 1;
        }
    });
    raw
}

/// `max(|z0|, |z1|, |z0 + z1|)` for coprime `z0`, `z1`.
pub fn height_h(z0: i64, z1: i64) -> Result<u64> {
    if z0.gcd(&z1) != 1 {
        return Err(Error::InvalidParams(format!("({z0}, {z1}) are not coprime")));
    }
    let s = z0 as i128 + z1 as i128;
    Ok((z0.unsigned_abs() as u128)
        .max(z1.unsigned_abs() as u128)
        .max(s.unsigned_abs()) as u64)
}

/// Raw signed-triple counts at height `b`, keyed by the `|y|`-profile
/// `(y(|z0|), y(|z1|), y(|z2|))`.
pub fn fiber_counts(b: u64) -> BTreeMap<[u64; 3], u64> {
    let kernel: HashMap<u64, u64> = squareful_entries(b).into_iter().collect();
    let mut out = BTreeMap::new();
    for_each_signed_triple(b, |z0, z1, z2| {
        let key = [z0, z1, z2].map(|z| kernel[&z.unsigned_abs()]);
        *out.entry(key).or_insert(0) += 1;
    });
    out
}

/// Campana points of height at most `b` whose decomposition has `|y|`-profile `y`.
pub fn thin_fiber_count(y: &FiberIndex, b: u64) -> Result<CountRecord> {
    if !y.is_positive() {
        let [a, c, d] = y.entries();
        return Err(Error::InvalidFiber(a, c, d, "entries must be positive"));
    }
    let key = y.abs();
    let mut raw = 0;
    for_each_signed_triple(b, |z0, z1, z2| {
        let [a, c, d] = [z0, z1, z2].map(|z| squareful_kernel(z.unsigned_abs()));
        if [a, c, d] == key {
            raw += 1;
        }
    });
    Ok(CountRecord::new(b, raw, 2))
}

fn squareful_kernel(z: u64) -> u64 {
    let f = factorize_u64(z).expect("nonzero");
    f.factors().iter().filter(|&&(_, e)| e % 2 == 1).map(|&(p, _)| p).product()
}

/// Points in the union of fibers with every `y_i <= m`, at height at most `b`.
pub fn thin_set_count(m: u64, b: u64) -> CountRecord {
    thin_set_counts_from(&fiber_counts(b), m, b)
}

pub fn thin_set_counts_from(fibers: &BTreeMap<[u64; 3], u64>, m: u64, b: u64) -> CountRecord {
    let raw = fibers
        .iter()
        .filter(|(k, _)| k.iter().all(|&y| y <= m))
        .map(|(_, &c)| c)
        .sum();
    CountRecord::new(b, raw, 2)
}

/// A point `[x0 : x1 : x2]` on a conic, first coordinate positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConicPoint {
    pub x0: i64,
    pub x1: i64,
    pub x2: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicCount {
    /// `bound` is `floor(T)`.
    pub record: CountRecord,
    /// `floor(T^2)`, the bound on `max |y_i^3 x_i^2|`.
    pub height_sq_bound: u64,
    /// Sorted, when requested.
    pub points: Option<Vec<ConicPoint>>,
}

/// Positive solutions `(x0, x1, x2)` of `y0^3 x0^2 + y1^3 x1^2 = y2^3 x2^2`
/// with `max y_i^3 x_i^2 <= h2` and `gcd(x0 y0, x1 y1, x2 y2) = 1`.
fn conic_positive_solutions_scan(y: [u64; 3], h2: u64) -> Vec<[u64; 3]> {
    let c = y.map(|v| v.pow(3));
    let mut out = Vec::new();
    let mut x0 = 1u64;
    while c[0] * x0 * x0 <= h2 {
        let l0 = c[0] * x0 * x0;
        let mut x1 = 1u64;
        while l0 + c[1] * x1 * x1 <= h2 {
            let s = l0 + c[1] * x1 * x1;
            if s % c[2] == 0 {
                if let Some(x2) = is_perfect_square(s / c[2]) {
                    if (x0 * y[0]).gcd(&(x1 * y[1])).gcd(&(x2 * y[2])) == 1 {
                        out.push([x0, x1, x2]);
                    }
                }
            }
            x1 += 1;
        }
        x0 += 1;
    }
    out
}

fn divisors_of(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out
}

/// Same as the scan when `y1 = y2 = 1`, by factoring `x2^2 - x1^2 = y0^3 x0^2`.
fn conic_positive_solutions_divisor(y0: u64, h2: u64) -> Vec<[u64; 3]> {
    let c0 = y0.pow(3);
    let t = h2.isqrt();
    let y0f = factorize_u64(y0).expect("nonzero");
    let mut out = Vec::new();
    let mut x0 = 1u64;
    while c0 * x0 * x0 < h2 {
        let n = c0 * x0 * x0;
        let mut exps: BTreeMap<u64, u32> = BTreeMap::new();
        for &(p, e) in factorize_u64(x0).expect("nonzero").factors() {
            *exps.entry(p).or_default() += 2 * e;
        }
        for &(p, e) in y0f.factors() {
            *exps.entry(p).or_default() += 3 * e;
        }
        let factors: Vec<(u64, u32)> = exps.into_iter().collect();
        for d in divisors_of(&factors) {
            let e = n / d;
            if d >= e || (e - d) % 2 != 0 {
                continue;
            }
            let (x1, x2) = ((e - d) / 2, (e + d) / 2);
            if x2 > t {
                continue;
            }
            if (x0 * y0).gcd(&x1).gcd(&x2) == 1 {
                out.push([x0, x1, x2]);
            }
        }
        x0 += 1;
    }
    out
}

/// Positive solutions, using the divisor method when two of the `y_i` are 1
/// and one of them is `y2`.
pub fn conic_positive_solutions(y: &FiberIndex, h2: u64, force_scan: bool) -> Vec<[u64; 3]> {
    let a = y.abs();
    let mut sols = if force_scan || a[2] != 1 || (a[0] != 1 && a[1] != 1) {
        conic_positive_solutions_scan(a, h2)
    } else if a[1] == 1 {
        conic_positive_solutions_divisor(a[0], h2)
    } else {
        conic_positive_solutions_divisor(a[1], h2)
            .into_iter()
            .map(|[u, v, w]| [v, u, w])
            .collect()
    };
    sols.sort_unstable();
    sols
}

pub const MAX_CONIC_HEIGHT: f64 = 1e8;

/// Projective points `[x0 : x1 : x2]` with all `x_i` nonzero on the conic
/// `y0^3 x0^2 + y1^3 x1^2 = y2^3 x2^2`, with `max |y_i^3 x_i^2|^{1/2} <= t` and
/// `gcd(x0 y0, x1 y1, x2 y2) = 1`.
pub fn count_conic_plus(y: &FiberIndex, t: f64, keep_points: bool) -> Result<ConicCount> {
    if !y.is_positive() {
        let [a, b, c] = y.entries();
        return Err(Error::InvalidFiber(a, b, c, "entries must be positive"));
    }
    if !(t > 0.0 && t <= MAX_CONIC_HEIGHT) {
        return Err(Error::InvalidParams(format!("height bound {t} must be in (0, 1e8]")));
    }
    let h2 = (t * t).floor() as u64;
    let sols = conic_positive_solutions(y, h2, false);
    let points = keep_points.then(|| {
        let mut set = BTreeSet::new();
        for &[x0, x1, x2] in &sols {
            let (x0, x1, x2) = (x0 as i64, x1 as i64, x2 as i64);
            for (s1, s2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                set.insert(ConicPoint { x0, x1: s1 * x1, x2: s2 * x2 });
            }
        }
        set.into_iter().collect()
    });
    Ok(ConicCount {
        record: CountRecord::new(t.floor() as u64, 4 * sols.len() as u64, 1),
        height_sq_bound: h2,
        points,
    })
}

pub const MAX_BINARY_BOUND: u64 = 100_000;

/// `N(B)`: half the number of coprime `(x, y)` with `|x|, |y| <= B` and
/// `a x^2 + b y^2` squareful.
pub fn count_n_binary(params: &BinaryFormParams, b: u64) -> Result<CountRecord> {
    if b == 0 || b > MAX_BINARY_BOUND {
        return Err(Error::OutOfRange {
            what: "B",
            value: b,
            range: "1..=1e5",
        });
    }
    let (pa, pb) = (params.a(), params.b());
    let fmax = (pa + pb) * b * b;
    let mut limit = (fmax as f64).cbrt() as u64 + 2;
    while limit.pow(3) > fmax && limit > 2 {
        limit -= 1;
    }
    let primes: Vec<u64> = primes_up_to(limit.max(2)).into_iter().filter(|&p| p > 2).collect();
    // s_p with s_p^2 = -a / b mod p, when p does not divide ab
    let roots: Vec<Option<u64>> = primes
        .iter()
        .map(|&p| {
            if pa % p == 0 || pb % p == 0 {
                return None;
            }
            let t = (p - pa % p) % p * inverse_mod(pb % p, p) % p;
            (0..p).find(|&s| s * s % p == t)
        })
        .collect();

    let n = b as usize + 1;
    let mut rem = vec![0u64; n];
    let mut bad = bitvec![0; n];
    let mut raw = 0u64;
    for x in 0..=b {
        let xf = factorize_u64(x.max(1)).expect("nonzero");
        if x > 0 && xf.primes().any(|p| pb % p == 0 && p > 2) {
            continue;
        }
        bad.fill(false);
        // non-coprime pairs and pairs with both coordinates odd
        if x == 0 {
            bad.fill(true);
            bad.set(1, false);
        } else {
            for q in xf.primes() {
                for yy in (0..n).step_by(q as usize) {
                    bad.set(yy, true);
                }
            }
            if x % 2 == 1 {
                for yy in (1..n).step_by(2) {
                    bad.set(yy, true);
                }
            }
        }
        for (yy, r) in rem.iter_mut().enumerate() {
            let yy = yy as u64;
            *r = pa * x * x + pb * yy * yy;
        }
        for (i, &p) in primes.iter().enumerate() {
            let classes: Vec<u64> = if x % p == 0 {
                continue;
            } else if pa % p == 0 {
                // v_p(f) = 1 when p | y
                for yy in (0..n).step_by(p as usize) {
                    bad.set(yy, true);
                }
                continue;
            } else if let Some(s) = roots[i] {
                let r = x % p * s % p;
                if r == 0 {
                    vec![0]
                } else {
                    vec![r, p - r]
                }
            } else {
                continue;
            };
            for c in classes {
                for yy in (c as usize..n).step_by(p as usize) {
                    if bad[yy] {
                        continue;
                    }
                    let mut e = 0;
                    while rem[yy] % p == 0 {
                        rem[yy] /= p;
                        e += 1;
                    }
                    if e == 1 {
                        bad.set(yy, true);
                    }
                }
            }
        }
        for yy in 0..n {
            if bad[yy] {
                continue;
            }
            let r = rem[yy];
            if r == 1 || is_perfect_square(r).is_some() {
                let w = if x > 0 { 2 } else { 1 } * if yy > 0 { 2 } else { 1 };
                raw += w;
            }
        }
    }
    Ok(CountRecord::new(b, raw, 2))
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    // p prime
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// `N_v(B)`: half the number of `(x, y, u)` with `gcd(x, y) = 1`,
/// `|x|, |y| <= B` and `a x^2 + b y^2 = u^2 v^3`.
pub fn count_nv_binary(params: &BinaryFormParams, v: u64, b: u64) -> Result<CountRecord> {
    if v == 0 || !is_squarefree(v) {
        return Err(Error::InvalidParams(format!("v = {v} must be positive and squarefree")));
    }
    if b == 0 || b > 5_000 {
        return Err(Error::OutOfRange {
            what: "B",
            value: b,
            range: "1..=5000",
        });
    }
    let v3 = v
        .checked_pow(3)
        .ok_or(Error::Overflow("count_nv_binary"))?;
    let (pa, pb) = (params.a(), params.b());
    let mut raw = 0u64;
    for x in 0..=b {
        for y in 0..=b {
            if x.gcd(&y) != 1 {
                continue;
            }
            let f = pa * x * x + pb * y * y;
            if f % v3 == 0 && is_perfect_square(f / v3).is_some() {
                let w = if x > 0 { 2 } else { 1 } * if y > 0 { 2 } else { 1 };
                // two signs of u
                raw += 2 * w;
            }
        }
    }
    Ok(CountRecord::new(b, raw, 2))
}

/// Returns `(2 N(B), sum_v mu^2(abv) N_v(B))` as exact integers; the identity
/// says they are equal.
pub fn binary_decomposition_identity(params: &BinaryFormParams, b: u64) -> Result<(u64, u64)> {
    let n = count_n_binary(params, b)?;
    let fmax = (params.a() + params.b()) * b * b;
    let mut sum = Ratio::from_integer(0u64);
    let mut v = 1u64;
    while v.pow(3) <= fmax {
        if is_squarefree(v) && v.gcd(&params.ab()) == 1 {
            sum += count_nv_binary(params, v, b)?.exact();
        }
        v += 1;
    }
    let rhs = sum.to_integer();
    assert!(sum.is_integer());
    Ok((n.raw_count, rhs))
}

/// The least solution of `a x1^2 + b x2^2 = v^3 x3^2` in positive integers
/// with `gcd(x1, x2) = 1`, ordered by sup-norm and then lexicographically,
/// searching sup-norm up to `search_bound`.
pub fn small_coprime_solution(
    params: &BinaryFormParams,
    v: u64,
    search_bound: u64,
) -> Result<Option<(u64, u64, u64)>> {
    if v == 0 || !is_squarefree(v) || v.gcd(&params.ab()) != 1 {
        return Err(Error::InvalidParams(format!("v = {v} must be squarefree and coprime to ab")));
    }
    if search_bound == 0 || search_bound > 1_000_000 {
        return Err(Error::OutOfRange {
            what: "search bound",
            value: search_bound,
            range: "1..=1e6",
        });
    }
    let v3 = v as u128 * v as u128 * v as u128;
    let (pa, pb) = (params.a() as u128, params.b() as u128);
    let mut best: Option<(u64, u64, u64, u64)> = None;
    for x1 in 1..=search_bound {
        if best.is_some_and(|b| x1 > b.0) {
            break;
        }
        for x2 in 1..=search_bound {
            if best.is_some_and(|b| x2 > b.0) {
                break;
            }
            let f = pa * (x1 as u128).pow(2) + pb * (x2 as u128).pow(2);
            if f % v3 != 0 {
                continue;
            }
            let q = f / v3;
            let r = q.isqrt();
            if r * r != q || r > search_bound as u128 || x1.gcd(&x2) != 1 {
                continue;
            }
            let x3 = r as u64;
            let cand = (x1.max(x2).max(x3), x1, x2, x3);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    Ok(best.map(|(_, a, b, c)| (a, b, c)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    /// `(B, count / B^exponent)` in the order given.
    pub ratios: Vec<(u64, f64)>,
    /// The ratio at the largest bound.
    pub last: f64,
}

/// Normalized counts `count / B^exponent`.
pub fn slope(records: &[CountRecord], exponent: Ratio<i64>) -> Result<SlopeReport> {
    if records.len() < 2 {
        return Err(Error::InvalidParams("slope needs at least two records".into()));
    }
    if records.windows(2).any(|w| w[0].bound >= w[1].bound) {
        return Err(Error::InvalidParams("slope needs strictly increasing bounds".into()));
    }
    let e = *exponent.numer() as f64 / *exponent.denom() as f64;
    let ratios: Vec<(u64, f64)> = records
        .iter()
        .map(|r| (r.bound, r.value() / (r.bound as f64).powf(e)))
        .collect();
    let last = ratios.last().unwrap().1;
    Ok(SlopeReport { ratios, last })
}
