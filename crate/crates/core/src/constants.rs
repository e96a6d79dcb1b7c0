//! Fiber-sum constants and their comparison with the predicted ones.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize_u64, is_prime, jacobi_u64, spf_table};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::eulerprod::{cor16_half, cor16_ratio, twisted_product, PrimeSelection, TwistedProduct};
use crate::localdensity::{
    gamma_f64, rho_y, sigma_2y_closed, sigma_inf_binary, BinaryFormParams, FiberIndex,
};

/// How `tail_estimate` relates to the true constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `|true - value| <= tail_estimate + rounding_allowance`.
    Symmetric,
    /// `value <= true <= value + tail_estimate`, up to rounding.
    Upper,
    /// An extrapolated estimate of the missing mass; only `value` itself is a
    /// guaranteed lower bound.
    Heuristic,
}

/// A computed constant together with its pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub name: String,
    pub value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma_inf: f64,
    pub exponent_a: Ratio<i64>,
    pub exponent_b: Ratio<i64>,
    pub truncation: String,
    pub tail_estimate: f64,
    pub tail_kind: TailKind,
    pub rounding_allowance: f64,
    /// Named sub-quantities the value was assembled from.
    pub components: BTreeMap<String, f64>,
}

impl ConstantReport {
    /// A guaranteed enclosure, when the tail is rigorous.
    pub fn enclosure(&self) -> Option<Enclosure> {
        let r = self.rounding_allowance;
        match self.tail_kind {
            TailKind::Symmetric => Some(Enclosure::around(self.value, self.tail_estimate + r)),
            TailKind::Upper => Some(Enclosure::new(
                (self.value - r).next_down(),
                (self.value + self.tail_estimate + r).next_up(),
            )),
            TailKind::Heuristic => None,
        }
    }

    /// A guaranteed lower bound for the constant.
    pub fn lower_bound(&self) -> f64 {
        match self.enclosure() {
            Some(e) => e.lo,
            None => (self.value - self.rounding_allowance).next_down(),
        }
    }

    /// `value + tail_estimate`: the best point estimate of the full constant.
    pub fn estimate(&self) -> f64 {
        match self.tail_kind {
            TailKind::Symmetric => self.value,
            TailKind::Upper | TailKind::Heuristic => self.value + self.tail_estimate,
        }
    }
}

/// Peyre constant of the conic `y`: `4/pi * gamma(n) n^{-3/2} sigma_2 rho` with `n = y0 y1 y2`.
pub fn peyre_fiber_constant(y: &FiberIndex) -> Result<f64> {
    if !y.is_positive() {
        let [a, b, c] = y.entries();
        return Err(Error::InvalidFiber(a, b, c, "entries must be positive"));
    }
    let n = y.product_abs()?;
    let s2 = sigma_2y_closed(y) as f64;
    let rho = rho_y(y) as f64;
    Ok(4.0 / PI * gamma_f64(n) * (n as f64).powf(-1.5) * s2 * rho)
}

pub const MAX_CBV_TRUNCATION: u64 = 50_000_000;

/// `sum_{n} gamma(n) n^{-3/2} sum_{y0 y1 y2 = n} sigma_2 rho` over squarefree `n`.
struct FiberSum {
    spf: Vec<u32>,
}

impl FiberSum {
    fn new(limit: u64) -> Self {
        FiberSum {
            spf: spf_table(limit as usize),
        }
    }

    /// Distinct primes of `n`, or `None` if `n` is not squarefree.
    fn squarefree_primes(&self, mut n: usize, out: &mut Vec<u64>) -> bool {
        out.clear();
        while n > 1 {
            let p = self.spf[n] as usize;
            n /= p;
            if n % p == 0 {
                return false;
            }
            out.push(p as u64);
        }
        true
    }

    /// `sum_{y0 y1 y2 = n} sigma_2(y) rho(y)` for squarefree `n` with the given primes.
    fn weight(primes: &[u64]) -> u64 {
        let w = primes.len();
        // legendre[i][k] = (p_k | p_i) for odd p_i
        let mut legendre = vec![[0i8; 16]; w];
        let mut minus_one = [1i8; 16];
        for (i, &p) in primes.iter().enumerate() {
            if p == 2 {
                continue;
            }
            minus_one[i] = jacobi_u64(p - 1, p);
            for (k, &q) in primes.iter().enumerate() {
                if k != i {
                    legendre[i][k] = jacobi_u64(q % p, p);
                }
            }
        }
        let mut slots = vec![0u8; w];
        let mut total = 0u64;
        loop {
            let mut y = [1u64; 3];
            for (i, &p) in primes.iter().enumerate() {
                y[slots[i] as usize] *= p;
            }
            let fiber = FiberIndex::new(y[0] as i64, y[1] as i64, y[2] as i64).expect("squarefree");
            let s2 = sigma_2y_closed(&fiber) as u64;
            if s2 != 0 {
                let mut rho = 1u64;
                for i in 0..w {
                    if primes[i] == 2 {
                        continue;
                    }
                    let mut sym = if slots[i] == 2 { minus_one[i] } else { 1 };
                    for k in 0..w {
                        if k != i && slots[k] != slots[i] {
                            sym *= legendre[i][k];
                        }
                    }
                    rho *= (1 + sym) as u64;
                    if rho == 0 {
                        break;
                    }
                }
                total += s2 * rho;
            }
            // next assignment in base 3
            let mut i = 0;
            while i < w {
                slots[i] += 1;
                if slots[i] < 3 {
                    break;
                }
                slots[i] = 0;
                i += 1;
            }
            if i == w {
                return total;
            }
        }
    }

    fn term(&self, n: u64, scratch: &mut Vec<u64>) -> f64 {
        if !self.squarefree_primes(n as usize, scratch) {
            return 0.0;
        }
        let w = Self::weight(scratch);
        if w == 0 {
            return 0.0;
        }
        let gamma: f64 = scratch
            .iter()
            .filter(|&&p| p > 2)
            .map(|&p| p as f64 / (p as f64 + 1.0))
            .product();
        gamma * (n as f64).powf(-1.5) * w as f64
    }
}

/// Partial sums of the fiber-sum constant (already divided by pi) over
/// `y0 y1 y2 <= t`, for each checkpoint `t` in increasing order.
pub fn c_bv_partial_sums(checkpoints: &[u64]) -> Result<Vec<(u64, f64)>> {
    let mut cps: Vec<u64> = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    let Some(&limit) = cps.last() else {
        return Ok(Vec::new());
    };
    if cps[0] == 0 || limit > MAX_CBV_TRUNCATION {
        return Err(Error::OutOfRange {
            what: "c_bv truncation",
            value: limit,
            range: "1..=5e7",
        });
    }
    let fs = FiberSum::new(limit);
    let mut scratch = Vec::with_capacity(16);
    let mut out = Vec::with_capacity(cps.len());
    let mut acc = 0.0f64;
    let mut next = 0;
    for n in 1..=limit {
        acc += fs.term(n, &mut scratch);
        while next < cps.len() && cps[next] == n {
            out.push((n, acc / PI));
            next += 1;
        }
    }
    Ok(out)
}

/// Fit `S(t) = c - t^{-1/2} (alpha + beta ln t)` through three points; returns `c`.
fn extrapolate(points: &[(u64, f64); 3]) -> f64 {
    let rows: Vec<[f64; 4]> = points
        .iter()
        .map(|&(t, s)| {
            let t = t as f64;
            let u = t.powf(-0.5);
            [1.0, -u, -u * t.ln(), s]
        })
        .collect();
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [0, 1, 2].map(|i| [rows[i][0], rows[i][1], rows[i][2]]);
    let ac = [0, 1, 2].map(|i| [rows[i][3], rows[i][1], rows[i][2]]);
    det3(ac) / det3(a)
}

/// Rankin bound for the part of the fiber sum with `y0 y1 y2 > y`, using
/// `sigma_2 rho <= 2 * 2^omega` and `3^omega` ordered factorizations.
pub fn c_bv_rankin_tail(y: u64) -> f64 {
    let primes = crate::arith::primes_up_to(100_000);
    let big_p = 100_000f64;
    let mut best = f64::INFINITY;
    for step in 1..=45 {
        let delta = step as f64 / 100.0;
        let s = 1.5 - delta;
        let log_prod: f64 = primes.iter().map(|&p| (6.0 * (p as f64).powf(-s)).ln_1p()).sum::<f64>()
            + 6.0 * big_p.powf(1.0 - s) / (s - 1.0);
        best = best.min(2.0 / PI * (log_prod - delta * (y as f64).ln()).exp());
    }
    best
}

/// The fiber-sum constant truncated at `y0 y1 y2 <= y_prod`.
///
/// `value` is the partial sum, a lower bound since all terms are
/// nonnegative. `tail_estimate` extrapolates the partial sums at
/// `y_prod / 100`, `y_prod / 10` and `y_prod`; it is zero when `y_prod < 100`.
pub fn c_bv(y_prod: u64) -> Result<ConstantReport> {
    let cps = [y_prod / 100, y_prod / 10, y_prod];
    let sums = c_bv_partial_sums(&[1, y_prod / 100, y_prod / 10, y_prod].map(|t| t.max(1)))?;
    let lookup = |t: u64| sums.iter().find(|e| e.0 == t.max(1)).unwrap().1;
    let value = lookup(y_prod);
    let (tail, fit) = if y_prod >= 100 {
        let c = extrapolate(&cps.map(|t| (t, lookup(t))));
        ((c - value).max(0.0), c)
    } else {
        (0.0, value)
    };
    let mut components = BTreeMap::new();
    for t in cps {
        components.insert(format!("partial_sum_{}", t.max(1)), lookup(t));
    }
    components.insert("extrapolated".into(), fit);
    components.insert("rigorous_tail_bound".into(), c_bv_rankin_tail(y_prod));
    Ok(ConstantReport {
        name: "c_bv".into(),
        value,
        alpha: 0.125,
        beta: 1.0,
        sigma_inf: 3.0 * PI,
        exponent_a: Ratio::new(1, 2),
        exponent_b: Ratio::from_integer(1),
        truncation: format!("y0*y1*y2 <= {y_prod}"),
        tail_estimate: tail,
        tail_kind: TailKind::Heuristic,
        rounding_allowance: value * y_prod as f64 * 4.0 * f64::EPSILON,
        components,
    })
}

fn check_v(params: &BinaryFormParams, v: u64) -> Result<FiberIndex> {
    if v == 0 {
        return Err(Error::Zero("c_v_binary"));
    }
    params
        .fiber(v)
        .map_err(|_| Error::InvalidParams(format!("v = {v} must be squarefree and coprime to ab")))
}

/// `c_v = 4 sigma_inf gamma(abv) rho(a,b,v) / (pi^2 v^{3/2})` for `v = 1 mod 4`, else 0.
pub fn c_v_binary(params: &BinaryFormParams, v: u64) -> Result<f64> {
    let fiber = check_v(params, v)?;
    if v % 4 != 1 {
        return Ok(0.0);
    }
    let rho = rho_y(&fiber) as f64;
    let gamma = gamma_f64(params.ab()) * gamma_f64(v);
    Ok(4.0 * sigma_inf_binary(params) * gamma * rho / (PI * PI * (v as f64).powf(1.5)))
}

pub const MAX_VSUM_TRUNCATION: u64 = 100_000_000;

/// The binary-form constant as `(2 sigma_inf / pi^2) sum_{v <= V, v = 1 mod 4}
/// mu^2(abv) gamma(abv) rho(a,b,v) v^{-3/2}`.
///
/// The tail bound uses `gamma <= gamma(ab)`, `rho <= 2^{omega(ab)} d(v)` and
/// `sum_{v > V} d(v) v^{-3/2} <= V^{-1/2} (3 ln V + 9)`.
pub fn c_binary_vsum(params: &BinaryFormParams, v_max: u64) -> Result<ConstantReport> {
    if v_max == 0 || v_max > MAX_VSUM_TRUNCATION {
        return Err(Error::OutOfRange {
            what: "v-sum truncation",
            value: v_max,
            range: "1..=1e8",
        });
    }
    let sigma_inf = sigma_inf_binary(params);
    let gamma_ab = gamma_f64(params.ab());
    let ab_factors = factorize_u64(params.ab())?;
    let mut sum = 0.0f64;
    let mut terms = 0u64;
    for v in (1..=v_max).step_by(4) {
        let Ok(fiber) = params.fiber(v) else { continue };
        let rho = rho_y(&fiber);
        if rho == 0 {
            continue;
        }
        sum += gamma_f64(v) * rho as f64 * (v as f64).powf(-1.5);
        terms += 1;
    }
    let prefactor = 2.0 * sigma_inf * gamma_ab / (PI * PI);
    let vf = v_max as f64;
    let max_rho_ab = 2f64.powi(ab_factors.primes().filter(|&p| p > 2).count() as i32);
    let tail = prefactor * max_rho_ab * vf.powf(-0.5) * (3.0 * vf.ln() + 9.0);
    let value = prefactor * sum;
    let mut components = BTreeMap::new();
    components.insert("gamma_ab".into(), gamma_ab);
    components.insert("nonzero_terms".into(), terms as f64);
    Ok(ConstantReport {
        name: format!("c_binary_vsum_a{}_b{}", params.a(), params.b()),
        value,
        alpha: 0.5,
        beta: 1.0,
        sigma_inf,
        exponent_a: Ratio::from_integer(1),
        exponent_b: Ratio::from_integer(1),
        truncation: format!("v <= {v_max}"),
        tail_estimate: tail,
        tail_kind: TailKind::Upper,
        rounding_allowance: value * (terms as f64 + 8.0) * 4.0 * f64::EPSILON,
        components,
    })
}

fn divisors(n: u64) -> Vec<u64> {
    let f = factorize_u64(n).expect("nonzero");
    let mut out = vec![1u64];
    for &(p, e) in f.factors() {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// All twisted products `(k, l)` with `k | a`, `l | b`, ordered by `(k, l)`.
pub fn character_terms(params: &BinaryFormParams, prime_cutoff: u64) -> Result<Vec<TwistedProduct>> {
    let mut out = Vec::new();
    for k in divisors(params.a()) {
        for l in divisors(params.b()) {
            out.push(twisted_product(params, k, l, prime_cutoff)?);
        }
    }
    Ok(out)
}

/// `R = 2 sigma_inf gamma(ab) / pi^2`.
pub fn character_prefactor(params: &BinaryFormParams) -> f64 {
    2.0 * sigma_inf_binary(params) * gamma_f64(params.ab()) / (PI * PI)
}

/// The binary-form constant as `R * sum_{k | a, l | b} (b|k)(a|l) P(k, l)`.
pub fn c_binary_chars(params: &BinaryFormParams, prime_cutoff: u64) -> Result<ConstantReport> {
    let terms = character_terms(params, prime_cutoff)?;
    let r = character_prefactor(params);
    let mut sum = Enclosure::point(0.0);
    let mut components = BTreeMap::new();
    components.insert("R".into(), r);
    for t in &terms {
        sum = sum + t.product.enclosure().scale(t.sign as f64);
        components.insert(format!("signed_product_k{}_l{}", t.k, t.l), t.signed_value());
    }
    let value: f64 = r * terms.iter().map(|t| t.signed_value()).sum::<f64>();
    let tail: f64 = r * terms.iter().map(|t| t.product.tail_estimate).sum::<f64>();
    let rounding: f64 = r * terms.iter().map(|t| t.product.rounding_allowance).sum::<f64>()
        + value.abs() * 8.0 * f64::EPSILON;
    debug_assert!(sum.scale(r).contains(value) || tail == 0.0);
    Ok(ConstantReport {
        name: format!("c_binary_chars_a{}_b{}", params.a(), params.b()),
        value,
        alpha: 0.5,
        beta: 1.0,
        sigma_inf: sigma_inf_binary(params),
        exponent_a: Ratio::from_integer(1),
        exponent_b: Ratio::from_integer(1),
        truncation: format!("primes <= {}", terms[0].prime_cutoff),
        tail_estimate: tail,
        tail_kind: TailKind::Symmetric,
        rounding_allowance: rounding,
        components,
    })
}

/// The four hypotheses under which the counterexample argument runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleConditions {
    /// `a = b = 1 mod 4`.
    pub congruence: bool,
    /// `(a|b) = -1`.
    pub mutual_nonresidue: bool,
    /// `(a|p) = (b|p) = 1` for `p = 3, 7`.
    pub residues_mod_3_and_7: bool,
    /// `(a|5) = -1` and `(b|5) = 1`.
    pub split_at_5: bool,
}

impl CounterexampleConditions {
    pub fn check(a: u64, b: u64) -> Self {
        let l = |top: u64, p: u64| jacobi_u64(top % p, p);
        CounterexampleConditions {
            congruence: a % 4 == 1 && b % 4 == 1,
            mutual_nonresidue: b % 2 == 1 && b > 1 && l(a, b) == -1,
            residues_mod_3_and_7: [3, 7].iter().all(|&p| l(a, p) == 1 && l(b, p) == 1),
            split_at_5: l(a, 5) == -1 && l(b, 5) == 1,
        }
    }

    pub fn all(&self) -> bool {
        self.congruence && self.mutual_nonresidue && self.residues_mod_3_and_7 && self.split_at_5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginSign {
    Negative,
    Positive,
    Indeterminate,
}

impl MarginSign {
    fn of(e: &Enclosure) -> Self {
        if e.is_negative() {
            MarginSign::Negative
        } else if e.is_positive() {
            MarginSign::Positive
        } else {
            MarginSign::Indeterminate
        }
    }
}

/// Bound `prod_{p>7}(1 + y) - 2 prod_{p>7}(1 - y)` on the margin, valid when
/// all four conditions hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundRoute {
    pub plus_product: Enclosure,
    pub minus_product: Enclosure,
    pub bound: Enclosure,
    pub ratio_all_primes: Enclosure,
    pub ratio_small_primes: Enclosure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub a: u64,
    pub b: u64,
    /// Encloses `S(chi_3) - S(chi_1) - S(chi_2)`, i.e. `(c - c_pstva) / R`.
    pub enclosure: Enclosure,
    pub sign: MarginSign,
    pub conditions: CounterexampleConditions,
    pub upper_bound: Option<UpperBoundRoute>,
    /// `(k, l, sign, product value)` for every divisor pair.
    pub terms: Vec<(u64, u64, i8, f64)>,
}

/// `S(chi_3) - S(chi_1) - S(chi_2)` for primes `a`, `b` with `(a|b) = -1`,
/// with a guaranteed enclosure.
pub fn counterexample_margin(params: &BinaryFormParams, prime_cutoff: u64) -> Result<MarginReport> {
    let (a, b) = (params.a(), params.b());
    if !is_prime(a) || !is_prime(b) {
        return Err(Error::InvalidParams("a and b must be prime".into()));
    }
    let conditions = CounterexampleConditions::check(a, b);
    if !conditions.mutual_nonresidue {
        return Err(Error::InvalidParams("(a|b) must be -1".into()));
    }
    let terms = character_terms(params, prime_cutoff)?;
    let mut margin = Enclosure::point(0.0);
    for t in terms.iter().filter(|t| (t.k, t.l) != (1, 1)) {
        margin = margin + t.product.enclosure().scale(t.sign as f64);
    }
    let upper_bound = if conditions.all() {
        let plus = cor16_half(1, prime_cutoff)?.enclosure();
        let minus = cor16_half(-1, prime_cutoff)?.enclosure();
        Some(UpperBoundRoute {
            plus_product: plus,
            minus_product: minus,
            bound: plus - minus.scale(2.0),
            ratio_all_primes: cor16_ratio(PrimeSelection::All, prime_cutoff)?.enclosure(),
            ratio_small_primes: cor16_ratio(PrimeSelection::UpTo(7), prime_cutoff)?.enclosure(),
        })
    } else {
        None
    };
    Ok(MarginReport {
        a,
        b,
        enclosure: margin,
        sign: MarginSign::of(&margin),
        conditions,
        upper_bound,
        terms: terms.iter().map(|t| (t.k, t.l, t.sign, t.product.value)).collect(),
    })
}
