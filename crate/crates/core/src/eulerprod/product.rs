use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize_u64, primes_up_to};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::eulerprod::character::Character;
use crate::eulerprod::series::{residual_log_bound, AccelTerm};
use crate::eulerprod::zeta::dirichlet_l;

/// A local factor written as a rational function of `x = p^{-1/2}` whose
/// polynomials have constant term 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalLocal {
    pub numerator: Vec<i64>,
    pub denominator: Vec<i64>,
}

impl RationalLocal {
    pub fn new(numerator: Vec<i64>, denominator: Vec<i64>) -> Self {
        assert!(numerator.first() == Some(&1) && denominator.first() == Some(&1));
        RationalLocal {
            numerator,
            denominator,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.numerator, x) / horner(&self.denominator, x)
    }
}

fn horner(c: &[i64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k as f64)
}

/// The Euler factor at `p`, given the values at `p` of the product's characters.
///
/// `value` is the direct evaluation; `rational` is the same factor as a
/// rational function of `x`, used for the exact residual check and the tail
/// bound. The two are compared at every prime.
pub trait LocalFactor: Send + Sync {
    fn value(&self, p: u64, chars: &[i8]) -> f64;
    fn rational(&self, chars: &[i8]) -> RationalLocal;
}

/// A local factor that does not depend on characters.
#[derive(Clone, Debug)]
pub struct FixedRational(pub RationalLocal);

impl LocalFactor for FixedRational {
    fn value(&self, p: u64, _chars: &[i8]) -> f64 {
        self.0.eval((p as f64).powf(-0.5))
    }

    fn rational(&self, _chars: &[i8]) -> RationalLocal {
        self.0.clone()
    }
}

/// `L(s, chi)^exponent` with `s = twice_s / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Accelerator {
    pub twice_s: u32,
    pub exponent: i32,
    /// Index into [`EulerProductSpec::characters`].
    pub character: usize,
}

impl Accelerator {
    pub fn zeta(twice_s: u32, exponent: i32) -> Self {
        Accelerator {
            twice_s,
            exponent,
            character: 0,
        }
    }

    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }
}

/// `prod_i L(s_i, chi_i)^{e_i} * prod_{p <= cutoff, p not excluded} residual(p)`
/// where the residual divides the accelerators' Euler factors out of the
/// local factor.
pub struct EulerProductSpec {
    /// `characters[0]` is conventionally the principal character.
    pub characters: Vec<Character>,
    pub local: Box<dyn LocalFactor>,
    pub accelerators: Vec<Accelerator>,
    /// Primes whose local factor is 1.
    pub excluded_primes: Vec<u64>,
    pub prime_cutoff: u64,
    /// The residual must be `1 + O(p^{-residual_order / 2})`.
    pub residual_order: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductResult {
    pub value: f64,
    /// Bound on `|full product - value|` from primes above the cutoff.
    pub tail_estimate: f64,
    /// Allowance for floating-point error in `value`.
    pub rounding_allowance: f64,
    pub primes_used: usize,
}

impl ProductResult {
    pub fn enclosure(&self) -> Enclosure {
        Enclosure::around(self.value, self.tail_estimate + self.rounding_allowance)
    }
}

/// Relative error allowed for each L-value.
const L_VALUE_RELATIVE_ERROR: f64 = 1e-12;

impl EulerProductSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProduct(m));
        if self.prime_cutoff < 4 {
            return bad(format!("prime cutoff {} is below 4", self.prime_cutoff));
        }
        if self.residual_order < 3 {
            return bad("residual order must be at least 3".into());
        }
        for a in &self.accelerators {
            if a.twice_s < 3 {
                return bad(format!("accelerator s = {} is not > 1", a.s()));
            }
            if a.character >= self.characters.len() {
                return bad(format!("accelerator character index {} out of range", a.character));
            }
        }
        if let Some(&p) = self.excluded_primes.iter().find(|&&p| p > self.prime_cutoff) {
            return bad(format!("excluded prime {p} exceeds the cutoff"));
        }
        for c in &self.characters {
            let f = factorize_u64(c.modulus())?;
            let large = f.primes().find(|&p| p > self.prime_cutoff);
            if let Some(p) = large {
                return bad(format!("character modulus prime {p} exceeds the cutoff"));
            }
        }
        Ok(())
    }

    fn chars_at(&self, p: u64) -> Vec<i8> {
        self.characters.iter().map(|c| c.value(p)).collect()
    }

    fn accel_terms(&self, chars: &[i8]) -> Vec<AccelTerm> {
        self.accelerators
            .iter()
            .map(|a| AccelTerm {
                m: a.twice_s,
                exponent: a.exponent,
                t: chars[a.character],
            })
            .collect()
    }

    /// `prod_i (1 - chi_i(p) p^{-s_i})^{e_i}`: the accelerators' Euler factors divided out.
    fn accel_inverse_at(&self, p: u64, chars: &[i8]) -> f64 {
        let pf = p as f64;
        self.accelerators
            .iter()
            .map(|a| (1.0 - chars[a.character] as f64 * pf.powf(-a.s())).powi(a.exponent))
            .product()
    }

    /// Bound constant valid at every prime above the cutoff, maximized over
    /// the possible character values there.
    fn tail_constant(&self, x0: f64) -> Result<f64> {
        let free: Vec<usize> = (0..self.characters.len())
            .filter(|&i| !self.characters[i].is_principal())
            .collect();
        let mut worst = 0.0f64;
        for mask in 0u32..(1 << free.len()) {
            let mut chars = vec![1i8; self.characters.len()];
            for (bit, &i) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    chars[i] = -1;
                }
            }
            let r = self.local.rational(&chars);
            let c = residual_log_bound(
                &r.numerator,
                &r.denominator,
                &self.accel_terms(&chars),
                self.residual_order,
                x0,
            )?;
            worst = worst.max(c);
        }
        Ok(worst)
    }
}

pub fn eval_product(spec: &EulerProductSpec) -> Result<ProductResult> {
    spec.validate()?;
    let mut accel_value = 1.0;
    for a in &spec.accelerators {
        accel_value *= dirichlet_l(a.s(), &spec.characters[a.character])?.powi(a.exponent);
    }

    let primes = primes_up_to(spec.prime_cutoff);
    let mut rationals: HashMap<Vec<i8>, RationalLocal> = HashMap::new();
    let mut product = 1.0f64;
    for &p in &primes {
        let chars = spec.chars_at(p);
        if spec.excluded_primes.contains(&p) {
            product *= spec.accel_inverse_at(p, &chars);
            continue;
        }
        let local = spec.local.value(p, &chars);
        let x = (p as f64).powf(-0.5);
        let rational = rationals
            .entry(chars.clone())
            .or_insert_with(|| spec.local.rational(&chars))
            .eval(x);
        if (local - rational).abs() > 1e-12 * local.abs().max(1.0) {
            return Err(Error::InconsistentFactor {
                p,
                value: local,
                rational,
            });
        }
        let residual = local * spec.accel_inverse_at(p, &chars);
        if residual.is_nan() || residual <= 0.0 {
            return Err(Error::NonPositiveFactor(p, residual));
        }
        product *= residual;
    }
    let value = accel_value * product;

    let cutoff = spec.prime_cutoff as f64;
    let x0 = (cutoff + 1.0).powf(-0.5);
    let c = spec.tail_constant(x0)?;
    let sigma = spec.residual_order as f64 / 2.0;
    let log_tail = c * cutoff.powf(1.0 - sigma) / (sigma - 1.0);
    let tail_estimate = log_tail.exp_m1() * value.abs();

    let ops = primes.len() as f64 * (4.0 + 2.0 * spec.accelerators.len() as f64);
    let rounding_allowance = value.abs()
        * (ops * f64::EPSILON + spec.accelerators.len() as f64 * L_VALUE_RELATIVE_ERROR);

    Ok(ProductResult {
        value,
        tail_estimate,
        rounding_allowance,
        primes_used: primes.len(),
    })
}
