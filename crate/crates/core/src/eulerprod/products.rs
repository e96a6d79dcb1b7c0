//! The concrete Euler products behind the predicted constants.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_rational::Ratio;

use crate::arith::{factorize_u64, jacobi_i128, jacobi_u64, primes_up_to};
use crate::constants::{ConstantReport, TailKind};
use crate::error::{Error, Result};
use crate::eulerprod::character::{Character, DirichletCharacter};
use crate::eulerprod::product::{
    eval_product, Accelerator, EulerProductSpec, FixedRational, LocalFactor, ProductResult,
    RationalLocal,
};
use crate::localdensity::{gamma_f64, sigma_inf_binary, sigma_inf_three, sigma_p_three, BinaryFormParams};

pub const DEFAULT_PRIME_CUTOFF: u64 = 100_000;

/// `(1 - 1/p) sigma_p = 1 + 3x^3 - x^4 - 3x^5`.
struct ThreeOrbifoldLocal;

impl LocalFactor for ThreeOrbifoldLocal {
    fn value(&self, p: u64, _chars: &[i8]) -> f64 {
        (1.0 - 1.0 / p as f64) * sigma_p_three(p)
    }

    fn rational(&self, _chars: &[i8]) -> RationalLocal {
        RationalLocal::new(vec![1, 0, 0, 3, -1, -3], vec![1])
    }
}

pub fn three_orbifold_spec(prime_cutoff: u64) -> EulerProductSpec {
    EulerProductSpec {
        characters: vec![Character::Principal],
        local: Box::new(ThreeOrbifoldLocal),
        accelerators: vec![
            Accelerator::zeta(3, 3),
            Accelerator::zeta(8, 1),
            Accelerator::zeta(4, -1),
            Accelerator::zeta(10, 3),
            Accelerator::zeta(5, -3),
        ],
        excluded_primes: vec![],
        prime_cutoff,
        residual_order: 6,
    }
}

/// `prod_p (1 + 3 p^{-3/2} / (1 + p^{-1}))`, accelerated by `zeta(3/2)^3 / zeta(5/2)^3`.
pub fn three_orbifold_closed_product(prime_cutoff: u64) -> Result<ProductResult> {
    eval_product(&EulerProductSpec {
        characters: vec![Character::Principal],
        local: Box::new(FixedRational(RationalLocal::new(vec![1, 0, 1, 3], vec![1, 0, 1]))),
        accelerators: vec![Accelerator::zeta(3, 3), Accelerator::zeta(5, -3)],
        excluded_primes: vec![],
        prime_cutoff,
        residual_order: 6,
    })
}

/// Predicted leading constant for the three-point orbifold, assembled as
/// `sigma_inf / 4 * prod_p (1 - 1/p) sigma_p`.
pub fn c_pstva_three(prime_cutoff: u64) -> Result<ConstantReport> {
    let product = eval_product(&three_orbifold_spec(prime_cutoff))?;
    let sigma_inf = sigma_inf_three();
    let scale = sigma_inf / 4.0;
    let closed = three_orbifold_closed_product(prime_cutoff)?;
    let mut components = BTreeMap::new();
    components.insert("euler_product".into(), product.value);
    components.insert("euler_product_tail".into(), product.tail_estimate);
    components.insert("tau".into(), sigma_inf * product.value);
    components.insert("closed_form_route".into(), 9.0 / (2.0 * PI) * closed.value);
    components.insert("value_over_3".into(), scale * product.value / 3.0);
    Ok(ConstantReport {
        name: "c_pstva_three".into(),
        value: scale * product.value,
        alpha: 0.125,
        beta: 1.0,
        sigma_inf,
        exponent_a: Ratio::new(1, 2),
        exponent_b: Ratio::from_integer(1),
        truncation: format!("primes <= {prime_cutoff}"),
        tail_estimate: scale * product.tail_estimate,
        tail_kind: TailKind::Symmetric,
        rounding_allowance: scale * product.rounding_allowance,
        components,
    })
}

/// `1 + c x^3 / (1 + x^2)` with `c = psi(p) (1 + (-ab|p))`.
struct TwistedLocal {
    kl: u64,
    minus_ab: i128,
}

impl LocalFactor for TwistedLocal {
    fn value(&self, p: u64, _chars: &[i8]) -> f64 {
        let psi = if self.kl == 1 { 1 } else { jacobi_u64(p % self.kl, self.kl) };
        let chi = jacobi_i128(self.minus_ab, p);
        let c = (psi * (1 + chi)) as f64;
        let pf = p as f64;
        1.0 + c / ((1.0 + 1.0 / pf) * pf.powf(1.5))
    }

    fn rational(&self, chars: &[i8]) -> RationalLocal {
        let c = (chars[0] + chars[1]) as i64;
        RationalLocal::new(vec![1, 0, 1, c], vec![1, 0, 1])
    }
}

/// One term of the character decomposition of the binary-form constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistedProduct {
    pub k: u64,
    pub l: u64,
    /// `(b|k)(a|l)`.
    pub sign: i8,
    /// Cutoff actually used: at least the largest prime dividing `2ab`.
    pub prime_cutoff: u64,
    /// `prod_{p not dividing 2ab} (1 + (p|k)(p|l)(1 + (-ab|p)) / ((1 + 1/p) p^{3/2}))`.
    pub product: ProductResult,
}

impl TwistedProduct {
    pub fn signed_value(&self) -> f64 {
        self.sign as f64 * self.product.value
    }
}

fn jacobi_or_one(top: u64, bottom: u64) -> i8 {
    if bottom == 1 {
        1
    } else {
        jacobi_u64(top % bottom, bottom)
    }
}

pub fn twisted_product(
    params: &BinaryFormParams,
    k: u64,
    l: u64,
    prime_cutoff: u64,
) -> Result<TwistedProduct> {
    let (a, b) = (params.a(), params.b());
    if k == 0 || a % k != 0 {
        return Err(Error::InvalidParams(format!("k = {k} does not divide a = {a}")));
    }
    if l == 0 || b % l != 0 {
        return Err(Error::InvalidParams(format!("l = {l} does not divide b = {b}")));
    }
    let kl = k * l;
    let minus_ab = -(params.ab() as i64);
    let chi = DirichletCharacter::jacobi_top(minus_ab)?;
    let (psi, psi_chi) = if kl == 1 {
        (Character::Principal, Character::Table(chi))
    } else {
        let psi = DirichletCharacter::jacobi_bottom(kl)?;
        let psi_chi = psi.product(&chi)?;
        (Character::Table(psi), Character::Table(psi_chi))
    };
    let mut excluded: Vec<u64> = factorize_u64(2 * params.ab())?.primes().collect();
    excluded.sort_unstable();
    let cutoff = prime_cutoff.max(*excluded.last().unwrap());
    let spec = EulerProductSpec {
        characters: vec![psi, psi_chi],
        local: Box::new(TwistedLocal {
            kl,
            minus_ab: minus_ab as i128,
        }),
        accelerators: vec![
            Accelerator { twice_s: 3, exponent: 1, character: 0 },
            Accelerator { twice_s: 3, exponent: 1, character: 1 },
            Accelerator { twice_s: 5, exponent: -1, character: 0 },
            Accelerator { twice_s: 5, exponent: -1, character: 1 },
        ],
        excluded_primes: excluded,
        prime_cutoff: cutoff,
        residual_order: 6,
    };
    let product = eval_product(&spec)?;
    Ok(TwistedProduct {
        k,
        l,
        sign: jacobi_or_one(b, k) * jacobi_or_one(a, l),
        prime_cutoff: cutoff,
        product,
    })
}

/// Predicted constant for `a x^2 + b y^2`:
/// `4 gamma(ab) / pi^2 * (asinh(sqrt(a/b)) / sqrt(a) + asinh(sqrt(b/a)) / sqrt(b)) * prod`.
pub fn c_pstva_binary(params: &BinaryFormParams, prime_cutoff: u64) -> Result<ConstantReport> {
    let t = twisted_product(params, 1, 1, prime_cutoff)?;
    let (a, b) = (params.a() as f64, params.b() as f64);
    let arcs = (a / b).sqrt().asinh() / a.sqrt() + (b / a).sqrt().asinh() / b.sqrt();
    let gamma = gamma_f64(params.ab());
    let scale = 4.0 * gamma / (PI * PI) * arcs;
    let mut components = BTreeMap::new();
    components.insert("gamma_ab".into(), gamma);
    components.insert("euler_product".into(), t.product.value);
    components.insert("euler_product_tail".into(), t.product.tail_estimate);
    Ok(ConstantReport {
        name: format!("c_pstva_binary_a{}_b{}", params.a(), params.b()),
        value: scale * t.product.value,
        alpha: 0.5,
        beta: 1.0,
        sigma_inf: sigma_inf_binary(params),
        exponent_a: Ratio::from_integer(1),
        exponent_b: Ratio::from_integer(1),
        truncation: format!("primes <= {}", t.prime_cutoff),
        tail_estimate: scale * t.product.tail_estimate,
        tail_kind: TailKind::Symmetric,
        rounding_allowance: scale * t.product.rounding_allowance,
        components,
    })
}

/// Which primes a finite or infinite product runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeSelection {
    All,
    UpTo(u64),
}

/// `y_p = 2 / ((1 + 1/p) p^{3/2})`.
fn two_y(p: u64) -> f64 {
    let pf = p as f64;
    2.0 / ((1.0 + 1.0 / pf) * pf.powf(1.5))
}

/// `prod (1 + y_p)(1 - y_p)^{-1}` over the selected primes, with
/// `y_p = 2 / ((1 + 1/p) p^{3/2})`.
pub fn cor16_ratio(selection: PrimeSelection, prime_cutoff: u64) -> Result<ProductResult> {
    match selection {
        PrimeSelection::UpTo(n) => {
            let primes = primes_up_to(n);
            let value: f64 = primes
                .iter()
                .map(|&p| (1.0 + two_y(p)) / (1.0 - two_y(p)))
                .product();
            Ok(ProductResult {
                value,
                tail_estimate: 0.0,
                rounding_allowance: value * 8.0 * (primes.len() as f64 + 1.0) * f64::EPSILON,
                primes_used: primes.len(),
            })
        }
        PrimeSelection::All => eval_product(&EulerProductSpec {
            characters: vec![Character::Principal],
            local: Box::new(FixedRational(RationalLocal::new(vec![1, 0, 1, 2], vec![1, 0, 1, -2]))),
            accelerators: vec![Accelerator::zeta(3, 4), Accelerator::zeta(5, -4)],
            excluded_primes: vec![],
            prime_cutoff,
            residual_order: 6,
        }),
    }
}

/// `prod_{p > 7} (1 + sign * y_p)` with `y_p` as in [`cor16_ratio`].
pub fn cor16_half(sign: i8, prime_cutoff: u64) -> Result<ProductResult> {
    let s = sign.signum() as i64;
    assert!(s != 0);
    eval_product(&EulerProductSpec {
        characters: vec![Character::Principal],
        local: Box::new(FixedRational(RationalLocal::new(vec![1, 0, 1, 2 * s], vec![1, 0, 1]))),
        accelerators: vec![
            Accelerator::zeta(3, 2 * s as i32),
            Accelerator::zeta(5, -2 * s as i32),
        ],
        excluded_primes: vec![2, 3, 5, 7],
        prime_cutoff,
        residual_order: 6,
    })
}
