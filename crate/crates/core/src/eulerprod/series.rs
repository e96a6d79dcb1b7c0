//! Exact expansion of residual local factors in `x = p^{-1/2}` and the
//! uniform bound on their logarithms used for product tails.

use crate::error::{Error, Result};

/// Degree to which residual series are expanded exactly.
pub const SERIES_DEGREE: usize = 48;
/// Radius of the circle used for the Cauchy estimate of the tail coefficients.
pub const CAUCHY_RADIUS: f64 = 0.5;

/// An accelerator factor `(1 - t x^m)^e` in the residual, where `t` is a
/// character value.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AccelTerm {
    pub m: u32,
    pub exponent: i32,
    pub t: i8,
}

fn overflow() -> Error {
    Error::Overflow("residual series")
}

fn mul_poly(a: &[i128], b: &[i64]) -> Result<Vec<i128>> {
    let mut out = vec![0i128; SERIES_DEGREE + 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if i + j > SERIES_DEGREE {
                break;
            }
            let t = ai.checked_mul(bj as i128).ok_or_else(overflow)?;
            out[i + j] = out[i + j].checked_add(t).ok_or_else(overflow)?;
        }
    }
    Ok(out)
}

/// `a / d` as a power series; `d[0]` must be 1.
fn div_poly(a: &[i128], d: &[i64]) -> Result<Vec<i128>> {
    assert_eq!(d[0], 1);
    let mut out = vec![0i128; SERIES_DEGREE + 1];
    for k in 0..=SERIES_DEGREE {
        let mut c = a.get(k).copied().unwrap_or(0);
        for (j, &dj) in d.iter().enumerate().skip(1) {
            if j > k {
                break;
            }
            let t = out[k - j].checked_mul(dj as i128).ok_or_else(overflow)?;
            c = c.checked_sub(t).ok_or_else(overflow)?;
        }
        out[k] = c;
    }
    Ok(out)
}

fn accel_poly(term: &AccelTerm) -> Vec<i64> {
    let mut p = vec![0i64; term.m as usize + 1];
    p[0] = 1;
    p[term.m as usize] = -(term.t as i64);
    p
}

/// Exact series of `num / den * prod (1 - t x^m)^e` to [`SERIES_DEGREE`].
pub(crate) fn residual_series(num: &[i64], den: &[i64], accels: &[AccelTerm]) -> Result<Vec<i128>> {
    let mut s: Vec<i128> = num.iter().map(|&c| c as i128).collect();
    s.resize(SERIES_DEGREE + 1, 0);
    s = div_poly(&s, den)?;
    for term in accels {
        let poly = accel_poly(term);
        for _ in 0..term.exponent.unsigned_abs() {
            s = if term.exponent > 0 {
                mul_poly(&s, &poly)?
            } else {
                div_poly(&s, &poly)?
            };
        }
    }
    Ok(s)
}

/// Coefficients of `log f` for a series with `f[0] = 1`.
pub(crate) fn log_series(f: &[i128]) -> Vec<f64> {
    let n = f.len();
    let mut g = vec![0.0f64; n];
    for k in 1..n {
        let mut acc = k as f64 * f[k] as f64;
        for j in 1..k {
            acc -= j as f64 * g[j] * f[k - j] as f64;
        }
        g[k] = acc / k as f64;
    }
    g
}

fn abs_tail_at(poly: &[i64], r: f64) -> f64 {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| (c as f64).abs() * r.powi(k as i32))
        .sum()
}

/// A constant `c` with `|log residual(x)| <= c x^order` for `0 <= x <= x0`,
/// after checking that the residual is `1 + O(x^order)`.
pub(crate) fn residual_log_bound(
    num: &[i64],
    den: &[i64],
    accels: &[AccelTerm],
    order: u32,
    x0: f64,
) -> Result<f64> {
    let s = residual_series(num, den, accels)?;
    if s[0] != 1 {
        return Err(Error::InvalidProduct("residual constant term is not 1".into()));
    }
    for (k, &c) in s.iter().enumerate().take(order as usize).skip(1) {
        if c != 0 {
            return Err(Error::SlowResidual {
                order,
                degree: k,
                coefficient: c,
            });
        }
    }
    let r = CAUCHY_RADIUS;
    if x0 >= r {
        return Err(Error::InvalidProduct(format!("x0 = {x0} is not inside the Cauchy radius")));
    }
    let un = abs_tail_at(num, r);
    let ud = abs_tail_at(den, r);
    if un >= 1.0 || ud >= 1.0 {
        return Err(Error::InvalidProduct(
            "local factor polynomials are too large on the Cauchy circle".into(),
        ));
    }
    let mut big_m = -(1.0 - un).ln() - (1.0 - ud).ln();
    for a in accels {
        big_m += a.exponent.unsigned_abs() as f64 * -(1.0 - r.powi(a.m as i32)).ln();
    }
    let d = log_series(&s);
    let k0 = order as usize;
    let head: f64 = (k0..=SERIES_DEGREE)
        .map(|k| d[k].abs() * x0.powi((k - k0) as i32))
        .sum();
    let q = x0 / r;
    let tail = big_m * q.powi(SERIES_DEGREE as i32 + 1) / (1.0 - q) / x0.powi(k0 as i32);
    Ok(head + tail)
}
