//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

/// Tanh-sinh quadrature over `(a, b)`.
///
/// `f` receives `(x, x - a, b - x)` so integrands with endpoint singularities
/// can use the distances directly instead of the cancelled differences.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let half = (b - a) / 2.0;
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    let mut k = 0i64;
    loop {
        let t = k as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        // 1 - tanh(u) without cancellation
        let comp = 2.0 / (1.0 + (2.0 * u).exp());
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if comp < 1e-300 || w < 1e-300 {
            break;
        }
        let d = half * comp;
        let mut term = f(b - d, b - a - d, d) * w;
        if k > 0 {
            term += f(a + d, d, b - a - d) * w;
        }
        sum += term;
        k += 1;
    }
    sum * half * h
}

/// `(n|p)` for an odd prime `p` by Euler's criterion.
pub fn legendre(n: i64, p: u64) -> i8 {
    let r = n.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    let mut result = 1u128;
    let mut base = r as u128;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

pub fn trial_primes(n: u64) -> Vec<u64> {
    (2..=n).filter(|&m| (2..m).take_while(|d| d * d <= m).all(|d| m % d != 0)).collect()
}

/// Jacobi symbol as a product of Legendre symbols over the factored bottom.
pub fn jacobi_by_factoring(a: i64, n: u64) -> i8 {
    let mut n = n;
    let mut out = 1i8;
    let mut p = 3;
    while n > 1 {
        while n % p == 0 {
            out *= legendre(a, p);
            n /= p;
        }
        p += 2;
    }
    out
}

/// Squareful integers in `[1, b]` as the set of values `x^2 y^3`.
pub fn squareful_by_products(b: u64) -> Vec<bool> {
    let mut hit = vec![false; b as usize + 1];
    let mut y = 1u64;
    while y * y * y <= b {
        let mut x = 1u64;
        while x * x * y * y * y <= b {
            hit[(x * x * y * y * y) as usize] = true;
            x += 1;
        }
        y += 1;
    }
    hit
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Twice `N_1(B)` by scanning all `(z0, z1)` in the box.
pub fn n1_raw_by_scan(b: u64) -> u64 {
    let sq = squareful_by_products(b);
    let ok = |z: i64| z != 0 && z.unsigned_abs() <= b && sq[z.unsigned_abs() as usize];
    let b = b as i64;
    let mut raw = 0;
    for z0 in -b..=b {
        if !ok(z0) {
            continue;
        }
        for z1 in -b..=b {
            if ok(z1) && ok(z0 + z1) && gcd(z0.unsigned_abs(), z1.unsigned_abs()) == 1 {
                raw += 1;
            }
        }
    }
    raw
}

/// Twice `N(B)` for `a x^2 + b y^2` by scanning the box.
pub fn binary_raw_by_scan(a: u64, b: u64, bound: u64) -> u64 {
    let fmax = (a + b) * bound * bound;
    let sq = squareful_by_products(fmax);
    let bi = bound as i64;
    let mut raw = 0;
    for x in -bi..=bi {
        for y in -bi..=bi {
            if gcd(x.unsigned_abs(), y.unsigned_abs()) != 1 {
                continue;
            }
            let f = a * (x * x) as u64 + b * (y * y) as u64;
            if sq[f as usize] {
                raw += 1;
            }
        }
    }
    raw
}

/// Projective points on `y0^3 x0^2 + y1^3 x1^2 = y2^3 x2^2` with nonzero
/// coordinates, height at most `t` and the coprimality condition, found by
/// scanning integer triples and normalizing the sign of `x0`.
pub fn conic_points_by_scan(y: [u64; 3], t: u64) -> Vec<[i64; 3]> {
    let c = y.map(|v| (v * v * v) as i64);
    let t2 = (t * t) as i64;
    let mut out = Vec::new();
    let bound = |ci: i64| (1..).take_while(|x: &i64| ci * x * x <= t2).last().unwrap_or(0);
    let (m0, m1, m2) = (bound(c[0]), bound(c[1]), bound(c[2]));
    for x0 in 1..=m0 {
        for x1 in -m1..=m1 {
            for x2 in -m2..=m2 {
                if x1 == 0 || x2 == 0 {
                    continue;
                }
                if c[0] * x0 * x0 + c[1] * x1 * x1 != c[2] * x2 * x2 {
                    continue;
                }
                let g = gcd(
                    gcd(x0 as u64 * y[0], x1.unsigned_abs() * y[1]),
                    x2.unsigned_abs() * y[2],
                );
                if g == 1 {
                    out.push([x0, x1, x2]);
                }
            }
        }
    }
    out
}

/// Sum of an alternating series `sum_{k >= 0} (-1)^k a_k` by the
/// Cohen-Rodriguez Villegas-Zagier acceleration with `n` terms.
pub fn alternating_sum(n: usize, a: impl Fn(usize) -> f64) -> f64 {
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        s += c * a(k);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}
