//! Closed intervals with outward rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A closed interval `[lo, hi]` guaranteed to contain the quantity it tracks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty enclosure [{lo}, {hi}]");
        Enclosure { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Enclosure { lo: x, hi: x }
    }

    /// `[x - r, x + r]`, rounded outward.
    pub fn around(x: f64, radius: f64) -> Self {
        assert!(radius >= 0.0);
        Enclosure {
            lo: (x - radius).next_down(),
            hi: (x + radius).next_up(),
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn scale(self, k: f64) -> Self {
        self * Enclosure::point(k)
    }

    /// `self / other`; `other` must not contain 0.
    pub fn div(self, other: Enclosure) -> Self {
        assert!(!other.contains(0.0), "division by an enclosure containing 0");
        let inv = Enclosure {
            lo: (1.0 / other.hi).next_down(),
            hi: (1.0 / other.lo).next_up(),
        };
        self * inv
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, o: Enclosure) -> Enclosure {
        Enclosure {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, o: Enclosure) -> Enclosure {
        self + (-o)
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, o: Enclosure) -> Enclosure {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Enclosure {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_contains_exact_results() {
        let a = Enclosure::around(0.1, 0.0);
        let b = Enclosure::around(0.2, 0.0);
        assert!((a + b).contains(0.1 + 0.2));
        assert!((a - b).hi > -0.1 - 1e-17);
        let m = Enclosure::new(-1.0, 2.0) * Enclosure::new(-3.0, 0.5);
        assert!(m.lo <= -6.0 && m.hi >= 3.0);
        let q = Enclosure::new(1.0, 2.0).div(Enclosure::new(4.0, 8.0));
        assert!(q.contains(0.125) && q.contains(0.5));
    }

    #[test]
    fn sign_tests() {
        assert!(Enclosure::new(-2.0, -1.0).is_negative());
        assert!(!Enclosure::new(-2.0, 0.0).is_negative());
        assert!(Enclosure::around(1.0, 0.5).is_positive());
    }
}
