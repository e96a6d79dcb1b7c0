use num_integer::Integer;

use crate::arith::{jacobi_i128, jacobi_u64};
use crate::error::{Error, Result};

/// Largest modulus stored as a table.
pub const MAX_MODULUS: u64 = 1 << 26;

/// A real Dirichlet character stored as its table of values mod `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    table: Vec<i8>,
}

impl DirichletCharacter {
    /// Tabulate `f` on `0..q`. Values must be in `{-1, 0, 1}` and vanish
    /// exactly off the units.
    pub fn from_fn(q: u64, f: impl Fn(u64) -> i8) -> Result<Self> {
        if q < 2 || q > MAX_MODULUS {
            return Err(Error::InvalidProduct(format!("character modulus {q} out of range")));
        }
        let table: Vec<i8> = (0..q).map(&f).collect();
        for (n, &v) in table.iter().enumerate() {
            let unit = (n as u64).gcd(&q) == 1;
            if !(-1..=1).contains(&v) || unit != (v != 0) {
                return Err(Error::InvalidProduct(format!(
                    "value {v} at {n} mod {q} is not a real character value"
                )));
            }
        }
        Ok(DirichletCharacter { modulus: q, table })
    }

    /// `n -> (n|m)` for odd `m > 1`.
    pub fn jacobi_bottom(m: u64) -> Result<Self> {
        if m % 2 == 0 || m < 3 {
            return Err(Error::InvalidProduct(format!("jacobi_bottom needs odd m > 1, got {m}")));
        }
        Self::from_fn(m, |n| jacobi_u64(n, m))
    }

    /// `n -> (d|n)` on odd `n` coprime to `d`, as a character mod `4|d|`.
    pub fn jacobi_top(d: i64) -> Result<Self> {
        let q = 4 * d.unsigned_abs();
        Self::from_fn(q, |n| {
            if n.gcd(&q) != 1 {
                0
            } else {
                jacobi_i128(d as i128, n)
            }
        })
    }

    /// Pointwise product, as a character mod `lcm` of the moduli.
    pub fn product(&self, other: &DirichletCharacter) -> Result<Self> {
        let q = self.modulus.lcm(&other.modulus);
        Self::from_fn(q, |n| self.value(n) * other.value(n))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn value(&self, n: u64) -> i8 {
        self.table[(n % self.modulus) as usize]
    }

    pub fn is_principal(&self) -> bool {
        self.table.iter().all(|&v| v >= 0)
    }
}

/// Either the trivial character (all ones) or a tabulated one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Character {
    Principal,
    Table(DirichletCharacter),
}

impl Character {
    pub fn value(&self, n: u64) -> i8 {
        match self {
            Character::Principal => 1,
            Character::Table(c) => c.value(n),
        }
    }

    pub fn modulus(&self) -> u64 {
        match self {
            Character::Principal => 1,
            Character::Table(c) => c.modulus(),
        }
    }

    pub fn is_principal(&self) -> bool {
        matches!(self, Character::Principal)
    }
}
