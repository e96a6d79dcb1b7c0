use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero is not a valid argument to {0}")]
    Zero(&'static str),

    #[error("{0} is not squareful")]
    NotSquareful(i64),

    #[error("jacobi symbol modulus must be odd and positive, got {0}")]
    BadJacobiModulus(i64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid fiber index ({0}, {1}, {2}): {3}")]
    InvalidFiber(i64, i64, i64, &'static str),

    #[error("{0}")]
    InvalidParams(String),

    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: u64,
        range: &'static str,
    },

    #[error("zeta(s) requires s > 1, got {0}")]
    ZetaDomain(f64),

    #[error("residual local factor is not 1 + O(x^{order}): coefficient of x^{degree} is {coefficient}")]
    SlowResidual {
        order: u32,
        degree: usize,
        coefficient: i128,
    },

    #[error("residual factor at p = {0} is not positive ({1})")]
    NonPositiveFactor(u64, f64),

    #[error("local factor at p = {p} disagrees with its rational form ({value} vs {rational})")]
    InconsistentFactor { p: u64, value: f64, rational: f64 },

    #[error("invalid Euler product: {0}")]
    InvalidProduct(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
