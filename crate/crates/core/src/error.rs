use thiserror::Error;

/// Everything that can go wrong in the core engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus base {0} is not prime")]
    CompositeModulusBase(u64),
    #[error("modulus {p}^{e} is outside the supported range")]
    Overflow { p: u64, e: u32 },
    #[error("exponent {0} is not supported (expected 1 or 2)")]
    BadExponent(u32),
    #[error("residues belong to different rings (mod {left} vs mod {right})")]
    RingMismatch { left: u64, right: u64 },
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },
    #[error("range bound {n} must be below the prime {p}")]
    BadRange { n: u64, p: u64 },
    #[error("B_{n} mod {p} needs a denominator divisible by {p}")]
    DenominatorDivisibleByP { n: u64, p: u64 },
    #[error("scan range [{from}, {to}] is empty or starts below 7")]
    BadScanRange { from: u64, to: u64 },
    #[error("{0} is not a valid prime for this computation")]
    BadPrime(u64),
    #[error("input {n} exceeds the supported bound {max}")]
    TooLarge { n: u64, max: u64 },
    #[error("profiles belong to different primes ({left} vs {right})")]
    PrimeMismatch { left: u64, right: u64 },
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("check `{check}` needs p >= {min_prime}, got {p}")]
    PrimeTooSmall {
        check: &'static str,
        p: u64,
        min_prime: u64,
    },
    #[error("check `{0}` needs the residue of B_(p-5)")]
    MissingBernoulli(&'static str),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
