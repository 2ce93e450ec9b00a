//! Bernoulli numbers: exact values for small indices and `B_{p-5} mod p`
//! by two independent routes.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ring::{make_ring, Montgomery, Residue};

/// Largest index served by [`bernoulli_exact`].
pub const EXACT_LIMIT: u64 = 1000;

fn table() -> &'static Mutex<Vec<BigRational>> {
    static TABLE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![BigRational::one()]))
}

/// `B_n` from `B_0 = 1` and `sum_{k=0}^{n} C(n+1, k) B_k = 0`.
///
/// Values are memoized in a process-wide table, so repeated and concurrent
/// calls only pay for indices not yet computed.
pub fn bernoulli_exact(n: u64) -> Result<BigRational> {
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge {
            n,
            max: EXACT_LIMIT,
        });
    }
    let n = n as usize;
    let mut b = table().lock().unwrap_or_else(|e| e.into_inner());
    while b.len() <= n {
        let m = b.len();
        // C(m+1, k) for k = 0..m-1, built multiplicatively.
        let mut binom = BigInt::one();
        let mut sum = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            if !bk.is_zero() {
                sum += bk * BigRational::from_integer(binom.clone());
            }
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        let next = -sum / BigRational::from_integer(BigInt::from(m + 1));
        b.push(next);
    }
    Ok(b[n].clone())
}

/// Image of `B_n` in `Z/pZ`, running the same recurrence in the ring.
/// Needs `n <= p - 3` so that every divisor `k + 1` is a unit.
pub fn bernoulli_mod_p(n: u64, p: u64) -> Result<Residue> {
    let ring = make_ring(p, 1)?;
    if n + 3 > p {
        return Err(Error::DenominatorDivisibleByP { n, p });
    }
    let mut b: Vec<Residue> = Vec::with_capacity(n as usize + 1);
    b.push(ring.one());
    // Pascal row `n + 1`, starting from row 1.
    let mut row = vec![ring.one(), ring.one()];
    for m in 1..=n as usize {
        // Advance to row m + 1.
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(ring.one());
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(ring.one());
        row = next;
        let sum = b
            .iter()
            .zip(&row)
            .fold(ring.zero(), |acc, (&bk, &c)| acc + bk * c);
        let denom = ring.elem(m as u64 + 1).inv()?;
        b.push(-(sum * denom));
    }
    Ok(b[n as usize])
}

/// Primes up to this bound take the sieve route in [`b_target`]; its table
/// holds `(p - 1) / 2` words.
pub const POWER_SIEVE_LIMIT: u64 = 1 << 22;

/// `B_{p-5} mod p` from the power sum `S = sum_{x=1}^{p-1} x^{p-5}`, which
/// satisfies `S = p B_{p-5} (mod p^2)`.
///
/// Pairs `x` with `p - x`: for even `n`,
/// `(p - x)^n = x^n - n p x^{n-1} (mod p^2)`, so the pair contributes
/// `x^{n-1} (2x - n p)`.
pub fn b_target(p: u64) -> Result<Residue> {
    if p < 7 {
        return Err(Error::BadPrime(p));
    }
    let ring2 = make_ring(p, 2).map_err(|e| match e {
        Error::CompositeModulusBase(p) => Error::BadPrime(p),
        other => other,
    })?;
    let s = if p <= POWER_SIEVE_LIMIT {
        power_sum_sieved(ring2.modulus(), p)
    } else {
        power_sum_pow(ring2.modulus(), p)
    };
    if s % p != 0 {
        return Err(Error::Internal(format!(
            "power sum {s} is not divisible by {p}"
        )));
    }
    Ok(make_ring(p, 1)?.elem(s / p))
}

fn pair_terms(mont: &Montgomery, p: u64, m: u64) -> (u64, u64) {
    let n = p - 5;
    let np = mont.encode(((n as u128 * p as u128) % m as u128) as u64);
    (n, np)
}

/// One exponentiation per pair.
fn power_sum_pow(m: u64, p: u64) -> u64 {
    let mont = Montgomery::new(m);
    let (n, np) = pair_terms(&mont, p, m);
    let mut sum = 0u64;
    let mut x = 0u64;
    for _ in 1..=(p - 1) / 2 {
        x = mont.add(x, mont.one());
        let lower = mont.pow(x, n - 1);
        let weight = mont.sub(mont.add(x, x), np);
        sum = mont.add(sum, mont.mul(lower, weight));
    }
    mont.decode(sum)
}

/// `x^{n-1}` is completely multiplicative, so a linear sieve needs one
/// exponentiation per prime and one multiplication per composite.
fn power_sum_sieved(m: u64, p: u64) -> u64 {
    let mont = Montgomery::new(m);
    let (n, np) = pair_terms(&mont, p, m);
    let half = ((p - 1) / 2) as usize;
    let mut g = vec![0u64; half + 1];
    let mut primes: Vec<usize> = Vec::new();
    if half >= 1 {
        g[1] = mont.one();
    }
    for i in 2..=half {
        if g[i] == 0 {
            g[i] = mont.pow(mont.encode(i as u64), n - 1);
            primes.push(i);
        }
        for &q in &primes {
            let c = q * i;
            if c > half {
                break;
            }
            g[c] = mont.mul(g[q], g[i]);
            if i % q == 0 {
                break;
            }
        }
    }
    let mut sum = 0u64;
    let mut x = 0u64;
    for &gx in &g[1..] {
        x = mont.add(x, mont.one());
        let weight = mont.sub(mont.add(x, x), np);
        sum = mont.add(sum, mont.mul(gx, weight));
    }
    mont.decode(sum)
}
