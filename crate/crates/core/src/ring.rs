//! Arithmetic in `Z/p^e Z` for a prime `p` and `e` in `{1, 2}`.
//!
//! Residues are always kept canonical, in `[0, m)`. Products go through a
//! 128-bit intermediate, which is exact because `m < 2^63`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Block size used by [`batch_inverses`]. Only bounds scratch memory.
pub const BATCH_BLOCK: usize = 4096;

const MODULUS_LIMIT: u64 = 1 << 63;

/// Deterministic Miller-Rabin, exact for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The ring `Z/p^e Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    p: u64,
    e: u32,
    m: u64,
}

impl ResidueRing {
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if !(1..=2).contains(&e) {
            return Err(Error::BadExponent(e));
        }
        let m = p
            .checked_pow(e)
            .filter(|&m| m < MODULUS_LIMIT)
            .ok_or(Error::Overflow { p, e })?;
        if !is_prime(p) {
            return Err(Error::CompositeModulusBase(p));
        }
        Ok(Self { p, e, m })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.e
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// The residue of a non-negative integer.
    pub fn elem(&self, value: u64) -> Residue {
        Residue {
            value: value % self.m,
            ring: *self,
        }
    }

    /// The residue of a signed integer.
    pub fn elem_signed(&self, value: i128) -> Residue {
        let v = value.rem_euclid(self.m as i128) as u64;
        Residue {
            value: v,
            ring: *self,
        }
    }

    pub fn zero(&self) -> Residue {
        self.elem(0)
    }

    pub fn one(&self) -> Residue {
        self.elem(1)
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    pub(crate) fn inv_raw(&self, a: u64) -> Result<u64> {
        inverse_mod(a % self.m, self.m).ok_or(Error::NotInvertible {
            value: a % self.m,
            modulus: self.m,
        })
    }

    fn check_same(&self, other: &ResidueRing) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch {
                left: self.m,
                right: other.m,
            })
        }
    }
}

impl fmt::Display for ResidueRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 1 {
            write!(f, "Z/{}Z", self.p)
        } else {
            write!(f, "Z/{}^{}Z", self.p, self.e)
        }
    }
}

/// Builds `Z/p^e Z`, verifying that `p` is prime.
pub fn make_ring(p: u64, e: u32) -> Result<ResidueRing> {
    ResidueRing::new(p, e)
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub(crate) fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// An element of a [`ResidueRing`] in canonical form.
///
/// The operator impls panic when the operands live in different rings; use
/// the `try_*` methods to get a [`Error::RingMismatch`] instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    ring: ResidueRing,
}

impl Residue {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn try_add(self, rhs: Residue) -> Result<Residue> {
        self.ring.check_same(&rhs.ring)?;
        Ok(self.with(self.ring.add_raw(self.value, rhs.value)))
    }

    pub fn try_sub(self, rhs: Residue) -> Result<Residue> {
        self.ring.check_same(&rhs.ring)?;
        Ok(self.with(self.ring.sub_raw(self.value, rhs.value)))
    }

    pub fn try_mul(self, rhs: Residue) -> Result<Residue> {
        self.ring.check_same(&rhs.ring)?;
        Ok(self.with(self.ring.mul_raw(self.value, rhs.value)))
    }

    pub fn inv(self) -> Result<Residue> {
        Ok(self.with(self.ring.inv_raw(self.value)?))
    }

    pub fn pow(self, mut exp: u64) -> Residue {
        let mut base = self.value;
        let mut acc = 1 % self.ring.m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.ring.mul_raw(acc, base);
            }
            base = self.ring.mul_raw(base, base);
            exp >>= 1;
        }
        self.with(acc)
    }

    /// Multiplies by a small integer constant.
    pub fn scale(self, k: i64) -> Residue {
        self * self.ring.elem_signed(k as i128)
    }

    /// Image under the projection onto a ring of the same prime with a
    /// smaller or equal exponent.
    pub fn project(self, target: ResidueRing) -> Result<Residue> {
        if target.p != self.ring.p || target.e > self.ring.e {
            return Err(Error::RingMismatch {
                left: self.ring.m,
                right: target.m,
            });
        }
        Ok(target.elem(self.value))
    }

    fn with(self, value: u64) -> Residue {
        Residue {
            value,
            ring: self.ring,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        self.try_add(rhs)
            .expect("ring mismatch in residue addition")
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        self.try_sub(rhs)
            .expect("ring mismatch in residue subtraction")
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        self.try_mul(rhs)
            .expect("ring mismatch in residue multiplication")
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        self.with(self.ring.sub_raw(0, self.value))
    }
}

pub fn mul(a: Residue, b: Residue) -> Result<Residue> {
    a.try_mul(b)
}

pub fn inv(a: Residue) -> Result<Residue> {
    a.inv()
}

/// Batch inversion over one block: `out[i] = values[i]^-1`, using one call to
/// `invert` and three multiplications per element.
pub(crate) fn batch_invert_block(
    values: &[u64],
    out: &mut [u64],
    one: u64,
    mul: impl Fn(u64, u64) -> u64,
    invert: impl FnOnce(u64) -> Result<u64>,
) -> Result<()> {
    debug_assert_eq!(values.len(), out.len());
    if values.is_empty() {
        return Ok(());
    }
    // out[i] holds the prefix product values[0..i] (exclusive).
    let mut acc = one;
    for (o, &v) in out.iter_mut().zip(values) {
        *o = acc;
        acc = mul(acc, v);
    }
    let mut inv_acc = invert(acc)?;
    for (o, &v) in out.iter_mut().zip(values).rev() {
        *o = mul(inv_acc, *o);
        inv_acc = mul(inv_acc, v);
    }
    Ok(())
}

/// `[1^-1, 2^-1, ..., n^-1]` in `ring`, by batch inversion in blocks of
/// [`BATCH_BLOCK`].
pub fn batch_inverses(n: u64, ring: ResidueRing) -> Result<Vec<Residue>> {
    if n >= ring.p {
        return Err(Error::BadRange { n, p: ring.p });
    }
    let mut result = Vec::with_capacity(n as usize);
    let mut values = Vec::with_capacity(BATCH_BLOCK.min(n as usize));
    let mut out = vec![0u64; BATCH_BLOCK.min(n as usize)];
    let mut start = 1u64;
    while start <= n {
        let end = (start + BATCH_BLOCK as u64 - 1).min(n);
        values.clear();
        values.extend(start..=end);
        let out = &mut out[..values.len()];
        batch_invert_block(
            &values,
            out,
            1 % ring.m,
            |a, b| ring.mul_raw(a, b),
            |a| ring.inv_raw(a),
        )?;
        result.extend(out.iter().map(|&v| ring.elem(v)));
        start = end + 1;
    }
    Ok(result)
}

/// The residue of `num / den`; `den` must be coprime to `p`.
pub fn rational_residue(num: i128, den: i128, ring: ResidueRing) -> Result<Residue> {
    let d = ring.elem_signed(den);
    let d_inv = d.inv().map_err(|_| Error::NotInvertible {
        value: d.value,
        modulus: ring.m,
    })?;
    Ok(ring.elem_signed(num) * d_inv)
}

/// Montgomery arithmetic modulo an odd `m < 2^63`, used by the hot loops.
/// Values are stored as `x * 2^64 mod m`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Montgomery {
    m: u64,
    /// `-m^-1 mod 2^64`
    neg_inv: u64,
    /// `2^128 mod m`
    r2: u64,
    /// `2^64 mod m`
    one: u64,
    /// `m * 2^64`, the bound kept by [`Montgomery::mul_acc`].
    wide_m: u128,
}

impl Montgomery {
    pub(crate) fn new(m: u64) -> Self {
        assert!(
            m % 2 == 1 && m < MODULUS_LIMIT,
            "Montgomery needs odd m < 2^63"
        );
        // Newton iteration for m^-1 mod 2^64.
        let mut inv = m;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m.wrapping_mul(inv)));
        }
        let one = ((1u128 << 64) % m as u128) as u64;
        let r2 = ((one as u128 * one as u128) % m as u128) as u64;
        Self {
            m,
            neg_inv: inv.wrapping_neg(),
            r2,
            one,
            wide_m: (m as u128) << 64,
        }
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let u = (t as u64).wrapping_mul(self.neg_inv);
        let s = ((t + u as u128 * self.m as u128) >> 64) as u64;
        self.reduce_once(s)
    }

    /// Maps `[0, 2m)` onto `[0, m)` without a data-dependent branch.
    #[inline(always)]
    fn reduce_once(&self, s: u64) -> u64 {
        let mask = ((s >= self.m) as u64).wrapping_neg();
        s - (self.m & mask)
    }

    #[inline(always)]
    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline(always)]
    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        self.reduce_once(a + b)
    }

    #[inline(always)]
    pub(crate) fn sub(&self, a: u64, b: u64) -> u64 {
        let mask = ((a < b) as u64).wrapping_neg();
        a.wrapping_sub(b).wrapping_add(self.m & mask)
    }

    /// `acc += a * b` without reduction. `acc` stays below `m * 2^64`, a
    /// multiple of `m`, so [`Montgomery::settle`] recovers the reduced sum.
    #[inline(always)]
    pub(crate) fn mul_acc(&self, acc: &mut u128, a: u64, b: u64) {
        let t = *acc + a as u128 * b as u128;
        let mask = ((t >= self.wide_m) as u128).wrapping_neg();
        *acc = t - (self.wide_m & mask);
    }

    /// Montgomery-form value of an accumulator filled by [`Montgomery::mul_acc`].
    pub(crate) fn settle(&self, acc: u128) -> u64 {
        self.redc(acc)
    }

    pub(crate) fn one(&self) -> u64 {
        self.one
    }

    pub(crate) fn encode(&self, x: u64) -> u64 {
        self.mul(x % self.m, self.r2)
    }

    pub(crate) fn decode(&self, x: u64) -> u64 {
        self.redc(x as u128)
    }

    pub(crate) fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut base = base;
        let mut acc = self.one;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of a Montgomery-form value, returned in Montgomery form.
    pub(crate) fn inv(&self, x: u64) -> Result<u64> {
        let plain = self.decode(x);
        let inv = inverse_mod(plain, self.m).ok_or(Error::NotInvertible {
            value: plain,
            modulus: self.m,
        })?;
        Ok(self.encode(inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, e: u32) -> ResidueRing {
        make_ring(p, e).unwrap()
    }

    #[test]
    fn make_ring_examples() {
        assert_eq!(ring(5, 2).modulus(), 25);
        assert_eq!(ring(7, 1).modulus(), 7);
        assert_eq!(make_ring(4, 2), Err(Error::CompositeModulusBase(4)));
        assert_eq!(make_ring(7, 3), Err(Error::BadExponent(3)));
        assert_eq!(make_ring(7, 0), Err(Error::BadExponent(0)));
        // 3037000507 is the smallest prime whose square exceeds 2^63.
        assert!(is_prime(3_037_000_507));
        assert!(matches!(
            make_ring(3_037_000_507, 2),
            Err(Error::Overflow { .. })
        ));
        assert!(make_ring((1 << 31) - 1, 2).is_ok());
    }

    #[test]
    fn primality_against_trial_division() {
        let trial = |n: u64| {
            n >= 2
                && (2..)
                    .take_while(|d| d * d <= n)
                    .all(|d| !n.is_multiple_of(d))
        };
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        // Strong pseudoprimes to several small bases.
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(1_000_003));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn mul_examples() {
        let r25 = ring(5, 2);
        assert_eq!((r25.elem(7) * r25.elem(8)).value(), 6);
        let r49 = ring(7, 2);
        assert_eq!((r49.elem(15) * r49.elem(36)).value(), 1);
        for x in 0..49 {
            assert_eq!((r49.one() * r49.elem(x)).value(), x);
        }
        let r7 = ring(7, 1);
        assert_eq!(
            mul(r49.one(), r7.one()),
            Err(Error::RingMismatch { left: 49, right: 7 })
        );
    }

    #[test]
    fn inv_examples() {
        let r25 = ring(5, 2);
        assert_eq!(inv(r25.one()).unwrap().value(), 1);
        assert_eq!(inv(r25.elem(2)).unwrap().value(), 13);
        assert_eq!(
            inv(r25.elem(5)),
            Err(Error::NotInvertible {
                value: 5,
                modulus: 25
            })
        );
        assert!(inv(r25.zero()).is_err());
    }

    #[test]
    fn batch_inverse_examples() {
        let r7 = ring(7, 1);
        let got: Vec<u64> = batch_inverses(6, r7)
            .unwrap()
            .iter()
            .map(|r| r.value())
            .collect();
        assert_eq!(got, vec![1, 4, 5, 2, 3, 6]);
        assert_eq!(batch_inverses(1, ring(11, 2)).unwrap()[0].value(), 1);
        assert_eq!(batch_inverses(7, r7), Err(Error::BadRange { n: 7, p: 7 }));
    }

    #[test]
    fn batch_inverses_cross_block_boundaries() {
        let r = ring(10_007, 2);
        let n = 10_006;
        let batch = batch_inverses(n, r).unwrap();
        for (k, x) in (1..=n).zip(&batch) {
            assert_eq!(*x, r.elem(k).inv().unwrap());
        }
    }

    #[test]
    fn rational_residue_examples() {
        let r49 = ring(7, 2);
        assert_eq!(rational_residue(1, 1, r49).unwrap().value(), 1);
        assert_eq!(rational_residue(4, 5, r49).unwrap().value(), 40);
        assert_eq!(rational_residue(-9, 10, r49).unwrap().value(), 4);
        assert!(matches!(
            rational_residue(1, 14, r49),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn montgomery_matches_plain() {
        for &p in &[7u64, 10_007, 1_000_003, (1 << 31) - 1] {
            let r = ring(p, 2);
            let mont = Montgomery::new(r.modulus());
            let m = r.modulus();
            let xs = [0, 1, 2, m / 3, m - 1, m / 2 + 7];
            for &a in &xs {
                assert_eq!(mont.decode(mont.encode(a)), a % m);
                for &b in &xs {
                    let got = mont.decode(mont.mul(mont.encode(a), mont.encode(b)));
                    assert_eq!(got, r.mul_raw(a % m, b % m));
                }
            }
            let mut acc = 0u128;
            let mut plain = 0u64;
            for (i, &a) in xs.iter().enumerate() {
                for &b in &xs[i..] {
                    mont.mul_acc(&mut acc, mont.encode(a), mont.encode(b));
                    plain = r.add_raw(plain, r.mul_raw(a % m, b % m));
                }
            }
            assert_eq!(mont.decode(mont.settle(acc)), plain);
            let x = mont.encode(12345);
            assert_eq!(mont.decode(mont.mul(x, mont.inv(x).unwrap())), 1);
        }
    }

    fn small_prime() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![
            2u64,
            3,
            5,
            7,
            11,
            101,
            65_537,
            1_000_003,
            2_147_483_647,
        ])
    }

    proptest! {
        #[test]
        fn ring_axioms(p in small_prime(), e in 1u32..=2, a: u64, b: u64, c: u64) {
            let r = ring(p, e);
            let (a, b, c) = (r.elem(a), r.elem(b), r.elem(c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + r.zero(), a);
            prop_assert_eq!(a * r.one(), a);
            prop_assert_eq!(a - b + b, a);
            prop_assert_eq!(a + (-a), r.zero());
            prop_assert!(a.value() < r.modulus());
        }

        #[test]
        fn inverse_is_two_sided(p in small_prime(), e in 1u32..=2, a: u64) {
            let r = ring(p, e);
            let a = r.elem(a);
            if !a.value().is_multiple_of(p) {
                prop_assert_eq!(a * a.inv().unwrap(), r.one());
            } else {
                prop_assert!(a.inv().is_err());
            }
        }

        #[test]
        fn batch_matches_single(p in prop::sample::select(vec![3u64, 7, 13, 4099, 8209]), e in 1u32..=2, n_frac in 0.0f64..1.0) {
            let r = ring(p, e);
            let n = 1 + ((p - 2) as f64 * n_frac) as u64;
            let batch = batch_inverses(n, r).unwrap();
            prop_assert_eq!(batch.len() as u64, n);
            for (k, x) in (1..=n).zip(batch) {
                prop_assert_eq!(x, r.elem(k).inv().unwrap());
            }
        }

        #[test]
        fn rational_residue_times_den(p in small_prime(), e in 1u32..=2, num in -1_000_000i128..1_000_000, den in -1_000_000i128..1_000_000) {
            let r = ring(p, e);
            match rational_residue(num, den, r) {
                Ok(x) => prop_assert_eq!(x * r.elem_signed(den), r.elem_signed(num)),
                Err(_) => prop_assert_eq!(den.rem_euclid(p as i128), 0),
            }
        }
    }
}
