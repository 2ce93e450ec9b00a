//! Harmonic quantities modulo `p^2`.
//!
//! [`compute_profile`] is a single forward pass over `k = 1..p-1` plus a
//! block-wise backward pass for the reflection congruence. [`naive_profile`]
//! evaluates the same fields by literal nested loops and exists to check it.

use crate::error::{Error, Result};
use crate::ring::{batch_invert_block, is_prime, make_ring, Montgomery, Residue, ResidueRing};

/// Block length of the streaming engine.
pub const ENGINE_BLOCK: usize = 4096;
/// Largest prime accepted by [`compute_profile`].
pub const ENGINE_PRIME_LIMIT: u64 = 1 << 31;
/// Largest prime accepted by [`naive_profile`].
pub const NAIVE_PRIME_LIMIT: u64 = 1000;

/// The index of a multiple harmonic sum, e.g. `(2, 1, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Composition(Vec<u32>);

impl Composition {
    pub const MAX_DEPTH: usize = 3;

    pub fn new(parts: &[u32]) -> Result<Self> {
        if parts.is_empty() || parts.len() > Self::MAX_DEPTH || parts.contains(&0) {
            return Err(Error::Internal(format!(
                "composition {parts:?} must have 1..=3 positive parts"
            )));
        }
        Ok(Self(parts.to_vec()))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Outcome of the reflection congruence
/// `1/(j+1) + ... + 1/(p-1) = -H_j (mod p^2)` over `j = 1..p-2`.
///
/// `j` is the smallest failing index, or 1 when every index holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReflectionWitness {
    pub j: u64,
    pub suffix: Residue,
    pub neg_prefix: Residue,
}

/// Every per-prime quantity the congruence checks consume, as residues
/// modulo `p^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HarmonicProfile {
    pub p: u64,
    /// `H_{p-1}`
    pub h_last: Residue,
    /// `H(n) = sum 1/k^n`
    pub p1: Residue,
    pub p2: Residue,
    pub p3: Residue,
    pub p4: Residue,
    /// `H(m, n) = sum_{i<j} 1/(i^m j^n)`
    pub d13: Residue,
    pub d31: Residue,
    pub d22: Residue,
    pub d21: Residue,
    /// `H(2,1,1)` and `H(1,2,1)`
    pub t211: Residue,
    pub t121: Residue,
    /// `sum H_k^2 / k^2`
    pub s1: Residue,
    /// `sum H_k^3 / k`
    pub s2: Residue,
    /// `sum H_k / k^3`
    pub s3: Residue,
    /// `sum H_{k-1}^3 / k`
    pub tcube: Residue,
    /// `sum H_{k-1} / k^3`
    pub u: Residue,
    pub reflection_ok: bool,
    pub reflection: ReflectionWitness,
}

/// A profile field, for field-wise comparison and reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldValue {
    Residue(u64),
    Flag(bool),
    Index(u64),
}

impl std::fmt::Display for FieldValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldValue::Residue(v) | FieldValue::Index(v) => write!(f, "{v}"),
            FieldValue::Flag(b) => write!(f, "{b}"),
        }
    }
}

impl HarmonicProfile {
    pub fn ring(&self) -> ResidueRing {
        self.h_last.ring()
    }

    /// All fields in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, FieldValue)> {
        use FieldValue::*;
        vec![
            ("h_last", Residue(self.h_last.value())),
            ("P1", Residue(self.p1.value())),
            ("P2", Residue(self.p2.value())),
            ("P3", Residue(self.p3.value())),
            ("P4", Residue(self.p4.value())),
            ("D13", Residue(self.d13.value())),
            ("D31", Residue(self.d31.value())),
            ("D22", Residue(self.d22.value())),
            ("D21", Residue(self.d21.value())),
            ("T211", Residue(self.t211.value())),
            ("T121", Residue(self.t121.value())),
            ("S1", Residue(self.s1.value())),
            ("S2", Residue(self.s2.value())),
            ("S3", Residue(self.s3.value())),
            ("Tcube", Residue(self.tcube.value())),
            ("U", Residue(self.u.value())),
            ("reflection_ok", Flag(self.reflection_ok)),
            ("reflection_j", Index(self.reflection.j)),
            ("reflection_suffix", Residue(self.reflection.suffix.value())),
            (
                "reflection_neg_prefix",
                Residue(self.reflection.neg_prefix.value()),
            ),
        ]
    }
}

/// Validates `p` as an engine prime and returns `Z/p^2 Z`.
pub(crate) fn engine_ring(p: u64, min_prime: u64, max_prime: u64) -> Result<ResidueRing> {
    if p < min_prime || !is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    if p >= max_prime {
        return Err(Error::Overflow { p, e: 2 });
    }
    make_ring(p, 2)
}

/// Reflection bookkeeping shared by both engines: records the smallest
/// failing index when indices arrive in decreasing order.
struct ReflectionScan {
    ok: bool,
    witness: Option<(u64, u64, u64)>,
    first: Option<(u64, u64, u64)>,
}

impl ReflectionScan {
    fn new() -> Self {
        Self {
            ok: true,
            witness: None,
            first: None,
        }
    }

    fn observe(&mut self, j: u64, suffix: u64, neg_prefix: u64) {
        if j == 1 {
            self.first = Some((j, suffix, neg_prefix));
        }
        if suffix != neg_prefix {
            self.ok = false;
            self.witness = Some((j, suffix, neg_prefix));
        }
    }

    fn finish(self, ring: ResidueRing) -> (bool, ReflectionWitness) {
        let (j, s, n) = self.witness.or(self.first).unwrap_or((1, 0, 0));
        (
            self.ok,
            ReflectionWitness {
                j,
                suffix: ring.elem(s),
                neg_prefix: ring.elem(n),
            },
        )
    }
}

/// Fills `out` with Montgomery-form inverses of `start..start+out.len()`.
fn block_inverses(
    mont: &Montgomery,
    start: u64,
    scratch: &mut Vec<u64>,
    out: &mut [u64],
) -> Result<()> {
    scratch.clear();
    let mut k = mont.encode(start);
    for _ in 0..out.len() {
        scratch.push(k);
        k = mont.add(k, mont.one());
    }
    batch_invert_block(
        scratch,
        out,
        mont.one(),
        |a, b| mont.mul(a, b),
        |a| mont.inv(a),
    )
}

/// The streaming O(p) engine, for primes `7 <= p < 2^31`.
pub fn compute_profile(p: u64) -> Result<HarmonicProfile> {
    stream_profile(engine_ring(p, 7, ENGINE_PRIME_LIMIT)?)
}

/// Same as [`compute_profile`] but admits `p = 5`, which the checks with
/// `min_prime = 5` accept.
pub(crate) fn compute_profile_from(p: u64, min_prime: u64) -> Result<HarmonicProfile> {
    stream_profile(engine_ring(p, min_prime, ENGINE_PRIME_LIMIT)?)
}

fn stream_profile(ring: ResidueRing) -> Result<HarmonicProfile> {
    let p = ring.p();
    let mont = Montgomery::new(ring.modulus());
    let last = p - 1;
    let n_blocks = (last as usize).div_ceil(ENGINE_BLOCK);
    let block_len = ENGINE_BLOCK.min(last as usize);

    let mut scratch = Vec::with_capacity(block_len);
    let mut invs = vec![0u64; block_len];
    // H_{start-1} for every block start, reused by the backward pass.
    let mut checkpoints = Vec::with_capacity(n_blocks);

    // Depth-1 prefixes over indices < k: H_{k-1}, sum 1/i^2, sum 1/i^3.
    let (mut h, mut pre2, mut pre3, mut p4) = (0u64, 0u64, 0u64, 0u64);
    // Depth-2 prefixes over pairs below k that depth 3 consumes.
    let (mut d21, mut d12) = (0u64, 0u64);
    let mut h_cube = 0u64;
    // Sums only read at the end, kept as unreduced wide accumulators.
    let (mut d13, mut d31, mut d22) = (0u128, 0u128, 0u128);
    let (mut t211, mut t121) = (0u128, 0u128);
    let (mut s1, mut s2, mut s3, mut tcube) = (0u128, 0u128, 0u128, 0u128);

    let mut start = 1u64;
    while start <= last {
        let len = ((last - start + 1) as usize).min(ENGINE_BLOCK);
        let invs = &mut invs[..len];
        block_inverses(&mont, start, &mut scratch, invs)?;
        checkpoints.push(h);
        for &i1 in invs.iter() {
            let i2 = mont.mul(i1, i1);
            let i3 = mont.mul(i2, i1);
            let i4 = mont.mul(i2, i2);

            // Depth 3 first: they read depth-2 sums over pairs below k.
            mont.mul_acc(&mut t211, i1, d21);
            mont.mul_acc(&mut t121, i1, d12);

            // Depth 2: read depth-1 sums over indices below k. The same
            // product H_{k-1}/k^3 also gives sum H_{k-1}/k^3.
            mont.mul_acc(&mut d13, i3, h);
            mont.mul_acc(&mut d31, i1, pre3);
            mont.mul_acc(&mut d22, i2, pre2);
            d21 = mont.add(d21, mont.mul(i1, pre2));
            d12 = mont.add(d12, mont.mul(i2, h));
            mont.mul_acc(&mut tcube, h_cube, i1);

            // Depth 1: now include k itself.
            h = mont.add(h, i1);
            pre2 = mont.add(pre2, i2);
            pre3 = mont.add(pre3, i3);
            p4 = mont.add(p4, i4);

            let h_sq = mont.mul(h, h);
            h_cube = mont.mul(h_sq, h);
            mont.mul_acc(&mut s1, h_sq, i2);
            mont.mul_acc(&mut s2, h_cube, i1);
            mont.mul_acc(&mut s3, h, i3);
        }
        start += len as u64;
    }
    let u = d13;

    // Backward pass: suffix sums 1/(j+1) + ... + 1/(p-1) against -H_j, with
    // H_j rebuilt forward inside each block from its checkpoint.
    let mut prefix = vec![0u64; block_len];
    let mut suffix = 0u64;
    let mut reflection = ReflectionScan::new();
    for (b, &h_before) in checkpoints.iter().enumerate().rev() {
        let start = 1 + (b * ENGINE_BLOCK) as u64;
        let len = ((last - start + 1) as usize).min(ENGINE_BLOCK);
        let invs = &mut invs[..len];
        block_inverses(&mont, start, &mut scratch, invs)?;
        let mut acc = h_before;
        for (slot, &i1) in prefix.iter_mut().zip(invs.iter()) {
            acc = mont.add(acc, i1);
            *slot = acc;
        }
        let expected_next = checkpoints.get(b + 1).copied().unwrap_or(h);
        if acc != expected_next {
            return Err(Error::Internal(format!(
                "prefix H_k diverged between passes at block {b} for p = {p}"
            )));
        }
        for idx in (0..len).rev() {
            let j = start + idx as u64;
            if j <= p - 2 {
                let neg_prefix = mont.sub(0, prefix[idx]);
                // Montgomery form is canonical, so equality carries over.
                if j == 1 || suffix != neg_prefix {
                    reflection.observe(j, mont.decode(suffix), mont.decode(neg_prefix));
                }
            }
            suffix = mont.add(suffix, invs[idx]);
        }
    }
    // suffix now holds H(1) accumulated from the top; it must match the
    // forward prefix sum exactly.
    if suffix != h {
        return Err(Error::Internal(format!(
            "forward and backward H(1) disagree for p = {p}"
        )));
    }

    let r = |x: u64| ring.elem(mont.decode(x));
    let w = |x: u128| r(mont.settle(x));
    let (reflection_ok, witness) = reflection.finish(ring);
    Ok(HarmonicProfile {
        p,
        h_last: r(h),
        p1: r(h),
        p2: r(pre2),
        p3: r(pre3),
        p4: r(p4),
        d13: w(d13),
        d31: w(d31),
        d22: w(d22),
        d21: r(d21),
        t211: w(t211),
        t121: w(t121),
        s1: w(s1),
        s2: w(s2),
        s3: w(s3),
        tcube: w(tcube),
        u: w(u),
        reflection_ok,
        reflection: witness,
    })
}

/// Brute-force twin of [`compute_profile`] by literal nested loops over
/// the defining sums. Cubic in `p`; limited to `p <= 1000`.
pub fn naive_profile(p: u64) -> Result<HarmonicProfile> {
    if p > NAIVE_PRIME_LIMIT {
        return Err(Error::TooLarge {
            n: p,
            max: NAIVE_PRIME_LIMIT,
        });
    }
    let ring = engine_ring(p, 7, ENGINE_PRIME_LIMIT)?;
    let n = p - 1;
    let inv: Vec<Residue> = std::iter::once(Ok(ring.zero()))
        .chain((1..=n).map(|k| ring.elem(k).inv()))
        .collect::<Result<_>>()?;
    let ipow = |k: u64, e: u32| inv[k as usize].pow(e as u64);
    let harmonic = |k: u64| (1..=k).fold(ring.zero(), |acc, i| acc + inv[i as usize]);

    let power = |e: u32| (1..=n).fold(ring.zero(), |acc, k| acc + ipow(k, e));
    let double = |a: u32, b: u32| {
        let mut acc = ring.zero();
        for i in 1..=n {
            for j in i + 1..=n {
                acc = acc + ipow(i, a) * ipow(j, b);
            }
        }
        acc
    };
    let triple = |a: u32, b: u32, c: u32| {
        let mut acc = ring.zero();
        for i in 1..=n {
            for j in i + 1..=n {
                let outer = ipow(i, a) * ipow(j, b);
                for k in j + 1..=n {
                    acc = acc + outer * ipow(k, c);
                }
            }
        }
        acc
    };
    let weighted = |f: &dyn Fn(u64) -> Residue| (1..=n).fold(ring.zero(), |acc, k| acc + f(k));

    let mut reflection = ReflectionScan::new();
    for j in (1..=p - 2).rev() {
        let suffix = (j + 1..=n).fold(ring.zero(), |acc, k| acc + inv[k as usize]);
        reflection.observe(j, suffix.value(), (-harmonic(j)).value());
    }
    let (reflection_ok, witness) = reflection.finish(ring);

    let h_last = harmonic(n);
    Ok(HarmonicProfile {
        p,
        h_last,
        p1: power(1),
        p2: power(2),
        p3: power(3),
        p4: power(4),
        d13: double(1, 3),
        d31: double(3, 1),
        d22: double(2, 2),
        d21: double(2, 1),
        t211: triple(2, 1, 1),
        t121: triple(1, 2, 1),
        s1: weighted(&|k| harmonic(k).pow(2) * ipow(k, 2)),
        s2: weighted(&|k| harmonic(k).pow(3) * ipow(k, 1)),
        s3: weighted(&|k| harmonic(k) * ipow(k, 3)),
        tcube: weighted(&|k| harmonic(k - 1).pow(3) * ipow(k, 1)),
        u: weighted(&|k| harmonic(k - 1) * ipow(k, 3)),
        reflection_ok,
        reflection: witness,
    })
}

/// The multiple harmonic sum `sum_{1 <= i_1 < ... < i_d <= n} prod 1/i_t^{s_t}`
/// in `ring`, enumerating index tuples directly.
pub fn mhs(c: &Composition, n: u64, ring: ResidueRing) -> Result<Residue> {
    if n >= ring.p() {
        return Err(Error::BadRange { n, p: ring.p() });
    }
    let inv: Vec<Residue> = std::iter::once(Ok(ring.zero()))
        .chain((1..=n).map(|k| ring.elem(k).inv()))
        .collect::<Result<_>>()?;

    fn walk(parts: &[u32], lowest: u64, n: u64, inv: &[Residue], acc: Residue) -> Residue {
        let Some((&s, rest)) = parts.split_first() else {
            return acc;
        };
        let mut total = acc.ring().zero();
        for i in lowest..=n {
            total = total + walk(rest, i + 1, n, inv, acc * inv[i as usize].pow(s as u64));
        }
        total
    }
    Ok(walk(c.parts(), 1, n, &inv, ring.one()))
}
