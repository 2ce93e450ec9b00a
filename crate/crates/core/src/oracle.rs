//! Exact-rational ground truth for the harmonic engine.
//!
//! Sums are accumulated as integers over the common denominator
//! `L^w`, where `L = lcm(1..N)` and `w` is the weight of the quantity, and
//! reduced to lowest terms once at the end.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::harmonic::{FieldValue, HarmonicProfile, ReflectionWitness};
use crate::ring::{Residue, ResidueRing};

/// Largest upper bound accepted by [`exact_profile`].
pub const ORACLE_LIMIT: u64 = 200;

/// The profile quantities as exact fractions, summed up to `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactProfile {
    pub n: u64,
    pub h_last: BigRational,
    pub p1: BigRational,
    pub p2: BigRational,
    pub p3: BigRational,
    pub p4: BigRational,
    pub d13: BigRational,
    pub d31: BigRational,
    pub d22: BigRational,
    pub d21: BigRational,
    pub t211: BigRational,
    pub t121: BigRational,
    pub s1: BigRational,
    pub s2: BigRational,
    pub s3: BigRational,
    pub tcube: BigRational,
    pub u: BigRational,
    /// `H_j` for `j = 1..=n`.
    pub prefix: Vec<BigRational>,
    /// `1/(j+1) + ... + 1/n` for `j = 1..=n`.
    pub suffix: Vec<BigRational>,
}

/// Evaluates every profile sum exactly by nested loops, `1 <= n <= 200`.
pub fn exact_profile(n: u64) -> Result<ExactProfile> {
    if n > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            n,
            max: ORACLE_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::BadRange { n, p: 1 });
    }
    let lcm = (1..=n).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)));
    // a[k] = L / k, so 1/k^e = a[k]^e / L^e.
    let a: Vec<BigInt> = std::iter::once(BigInt::zero())
        .chain((1..=n).map(|k| &lcm / BigInt::from(k)))
        .collect();
    let pw: Vec<[BigInt; 5]> = a
        .iter()
        .map(|x| {
            let x2 = x * x;
            let x3 = &x2 * x;
            let x4 = &x2 * &x2;
            [BigInt::one(), x.clone(), x2, x3, x4]
        })
        .collect();
    let denom: [BigInt; 5] = {
        let l2 = &lcm * &lcm;
        [
            BigInt::one(),
            lcm.clone(),
            l2.clone(),
            &l2 * &lcm,
            &l2 * &l2,
        ]
    };
    let frac = |num: BigInt, w: usize| BigRational::new(num, denom[w].clone());
    let idx = |k: u64| k as usize;

    // Numerator of H_k over L.
    let harmonic = |k: u64| (1..=k).fold(BigInt::zero(), |acc, i| acc + &a[idx(i)]);
    let h: Vec<BigInt> = (0..=n).map(harmonic).collect();

    let power = |e: usize| {
        let num = (1..=n).fold(BigInt::zero(), |acc, k| acc + &pw[idx(k)][e]);
        frac(num, e)
    };
    let double = |s: usize, t: usize| {
        let mut num = BigInt::zero();
        for j in 1..=n {
            let mut inner = BigInt::zero();
            for i in 1..j {
                inner += &pw[idx(i)][s];
            }
            num += inner * &pw[idx(j)][t];
        }
        frac(num, s + t)
    };
    let triple = |s: usize, t: usize, r: usize| {
        let mut num = BigInt::zero();
        for k in 1..=n {
            let mut middle = BigInt::zero();
            for j in 1..k {
                let mut inner = BigInt::zero();
                for i in 1..j {
                    inner += &pw[idx(i)][s];
                }
                middle += inner * &pw[idx(j)][t];
            }
            num += middle * &pw[idx(k)][r];
        }
        frac(num, s + t + r)
    };
    let weight4 = |f: &dyn Fn(u64) -> BigInt| frac((1..=n).map(f).sum(), 4);

    let prefix = (1..=n).map(|j| frac(h[idx(j)].clone(), 1)).collect();
    let suffix = (1..=n)
        .map(|j| {
            let num = (j + 1..=n).fold(BigInt::zero(), |acc, k| acc + &a[idx(k)]);
            frac(num, 1)
        })
        .collect();

    Ok(ExactProfile {
        n,
        h_last: frac(h[idx(n)].clone(), 1),
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
        s1: weight4(&|k| h[idx(k)].pow(2) * &pw[idx(k)][2]),
        s2: weight4(&|k| h[idx(k)].pow(3) * &pw[idx(k)][1]),
        s3: weight4(&|k| &h[idx(k)] * &pw[idx(k)][3]),
        tcube: weight4(&|k| h[idx(k - 1)].pow(3) * &pw[idx(k)][1]),
        u: weight4(&|k| &h[idx(k - 1)] * &pw[idx(k)][3]),
        prefix,
        suffix,
    })
}

/// Residue of an exact fraction whose denominator is coprime to `p`.
pub fn reduce_rational(x: &BigRational, ring: ResidueRing) -> Result<Residue> {
    let m = BigInt::from(ring.modulus());
    let to_residue = |v: &BigInt| {
        let r = u64::try_from(v.mod_floor(&m)).expect("reduced value fits below the modulus");
        ring.elem(r)
    };
    let den = to_residue(x.denom());
    let den_inv = den.inv().map_err(|_| Error::NotInvertible {
        value: den.value(),
        modulus: ring.modulus(),
    })?;
    Ok(to_residue(x.numer()) * den_inv)
}

/// Reduces every exact field modulo the ring. The reflection fields are
/// evaluated from the exact prefix and suffix sums for `j = 1..=n-1`.
pub fn reduce_profile(x: &ExactProfile, ring: ResidueRing) -> Result<HarmonicProfile> {
    if ring.p() <= x.n {
        return Err(Error::NotInvertible {
            value: ring.p(),
            modulus: ring.modulus(),
        });
    }
    let r = |q: &BigRational| reduce_rational(q, ring);

    let mut ok = true;
    let mut witness = None;
    let mut first = None;
    for j in 1..x.n {
        let suffix = r(&x.suffix[j as usize - 1])?;
        let neg_prefix = -r(&x.prefix[j as usize - 1])?;
        let w = ReflectionWitness {
            j,
            suffix,
            neg_prefix,
        };
        if j == 1 {
            first = Some(w);
        }
        if suffix != neg_prefix {
            ok = false;
            witness.get_or_insert(w);
        }
    }
    let reflection = witness.or(first).unwrap_or(ReflectionWitness {
        j: 1,
        suffix: ring.zero(),
        neg_prefix: ring.zero(),
    });

    Ok(HarmonicProfile {
        p: ring.p(),
        h_last: r(&x.h_last)?,
        p1: r(&x.p1)?,
        p2: r(&x.p2)?,
        p3: r(&x.p3)?,
        p4: r(&x.p4)?,
        d13: r(&x.d13)?,
        d31: r(&x.d31)?,
        d22: r(&x.d22)?,
        d21: r(&x.d21)?,
        t211: r(&x.t211)?,
        t121: r(&x.t121)?,
        s1: r(&x.s1)?,
        s2: r(&x.s2)?,
        s3: r(&x.s3)?,
        tcube: r(&x.tcube)?,
        u: r(&x.u)?,
        reflection_ok: ok,
        reflection,
    })
}

/// One row of a field-wise profile comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldComparison {
    pub field: &'static str,
    pub equal: bool,
    pub left: FieldValue,
    pub right: FieldValue,
}

pub fn compare_profiles(a: &HarmonicProfile, b: &HarmonicProfile) -> Result<Vec<FieldComparison>> {
    if a.p != b.p {
        return Err(Error::PrimeMismatch {
            left: a.p,
            right: b.p,
        });
    }
    Ok(a.fields()
        .into_iter()
        .zip(b.fields())
        .map(|((field, left), (_, right))| FieldComparison {
            field,
            equal: left == right,
            left,
            right,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::compute_profile;
    use crate::ring::make_ring;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_term() {
        let x = exact_profile(1).unwrap();
        assert_eq!(x.s1, q(1, 1));
        assert_eq!(x.p1, q(1, 1));
        for v in [
            &x.d13, &x.d31, &x.d22, &x.d21, &x.t211, &x.t121, &x.tcube, &x.u,
        ] {
            assert!(v.is_zero());
        }
    }

    #[test]
    fn wolstenholme_instance_at_five() {
        let x = exact_profile(4).unwrap();
        assert_eq!(x.p1, q(25, 12));
        let r25 = make_ring(5, 2).unwrap();
        assert_eq!(reduce_rational(&x.p1, r25).unwrap().value(), 0);
    }

    #[test]
    fn theorem_sums_at_six() {
        let x = exact_profile(6).unwrap();
        assert_eq!(x.s1, q(33_469_261, 12_960_000));
        assert_eq!(x.s3, q(17_075_611, 12_960_000));
        let r49 = make_ring(7, 2).unwrap();
        let reduced = reduce_profile(&x, r49).unwrap();
        assert_eq!(reduced.s1.value(), 14);
        assert_eq!(reduced.s3.value(), 35);
    }

    #[test]
    fn bounds() {
        assert!(matches!(exact_profile(201), Err(Error::TooLarge { .. })));
        let x = exact_profile(7).unwrap();
        assert!(matches!(
            reduce_profile(&x, make_ring(7, 2).unwrap()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn compare_examples() {
        let a = compute_profile(7).unwrap();
        assert!(compare_profiles(&a, &a).unwrap().iter().all(|c| c.equal));
        let b = reduce_profile(&exact_profile(6).unwrap(), a.ring()).unwrap();
        assert!(compare_profiles(&a, &b).unwrap().iter().all(|c| c.equal));
        let c = compute_profile(11).unwrap();
        assert_eq!(
            compare_profiles(&a, &c),
            Err(Error::PrimeMismatch { left: 7, right: 11 })
        );
        let mut d = a;
        d.s2 = d.s2 + d.ring().one();
        let diff: Vec<_> = compare_profiles(&a, &d)
            .unwrap()
            .into_iter()
            .filter(|c| !c.equal)
            .map(|c| c.field)
            .collect();
        assert_eq!(diff, vec!["S2"]);
    }

    #[test]
    fn fractions_are_reduced() {
        use num_integer::Integer;
        let x = exact_profile(12).unwrap();
        for v in [&x.s1, &x.s2, &x.t211, &x.p2] {
            assert!(v.numer().gcd(v.denom()).is_one());
            assert!(v.denom() > &BigInt::zero());
        }
    }
}
