//! The congruence registry.
//!
//! Each check compares two residues computed from a [`HarmonicProfile`] and,
//! where needed, the residue `b = B_{p-5} mod p`. Right-hand sides of the
//! form `c * p * B_{p-5}` are formed as `c * (p mod p^2) * lift(b)`, which does
//! not depend on the lift because `p (b + t p) = p b (mod p^2)`.

use std::time::Instant;

use crate::bernoulli::b_target;
use crate::error::{Error, Result};
use crate::harmonic::{compute_profile, compute_profile_from, HarmonicProfile};
use crate::ring::{make_ring, rational_residue, Residue, ResidueRing};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckDescriptor {
    /// Stable name used on the command line and in reports.
    pub id: &'static str,
    /// Registry position, 1-based.
    pub number: u8,
    pub description: &'static str,
    pub modulus_exponent: u32,
    pub min_prime: u64,
    /// The formula the check restates.
    pub citation: &'static str,
    pub uses_bernoulli: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub id: &'static str,
    pub prime: u64,
    pub modulus: u64,
    pub lhs: Residue,
    pub rhs: Residue,
    pub residual: Residue,
    pub pass: bool,
    pub elapsed_ns: u64,
}

impl CheckResult {
    /// Equality on everything except timing.
    pub fn same_outcome(&self, other: &CheckResult) -> bool {
        CheckResult {
            elapsed_ns: 0,
            ..*self
        } == CheckResult {
            elapsed_ns: 0,
            ..*other
        }
    }
}

macro_rules! check {
    ($n:expr, $id:expr, $e:expr, $min:expr, $b:expr, $desc:expr, $cite:expr) => {
        CheckDescriptor {
            id: $id,
            number: $n,
            description: $desc,
            modulus_exponent: $e,
            min_prime: $min,
            citation: $cite,
            uses_bernoulli: $b,
        }
    };
}

#[rustfmt::skip]
const REGISTRY: [CheckDescriptor; 20] = [
    check!(1, "wolstenholme_h1", 2, 5, false,
        "H(1) = 0 (mod p^2)",
        r"H(1):=\sum_{k=1}^{p-1}1/k\equiv 0\,(\bmod{\,p^2})"),
    check!(2, "reflection_eq6", 2, 5, false,
        "1/(j+1) + ... + 1/(p-1) = -H_j (mod p^2) for every j in 1..p-2",
        r"\frac{1}{j+1}+\frac{1}{j+2}+\cdots +\frac{1}{p-1}\equiv -\left(1+\frac{1}{2}+\cdots +\frac{1}{j}\right)"),
    check!(3, "h2_mod_p", 1, 7, false,
        "H(2) = 0 (mod p)",
        r"H(2)\equiv 0\,(\bmod{\,p})"),
    check!(4, "eq7_chain", 2, 7, false,
        "H(1,2,1) = -S1 + H(1,3) + H(4) (mod p^2)",
        r"H(1,2,1)\equiv-\sum_{j=1}^{p-1}\frac{H_j^2}{j^2}+H(1,3)+H(4)"),
    check!(5, "eq8", 2, 7, false,
        "H(1,2,1) + H(3,1) = -S1 (mod p^2); sum limit read as p-1 (printed as n in the original statement)",
        r"H(1,2,1)+H(3,1)\equiv -\sum_{j=1}^{n}\frac{H_j^2}{j^2}"),
    check!(6, "eq9", 2, 7, false,
        "H(1,2,1) + H(3,1) = -2 H(2,1,1) - H(2,2) (mod p^2)",
        r"H(1,2,1)+H(3,1)\equiv -2H(2,1,1)-H(2,2)"),
    check!(7, "eq10", 2, 7, true,
        "H(2,1,1) = (3/5) p B_(p-5) (mod p^2)",
        r"H(2,1,1)\equiv \frac{3}{5}pB_{p-5}"),
    check!(8, "eq11", 2, 7, true,
        "H(2,2) = -(2/5) p B_(p-5) (mod p^2)",
        r"H(2,2)\equiv -\frac{2}{5}pB_{p-5}"),
    check!(9, "eq12", 2, 7, true,
        "H(1,2,1) + H(3,1) = -(4/5) p B_(p-5) (mod p^2)",
        r"H(1,2,1)+H(3,1)\equiv -\frac{4}{5}pB_{p-5}"),
    check!(10, "shuffle_13_mod", 2, 7, false,
        "H(1) H(3) = H(1,3) + H(3,1) + H(4) (mod p^2)",
        r"H(1)H(3)=H(1,3)+H(3,1)+H(4)"),
    check!(11, "shuffle_121_mod", 2, 7, false,
        "H(1) H(2,1) = 2 H(2,1,1) + H(1,2,1) + H(3,1) + H(2,2) (mod p^2)",
        r"H(1)H(2,1)=2H(2,1,1)+H(1,2,1)+H(3,1)+H(2,2)"),
    check!(12, "eq13", 2, 7, false,
        "4 sum H_(k-1)^3/k + 6 S1 - 8 sum H_(k-1)/k^3 - 5 H(4) = H_(p-1)^4 = 0 (mod p^2)",
        r"4\sum\frac{H_{k-1}^3}{k}+6\sum\frac{H_k^2}{k^2}-8\sum\frac{H_{k-1}}{k^3}-5\sum\frac{1}{k^4}=H_{p-1}^4\equiv 0\pmod{p^2}"),
    check!(13, "eq14_residue", 2, 7, false,
        "sum H_(k-1)^3/k = S2 - 3 S1 + 3 sum H_(k-1)/k^3 + 2 H(4) (exact, as residues)",
        r"\sum_{k=1}^{p-1}\frac{H_{k-1}^3}{k}=\sum_{k=1}^{p-1}\frac{H_k^3}{k}-3\sum\frac{H_k^2}{k^2}+3\sum\frac{H_{k-1}}{k^3}+2\sum\frac{1}{k^4}"),
    check!(14, "eq15", 2, 7, false,
        "4 S2 - 6 S1 + 4 sum H_(k-1)/k^3 + 3 H(4) = 0 (mod p^2)",
        r"4\sum\frac{H_k^3}{k}-6\sum\frac{H_k^2}{k^2}+4\sum\frac{H_{k-1}}{k^3}+3\sum\frac{1}{k^4}\equiv 0\pmod{p^2}"),
    check!(15, "eq16", 2, 7, true,
        "H(1,3) = -(9/10) p B_(p-5) (mod p^2)",
        r"H(1,3)\equiv -\frac{9}{10}pB_{p-5}"),
    check!(16, "eq17", 2, 7, true,
        "H(4) = -2 H(2,2) = (4/5) p B_(p-5) (mod p^2), both links",
        r"H(4)\equiv -2H(2,2)\equiv \frac{4}{5}pB_{p-5}"),
    check!(17, "main_s1", 2, 7, true,
        "sum H_k^2/k^2 = (4/5) p B_(p-5) (mod p^2)",
        r"\sum_{k=1}^{p-1}\frac{H_k^2}{k^2}\equiv\frac{4}{5}pB_{p-5}\pmod{p^2}"),
    check!(18, "main_s2", 2, 7, true,
        "sum H_k^3/k = (3/2) p B_(p-5) (mod p^2)",
        r"\sum_{k=1}^{p-1}\frac{H_k^3}{k}\equiv\frac{3}{2}pB_{p-5}\pmod{p^2}"),
    check!(19, "main_s3", 2, 7, true,
        "sum H_k/k^3 = -(1/10) p B_(p-5) (mod p^2)",
        r"\sum_{k=1}^{p-1}\frac{H_k}{k^3}\equiv -\frac{1}{10}pB_{p-5}\pmod{p^2}"),
    check!(20, "con1_mod_p", 1, 7, false,
        "sum H_k^2/k^2 = 0 (mod p)",
        r"\sum_{k=1}^{p-1}\frac{H_k^2}{k^2}\equiv 0\pmod{p}"),
];

pub fn list_checks() -> &'static [CheckDescriptor] {
    &REGISTRY
}

pub fn descriptor(id: &str) -> Result<&'static CheckDescriptor> {
    REGISTRY
        .iter()
        .find(|d| d.id == id)
        .ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

/// `(num/den) * p * lift(b) mod p^2`. `b` may be any integer lift of
/// `B_{p-5} mod p`.
pub fn p_times_b(num: i128, den: i128, b_lift: u64, ring: ResidueRing) -> Result<Residue> {
    let coef = rational_residue(num, den, ring)?;
    Ok(coef * ring.elem(ring.p()) * ring.elem(b_lift))
}

/// Evaluates the two sides of a check. Compound checks return the first
/// failing link, or their outermost link when all links hold.
fn sides(d: &CheckDescriptor, f: &HarmonicProfile, b: Option<u64>) -> Result<(Residue, Residue)> {
    let ring = f.ring();
    let zero = ring.zero();
    let pb = |num: i128, den: i128| -> Result<Residue> {
        let lift = b.ok_or(Error::MissingBernoulli(d.id))?;
        p_times_b(num, den, lift, ring)
    };
    let mod_p = |r: Residue| -> Result<Residue> { r.project(make_ring(f.p, 1)?) };
    let chain = |first: (Residue, Residue), second: (Residue, Residue)| {
        if first.0 != first.1 {
            first
        } else {
            second
        }
    };

    Ok(match d.id {
        "wolstenholme_h1" => (f.p1, zero),
        "reflection_eq6" => (f.reflection.suffix, f.reflection.neg_prefix),
        "h2_mod_p" => (mod_p(f.p2)?, mod_p(zero)?),
        "eq7_chain" => (f.t121, -f.s1 + f.d13 + f.p4),
        "eq8" => (f.t121 + f.d31, -f.s1),
        "eq9" => (f.t121 + f.d31, -f.t211.scale(2) - f.d22),
        "eq10" => (f.t211, pb(3, 5)?),
        "eq11" => (f.d22, pb(-2, 5)?),
        "eq12" => (f.t121 + f.d31, pb(-4, 5)?),
        "shuffle_13_mod" => (f.p1 * f.p3, f.d13 + f.d31 + f.p4),
        "shuffle_121_mod" => (f.p1 * f.d21, f.t211.scale(2) + f.t121 + f.d31 + f.d22),
        "eq13" => {
            let lhs = f.tcube.scale(4) + f.s1.scale(6) - f.u.scale(8) - f.p4.scale(5);
            let h4 = f.h_last.pow(4);
            chain((lhs, h4), (lhs, zero))
        }
        "eq14_residue" => (f.tcube, f.s2 - f.s1.scale(3) + f.u.scale(3) + f.p4.scale(2)),
        "eq15" => (
            f.s2.scale(4) - f.s1.scale(6) + f.u.scale(4) + f.p4.scale(3),
            zero,
        ),
        "eq16" => (f.d13, pb(-9, 10)?),
        "eq17" => {
            let target = pb(4, 5)?;
            let mid = -f.d22.scale(2);
            chain((f.p4, mid), chain((mid, target), (f.p4, target)))
        }
        "main_s1" => (f.s1, pb(4, 5)?),
        "main_s2" => (f.s2, pb(3, 2)?),
        "main_s3" => (f.s3, pb(-1, 10)?),
        "con1_mod_p" => (mod_p(f.s1)?, mod_p(zero)?),
        other => return Err(Error::UnknownCheck(other.to_string())),
    })
}

/// Runs one check. `b` is `B_{p-5} mod p` and is only consulted by checks
/// that reference it.
pub fn run_check(id: &str, profile: &HarmonicProfile, b: Option<Residue>) -> Result<CheckResult> {
    let d = descriptor(id)?;
    run_descriptor(d, profile, b.map(|r| r.value()))
}

/// Like [`run_check`], taking an arbitrary integer lift of `B_{p-5} mod p`.
pub fn run_check_with_lift(
    id: &str,
    profile: &HarmonicProfile,
    b_lift: u64,
) -> Result<CheckResult> {
    run_descriptor(descriptor(id)?, profile, Some(b_lift))
}

fn run_descriptor(
    d: &'static CheckDescriptor,
    profile: &HarmonicProfile,
    b: Option<u64>,
) -> Result<CheckResult> {
    if profile.p < d.min_prime {
        return Err(Error::PrimeTooSmall {
            check: d.id,
            p: profile.p,
            min_prime: d.min_prime,
        });
    }
    let start = Instant::now();
    let (lhs, rhs) = sides(d, profile, b)?;
    let residual = lhs - rhs;
    let elapsed_ns = start.elapsed().as_nanos() as u64;
    Ok(CheckResult {
        id: d.id,
        prime: profile.p,
        modulus: lhs.ring().modulus(),
        lhs,
        rhs,
        residual,
        pass: residual.is_zero(),
        elapsed_ns,
    })
}

/// Runs the checks named in `ids` (registry order is not imposed; results
/// follow `ids`). The profile and `B_{p-5}` are computed once, and `B` only
/// when a selected check needs it.
pub fn run_selected(p: u64, ids: &[&str]) -> Result<Vec<CheckResult>> {
    let selected: Vec<&'static CheckDescriptor> =
        ids.iter().map(|id| descriptor(id)).collect::<Result<_>>()?;
    let floor = selected.iter().map(|d| d.min_prime).max().unwrap_or(7);
    if let Some(d) = selected.iter().find(|d| p < d.min_prime) {
        return Err(Error::PrimeTooSmall {
            check: d.id,
            p,
            min_prime: d.min_prime,
        });
    }
    let profile = compute_profile_from(p, floor)?;
    let b = if selected.iter().any(|d| d.uses_bernoulli) {
        Some(b_target(p)?.value())
    } else {
        None
    };
    selected
        .into_iter()
        .map(|d| run_descriptor(d, &profile, b))
        .collect()
}

/// Computes the profile and `B_{p-5} mod p` once and evaluates all checks in
/// registry order.
pub fn run_all(p: u64) -> Result<Vec<CheckResult>> {
    if p < 7 {
        return Err(Error::PrimeTooSmall {
            check: REGISTRY[2].id,
            p,
            min_prime: 7,
        });
    }
    let profile = compute_profile(p)?;
    let b = b_target(p)?;
    let results = REGISTRY
        .iter()
        .map(|d| run_descriptor(d, &profile, Some(b.value())))
        .collect::<Result<Vec<_>>>()?;
    assert_coherent(&results)?;
    Ok(results)
}

/// eq12 is a linear consequence of eq8, eq9, eq10 and eq11.
fn assert_coherent(results: &[CheckResult]) -> Result<()> {
    let pass = |id: &str| results.iter().find(|r| r.id == id).map(|r| r.pass);
    let premises = ["eq8", "eq9", "eq10", "eq11"];
    if premises.iter().all(|id| pass(id) == Some(true)) && pass("eq12") == Some(false) {
        return Err(Error::Internal(format!(
            "eq12 fails at p = {} although eq8..eq11 pass",
            results.first().map_or(0, |r| r.prime)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn registry_shape() {
        let checks = list_checks();
        assert_eq!(checks.len(), 20);
        let ids: HashSet<_> = checks.iter().map(|d| d.id).collect();
        assert_eq!(ids.len(), 20);
        for (i, d) in checks.iter().enumerate() {
            assert_eq!(d.number as usize, i + 1);
            assert!(!d.citation.is_empty());
            assert!(!d.description.is_empty());
            assert!([5, 7].contains(&d.min_prime));
            assert!([1, 2].contains(&d.modulus_exponent));
            let b_in_formula = d.citation.contains("B_{p-5}");
            assert_eq!(d.uses_bernoulli, b_in_formula, "{}", d.id);
        }
        assert_eq!(checks[0].id, "wolstenholme_h1");
        assert_eq!(checks[19].id, "con1_mod_p");
    }

    #[test]
    fn worked_examples_at_seven() {
        let prof = compute_profile(7).unwrap();
        let b = b_target(7).unwrap();
        let s1 = run_check("main_s1", &prof, Some(b)).unwrap();
        assert_eq!((s1.lhs.value(), s1.rhs.value(), s1.pass), (14, 14, true));
        let s3 = run_check("main_s3", &prof, Some(b)).unwrap();
        assert_eq!((s3.lhs.value(), s3.rhs.value(), s3.pass), (35, 35, true));
        let e17 = run_check("eq17", &prof, Some(b)).unwrap();
        assert_eq!((e17.lhs.value(), e17.rhs.value(), e17.pass), (14, 14, true));
        assert_eq!((-prof.d22.scale(2)).value(), 14);
    }

    #[test]
    fn modulus_follows_descriptor() {
        let results = run_all(11).unwrap();
        for (r, d) in results.iter().zip(list_checks()) {
            assert_eq!(r.id, d.id);
            assert_eq!(r.modulus, 11u64.pow(d.modulus_exponent));
            assert_eq!(r.pass, r.residual.is_zero());
            assert_eq!(r.residual, r.lhs - r.rhs);
        }
    }

    #[test]
    fn all_pass_small_primes() {
        for p in [7u64, 11, 13, 17, 19, 23, 101, 997, 4099, 10_007] {
            let results = run_all(p).unwrap();
            assert_eq!(results.len(), 20);
            for r in &results {
                assert!(r.pass, "{} fails at p = {p}: {} vs {}", r.id, r.lhs, r.rhs);
            }
        }
    }

    #[test]
    fn errors() {
        let prof = compute_profile(7).unwrap();
        assert_eq!(
            run_check("nope", &prof, None),
            Err(Error::UnknownCheck("nope".into()))
        );
        assert_eq!(
            run_check("main_s1", &prof, None),
            Err(Error::MissingBernoulli("main_s1"))
        );
        assert!(run_check("eq9", &prof, None).unwrap().pass);
        assert!(matches!(run_all(5), Err(Error::PrimeTooSmall { .. })));
        let five = compute_profile_from(5, 5).unwrap();
        assert!(matches!(
            run_check("main_s1", &five, None),
            Err(Error::PrimeTooSmall { min_prime: 7, .. })
        ));
        let early = run_selected(5, &["wolstenholme_h1", "reflection_eq6"]).unwrap();
        assert!(early.iter().all(|r| r.pass));
        assert!(matches!(
            run_selected(5, &["wolstenholme_h1", "eq9"]),
            Err(Error::PrimeTooSmall { .. })
        ));
    }

    #[test]
    fn lift_independence() {
        for p in [7u64, 11, 13] {
            let prof = compute_profile(p).unwrap();
            let b = b_target(p).unwrap().value();
            for d in list_checks().iter().filter(|d| d.uses_bernoulli) {
                let low = run_check_with_lift(d.id, &prof, b).unwrap();
                let high = run_check_with_lift(d.id, &prof, b + p).unwrap();
                assert_eq!(low.rhs, high.rhs, "{} at p = {p}", d.id);
            }
        }
    }

    #[test]
    fn compound_checks_report_failing_link() {
        let mut prof = compute_profile(13).unwrap();
        let b = b_target(13).unwrap();
        prof.p4 = prof.p4 + prof.ring().one();
        let r = run_check("eq17", &prof, Some(b)).unwrap();
        assert!(!r.pass);
        assert_eq!(r.lhs, prof.p4);
        assert_eq!(r.rhs, -prof.d22.scale(2));
        assert_eq!(r.residual, r.lhs - r.rhs);

        let mut prof = compute_profile(13).unwrap();
        prof.reflection_ok = false;
        prof.reflection.suffix = prof.reflection.suffix + prof.ring().one();
        assert!(!run_check("reflection_eq6", &prof, None).unwrap().pass);
    }

    #[test]
    fn coherence_triangle_detects_inconsistency() {
        let mut results = run_all(13).unwrap();
        assert!(assert_coherent(&results).is_ok());
        let i = results.iter().position(|r| r.id == "eq12").unwrap();
        results[i].pass = false;
        assert!(matches!(assert_coherent(&results), Err(Error::Internal(_))));
    }

    #[test]
    fn deterministic() {
        let a = run_all(101).unwrap();
        let b = run_all(101).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
    }
}
