//! Verification engine for harmonic-number congruences modulo `p^2`.
//!
//! The fast path ([`harmonic::compute_profile`]) evaluates every harmonic
//! quantity in one streaming pass over `Z/p^2 Z`. Two independent routes
//! back it up: literal nested loops in the same ring
//! ([`harmonic::naive_profile`]) and exact rational sums reduced afterwards
//! ([`oracle::exact_profile`]). [`checks`] turns the profile into named
//! congruence checks.

pub mod bernoulli;
pub mod checks;
pub mod error;
pub mod harmonic;
pub mod oracle;
pub mod report;
pub mod ring;
pub mod scan;

pub use bernoulli::{b_target, bernoulli_exact, bernoulli_mod_p};
pub use checks::{list_checks, run_all, run_check, run_selected, CheckDescriptor, CheckResult};
pub use error::{Error, Result};
pub use harmonic::{compute_profile, mhs, naive_profile, Composition, HarmonicProfile};
pub use num_rational::BigRational;
pub use oracle::{compare_profiles, exact_profile, reduce_profile, ExactProfile};
pub use report::{Format, ReportRecord, ReportWriter};
pub use ring::{
    batch_inverses, inv, is_prime, make_ring, mul, rational_residue, Residue, ResidueRing,
};
pub use scan::{primes_in, scan_range, ScanSummary};
