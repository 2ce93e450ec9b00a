//! Prime enumeration and the ordered parallel scan driver.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::checks::{run_all, CheckResult};
use crate::error::{Error, Result};

/// Primes in `[from, to]` by a sieve of Eratosthenes over `[0, to]`.
pub fn primes_in(from: u64, to: u64) -> Vec<u64> {
    if to < 2 || from > to {
        return Vec::new();
    }
    let n = to as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            for j in (i * i..=n).step_by(i) {
                composite[j] = true;
            }
        }
        i += 1;
    }
    (from.max(2) as usize..=n)
        .filter(|&k| !composite[k])
        .map(|k| k as u64)
        .collect()
}

/// Applies `work` to every item on up to `jobs` threads and hands the
/// results to `sink` in input order, as soon as each prefix is complete.
///
/// If `sink` fails, workers stop picking up new items and the error is
/// returned once they drain.
pub fn ordered_parallel_map<T, R, E>(
    items: &[T],
    jobs: usize,
    work: impl Fn(&T) -> R + Sync,
    mut sink: impl FnMut(usize, R) -> std::result::Result<(), E>,
) -> std::result::Result<(), E>
where
    T: Sync,
    R: Send,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, R)>();

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            let tx = tx.clone();
            let (next, stop, work) = (&next, &stop, &work);
            scope.spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(item) = items.get(i) else { break };
                    if tx.send((i, work(item))).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut emitted = 0usize;
        let mut outcome = Ok(());
        for (i, r) in rx {
            if outcome.is_err() {
                continue;
            }
            pending.insert(i, r);
            while let Some(r) = pending.remove(&emitted) {
                if let Err(e) = sink(emitted, r) {
                    stop.store(true, Ordering::Relaxed);
                    outcome = Err(e);
                    break;
                }
                emitted += 1;
            }
        }
        outcome
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub primes: usize,
    pub checks: usize,
    pub failures: usize,
}

/// Scans the primes in `[from, to]`, delivering each prime's results to
/// `sink` in increasing prime order. The first engine error aborts the scan
/// after every earlier prime has been delivered.
pub fn scan_range<E: From<Error>>(
    from: u64,
    to: u64,
    jobs: usize,
    mut sink: impl FnMut(&[CheckResult]) -> std::result::Result<(), E>,
) -> std::result::Result<ScanSummary, E> {
    if from < 7 || from > to {
        return Err(Error::BadScanRange { from, to }.into());
    }
    let primes = primes_in(from, to);
    let mut summary = ScanSummary::default();
    ordered_parallel_map(
        &primes,
        jobs,
        |&p| run_all(p),
        |_, r: Result<Vec<CheckResult>>| {
            let results = r?;
            summary.primes += 1;
            summary.checks += results.len();
            summary.failures += results.iter().filter(|r| !r.pass).count();
            sink(&results)
        },
    )?;
    Ok(summary)
}
