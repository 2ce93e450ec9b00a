//! `harmonia`: verify harmonic-number congruences modulo p^2.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 bad input,
//! 3 internal error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use harmonia_core::checks::{descriptor, run_check};
use harmonia_core::harmonic::ENGINE_PRIME_LIMIT;
use harmonia_core::oracle::ORACLE_LIMIT;
use harmonia_core::{
    b_target, compare_profiles, compute_profile, exact_profile, is_prime, list_checks, make_ring,
    primes_in, reduce_profile, run_all, run_selected, scan_range, Error, Format, ReportRecord,
    ReportWriter,
};

#[derive(Parser)]
#[command(
    name = "harmonia",
    version,
    about = "Verify harmonic-number congruences modulo p^2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Jsonl,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Table => Format::Table,
            OutputFormat::Jsonl => Format::Jsonl,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks at one prime.
    Verify {
        #[arg(long)]
        prime: u64,
        /// Comma-separated check ids; all checks when omitted.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Run every check at every prime in [from, to].
    Scan {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long, env = "HARMONIA_JOBS")]
        jobs: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: OutputFormat,
    },
    /// Compare the streaming engine with exact rational sums for p <= 199.
    Oracle {
        #[arg(long)]
        max_prime: u64,
    },
    /// Time the full per-prime pipeline.
    Bench {
        #[arg(long)]
        prime: u64,
    },
}

/// How a command ended, mapped onto the exit code contract.
enum Outcome {
    Pass,
    Fail,
    Usage(String),
    Internal(String),
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl From<io::Error> for Outcome {
    fn from(e: io::Error) -> Self {
        Outcome::Internal(format!("i/o error: {e}"))
    }
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        Outcome::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Verify {
            prime,
            checks,
            format,
        } => verify(prime, checks, format.into()),
        Command::Scan {
            from,
            to,
            jobs,
            out,
            format,
        } => scan(from, to, jobs, out, format.into()),
        Command::Oracle { max_prime } => oracle(max_prime),
        Command::Bench { prime } => bench(prime),
    };
    match outcome {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::Fail => ExitCode::from(1),
        Outcome::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Outcome::Internal(msg) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn validate_prime(p: u64, min_prime: u64) -> Result<(), Outcome> {
    if !is_prime(p) {
        return Err(Outcome::Usage(format!("{p} is not prime")));
    }
    if p < min_prime {
        return Err(Outcome::Usage(format!(
            "p = {p} is below the smallest admissible prime {min_prime}"
        )));
    }
    Ok(())
}

fn verify(p: u64, checks: Option<Vec<String>>, format: Format) -> Outcome {
    let ids: Vec<&'static str> = match &checks {
        None => list_checks().iter().map(|d| d.id).collect(),
        Some(names) => {
            let mut ids = Vec::new();
            for name in names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
                match descriptor(name) {
                    Ok(d) => ids.push(d.id),
                    Err(e) => return Outcome::Usage(e.to_string()),
                }
            }
            if ids.is_empty() {
                return Outcome::Usage("no checks selected".into());
            }
            ids
        }
    };
    let floor = ids
        .iter()
        .filter_map(|id| descriptor(id).ok())
        .map(|d| d.min_prime)
        .max()
        .unwrap_or(7);
    if let Err(o) = validate_prime(p, floor) {
        return o;
    }
    let results = match &checks {
        None => run_all(p),
        Some(_) => run_selected(p, &ids),
    };
    let results = match results {
        Ok(r) => r,
        Err(e) => return e.into(),
    };

    let stdout = io::stdout();
    let mut w = ReportWriter::new(format, stdout.lock());
    let written: io::Result<()> = (|| {
        for r in &results {
            w.write(&ReportRecord::from(r))?;
        }
        w.flush()
    })();
    if let Err(e) = written {
        return e.into();
    }
    let passed = results.iter().filter(|r| r.pass).count();
    if format == Format::Table {
        println!("{passed}/{} checks pass at p = {p}", results.len());
    }
    Outcome::from_pass(passed == results.len())
}

fn scan(from: u64, to: u64, jobs: Option<usize>, out: Option<PathBuf>, format: Format) -> Outcome {
    if from < 7 {
        return Outcome::Usage(format!("--from must be at least 7, got {from}"));
    }
    if from > to {
        return Outcome::Usage(format!("empty range: --from {from} > --to {to}"));
    }
    if to >= ENGINE_PRIME_LIMIT {
        return Outcome::Usage(format!("--to must be below {ENGINE_PRIME_LIMIT}"));
    }
    let jobs = jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if jobs == 0 {
        return Outcome::Usage("--jobs must be at least 1".into());
    }
    let sink: Box<dyn Write> = match &out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => return Outcome::Usage(format!("cannot create {}: {e}", path.display())),
        },
        None => Box::new(io::stdout().lock()),
    };
    let mut w = ReportWriter::new(format, BufWriter::new(sink));

    let start = Instant::now();
    let summary = scan_range(from, to, jobs, |results| -> Result<(), Outcome> {
        for r in results {
            w.write(&ReportRecord::from(r))?;
        }
        w.flush()?;
        Ok(())
    });
    let _ = w.flush();
    match summary {
        Ok(s) => {
            eprintln!(
                "scanned {} primes in [{from}, {to}]: {} checks, {} failed, {:.2?} on {jobs} jobs",
                s.primes,
                s.checks,
                s.failures,
                start.elapsed()
            );
            Outcome::from_pass(s.failures == 0)
        }
        Err(o) => o,
    }
}

fn oracle(max_prime: u64) -> Outcome {
    if max_prime < 7 {
        return Outcome::Usage(format!("--max-prime must be at least 7, got {max_prime}"));
    }
    if max_prime > ORACLE_LIMIT - 1 {
        return Outcome::Usage(format!(
            "--max-prime {max_prime} exceeds the exact-oracle bound {}",
            ORACLE_LIMIT - 1
        ));
    }
    let mut mismatches = 0usize;
    let primes = primes_in(7, max_prime);
    for &p in &primes {
        let compared = (|| -> harmonia_core::Result<_> {
            let engine = compute_profile(p)?;
            let exact = reduce_profile(&exact_profile(p - 1)?, make_ring(p, 2)?)?;
            compare_profiles(&engine, &exact)
        })();
        let rows = match compared {
            Ok(rows) => rows,
            Err(e) => return e.into(),
        };
        let equal = rows.iter().filter(|c| c.equal).count();
        println!("p = {p}: {equal}/{} fields equal", rows.len());
        for c in rows.iter().filter(|c| !c.equal) {
            mismatches += 1;
            println!(
                "  mismatch {}: engine {}, oracle {}",
                c.field, c.left, c.right
            );
        }
    }
    println!(
        "oracle: {} primes compared, {mismatches} mismatching fields",
        primes.len()
    );
    Outcome::from_pass(mismatches == 0)
}

/// Peak resident set size in kB, when the platform reports it.
fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

fn bench(p: u64) -> Outcome {
    if let Err(o) = validate_prime(p, 7) {
        return o;
    }
    if p >= ENGINE_PRIME_LIMIT {
        return Outcome::Usage(format!("p must be below {ENGINE_PRIME_LIMIT}"));
    }
    let total = Instant::now();
    let t = Instant::now();
    let profile = match compute_profile(p) {
        Ok(x) => x,
        Err(e) => return e.into(),
    };
    let profile_ns = t.elapsed().as_nanos() as u64;
    let t = Instant::now();
    let b = match b_target(p) {
        Ok(b) => b,
        Err(e) => return e.into(),
    };
    let bernoulli_ns = t.elapsed().as_nanos() as u64;
    let t = Instant::now();
    let results = match list_checks()
        .iter()
        .map(|d| run_check(d.id, &profile, Some(b)))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(r) => r,
        Err(e) => return e.into(),
    };
    let checks_ns = t.elapsed().as_nanos() as u64;
    let total_ns = total.elapsed().as_nanos() as u64;
    let passed = results.iter().filter(|r| r.pass).count();
    let line = serde_json::json!({
        "prime": p,
        "profile_ns": profile_ns,
        "bernoulli_ns": bernoulli_ns,
        "checks_ns": checks_ns,
        "total_ns": total_ns,
        "peak_rss_kb": peak_rss_kb(),
        "checks": results.len(),
        "passed": passed,
    });
    println!("{line}");
    Outcome::from_pass(passed == results.len())
}
