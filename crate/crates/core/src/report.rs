//! Machine-readable check reports: JSON lines and CSV.
//!
//! Integers above 2^53 are written as decimal strings so that readers
//! backed by IEEE doubles stay exact; both forms parse back.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::checks::CheckResult;

pub const CSV_HEADER: &str = "prime,check,modulus,lhs,rhs,residual,pass,elapsed_ns";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    #[serde(with = "safe_int")]
    pub prime: u64,
    pub check: String,
    #[serde(with = "safe_int")]
    pub modulus: u64,
    #[serde(with = "safe_int")]
    pub lhs: u64,
    #[serde(with = "safe_int")]
    pub rhs: u64,
    #[serde(with = "safe_int")]
    pub residual: u64,
    pub pass: bool,
    #[serde(with = "safe_int")]
    pub elapsed_ns: u64,
}

impl From<&CheckResult> for ReportRecord {
    fn from(r: &CheckResult) -> Self {
        Self {
            prime: r.prime,
            check: r.id.to_string(),
            modulus: r.modulus,
            lhs: r.lhs.value(),
            rhs: r.rhs.value(),
            residual: r.residual.value(),
            pass: r.pass,
            elapsed_ns: r.elapsed_ns,
        }
    }
}

mod safe_int {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    const EXACT_LIMIT: u64 = 1 << 53;

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        if *v > EXACT_LIMIT {
            s.serialize_str(&v.to_string())
        } else {
            s.serialize_u64(*v)
        }
    }

    struct IntOrString;

    impl Visitor<'_> for IntOrString {
        type Value = u64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an unsigned integer or a decimal string")
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
            u64::try_from(v).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
            v.parse().map_err(E::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        d.deserialize_any(IntOrString)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Jsonl,
    Csv,
}

/// Streams records in one of the report formats.
pub struct ReportWriter<W: Write> {
    format: Format,
    out: W,
    wrote_header: bool,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(format: Format, out: W) -> Self {
        Self {
            format,
            out,
            wrote_header: false,
        }
    }

    pub fn write(&mut self, record: &ReportRecord) -> io::Result<()> {
        match self.format {
            Format::Jsonl => {
                serde_json::to_writer(&mut self.out, record)?;
                writeln!(self.out)
            }
            Format::Csv => {
                if !self.wrote_header {
                    writeln!(self.out, "{CSV_HEADER}")?;
                    self.wrote_header = true;
                }
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .from_writer(&mut self.out);
                w.serialize(record).map_err(io::Error::other)?;
                w.flush()
            }
            Format::Table => {
                if !self.wrote_header {
                    writeln!(
                        self.out,
                        "{:>10}  {:<16}  {:>14}  {:>14}  {:>14}  {:>14}  {:<4}",
                        "prime", "check", "modulus", "lhs", "rhs", "residual", "pass"
                    )?;
                    self.wrote_header = true;
                }
                writeln!(
                    self.out,
                    "{:>10}  {:<16}  {:>14}  {:>14}  {:>14}  {:>14}  {:<4}",
                    record.prime,
                    record.check,
                    record.modulus,
                    record.lhs,
                    record.rhs,
                    record.residual,
                    if record.pass { "ok" } else { "FAIL" }
                )
            }
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Parses a JSON-lines report.
pub fn parse_jsonl(text: &str) -> serde_json::Result<Vec<ReportRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Parses a CSV report with the standard header.
pub fn parse_csv(text: &str) -> csv::Result<Vec<ReportRecord>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
