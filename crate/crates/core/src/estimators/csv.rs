use super::EstimateRecord;
use std::io::{self, Write};

pub const CSV_HEADER: &str = "estimator,family,d,k,N,nu,rep,seed,value,reference,rel_error";

/// Writes `# `-prefixed preamble lines, the header and one row per record.
pub fn write_records<W: Write>(out: &mut W, preamble: &[String], records: &[EstimateRecord]) -> io::Result<()> {
    for line in preamble {
        for part in line.lines() {
            writeln!(out, "# {part}")?;
        }
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.family,
            r.d,
            opt(r.k),
            r.n,
            opt(r.nu),
            r.rep,
            r.seed,
            r.value,
            opt(r.reference),
            opt(r.rel_error)
        )?;
    }
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
