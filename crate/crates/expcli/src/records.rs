//! `records.csv`: one row per `(n, replica, observable)`.
//!
//! UTF-8, LF line endings, floats in `{:.16e}` (17 significant digits, which
//! round-trips every `f64`). `seed_hi`/`seed_lo` are the upper and lower 32
//! bits of the experiment seed.

use std::io::Write;
use std::path::Path;

use crate::config::Model;
use crate::error::{CliError, Result};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const HEADER: &str = "model,n,replica,observable,value,wall_ms,seed_hi,seed_lo";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub model: Model,
    pub n: u64,
    pub replica: u64,
    pub observable: String,
    pub value: f64,
    pub wall_ms: f64,
    pub seed: u64,
}

impl SummaryRecord {
    pub fn seed_hi(&self) -> u32 {
        (self.seed >> 32) as u32
    }

    pub fn seed_lo(&self) -> u32 {
        self.seed as u32
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.16e},{:.16e},{},{}",
            self.model,
            self.n,
            self.replica,
            self.observable,
            self.value,
            self.wall_ms,
            self.seed_hi(),
            self.seed_lo()
        )
    }

    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(format!("expected 8 fields, found {}", f.len()));
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| format!("field {i}: `{}` is not a number", f[i]));
        let int = |i: usize| f[i].parse::<u64>().map_err(|_| format!("field {i}: `{}` is not an integer", f[i]));
        let half = |i: usize| f[i].parse::<u32>().map_err(|_| format!("field {i}: `{}` is not a 32-bit integer", f[i]));
        Ok(Self {
            model: Model::parse(f[0]).ok_or_else(|| format!("unknown model `{}`", f[0]))?,
            n: int(1)?,
            replica: int(2)?,
            observable: f[3].to_string(),
            value: num(4)?,
            wall_ms: num(5)?,
            seed: (u64::from(half(6)?) << 32) | u64::from(half(7)?),
        })
    }
}

pub fn write_records(out: &mut impl Write, records: &[SummaryRecord]) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<SummaryRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(HEADER) => {}
        other => {
            return Err(CliError::invalid(format!(
                "{}: header {:?} does not match schema version {CSV_SCHEMA_VERSION}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            SummaryRecord::parse_line(l)
                .map_err(|e| CliError::invalid(format!("{} line {}: {e}", path.display(), i + 2)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let r = SummaryRecord {
            model: Model::LatticeSlowbond,
            n: 1000,
            replica: 3,
            observable: "T".into(),
            value: 0.1 + 0.2,
            wall_ms: 0.0,
            seed: 0xdead_beef_0000_0001,
        };
        let line = r.to_csv_line();
        assert_eq!(
            line,
            "lattice_slowbond,1000,3,T,3.0000000000000004e-1,0.0000000000000000e0,3735928559,1"
        );
        assert_eq!(SummaryRecord::parse_line(&line).unwrap(), r);
    }

    #[test]
    fn malformed_lines() {
        assert!(SummaryRecord::parse_line("ulam,1,2").is_err());
        assert!(SummaryRecord::parse_line("nope,1,2,L,1,0,0,0").is_err());
        assert!(SummaryRecord::parse_line("ulam,1,2,L,x,0,0,0").is_err());
    }
}
