//! Deterministic CSV and JSON writers. Every float is written with 17
//! significant digits so files round-trip bit-exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Compact JSON with floats as `{:.16e}`.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn json<T: Serialize, W: Write>(value: &T, mut out: W) -> anyhow::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus one comma-separated line per row.
pub fn csv<W: Write>(header: &[&str], rows: &[Vec<String>], mut out: W) -> anyhow::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
