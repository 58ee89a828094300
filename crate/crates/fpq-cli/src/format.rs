//! Output formatting: floats carry 17 significant digits so files are
//! byte-identical across runs and round-trip exactly.

use std::io::{self, Write};

/// A float with 17 significant digits (scientific notation).
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write one CSV row of pre-rendered cells.
pub fn write_row<W: Write>(w: &mut W, cells: &[String]) -> io::Result<()> {
    writeln!(w, "{}", cells.join(","))
}

/// Write a CSV header row.
pub fn write_header<W: Write>(w: &mut W, names: &[&str]) -> io::Result<()> {
    writeln!(w, "{}", names.join(","))
}
