//! Plain-text output helpers shared by the exporters.

use std::io::Write;

/// Fixed 17-significant-digit scientific format, stable across runs.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header line and rows of numbers as CSV.
pub fn write_csv_rows<W: Write, R: AsRef<[f64]>>(mut out: W, header: &[&str], rows: impl IntoIterator<Item = R>) -> std::io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| fmt17(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
