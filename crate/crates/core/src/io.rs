//! CSV with round-trippable numbers, and a reader for numeric tables.

use std::io::Write;

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header line and one comma-separated line per row.
pub fn write_csv<W: Write, R: IntoIterator<Item = Vec<f64>>>(
    mut w: W,
    header: &[&str],
    rows: R,
) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(num).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// A parsed numeric CSV: header names and rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Parses a CSV whose first line is a header and whose remaining lines are
/// all numeric.
pub fn read_csv(text: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse("empty CSV".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {line}: {e} in {s:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 5e-324, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], vec![vec![1.0, 2.5], vec![-3.0, 1e-7]]).unwrap();
        let t = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.column(1), vec![2.5, 1e-7]);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_csv("").is_err());
        assert!(read_csv("x,y\n").is_err());
        assert!(read_csv("x,y\n1,2,3\n").is_err());
        assert!(read_csv("x,y\n1,abc\n").is_err());
    }
}
