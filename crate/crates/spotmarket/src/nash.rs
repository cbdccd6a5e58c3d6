//! Payoff-matrix CSV files.
//!
//! The header holds a corner label followed by one label per shipper profile.
//! Each following row starts with a carrier profile label and then holds one
//! `carrier/shipper` payoff pair per column, or `NA` for an unstable pair.
//!
//! ```text
//! carrier\shipper,RS,RN,RA
//! RS,-0.07/0.14,0.10/0.01,NA
//! ```

use std::path::Path;

use spotmarket_core::game::{Cell, NashReport, PayoffMatrix};

use crate::{Error, Result};

fn parse_cell(text: &str) -> Option<std::result::Result<Cell, String>> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("na") || text.eq_ignore_ascii_case("n/a") || text.is_empty() {
        return None;
    }
    let parsed = text.split_once('/').ok_or_else(|| format!("cell `{text}` is not `carrier/shipper`")).and_then(|(c, s)| {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("cell `{text}`: {e}"));
        Ok(Cell {
            carrier: num(c)?,
            shipper: num(s)?,
        })
    });
    Some(parsed)
}

pub fn parse_matrix(text: &str, origin: &Path) -> Result<PayoffMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::format(origin, e))?.clone();
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if columns.is_empty() {
        return Err(Error::format(origin, "header lists no shipper profiles"));
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(origin, e))?;
        if record.len() != columns.len() + 1 {
            return Err(Error::format(
                origin,
                format!("row {} has {} fields, expected {}", line + 1, record.len(), columns.len() + 1),
            ));
        }
        rows.push(record[0].to_string());
        for field in record.iter().skip(1) {
            cells.push(parse_cell(field).transpose().map_err(|m| Error::format(origin, m))?);
        }
    }
    if rows.is_empty() {
        return Err(Error::format(origin, "no carrier rows"));
    }
    Ok(PayoffMatrix::new(rows, columns, cells)?)
}

pub fn load_matrix(path: &Path) -> Result<PayoffMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn report(matrix: &PayoffMatrix) -> String {
    NashReport::new(matrix).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cells_and_gaps() {
        let m = parse_matrix("c\\s,X,Y\nA,1/2,NA\nB,-0.5/3e-1, 4 / 5\n", Path::new("t")).unwrap();
        assert_eq!(m.rows, ["A", "B"]);
        assert_eq!(m.columns, ["X", "Y"]);
        assert_eq!(m.cell(0, 0), Some(Cell { carrier: 1.0, shipper: 2.0 }));
        assert_eq!(m.cell(0, 1), None);
        assert_eq!(m.cell(1, 0), Some(Cell { carrier: -0.5, shipper: 0.3 }));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["c,X\nA,1\n", "c,X\nA,1/x\n", "c,X,Y\nA,1/1\n", "c,X\n"] {
            assert!(parse_matrix(bad, Path::new("t")).is_err(), "{bad:?}");
        }
    }
}
