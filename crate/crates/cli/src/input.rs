//! Reading terminal measurements from CSV.

use std::path::Path;

use kinwave::{BoundaryField, SpaceGrid};
use ndarray::Array1;

use crate::error::{CliError, Result};

/// Relative tolerance when matching the `x` column against grid nodes.
const NODE_TOL: f64 = 1e-9;

/// Reads `(x, value)` rows onto `grid`. The columns are looked up by header
/// name; files without `x`/`value` headers use the first two columns.
pub fn read_measurement(path: &Path, grid: SpaceGrid) -> Result<BoundaryField> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_measurement(&text, path, grid)
}

pub fn parse_measurement(text: &str, path: &Path, grid: SpaceGrid) -> Result<BoundaryField> {
    let bad = |message: String| CliError::Data {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str, fallback: usize| headers.iter().position(|h| h == name).unwrap_or(fallback);
    let (xc, vc) = (column("x", 0), column("value", 1));

    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| bad(format!("row {row}: {e}")))?;
        let field = |c: usize, name: &str| -> Result<f64> {
            let s = record
                .get(c)
                .ok_or_else(|| bad(format!("row {row}: missing {name} column")))?;
            let v: f64 = s
                .parse()
                .map_err(|_| bad(format!("row {row}: cannot parse {name} {s:?}")))?;
            if !v.is_finite() {
                return Err(bad(format!("row {row}: non-finite {name}")));
            }
            Ok(v)
        };
        xs.push(field(xc, "x")?);
        values.push(field(vc, "value")?);
    }
    if values.is_empty() {
        return Err(bad("no data rows".into()));
    }
    if values.len() != grid.nodes() {
        return Err(bad(format!(
            "expected {} rows for {} cells, found {}",
            grid.nodes(),
            grid.cells(),
            values.len()
        )));
    }
    for (i, &x) in xs.iter().enumerate() {
        if (x - grid.x(i)).abs() > NODE_TOL * grid.length() {
            return Err(bad(format!(
                "row {}: x = {x} does not match grid node {}",
                i + 1,
                grid.x(i)
            )));
        }
    }
    BoundaryField::new(grid, Array1::from(values)).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpaceGrid {
        SpaceGrid::new(1.0, 4).unwrap()
    }

    fn message(text: &str) -> String {
        parse_measurement(text, Path::new("m.csv"), grid())
            .unwrap_err()
            .to_string()
    }

    #[test]
    fn reads_named_columns_in_any_order() {
        let text = "value,x,extra\n1,0,9\n2,0.25,9\n3,0.5,9\n4,0.75,9\n5,1,9\n";
        let f = parse_measurement(text, Path::new("m.csv"), grid()).unwrap();
        assert_eq!(f.values().to_vec(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn rejects_malformed_data() {
        assert!(message("x,value\n").contains("no data rows"));
        assert!(message("x,value\n0,1\n0.25,NaN\n").contains("row 2"));
        let short = message("x,value\n0,1\n0.25,1\n");
        assert!(short.contains('5') && short.contains('2'), "{short}");
        assert!(message("x,value\n0,1\n0.3,1\n0.5,1\n0.75,1\n1,1\n").contains("row 2"));
    }
}
