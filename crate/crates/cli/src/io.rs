//! CSV reading and writing for observation matrices and vector arguments.

use std::io::{Read, Write};

use splitel_core::DataMatrix;

use crate::error::{CliError, Result};

/// Reads a numeric CSV. A first record that does not parse as numbers is
/// taken as a header. Every record must have the same number of fields.
pub fn read_matrix<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if line == 0 => {
                width = Some(record.len());
                continue;
            }
            Err(e) => return Err(CliError::Data(format!("line {}: {e}", line + 1))),
        };
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::Data(format!(
                    "line {}: expected {w} fields, found {}",
                    line + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Data(format!(
                "line {}: non-finite value",
                line + 1
            )));
        }
        values.extend(row);
        n += 1;
    }
    let d = width.unwrap_or(0);
    if n == 0 || d == 0 {
        return Err(CliError::Data("no data rows".into()));
    }
    Ok(DataMatrix::new(n, d, values)?)
}

pub fn read_matrix_file(path: &std::path::Path) -> Result<DataMatrix> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_matrix(std::io::BufReader::new(file))
}

/// Writes rows with an `x1,...,xd` header.
pub fn write_matrix<W: Write>(writer: W, data: &DataMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((1..=data.d()).map(|j| format!("x{j}")))?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a vector argument: a comma-separated row of `d` numbers, or the
/// keyword `fill_keyword` (e.g. `zeros`) standing for `fill` repeated `d`
/// times.
pub fn parse_vector(arg: &str, d: usize, fill_keyword: &str, fill: f64) -> Result<Vec<f64>> {
    let arg = arg.trim();
    if arg.eq_ignore_ascii_case(fill_keyword) {
        return Ok(vec![fill; d]);
    }
    let v = parse_list::<f64>(arg)?;
    if v.len() != d {
        return Err(CliError::Data(format!(
            "vector has {} entries, data has {d} columns",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Data("vector has non-finite entries".into()));
    }
    Ok(v)
}

/// Comma-separated list of values.
pub fn parse_list<T: std::str::FromStr>(arg: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Spec(format!("bad list entry {s:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        let a = read_matrix("x1,x2\n1,2\n3,4\n".as_bytes()).unwrap();
        let b = read_matrix("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.n(), a.d()), (2, 2));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = read_matrix("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CliError::Data(_)));
        assert!(read_matrix("a,b\n1,2,3\n4,5,6\n".as_bytes()).is_err());
    }

    #[test]
    fn garbage_after_first_line_rejected() {
        assert!(read_matrix("1,2\nfoo,4\n".as_bytes()).is_err());
        assert!(read_matrix("1,nan\n2,3\n".as_bytes()).is_err());
        assert!(read_matrix("".as_bytes()).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let data = DataMatrix::from_rows(&[[0.1, -2.5e-300], [1.0 / 3.0, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &data).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn vectors() {
        assert_eq!(
            parse_vector("zeros", 3, "zeros", 0.0).unwrap(),
            vec![0.0; 3]
        );
        assert_eq!(parse_vector("ones", 2, "ones", 1.0).unwrap(), vec![1.0; 2]);
        assert_eq!(
            parse_vector("1, 2.5", 2, "ones", 1.0).unwrap(),
            vec![1.0, 2.5]
        );
        assert!(parse_vector("1,2", 3, "zeros", 0.0).is_err());
    }
}
