//! CSV matrices, flat `key=value` configuration files and report output.

use std::fs;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a numeric CSV with one header line. Ragged rows, non-numeric
/// cells, NaN/Inf and an empty body are errors carrying the line number.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.len(),
        Ok(_) => return Err(parse_err(1, "missing header line")),
        Err(e) => return Err(parse_err(1, e.to_string())),
    };
    let mut values = Vec::new();
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != width {
            return Err(parse_err(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (k, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(line, format!("column {}: `{cell}` is not a number", k + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column {}: non-finite value `{cell}`", k + 1),
                ));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(2, "no data rows after the header"));
    }
    Ok(DMatrix::from_row_slice(rows, width, &values))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let m = read_matrix(fs::File::open(path)?)?;
    log::info!("loaded {} as {}x{}", path.display(), m.nrows(), m.ncols());
    Ok(m)
}

/// CSV text with header `names` (default `x1..xk`) and 17 significant
/// digits per value, so loading it back reproduces every bit.
pub fn format_matrix(m: &DMatrix<f64>, names: Option<&[String]>) -> Result<String> {
    let header: Vec<String> = match names {
        Some(n) if n.len() == m.ncols() => n.to_vec(),
        Some(n) => {
            return Err(Error::domain(format!(
                "{} column names for {} columns",
                n.len(),
                m.ncols()
            )))
        }
        None => (1..=m.ncols()).map(|j| format!("x{j}")).collect(),
    };
    let mut out = header.join(",");
    out.push('\n');
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn save_matrix(
    path: impl AsRef<Path>,
    m: &DMatrix<f64>,
    names: Option<&[String]>,
) -> Result<()> {
    fs::write(path, format_matrix(m, names)?)?;
    Ok(())
}

/// Parses flat `key=value` lines. Blank lines and lines starting with `#`
/// are skipped; keys keep their file order.
pub fn parse_key_value(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            parse_err(i as u64 + 1, format!("expected key=value, found `{line}`"))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(parse_err(i as u64 + 1, "empty key"));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    parse_key_value(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::fill_std_normal;
    use crate::rng::stream;

    fn parse(s: &str) -> Result<DMatrix<f64>> {
        read_matrix(s.as_bytes())
    }

    #[test]
    fn simple_matrix() {
        let m = parse("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let line = |s: &str| match parse(s) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("a,b\n"), 2);
        assert_eq!(line(""), 1);
        assert_eq!(line("a,b\n1,2\n3\n"), 3);
        assert_eq!(line("a,b\n1,2\n3,x\n"), 3);
        assert_eq!(line("a,b\n1,NaN\n"), 2);
        assert_eq!(line("a,b\n1,2\n3,inf\n"), 3);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let mut m = DMatrix::zeros(1000, 1000);
        fill_std_normal(&mut stream(1), &mut m);
        m[(0, 0)] = 1e-300;
        m[(0, 1)] = -123456789.123456789;
        m[(0, 2)] = 0.0;
        let text = format_matrix(&m, None).unwrap();
        let back = parse(&text).unwrap();
        assert!(m
            .iter()
            .zip(back.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(format_matrix(&back, None).unwrap(), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DMatrix::from_row_slice(2, 3, &[1.5, -2.0, 3.25, 0.1, 0.2, 0.3]);
        let names: Vec<String> = ["u", "v", "w"].iter().map(|s| s.to_string()).collect();
        save_matrix(&path, &m, Some(&names)).unwrap();
        assert!(fs::read_to_string(&path).unwrap().starts_with("u,v,w\n"));
        assert_eq!(load_matrix(&path).unwrap(), m);
        assert!(matches!(
            load_matrix(dir.path().join("missing.csv")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn key_value() {
        let kv = parse_key_value("# comment\nalpha = 0.01\n\nseed=7\n").unwrap();
        assert_eq!(
            kv,
            vec![("alpha".into(), "0.01".into()), ("seed".into(), "7".into())]
        );
        assert!(matches!(
            parse_key_value("a=1\nbroken\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
