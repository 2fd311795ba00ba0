//! Text formats: fixed-precision floats, point lists, grid specs and the CSV
//! tables read and written by the CLI.

use std::fs;
use std::path::Path;

use impulsive_core::conjugacy::TableEntry;
use impulsive_core::StatePoint;

use crate::error::CliError;

/// `printf("%.12e")`: twelve mantissa digits, signed exponent of at least two
/// digits.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn number(field: &str, what: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::usage(format!("{what}: `{field}` is not a number")))
}

/// A point given as comma-separated coordinates, e.g. `0.25,0.7`.
pub fn parse_point(text: &str, dimension: usize, what: &str) -> Result<StatePoint, CliError> {
    let coords = text
        .split(',')
        .map(|f| number(f, what))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != dimension {
        return Err(CliError::usage(format!(
            "{what}: expected {dimension} coordinates, got {}",
            coords.len()
        )));
    }
    StatePoint::new(coords).map_err(|e| CliError::usage(format!("{what}: {e}")))
}

fn axis(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![number(v, what)?]),
        [a, b, n] => {
            let (a, b) = (number(a, what)?, number(b, what)?);
            let n: usize = n
                .trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| CliError::usage(format!("{what}: count `{n}` must be a positive integer")))?;
            if n == 1 {
                return Ok(vec![a]);
            }
            let step = (b - a) / (n - 1) as f64;
            Ok((0..n)
                .map(|k| if k == n - 1 { b } else { a + k as f64 * step })
                .collect())
        }
        _ => Err(CliError::usage(format!(
            "{what}: axis `{text}` is neither `v` nor `a:b:n`"
        ))),
    }
}

/// Grid of points from a spec.
///
/// Either `@file.csv` (one point per row, optional header) or one axis per
/// coordinate separated by commas, each axis a constant `v` or `a:b:n` for
/// `n` evenly spaced values from `a` to `b`. Points are ordered with the last
/// coordinate varying fastest.
pub fn parse_grid(spec: &str, dimension: usize, what: &str) -> Result<Vec<StatePoint>, CliError> {
    if let Some(path) = spec.strip_prefix('@') {
        return read_points(Path::new(path), dimension);
    }
    let axes = spec.split(',').map(|a| axis(a, what)).collect::<Result<Vec<_>, _>>()?;
    if axes.len() != dimension {
        return Err(CliError::usage(format!(
            "{what}: expected {dimension} axes, got {}",
            axes.len()
        )));
    }
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for values in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
        .into_iter()
        .map(|c| StatePoint::new(c).map_err(|e| CliError::usage(format!("{what}: {e}"))))
        .collect()
}

/// Time values from a one-axis spec such as `0:5:21` or `0,0.5,2`.
pub fn parse_times(spec: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        out.extend(axis(part, what)?);
    }
    if out.iter().any(|t| *t < 0.0 || !t.is_finite()) {
        return Err(CliError::usage(format!(
            "{what}: times must be finite and non-negative"
        )));
    }
    Ok(out)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn records(path: &Path) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut rows = Vec::new();
    for r in reader(path)?.records() {
        rows.push(r.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?);
    }
    if rows
        .first()
        .is_some_and(|r| r.iter().any(|f| f.parse::<f64>().is_err()))
    {
        rows.remove(0);
    }
    Ok(rows)
}

fn row_values(row: &csv::StringRecord, path: &Path) -> Result<Vec<f64>, CliError> {
    row.iter().map(|f| number(f, &path.display().to_string())).collect()
}

/// Points stored one per row.
pub fn read_points(path: &Path, dimension: usize) -> Result<Vec<StatePoint>, CliError> {
    let rows = records(path)?;
    if rows.is_empty() {
        return Err(CliError::usage(format!("{}: no points", path.display())));
    }
    rows.iter()
        .map(|r| {
            let v = row_values(r, path)?;
            if v.len() != dimension {
                return Err(CliError::usage(format!(
                    "{}: row has {} values, expected {dimension}",
                    path.display(),
                    v.len()
                )));
            }
            StatePoint::new(v).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
        })
        .collect()
}

/// CSV text with the given header and rows of already formatted fields.
pub fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn coord_header(prefix: &str, dimension: usize) -> Vec<String> {
    (1..=dimension).map(|i| format!("{prefix}{i}")).collect()
}

/// Map table `q1..qd, h1..hd, defect`.
pub fn map_table_csv(entries: &[TableEntry]) -> Vec<u8> {
    let (di, dout) = entries.first().map_or((0, 0), |e| (e.q.dim(), e.h.dim()));
    let mut header = coord_header("q", di);
    header.extend(coord_header("h", dout));
    header.push("defect".into());
    csv_text(
        &header,
        entries.iter().map(|e| {
            e.q.coords()
                .iter()
                .chain(e.h.coords())
                .chain([&e.defect])
                .map(|v| fmt_e(*v))
                .collect()
        }),
    )
}

/// Reads a map table written by [`map_table_csv`]. The header decides how
/// many columns belong to `q` and to `h`.
pub fn read_map_table(path: &Path) -> Result<Vec<TableEntry>, CliError> {
    let mut rdr = reader(path)?;
    let mut it = rdr.records();
    let header = it
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty map table", path.display())))?
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let di = header.iter().filter(|h| h.starts_with('q')).count();
    let dout = header.iter().filter(|h| h.starts_with('h')).count();
    let expected = [coord_header("q", di), coord_header("h", dout), vec!["defect".into()]].concat();
    if di == 0 || dout == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::usage(format!(
            "{}: header must be {}",
            path.display(),
            expected.join(",")
        )));
    }
    let mut entries = Vec::new();
    for r in it {
        let r = r.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let v = row_values(&r, path)?;
        if v.len() != di + dout + 1 {
            return Err(CliError::usage(format!("{}: malformed row", path.display())));
        }
        let bad = |e| CliError::usage(format!("{}: {e}", path.display()));
        entries.push(TableEntry {
            q: StatePoint::from_slice(&v[..di]).map_err(bad)?,
            h: StatePoint::from_slice(&v[di..di + dout]).map_err(bad)?,
            defect: v[di + dout],
        });
    }
    if entries.is_empty() {
        return Err(CliError::usage(format!("{}: map table has no rows", path.display())));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_style_exponent() {
        assert_eq!(fmt_e(0.75), "7.500000000000e-01");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e(-1234.5), "-1.234500000000e+03");
        assert_eq!(fmt_e(1e-300), "1.000000000000e-300");
        assert_eq!(fmt_e(f64::INFINITY), "inf");
    }

    #[test]
    fn points_and_axes() {
        let p = parse_point("0.25,-0.7", 2, "x0").unwrap();
        assert_eq!(p.coords(), &[0.25, -0.7]);
        assert!(parse_point("1", 2, "x0").is_err());
        assert!(parse_point("a,b", 2, "x0").is_err());

        let g = parse_grid("0:1:3,5", 2, "grid").unwrap();
        let c: Vec<&[f64]> = g.iter().map(|p| p.coords()).collect();
        assert_eq!(c, vec![&[0.0, 5.0][..], &[0.5, 5.0], &[1.0, 5.0]]);
        assert_eq!(parse_grid("0:1:2,0:1:2", 2, "grid").unwrap().len(), 4);
        assert!(parse_grid("0:1", 1, "grid").is_err());
        assert!(parse_grid("0:1:0", 1, "grid").is_err());
        assert_eq!(parse_times("0:5:21", "times").unwrap()[20], 5.0);
        assert!(parse_times("-1", "times").is_err());
    }

    #[test]
    fn map_table_round_trip() {
        let entries = vec![
            TableEntry {
                q: StatePoint::from_slice(&[0.0, 0.0]).unwrap(),
                h: StatePoint::from_slice(&[1.0, 0.0]).unwrap(),
                defect: 1e-14,
            },
            TableEntry {
                q: StatePoint::from_slice(&[0.5, 0.0]).unwrap(),
                h: StatePoint::from_slice(&[(-0.5f64).exp(), 0.0]).unwrap(),
                defect: 0.0,
            },
        ];
        let bytes = map_table_csv(&entries);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("q1,q2,h1,h2,defect\n0.000000000000e+00,"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        fs::write(&path, bytes).unwrap();
        let back = read_map_table(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[1].h[0] - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn point_files_skip_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        fs::write(&path, "x1,x2\n0.1,0\n0.2,0\n").unwrap();
        let pts = parse_grid(&format!("@{}", path.display()), 2, "grid").unwrap();
        assert_eq!(pts.len(), 2);
        assert!(read_points(&path, 3).is_err());
    }
}
