//! CSV emission with atomic writes.

use std::path::Path;

use crate::error::{Error, Result};

/// 17 significant digits; round-trips any finite f64 exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Atomically replace `path` with `bytes` (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp-{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Write a header row and data rows as CSV; the final line is
/// newline-terminated and the write is atomic.
pub fn emit_csv<I, R>(header: &[&str], rows: I, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut buf: Vec<u8> = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header.iter().copied()).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

/// Read back a CSV written by [`emit_csv`]: header plus string records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.to_owned())
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(|s| s.to_owned()).collect());
    }
    Ok((header, rows))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_bit_exactly() {
        let vals = [1.0 / 3.0, std::f64::consts::PI, 6.02214076e23, -1.25e-308];
        for v in vals {
            let s = format_value(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn empty_record_list_yields_header_only_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        emit_csv(&["a", "b"], std::iter::empty::<Vec<String>>(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows =
            vec![vec![format_value(0.1), format_value(-2.5e-7)], vec![format_value(1e300), format_value(0.0)]];
        emit_csv(&["x", "y"], rows.clone(), &path).unwrap();
        let (header, back) = read_csv(&path).unwrap();
        assert_eq!(header, vec!["x", "y"]);
        assert_eq!(back, rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 3);
    }
}
