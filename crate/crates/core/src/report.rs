//! File output: fixed float formatting and all-or-nothing writes.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::bench::BenchReport;
use crate::error::{Error, Result};
use crate::xeb::{XebEstimate, XEB_CSV_HEADER};

/// 17 significant digits in scientific notation, or `inf`, `-inf`, `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v:.16e}")
    }
}

/// Parses [`fmt_f64`] output (and any other Rust float literal).
pub fn parse_f64(text: &str) -> Option<f64> {
    match text {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => text.parse().ok(),
    }
}

/// Writes to a temporary file next to `path` and renames it into place, so
/// a failed write never leaves a partial file behind.
pub fn write_atomically(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::Builder::new()
        .prefix(".xeb-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    let file = tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    // tempfile creates 0600 files; give outputs ordinary permissions.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let _ = file.set_permissions(fs::Permissions::from_mode(0o644));
    }
    #[cfg(not(unix))]
    drop(file);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub enum ReportRows<'a> {
    Xeb(&'a [XebEstimate]),
    Bench(&'a BenchReport),
}

fn write_json<T: Serialize + ?Sized>(w: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
    w.write_all(b"\n")
}

/// Writes estimates or a bench report as CSV or JSON. Identical input gives
/// identical bytes.
pub fn emit_report(rows: ReportRows<'_>, format: ReportFormat, path: &Path) -> Result<()> {
    match (rows, format) {
        (ReportRows::Xeb(rows), ReportFormat::Csv) => write_atomically(path, |w| {
            writeln!(w, "{XEB_CSV_HEADER}")?;
            for row in rows {
                writeln!(w, "{}", row.csv_row())?;
            }
            Ok(())
        }),
        (ReportRows::Xeb(rows), ReportFormat::Json) => {
            let records: Vec<_> = rows.iter().map(XebEstimate::json_record).collect();
            write_atomically(path, |w| write_json(w, &records))
        }
        (ReportRows::Bench(report), ReportFormat::Json) => {
            write_atomically(path, |w| write_json(w, report))
        }
        (ReportRows::Bench(report), ReportFormat::Csv) => write_atomically(path, |w| {
            writeln!(w, "task,n,d,M,wall_seconds,per_item_seconds")?;
            for t in &report.timings {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    t.task.as_str(),
                    t.n,
                    t.d,
                    t.items,
                    fmt_f64(t.wall_seconds),
                    fmt_f64(t.per_item_seconds)
                )?;
            }
            Ok(())
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_and_exact() {
        assert_eq!(fmt_f64(0.2), "2.0000000000000001e-1");
        assert_eq!(fmt_f64(3.0), "3.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        for v in [0.1, 1.0 / 3.0, 1e-300, 8.98846567431158e307, -2.5e-17, f64::MIN_POSITIVE] {
            assert_eq!(parse_f64(&fmt_f64(v)), Some(v));
        }
        assert_eq!(parse_f64("inf"), Some(f64::INFINITY));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let err = write_atomically(Path::new("/nonexistent-dir/x.csv"), |_| Ok(())).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn failed_body_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let res = write_atomically(&path, |w| {
            w.write_all(b"partial")?;
            Err(io::Error::other("boom"))
        });
        assert!(res.is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
