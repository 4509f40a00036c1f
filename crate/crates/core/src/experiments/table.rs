//! CSV output: header row, comma separated, floats in shortest round-trip
//! form (`0.1`, `1e-7`, `NaN`, `inf`).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A row type with a fixed column schema.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_records<W: Write, R: CsvRecord>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(R::header()).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<R: CsvRecord>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn write_csv_file<R: CsvRecord>(path: &Path, rows: &[R]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_records(std::io::BufWriter::new(std::fs::File::create(path)?), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Row(f64, &'static str);

    impl CsvRecord for Row {
        fn header() -> &'static [&'static str] {
            &["x", "label"]
        }
        fn fields(&self) -> Vec<String> {
            vec![fmt_f64(self.0), self.1.to_string()]
        }
    }

    #[test]
    fn round_trip_floats() {
        for x in [0.1, 1.0, 1e-7, 2.5e-310, 0.040821994520255166, 1e300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn header_and_quoting() {
        let s = to_csv_string(&[Row(0.5, "a"), Row(2.0, "b,c")]).unwrap();
        assert_eq!(s, "x,label\n0.5,a\n2.0,\"b,c\"\n");
    }
}
