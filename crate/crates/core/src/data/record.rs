//! Record CSV: a `# id=<id> fs_hz=<real> label=<0|1|2>` header followed by one
//! line of 12 comma-separated millivolt values per time sample.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ClassLabel, EcgRecord, NUM_LEADS};
use crate::error::{Error, Result};

pub fn parse_record(text: &str) -> Result<EcgRecord> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse("record header", "empty file"))?;
    let header = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::parse("record header", "first line must start with '#'"))?;

    let (mut id, mut fs_hz, mut label) = (None, None, None);
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::parse("record header", format!("malformed token {token:?}")))?;
        match key {
            "id" => id = Some(value.to_string()),
            "fs_hz" => {
                fs_hz = Some(value.parse::<f64>().map_err(|e| {
                    Error::parse("record header", format!("fs_hz {value:?}: {e}"))
                })?)
            }
            "label" => {
                let code = value.parse::<usize>().map_err(|e| {
                    Error::parse("record header", format!("label {value:?}: {e}"))
                })?;
                label = Some(ClassLabel::from_index(code)?);
            }
            _ => {}
        }
    }
    let id = id.ok_or_else(|| Error::parse("record header", "missing id"))?;
    let fs_hz = fs_hz.ok_or_else(|| Error::parse("record header", "missing fs_hz"))?;
    let label = label.ok_or_else(|| Error::parse("record header", "missing label"))?;
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(Error::SamplingRate(fs_hz));
    }

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = [0.0; NUM_LEADS];
        let mut found = 0;
        for field in line.split(',') {
            if found < NUM_LEADS {
                let field = field.trim();
                row[found] = field.parse::<f64>().map_err(|e| {
                    Error::parse(format!("record line {line_no}"), format!("{field:?}: {e}"))
                })?;
            }
            found += 1;
        }
        if found != NUM_LEADS {
            return Err(Error::ColumnCount {
                line: line_no,
                found,
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { line: line_no });
        }
        samples.push(row);
    }
    EcgRecord::new(id, fs_hz, samples, label)
}

pub fn render_record(record: &EcgRecord) -> String {
    let mut out = String::with_capacity(record.samples.len() * NUM_LEADS * 8 + 64);
    let _ = writeln!(
        out,
        "# id={} fs_hz={} label={}",
        record.id,
        record.sampling_rate_hz,
        record.label.index()
    );
    for row in &record.samples {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn load_record(path: impl AsRef<Path>) -> Result<EcgRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_record(&text)
}

pub fn save_record(record: &EcgRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_record(record)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    const TWO_ROWS: &str = "# id=r1 fs_hz=500 label=1\n\
        1,2,3,4,5,6,7,8,9,10,11,12\n\
        -1,-2,-3,-4,-5,-6,-7,-8,-9,-10,-11,-12.5\n";

    #[test]
    fn parses_two_row_record() {
        let r = parse_record(TWO_ROWS).unwrap();
        assert_eq!(r.id, "r1");
        assert_eq!(r.sampling_rate_hz, 500.0);
        assert_eq!(r.label, ClassLabel::Lbbb);
        assert_eq!(r.len(), 2);
        assert_eq!(r.samples[1][11], -12.5);
    }

    #[test]
    fn rejects_eleven_columns() {
        let text = "# id=x fs_hz=500 label=0\n1,2,3,4,5,6,7,8,9,10,11\n1,2,3,4,5,6,7,8,9,10,11\n";
        let err = parse_record(text).unwrap_err();
        assert!(matches!(err, Error::ColumnCount { line: 2, found: 11 }));
        assert!(err.to_string().contains("wrong column count"));
    }

    #[test]
    fn rejects_non_finite_and_bad_rate() {
        let nan = "# id=x fs_hz=500 label=0\n1,2,3,4,5,6,7,8,9,10,11,NaN\n1,2,3,4,5,6,7,8,9,10,11,12\n";
        assert!(matches!(parse_record(nan), Err(Error::NonFinite { line: 2 })));
        let rate = "# id=x fs_hz=-3 label=0\n1,2,3,4,5,6,7,8,9,10,11,12\n1,2,3,4,5,6,7,8,9,10,11,12\n";
        assert!(matches!(parse_record(rate), Err(Error::SamplingRate(_))));
        let zero = rate.replace("-3", "0");
        assert!(matches!(parse_record(&zero), Err(Error::SamplingRate(_))));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_record("").is_err());
        assert!(parse_record("id=x fs_hz=1 label=0\n").is_err());
        assert!(parse_record("# id=x fs_hz=1 label=3\n").is_err());
        assert!(parse_record("# fs_hz=1 label=0\n").is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = Rng::new(3);
        let samples = (0..40)
            .map(|_| std::array::from_fn(|_| rng.normal() * 1e3 + rng.uniform() * 1e-9))
            .collect();
        let rec = EcgRecord::new("rt", 360.0, samples, ClassLabel::Slbbb).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        save_record(&rec, &path).unwrap();
        let back = load_record(&path).unwrap();
        assert_eq!(back.id, rec.id);
        assert_eq!(back.label, rec.label);
        for (a, b) in rec.samples.iter().zip(&back.samples) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
