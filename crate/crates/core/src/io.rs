//! File formats: frame JSON, report JSON, CSV exports and JUnit XML.
//!
//! Frame files look like
//! `{"field": "real", "n": 2, "m": 3, "entries": [[...], [...]]}` with one
//! inner array per row. Complex entries are written as `[re, im]`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{FrameError, Result};
use crate::frame::{Frame, ScalarField};
use crate::linalg::{CMatrix, C64};
use crate::measures::AnalysisReport;
use crate::optimize::IterRecord;
use crate::verify::{CheckStatus, VerifyReport};

#[derive(Serialize, Deserialize)]
struct FrameFile {
    field: ScalarField,
    n: usize,
    m: usize,
    entries: Vec<Vec<Value>>,
}

fn parse_err(msg: impl Into<String>) -> FrameError {
    FrameError::Parse(msg.into())
}

fn number(v: &Value, row: usize, col: usize) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| parse_err(format!("entry ({row}, {col}) is not a number")))?;
    if !x.is_finite() {
        return Err(FrameError::NonFinite { row, col });
    }
    Ok(x)
}

/// Serializes a frame as pretty JSON followed by a newline.
pub fn frame_to_json(frame: &Frame) -> String {
    let e = frame.entries();
    let entries = (0..e.nrows())
        .map(|r| {
            (0..e.ncols())
                .map(|c| {
                    let z = e[(r, c)];
                    match frame.field() {
                        ScalarField::Real => Value::from(z.re),
                        ScalarField::Complex => Value::from(vec![z.re, z.im]),
                    }
                })
                .collect()
        })
        .collect();
    let file = FrameFile {
        field: frame.field(),
        n: frame.n_dim(),
        m: frame.n_vecs(),
        entries,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("frame serializes");
    s.push('\n');
    s
}

/// Parses and validates a frame file.
pub fn frame_from_json(text: &str) -> Result<Frame> {
    let file: FrameFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if file.n == 0 || file.m == 0 {
        return Err(FrameError::InvalidShape(format!(
            "frame must be at least 1x1, got {}x{}",
            file.n, file.m
        )));
    }
    if file.entries.len() != file.n {
        return Err(parse_err(format!(
            "expected {} rows, found {}",
            file.n,
            file.entries.len()
        )));
    }
    let mut out = CMatrix::zeros(file.n, file.m);
    for (r, row) in file.entries.iter().enumerate() {
        if row.len() != file.m {
            return Err(parse_err(format!(
                "row {r} has {} entries, expected {}",
                row.len(),
                file.m
            )));
        }
        for (c, v) in row.iter().enumerate() {
            out[(r, c)] = match (file.field, v) {
                (_, Value::Number(_)) => C64::new(number(v, r, c)?, 0.0),
                (ScalarField::Complex, Value::Array(pair)) if pair.len() == 2 => {
                    C64::new(number(&pair[0], r, c)?, number(&pair[1], r, c)?)
                }
                (ScalarField::Real, Value::Array(_)) => {
                    return Err(parse_err(format!("entry ({r}, {c}) is complex in a real frame")))
                }
                _ => return Err(parse_err(format!("entry ({r}, {c}) must be a number or [re, im]"))),
            };
        }
    }
    Frame::new(file.field, out)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| FrameError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).map_err(|e| FrameError::Parse(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| FrameError::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| FrameError::Parse(e.to_string()))
}

/// `measure,k,value,bound_lower,bound_upper` rows; missing values are empty.
pub fn analysis_csv(report: &AnalysisReport) -> Result<String> {
    csv_string(|w| {
        for row in report.flat_rows() {
            w.serialize(row)?;
        }
        Ok(())
    })
}

/// `iter,stage,eps,f_smooth,f_true,grad_norm,step` rows.
pub fn trace_csv(records: &[IterRecord]) -> Result<String> {
    if records.is_empty() {
        return Ok("iter,stage,eps,f_smooth,f_true,grad_norm,step\n".to_string());
    }
    csv_string(|w| {
        for r in records {
            w.serialize(r)?;
        }
        Ok(())
    })
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// JUnit XML with one test suite per check.
pub fn junit_xml(report: &VerifyReport) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let s = &report.summary;
    out.push_str(&format!(
        "<testsuites name=\"framelab-verify\" tests=\"{}\" failures=\"{}\" skipped=\"{}\">\n",
        s.total, s.failed, s.skipped
    ));
    for (name, counts) in &report.per_check {
        out.push_str(&format!(
            "  <testsuite name=\"{}\" tests=\"{}\" failures=\"{}\" skipped=\"{}\">\n",
            xml_escape(name),
            counts.total,
            counts.failed,
            counts.skipped
        ));
        for (i, r) in report.results.iter().enumerate().filter(|(_, r)| &r.name == name) {
            let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
            let case = xml_escape(&format!("{}#{i}{k}", r.name));
            match r.status {
                CheckStatus::Passed => out.push_str(&format!("    <testcase classname=\"{}\" name=\"{case}\"/>\n", xml_escape(name))),
                CheckStatus::Failed => out.push_str(&format!(
                    "    <testcase classname=\"{}\" name=\"{case}\">\n      <failure message=\"residual {:e} exceeds tolerance {:e}\">{}</failure>\n    </testcase>\n",
                    xml_escape(name),
                    r.residual,
                    r.tolerance,
                    xml_escape(&r.context)
                )),
                CheckStatus::Skipped => out.push_str(&format!(
                    "    <testcase classname=\"{}\" name=\"{case}\">\n      <skipped message=\"{}\"/>\n    </testcase>\n",
                    xml_escape(name),
                    xml_escape(&r.context)
                )),
            }
        }
        out.push_str("  </testsuite>\n");
    }
    out.push_str("</testsuites>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{harmonic_frame, mercedes_benz, random_parseval, Seed};
    use crate::frame::SubsetSelector;

    #[test]
    fn frame_round_trip_is_byte_identical() {
        for f in [
            mercedes_benz(),
            random_parseval(5, 3, ScalarField::Complex, Seed(8)).unwrap(),
            harmonic_frame(7, &SubsetSelector::new(7, vec![1, 2, 4]).unwrap()).unwrap(),
        ] {
            let text = frame_to_json(&f);
            let back = frame_from_json(&text).unwrap();
            assert_eq!(back, f);
            assert_eq!(frame_to_json(&back), text);
        }
    }

    #[test]
    fn rejects_bad_files() {
        let bad = [
            r#"{"field":"real","n":1,"m":2,"entries":[[1.0]]}"#,
            r#"{"field":"real","n":2,"m":1,"entries":[[1.0]]}"#,
            r#"{"field":"real","n":1,"m":1,"entries":[[[1.0,0.0]]]}"#,
            r#"{"field":"complex","n":1,"m":1,"entries":[[[1.0]]]}"#,
            r#"{"field":"real","n":1,"m":1,"entries":[["x"]]}"#,
            r#"{"field":"real","n":1,"m":1,"entries":[[1e400]]}"#,
            r#"{"field":"quaternion","n":1,"m":1,"entries":[[1.0]]}"#,
            r#"{"field":"real","n":0,"m":0,"entries":[]}"#,
            "not json",
        ];
        for text in bad {
            assert!(frame_from_json(text).is_err(), "{text}");
        }
        let ok = frame_from_json(r#"{"field":"complex","n":1,"m":2,"entries":[[[0.6,0.8], 1]]}"#).unwrap();
        assert_eq!(ok.entries()[(0, 0)], C64::new(0.6, 0.8));
    }

    #[test]
    fn xml_escaping() {
        assert_eq!(xml_escape("a<b & \"c\">'"), "a&lt;b &amp; &quot;c&quot;&gt;&apos;");
    }

    #[test]
    fn csv_exports() {
        let report = crate::measures::analyze(&mercedes_benz(), &[1, 2]).unwrap();
        let text = analysis_csv(&report).unwrap();
        assert!(text.starts_with("measure,k,value,bound_lower,bound_upper\n"));
        assert!(text.contains("\ntc,,2.0"));
        let rec = IterRecord {
            iter: 1,
            stage: 0,
            eps: 0.01,
            f_smooth: 1.5,
            f_true: 1.6,
            grad_norm: 0.1,
            step: 1.0,
        };
        let t = trace_csv(&[rec]).unwrap();
        assert_eq!(
            t,
            "iter,stage,eps,f_smooth,f_true,grad_norm,step\n1,0,0.01,1.5,1.6,0.1,1.0\n"
        );
    }
}
