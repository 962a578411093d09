//! Deterministic artifact encoding: CSV tables and JSON summaries.
//!
//! Identical config and seed must produce byte-identical artifacts, so
//! nothing here consults the clock, the environment, or absolute paths,
//! and every float is rendered by a fixed rule. Manifests reference
//! sibling files by name only.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Version stamp carried by every JSON summary. Bump on any change to
/// a summary's shape so downstream readers can dispatch.
pub const SCHEMA_VERSION: u32 = 1;

/// Fixed float rendering for CSV cells: 17 significant digits in
/// scientific notation, which round-trips any f64 exactly. Infinities
/// and NaN are spelled out so the sup-in-time exponent and diverged
/// rows stay parseable.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Compact exact rendering for exponent labels in JSON summaries:
/// shortest round-trip decimal, `inf` for the sup norm in time.
pub fn fmt_exponent(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

/// Inverse of [`fmt_exponent`] for command-line pair arguments.
pub fn parse_exponent(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        other => other.parse().ok().filter(|x: &f64| !x.is_nan()),
    }
}

/// Writes a CSV file with a header row and LF line ends. Cells are
/// written verbatim, so callers format floats first; each row must
/// match the header width.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "ragged CSV row");
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Serializes a summary as pretty JSON with a trailing newline. Struct
/// fields keep their declaration order and maps are sorted, so the
/// bytes are a function of the value alone.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::from)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_carry_seventeen_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.5), "-5.0000000000000000e-1");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_float(f64::NAN), "nan");
        // The rendering must round-trip exactly.
        for &x in &[std::f64::consts::PI, 2.0 / 3.0, 1e-300, -3.5e200] {
            let parsed: f64 = fmt_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn exponent_labels_round_trip() {
        for &x in &[2.0, 8.0 / 3.0, 4.0, f64::INFINITY] {
            let s = fmt_exponent(x);
            assert_eq!(parse_exponent(&s), Some(x));
        }
        assert_eq!(fmt_exponent(8.0 / 3.0), "2.6666666666666665");
        assert_eq!(parse_exponent("nan"), None);
        assert_eq!(parse_exponent("sup"), None);
    }

    #[test]
    fn csv_layout_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["time", "mass"],
            &[
                vec![fmt_float(0.0), fmt_float(2.5)],
                vec![fmt_float(0.1), fmt_float(2.5)],
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "time,mass\n\
             0.0000000000000000e0,2.5000000000000000e0\n\
             1.0000000000000001e-1,2.5000000000000000e0\n"
        );
    }

    #[test]
    fn json_bytes_are_reproducible() {
        #[derive(Serialize)]
        struct Summary {
            schema_version: u32,
            value: f64,
            label: Option<String>,
        }
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let summary = Summary { schema_version: SCHEMA_VERSION, value: 0.1 + 0.2, label: None };
        write_json(&a, &summary).unwrap();
        write_json(&b, &summary).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let text = std::fs::read_to_string(&a).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"schema_version\": 1"));
    }
}
