//! Plot-ready artifacts: CSV tables and JSON summaries.
//!
//! Everything written here is byte-deterministic: numbers use a fixed
//! `{:.12e}` format, rows follow grid order, and JSON summaries are plain
//! serde structs (stable field order, no timestamps).

use crate::error::{Error, Result};
use crate::experiments::Map2D;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

/// Write a CSV with a header row; each row is formatted with `{:.12e}`.
pub fn write_csv<P, R>(path: P, header: &[&str], rows: R) -> Result<()>
where
    P: AsRef<Path>,
    R: IntoIterator,
    R::Item: IntoIterator<Item = f64>,
{
    let mut out = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt).collect();
        if cells.len() != header.len() {
            return Err(Error::Config(format!(
                "CSV row has {} cells for {} columns",
                cells.len(),
                header.len()
            )));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Write a [`Map2D`] in long format: one `(x, y, value)` row per grid point,
/// x-major order.
pub fn write_map_csv<P: AsRef<Path>>(
    path: P,
    map: &Map2D,
    value_label: &str,
) -> Result<()> {
    let header = [map.x_label.as_str(), map.y_label.as_str(), value_label];
    let rows = map.x.iter().enumerate().flat_map(|(i, &x)| {
        map.y
            .iter()
            .zip(&map.values[i])
            .map(move |(&y, &v)| [x, y, v])
    });
    write_csv(path, &header, rows)
}

/// Summary envelope every subcommand emits alongside its data files.
#[derive(Debug, Clone, Serialize)]
pub struct Summary<T: Serialize> {
    pub schema_version: u32,
    pub subcommand: String,
    pub config_hash: String,
    pub seed: u64,
    pub result: T,
}

impl<T: Serialize> Summary<T> {
    pub fn new(subcommand: &str, config_hash: &str, seed: u64, result: T) -> Self {
        Summary {
            schema_version: 1,
            subcommand: subcommand.into(),
            config_hash: config_hash.into(),
            seed,
            result,
        }
    }
}

/// Pretty-printed JSON (stable key order via struct definitions).
pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialize summary: {e}")))?;
    std::fs::write(path.as_ref(), text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir() -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("czsim-report-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn csv_is_byte_deterministic() {
        let d = tmpdir();
        let rows = || (0..4).map(|k| [k as f64, (k * k) as f64 / 3.0]);
        let p1 = d.join("a.csv");
        let p2 = d.join("b.csv");
        write_csv(&p1, &["x", "y"], rows()).unwrap();
        write_csv(&p2, &["x", "y"], rows()).unwrap();
        let a = std::fs::read(&p1).unwrap();
        assert_eq!(a, std::fs::read(&p2).unwrap());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("x,y\n"));
        assert!(text.contains("3.000000000000e0"));
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let d = tmpdir();
        let rows = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(write_csv(d.join("ragged.csv"), &["a", "b"], rows).is_err());
    }

    #[test]
    fn map_csv_long_format() {
        let d = tmpdir();
        let map = Map2D {
            x: vec![0.1, 0.2],
            x_label: "V_b (V)".into(),
            y: vec![1.0, 2.0, 3.0],
            y_label: "tau (ns)".into(),
            values: vec![vec![9.0, 8.0, 7.0], vec![6.0, 5.0, 4.0]],
        };
        let p = d.join("map.csv");
        write_map_csv(&p, &map, "P").unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 7); // header + 6 points
        assert!(text.lines().nth(1).unwrap().starts_with("1.000000000000e-1"));
    }

    #[test]
    fn summary_round_trip() {
        let d = tmpdir();
        let s = Summary::new("zz", "deadbeef", 7, serde_json::json!({"zeta_mhz": 0.1}));
        let p = d.join("summary.json");
        write_json(&p, &s).unwrap();
        let back: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back["schema_version"], 1);
        assert_eq!(back["subcommand"], "zz");
        assert_eq!(back["seed"], 7);
    }
}
