//! Dataset serialisation: CSV or JSON tables plus a JSON manifest, each
//! written atomically (temporary file in the target directory, then rename).

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use thiserror::Error;

use selfenergy_core::experiment::Dataset;

use crate::config::Format;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SELFENERGY_OUT_DIR";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot encode {what}: {message}")]
    Encode { what: String, message: String },
}

/// `v` with `digits` significant digits in scientific notation; `null` when
/// undefined or non-finite. Negative zero prints as zero.
pub fn format_number(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{:.*e}", digits - 1, x + 0.0),
        _ => "null".to_string(),
    }
}

/// The value a reader of the formatted cell recovers.
fn rounded(v: Option<f64>, digits: usize) -> Value {
    match format_number(v, digits).parse::<f64>() {
        Ok(x) => json!(x),
        Err(_) => Value::Null,
    }
}

/// Header `columns..., error`; one record per row.
pub fn csv_bytes(ds: &Dataset, digits: usize) -> Result<Vec<u8>, OutputError> {
    let encode = |e: csv::Error| OutputError::Encode {
        what: ds.name.clone(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = ds.columns.iter().map(String::as_str).collect();
    header.push("error");
    w.write_record(&header).map_err(encode)?;
    for row in &ds.rows {
        let mut record: Vec<String> = row.values.iter().map(|v| format_number(*v, digits)).collect();
        record.push(row.error.clone().unwrap_or_default());
        w.write_record(&record).map_err(encode)?;
    }
    w.into_inner().map_err(|e| OutputError::Encode {
        what: ds.name.clone(),
        message: e.to_string(),
    })
}

/// `{manifest, columns, rows}`; the last column is the error text or null.
pub fn json_value(ds: &Dataset, digits: usize, manifest: &Value) -> Value {
    let mut columns: Vec<Value> = ds.columns.iter().map(|c| json!(c)).collect();
    columns.push(json!("error"));
    let rows: Vec<Value> = ds
        .rows
        .iter()
        .map(|r| {
            let mut cells: Vec<Value> = r.values.iter().map(|v| rounded(*v, digits)).collect();
            cells.push(r.error.as_ref().map_or(Value::Null, |e| json!(e)));
            Value::Array(cells)
        })
        .collect();
    json!({ "manifest": manifest, "columns": columns, "rows": rows })
}

fn dataset_entry(ds: &Dataset, file: &str, digits: usize) -> Value {
    let parameters: Map<String, Value> = ds
        .parameters
        .iter()
        .map(|(k, v)| (k.clone(), rounded(Some(*v), digits)))
        .collect();
    json!({
        "name": ds.name,
        "file": file,
        "columns": ds.columns,
        "rows": ds.rows.len(),
        "failed_rows": ds.failed_rows(),
        "parameters": parameters,
        "labels": ds.labels,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let io = |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Where and how datasets are written.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    pub digits: usize,
}

impl Output {
    /// Writes every dataset and `<command>.manifest.json`; returns the paths
    /// written, manifest last.
    pub fn write(&self, command: &str, datasets: &[Dataset], run: Value) -> Result<Vec<PathBuf>, OutputError> {
        std::fs::create_dir_all(&self.dir).map_err(|source| OutputError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let files: Vec<String> = datasets.iter().map(|d| format!("{}.{ext}", d.name)).collect();
        let entries: Vec<Value> = datasets
            .iter()
            .zip(&files)
            .map(|(d, f)| dataset_entry(d, f, self.digits))
            .collect();
        let manifest = json!({
            "tool": "selfenergy",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "run": run,
            "datasets": entries,
        });

        let mut written = Vec::new();
        for (ds, file) in datasets.iter().zip(&files) {
            let bytes = match self.format {
                Format::Csv => csv_bytes(ds, self.digits)?,
                Format::Json => pretty(&json_value(ds, self.digits, &manifest), &ds.name)?,
            };
            let path = self.dir.join(file);
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        let path = self.dir.join(format!("{command}.manifest.json"));
        write_atomic(&path, &pretty(&manifest, "manifest")?)?;
        written.push(path);
        Ok(written)
    }
}

fn pretty(v: &Value, what: &str) -> Result<Vec<u8>, OutputError> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| OutputError::Encode {
        what: what.to_string(),
        message: e.to_string(),
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use selfenergy_core::experiment::Row;

    fn sample() -> Dataset {
        let mut ds = Dataset::new("t", &["a", "b"]);
        ds.rows.push(Row {
            values: vec![Some(0.1), Some(-1.0 / 3.0)],
            error: None,
        });
        ds.rows.push(Row {
            values: vec![Some(2.5e-30), None],
            error: Some("midpoint: M undefined, static force vanishes".into()),
        });
        ds.parameters.insert("d".into(), 1e-5);
        ds
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(Some(1.0 / 3.0), 12), "3.33333333333e-1");
        assert_eq!(format_number(None, 12), "null");
        assert_eq!(format_number(Some(f64::NAN), 3), "null");
        assert_eq!(format_number(Some(-2.0), 3), "-2.00e0");
        assert_eq!(format_number(Some(-0.0), 3), "0.00e0");
    }

    #[test]
    fn csv_layout() {
        let s = String::from_utf8(csv_bytes(&sample(), 12).unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "a,b,error");
        assert_eq!(lines[1], "1.00000000000e-1,-3.33333333333e-1,");
        assert_eq!(lines[2], "2.50000000000e-30,null,\"midpoint: M undefined, static force vanishes\"");
    }

    #[test]
    fn csv_round_trips() {
        for digits in [3, 12, 17] {
            let first = csv_bytes(&sample(), digits).unwrap();
            let mut reader = csv::Reader::from_reader(first.as_slice());
            let mut again = Dataset::new("t", &["a", "b"]);
            for rec in reader.records() {
                let rec = rec.unwrap();
                let values = (0..2).map(|i| rec[i].parse::<f64>().ok()).collect();
                let error = Some(rec[2].to_string()).filter(|e| !e.is_empty());
                again.rows.push(Row { values, error });
            }
            assert_eq!(first, csv_bytes(&again, digits).unwrap());
        }
    }

    #[test]
    fn json_layout() {
        let v = json_value(&sample(), 4, &json!({"k": 1}));
        assert_eq!(v["columns"], json!(["a", "b", "error"]));
        assert_eq!(v["rows"][0], json!([0.1, -0.3333, null]));
        assert_eq!(v["rows"][1][1], Value::Null);
        assert_eq!(v["manifest"]["k"], 1);
    }

    #[test]
    fn writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = Output {
            dir: dir.path().join("nested"),
            format: Format::Csv,
            digits: 12,
        };
        let paths = out.write("demo", &[sample()], json!({"seed": 1})).unwrap();
        assert_eq!(paths.len(), 2);
        let m: Value = serde_json::from_slice(&std::fs::read(&paths[1]).unwrap()).unwrap();
        assert_eq!(m["datasets"][0]["file"], "t.csv");
        assert_eq!(m["datasets"][0]["failed_rows"], 1);
        assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(std::fs::read_dir(out.dir).unwrap().count(), 2);
    }
}
