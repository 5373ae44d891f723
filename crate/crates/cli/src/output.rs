//! Result rendering: JSON documents, CSV tables, and plot manifests naming the axes of a table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Which table columns to plot against which.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotManifest {
    pub data: String,
    pub x: String,
    pub y: Vec<String>,
    pub x_scale: String,
    pub y_scale: String,
    pub title: String,
}

pub struct Axes {
    pub x: &'static str,
    pub y: Vec<&'static str>,
    pub log_y: bool,
    pub title: String,
}

pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
    pub axes: Option<Axes>,
}

impl Output {
    pub fn json(json: Value) -> Self {
        Self {
            json,
            table: None,
            axes: None,
        }
    }

    pub fn with_table(mut self, table: Table, axes: Option<Axes>) -> Self {
        self.table = Some(table);
        self.axes = axes;
        self
    }
}

/// Flattens scalar fields of a JSON object into a one-row table; `[re, im]` pairs become
/// `name_re`, `name_im`.
fn scalar_table(v: &Value) -> Table {
    let mut columns = Vec::new();
    let mut row = Vec::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            match x {
                Value::Number(n) => {
                    columns.push(k.clone());
                    row.push(n.as_f64().unwrap_or(f64::NAN));
                }
                Value::Bool(b) => {
                    columns.push(k.clone());
                    row.push(if *b { 1.0 } else { 0.0 });
                }
                Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => {
                    columns.push(format!("{k}_re"));
                    columns.push(format!("{k}_im"));
                    row.extend(a.iter().map(|n| n.as_f64().unwrap_or(f64::NAN)));
                }
                _ => {}
            }
        }
    }
    Table { columns, rows: vec![row] }
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e15)`.
fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn render_csv(t: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&t.columns).map_err(io)?;
    for r in &t.rows {
        w.write_record(r.iter().map(|x| number(*x))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(out: &Output, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => match &out.table {
            Some(t) => render_csv(t),
            None => render_csv(&scalar_table(&out.json)),
        },
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".plot.json");
    output.with_file_name(name)
}

/// Writes the rendered result to `output` (stdout if absent) and, for CSV tables with axes,
/// a manifest next to it.
pub fn emit(out: &Output, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    let text = render(out, format)?;
    let Some(path) = output else {
        print!("{text}");
        return Ok(());
    };
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    if let (Format::Csv, Some(_), Some(axes)) = (format, &out.table, &out.axes) {
        let manifest = PlotManifest {
            data: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            x: axes.x.to_owned(),
            y: axes.y.iter().map(|s| s.to_string()).collect(),
            x_scale: "linear".into(),
            y_scale: if axes.log_y { "log" } else { "linear" }.into(),
            title: axes.title.clone(),
        };
        let mp = manifest_path(path);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&mp, text).map_err(|e| CliError::Io(format!("writing {}: {e}", mp.display())))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_flattening() {
        let v = serde_json::json!({"value": [1.0, 2.0], "n": 3, "ok": true, "name": "x"});
        let t = scalar_table(&v);
        assert_eq!(t.columns, vec!["n", "ok", "value_re", "value_im"]);
        assert_eq!(t.rows, vec![vec![3.0, 1.0, 1.0, 2.0]]);
    }

    #[test]
    fn csv_layout() {
        let t = Table {
            columns: vec!["a".into(), "b".into()],
            rows: vec![vec![1.0, 0.5]],
        };
        assert_eq!(render_csv(&t).unwrap(), "a,b\n1,0.5\n");
    }

    #[test]
    fn manifest_sits_next_to_the_data() {
        assert_eq!(manifest_path(Path::new("/tmp/x.csv")), PathBuf::from("/tmp/x.csv.plot.json"));
    }
}
