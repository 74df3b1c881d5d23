//! Tabular output in CSV or JSON, written atomically.
//!
//! CSV files start with `# key: value` metadata lines followed by a header
//! row. Numbers use 17 significant digits so that they parse back to the
//! same double. JSON files hold `{"metadata": {...}, "columns": [...],
//! "rows": [[...]]}` where non-finite numbers appear as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub struct TableError(pub String);

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for TableError {}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_number(s: &str) -> Result<f64, TableError> {
    s.trim()
        .parse()
        .map_err(|_| TableError(format!("cannot parse '{s}' as a number")))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Cell {
    Number(f64),
    Special(String),
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    metadata: BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String, TableError> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {}\n", v.replace('\n', " ")));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| TableError(e.to_string());
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_number(v))).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| TableError(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| TableError(e.to_string()))?);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut metadata = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            match body.split_once(": ") {
                Some((k, v)) => metadata.push((k.to_string(), v.to_string())),
                None => metadata.push((body.trim_end_matches(':').to_string(), String::new())),
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let err = |e: csv::Error| TableError(e.to_string());
        let columns = r.headers().map_err(err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(err)?;
            rows.push(rec.iter().map(parse_number).collect::<Result<Vec<f64>, _>>()?);
        }
        Ok(Self { metadata, columns, rows })
    }

    pub fn to_json(&self) -> Result<String, TableError> {
        let doc = JsonTable {
            metadata: self.metadata.iter().cloned().collect(),
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|&v| if v.is_finite() { Cell::Number(v) } else { Cell::Special(format_number(v)) })
                        .collect()
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| TableError(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let doc: JsonTable = serde_json::from_str(text).map_err(|e| TableError(e.to_string()))?;
        let mut rows = Vec::with_capacity(doc.rows.len());
        for r in doc.rows {
            if r.len() != doc.columns.len() {
                return Err(TableError("row length differs from column count".into()));
            }
            rows.push(
                r.into_iter()
                    .map(|c| match c {
                        Cell::Number(v) => Ok(v),
                        Cell::Special(s) => match s.as_str() {
                            "inf" | "-inf" | "nan" => parse_number(&s),
                            _ => Err(TableError(format!("unexpected string cell '{s}'"))),
                        },
                    })
                    .collect::<Result<Vec<f64>, _>>()?,
            );
        }
        Ok(Self {
            metadata: doc.metadata.into_iter().collect(),
            columns: doc.columns,
            rows,
        })
    }

    pub fn render(&self, format: Format) -> Result<String, TableError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn parse(text: &str, format: Format) -> Result<Self, TableError> {
        match format {
            Format::Csv => Self::from_csv(text),
            Format::Json => Self::from_json(text),
        }
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "y"]);
        t.meta("model", "atoms=1,3 probs=0.5,0.5");
        t.meta("version", "0.1.0");
        t.push(vec![0.1, 1.0 / 3.0]);
        t.push(vec![-2.5e-300, f64::INFINITY]);
        t.push(vec![f64::NEG_INFINITY, f64::NAN]);
        t
    }

    fn same(a: &Table, b: &Table) -> bool {
        a.columns == b.columns
            && a.rows.len() == b.rows.len()
            && a.rows.iter().zip(&b.rows).all(|(r, s)| {
                r.iter().zip(s).all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
            })
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let text = t.to_csv().unwrap();
        assert!(text.starts_with("# model: atoms=1,3 probs=0.5,0.5\n# version: 0.1.0\nx,y\n"));
        let back = Table::from_csv(&text).unwrap();
        assert!(same(&t, &back));
        assert_eq!(back.metadata, t.metadata);
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let text = t.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rows"][1][1], "inf");
        assert_eq!(v["columns"][0], "x");
        assert!(same(&t, &Table::from_json(&text).unwrap()));
        assert!(Table::from_json(r#"{"metadata":{},"columns":["a"],"rows":[["x"]]}"#).is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/out.csv"), "c").is_err());
    }
}
